#include "coda/cli.hpp"

#include "coda/errors.hpp"
#include "coda/evaluation.hpp"
#include "coda/lifetable.hpp"
#include "coda/pipeline.hpp"
#include "coda/rng.hpp"
#include "coda/tuning.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace coda::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------- config --

struct RunConfig {
  // data
  std::string data_path;
  std::string source = "hmd";  // hmd | csv
  bool rebuild_from_qx = true;
  double radix = kDefaultRadix;
  std::optional<std::string> sex;
  // transform
  std::string transform_kind = "alpha";  // alpha | ilr | clr | eda
  bool tune_alpha_requested = false;
  double alpha = 0.0;
  // model
  KRule k_rule = KRule::eigenvalue_ratio();
  ModelRule model_rule = ModelRule::auto_arima;
  // forecast
  int h_max = 10;
  int replicates = 1000;  // B; 0 = point forecasts only
  std::vector<double> gammas = {0.2, 0.05};
  std::uint64_t seed = 1;
  // experiment
  std::vector<std::string> schemes = {"expanding"};
  std::vector<std::string> criteria = {"KLD"};
  std::vector<std::string> methods = {"alpha", "ilr", "clr", "eda", "lee_carter"};
  bool retune_per_origin = false;
  // tuning search
  double grid_step = 0.01;
  double refine_width = 1e-4;
};

void reject_unknown_keys(const json& object, const std::string& section,
                         const std::vector<std::string>& allowed) {
  for (const auto& [key, value] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw config_error("unknown key '" + key + "' in config section '" +
                         section + "'");
    }
  }
}

KRule parse_k_rule(const std::string& text) {
  if (text == "eigenvalue_ratio") return KRule::eigenvalue_ratio();
  if (text.rfind("fixed(", 0) == 0 && text.back() == ')') {
    const int k = static_cast<int>(parse_number(text.substr(6, text.size() - 7)));
    if (k < 1) throw config_error("k_rule fixed(K) needs K >= 1");
    return KRule::fixed(k);
  }
  throw config_error("k_rule must be 'eigenvalue_ratio' or 'fixed(K)', got '" +
                     text + "'");
}

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw config_error("config root must be an object");
  reject_unknown_keys(doc, "(root)",
                      {"data", "transform", "model", "forecast", "experiment",
                       "tuning"});
  RunConfig cfg;

  if (doc.contains("data")) {
    const json& d = doc["data"];
    reject_unknown_keys(d, "data", {"path", "source", "rebuild_from_qx", "radix", "sex"});
    if (d.contains("path")) cfg.data_path = d["path"].get<std::string>();
    if (d.contains("source")) cfg.source = d["source"].get<std::string>();
    if (cfg.source != "hmd" && cfg.source != "csv") {
      throw config_error("data.source must be 'hmd' or 'csv'");
    }
    if (d.contains("rebuild_from_qx")) cfg.rebuild_from_qx = d["rebuild_from_qx"].get<bool>();
    if (d.contains("radix")) cfg.radix = d["radix"].get<double>();
    if (d.contains("sex")) cfg.sex = d["sex"].get<std::string>();
  }

  if (doc.contains("transform")) {
    const json& t = doc["transform"];
    reject_unknown_keys(t, "transform", {"kind", "alpha"});
    if (t.contains("kind")) cfg.transform_kind = t["kind"].get<std::string>();
    if (cfg.transform_kind != "alpha" && cfg.transform_kind != "ilr" &&
        cfg.transform_kind != "clr" && cfg.transform_kind != "eda") {
      throw config_error("transform.kind must be alpha|ilr|clr|eda");
    }
    if (cfg.transform_kind == "alpha") {
      if (!t.contains("alpha")) {
        throw config_error("transform.kind = alpha needs transform.alpha");
      }
      if (t["alpha"].is_string()) {
        if (t["alpha"].get<std::string>() != "tune") {
          throw config_error("transform.alpha must be a number or \"tune\"");
        }
        cfg.tune_alpha_requested = true;
      } else {
        cfg.alpha = t["alpha"].get<double>();
        if (cfg.alpha < 0.0 || cfg.alpha > 1.0) {
          throw config_error("transform.alpha must lie in [0,1]");
        }
      }
    } else if (t.contains("alpha")) {
      throw config_error("transform.alpha only applies to kind = alpha");
    }
  }

  if (doc.contains("model")) {
    const json& m = doc["model"];
    reject_unknown_keys(m, "model", {"k_rule", "model_rule"});
    if (m.contains("k_rule")) cfg.k_rule = parse_k_rule(m["k_rule"].get<std::string>());
    if (m.contains("model_rule")) {
      const std::string rule = m["model_rule"].get<std::string>();
      if (rule == "auto_arima") cfg.model_rule = ModelRule::auto_arima;
      else if (rule == "rwd") cfg.model_rule = ModelRule::rwd;
      else throw config_error("model.model_rule must be auto_arima|rwd");
    }
  }

  if (doc.contains("forecast")) {
    const json& f = doc["forecast"];
    reject_unknown_keys(f, "forecast", {"H", "B", "gammas", "seed"});
    if (f.contains("H")) cfg.h_max = f["H"].get<int>();
    if (cfg.h_max < 1) throw config_error("forecast.H must be >= 1");
    if (f.contains("B")) cfg.replicates = f["B"].get<int>();
    if (cfg.replicates < 0) throw config_error("forecast.B must be >= 0");
    if (f.contains("gammas")) {
      cfg.gammas = f["gammas"].get<std::vector<double>>();
      for (double g : cfg.gammas) {
        if (!(g > 0.0 && g < 1.0)) throw config_error("gammas must lie in (0,1)");
      }
    }
    if (f.contains("seed")) cfg.seed = f["seed"].get<std::uint64_t>();
  }

  if (doc.contains("experiment")) {
    const json& e = doc["experiment"];
    reject_unknown_keys(e, "experiment",
                        {"scheme", "criteria", "methods", "retune_per_origin"});
    if (e.contains("scheme")) {
      const std::string scheme = e["scheme"].get<std::string>();
      if (scheme == "expanding" || scheme == "rolling") cfg.schemes = {scheme};
      else if (scheme == "both") cfg.schemes = {"expanding", "rolling"};
      else throw config_error("experiment.scheme must be expanding|rolling|both");
    }
    if (e.contains("criteria")) cfg.criteria = e["criteria"].get<std::vector<std::string>>();
    if (e.contains("methods")) cfg.methods = e["methods"].get<std::vector<std::string>>();
    if (e.contains("retune_per_origin")) {
      cfg.retune_per_origin = e["retune_per_origin"].get<bool>();
    }
  }

  if (doc.contains("tuning")) {
    const json& t = doc["tuning"];
    reject_unknown_keys(t, "tuning", {"grid_step", "refine_width"});
    if (t.contains("grid_step")) cfg.grid_step = t["grid_step"].get<double>();
    if (t.contains("refine_width")) cfg.refine_width = t["refine_width"].get<double>();
    if (!(cfg.grid_step > 0.0 && cfg.grid_step <= 0.5)) {
      throw config_error("tuning.grid_step must lie in (0, 0.5]");
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw format_error("cannot open config file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw format_error(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

// ------------------------------------------------------------------- io --

void atomic_write(const fs::path& path, const std::string& contents) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw format_error("cannot write " + tmp.string());
    out << contents;
  }
  fs::rename(tmp, path);
}

CompositionSeries load_series(const RunConfig& cfg) {
  if (cfg.data_path.empty()) throw config_error("data.path is required");
  std::ifstream in(cfg.data_path);
  if (!in) throw format_error("cannot open data file: " + cfg.data_path);
  if (cfg.source == "csv") {
    return read_series_csv(in);
  }
  const auto records = parse_hmd_lifetable(in, cfg.sex);
  BuildOptions opts;
  opts.rebuild_from_qx = cfg.rebuild_from_qx;
  opts.radix = cfg.radix;
  return build_series(records, opts);
}

TransformSpec make_spec(const RunConfig& cfg, int dim, double alpha) {
  if (cfg.transform_kind == "alpha") return TransformSpec::make_alpha(alpha, dim);
  if (cfg.transform_kind == "ilr") return TransformSpec::make_ilr(dim);
  if (cfg.transform_kind == "clr") return TransformSpec::make_clr(dim);
  return TransformSpec::make_eda(dim);
}

std::vector<Criterion> parse_criteria(const std::vector<std::string>& names) {
  std::vector<Criterion> out;
  for (const auto& name : names) {
    const auto parsed = Criterion::parse(name);
    if (!parsed) throw config_error("unknown criterion '" + name + "'");
    out.push_back(*parsed);
  }
  if (out.empty()) throw config_error("experiment.criteria is empty");
  return out;
}

std::string svg_fan_chart(const ForecastResult& result,
                          const std::vector<int>& years) {
  const int width = 860, height = 420, ml = 50, mb = 30, mt = 14, mr = 10;
  const int h_max = static_cast<int>(result.point.rows());
  const int dim = static_cast<int>(result.point.cols());
  double y_max = result.point.maxCoeff();
  for (const auto& band : result.intervals) y_max = std::max(y_max, band.upper.maxCoeff());
  if (!(y_max > 0)) y_max = 1.0;
  y_max *= 1.05;

  auto x_at = [&](int age) {
    return ml + (width - ml - mr) * static_cast<double>(age) / (dim - 1);
  };
  auto y_at = [&](double v) { return height - mb - (height - mb - mt) * v / y_max; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << height - mb << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << (width / 2) << "\" y=\"" << height - 8
      << "\" font-size=\"11\" text-anchor=\"middle\">age</text>\n";

  // widest band of the first level, drawn per horizon
  if (!result.intervals.empty()) {
    const auto& band = result.intervals.front();
    for (int h = 0; h < h_max; ++h) {
      svg << "<polygon fill=\"#4a90d9\" fill-opacity=\"0.08\" stroke=\"none\" points=\"";
      for (int a = 0; a < dim; ++a) svg << x_at(a) << ',' << y_at(band.lower(h, a)) << ' ';
      for (int a = dim - 1; a >= 0; --a) svg << x_at(a) << ',' << y_at(band.upper(h, a)) << ' ';
      svg << "\"/>\n";
    }
  }
  for (int h = 0; h < h_max; ++h) {
    const double opacity = 0.35 + 0.65 * (h + 1.0) / h_max;
    svg << "<polyline fill=\"none\" stroke=\"#1f4e8c\" stroke-opacity=\"" << opacity
        << "\" stroke-width=\"1\" points=\"";
    for (int a = 0; a < dim; ++a) svg << x_at(a) << ',' << y_at(result.point(h, a)) << ' ';
    svg << "\"/>\n";
    if (h == h_max - 1 && !years.empty()) {
      svg << "<text x=\"" << width - mr - 4 << "\" y=\"" << mt + 12
          << "\" font-size=\"11\" text-anchor=\"end\">" << years.front() << "-"
          << years.back() << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

json model_metadata(const ForecastResult& result) {
  json models = json::array();
  for (std::size_t i = 0; i < result.score_orders.size(); ++i) {
    const auto& spec = result.score_orders[i];
    json m;
    m["score"] = i + 1;
    if (i < result.score_is_rwd.size() && result.score_is_rwd[i]) {
      m["model"] = "rwd";
    } else {
      m["model"] = "arima";
    }
    m["p"] = spec.p;
    m["d"] = spec.d;
    m["q"] = spec.q;
    m["drift"] = spec.include_drift;
    models.push_back(std::move(m));
  }
  return models;
}

// ------------------------------------------------------------ commands --

int cmd_ingest(const RunConfig& cfg, const fs::path& out_dir) {
  const CompositionSeries series = load_series(cfg);
  std::ostringstream csv;
  write_series_csv(series, csv);
  atomic_write(out_dir / "series.csv", csv.str());

  json summary;
  summary["n"] = series.n();
  summary["D"] = series.dim();
  summary["years"] = {series.years.front(), series.years.back()};
  summary["zero_cells"] = series.zero_cells();
  summary["radix"] = series.radix;
  summary["rebuild_from_qx"] = cfg.rebuild_from_qx;
  summary["renormalized_rows"] = series.any_renormalized;
  atomic_write(out_dir / "ingest_summary.json", summary.dump(2) + "\n");
  std::cout << "ingested " << series.n() << " years x " << series.dim()
            << " ages; zero cells: " << series.zero_cells() << "\n";
  return kExitOk;
}

int cmd_tune(const RunConfig& cfg, const fs::path& out_dir) {
  if (cfg.transform_kind != "alpha") {
    std::cerr << "config contradiction: tune needs transform.kind = alpha\n";
    return kExitConfigContradiction;
  }
  if (!cfg.tune_alpha_requested) {
    std::cerr << "config contradiction: transform.alpha is fixed at "
              << format_number(cfg.alpha) << ", nothing to tune\n";
    return kExitConfigContradiction;
  }
  const CompositionSeries series = load_series(cfg);
  const std::vector<Criterion> criteria = parse_criteria(cfg.criteria);

  TuneOptions opts;
  opts.grid_step = cfg.grid_step;
  opts.refine_width = cfg.refine_width;
  opts.k_rule = cfg.k_rule;
  opts.model_rule = cfg.model_rule;
  const bool needs_boot = std::any_of(criteria.begin(), criteria.end(),
                                      [](const Criterion& c) { return c.needs_intervals(); });
  if (needs_boot) {
    BootstrapOptions boot;
    boot.replicates = cfg.replicates > 0 ? cfg.replicates : 1000;
    boot.gammas = cfg.gammas;
    boot.seed = cfg.seed;
    opts.bootstrap = boot;
  }

  const auto results = tune_alpha_multi(series, cfg.h_max, criteria, opts);

  json doc = json::array();
  for (const auto& result : results) {
    json r;
    r["criterion"] = result.criterion.name();
    r["alpha_star"] = result.alpha_star;
    r["ilr_infeasible"] = result.ilr_infeasible;
    r["evaluations"] = result.profile.size();
    doc.push_back(std::move(r));

    std::ostringstream profile;
    profile << "alpha,error\n";
    auto sorted = result.profile;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [alpha, error] : sorted) {
      profile << format_number(alpha) << ',' << format_number(error) << "\n";
    }
    std::string name = result.criterion.name();
    for (char& c : name) {
      if (c == '(' || c == ')' || c == '.') c = '_';
    }
    atomic_write(out_dir / ("profile_" + name + ".csv"), profile.str());
    std::cout << result.criterion.name() << ": alpha* = "
              << format_number(result.alpha_star) << "\n";
  }
  atomic_write(out_dir / "tune_result.json", doc.dump(2) + "\n");
  return kExitOk;
}

int cmd_forecast(const RunConfig& cfg, const fs::path& out_dir) {
  const CompositionSeries series = load_series(cfg);

  double alpha = cfg.alpha;
  json tuned_note;
  if (cfg.transform_kind == "alpha" && cfg.tune_alpha_requested) {
    TuneOptions opts;
    opts.grid_step = cfg.grid_step;
    opts.refine_width = cfg.refine_width;
    opts.k_rule = cfg.k_rule;
    opts.model_rule = cfg.model_rule;
    const std::vector<Criterion> criteria = parse_criteria(cfg.criteria);
    const TuneResult tuned = tune_alpha(series, cfg.h_max, criteria.front(), opts);
    alpha = tuned.alpha_star;
    tuned_note["criterion"] = tuned.criterion.name();
    tuned_note["alpha_star"] = tuned.alpha_star;
  }
  const TransformSpec spec = make_spec(cfg, series.dim(), alpha);

  ForecastResult result;
  if (cfg.replicates > 0) {
    BootstrapOptions boot;
    boot.replicates = cfg.replicates;
    boot.gammas = cfg.gammas;
    boot.seed = cfg.seed;
    result = bootstrap_forecast(series, spec, cfg.h_max, cfg.k_rule,
                                cfg.model_rule, boot);
  } else {
    result = fit_forecast(series, spec, cfg.h_max, cfg.k_rule, cfg.model_rule);
  }

  std::vector<int> years;
  for (int h = 1; h <= cfg.h_max; ++h) years.push_back(series.years.back() + h);

  std::ostringstream csv;
  csv << "year,age,point";
  for (const auto& band : result.intervals) {
    csv << ",lb_" << format_number(band.gamma) << ",ub_" << format_number(band.gamma);
  }
  csv << "\n";
  for (int h = 0; h < cfg.h_max; ++h) {
    for (int a = 0; a < series.dim(); ++a) {
      csv << years[h] << ',' << series.ages[a] << ','
          << format_number(result.point(h, a));
      for (const auto& band : result.intervals) {
        csv << ',' << format_number(band.lower(h, a)) << ','
            << format_number(band.upper(h, a));
      }
      csv << "\n";
    }
  }
  atomic_write(out_dir / "forecast.csv", csv.str());

  json meta;
  meta["K"] = result.k;
  meta["score_models"] = model_metadata(result);
  meta["clamp_count"] = result.clamp_count;
  meta["seed"] = result.seed;
  meta["H"] = cfg.h_max;
  meta["B"] = cfg.replicates;
  meta["gammas"] = cfg.gammas;
  meta["transform"] = spec.name();
  meta["k_rule"] = cfg.k_rule.kind == KRule::Kind::eigenvalue_ratio
                       ? "eigenvalue_ratio"
                       : ("fixed(" + std::to_string(cfg.k_rule.fixed_k) + ")");
  meta["model_rule"] = cfg.model_rule == ModelRule::auto_arima ? "auto_arima" : "rwd";
  meta["rebuild_from_qx"] = cfg.rebuild_from_qx;
  meta["radix"] = series.radix;
  if (!tuned_note.is_null()) meta["tuned"] = tuned_note;
  atomic_write(out_dir / "forecast_meta.json", meta.dump(2) + "\n");

  atomic_write(out_dir / "fan_chart.svg", svg_fan_chart(result, years));
  std::cout << "forecast written: K = " << result.k
            << ", clamped paths: " << result.clamp_count << "\n";
  return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg, const fs::path& out_dir) {
  const CompositionSeries series = load_series(cfg);
  const std::vector<Criterion> criteria = parse_criteria(cfg.criteria);

  ExperimentConfig config;
  config.h_max = cfg.h_max;
  config.criteria = criteria;
  config.k_rule = cfg.k_rule;
  config.model_rule = cfg.model_rule;
  config.gammas = cfg.gammas;
  config.bootstrap_replicates = cfg.replicates > 0 ? cfg.replicates : 1000;
  config.seed = cfg.seed;
  config.retune_per_origin = cfg.retune_per_origin;
  config.tuning.grid_step = cfg.grid_step;
  config.tuning.refine_width = cfg.refine_width;
  for (const auto& name : cfg.methods) {
    if (name == "alpha") config.methods.push_back(Method::alpha_tuned());
    else if (name == "ilr") config.methods.push_back(Method::ilr());
    else if (name == "clr") config.methods.push_back(Method::clr());
    else if (name == "eda") config.methods.push_back(Method::eda());
    else if (name == "lee_carter") config.methods.push_back(Method::lee_carter());
    else throw config_error("unknown method '" + name + "'");
  }

  int failed_cells = 0, total_cells = 0;
  for (const std::string& scheme_name : cfg.schemes) {
    config.scheme = scheme_name == "rolling" ? WindowScheme::rolling
                                             : WindowScheme::expanding;
    const ComparisonTable table =
        run_window_experiment(series, config, fs::path(cfg.data_path).stem().string());

    std::ostringstream csv;
    write_table_csv(table, csv);
    atomic_write(out_dir / ("table_" + scheme_name + ".csv"), csv.str());
    std::ostringstream js;
    write_table_json(table, js);
    atomic_write(out_dir / ("table_" + scheme_name + ".json"), js.str());

    // per-horizon error curves, long format
    std::ostringstream horizons;
    horizons << "scheme,method,criterion,h,value\n";
    for (const auto& cell : table.cells) {
      for (std::size_t h = 0; h < cell.per_horizon.size(); ++h) {
        horizons << scheme_name << ',' << cell.method << ',' << cell.criterion
                 << ',' << h + 1 << ',' << format_number(cell.per_horizon[h])
                 << "\n";
      }
    }
    atomic_write(out_dir / ("errors_by_horizon_" + scheme_name + ".csv"),
                 horizons.str());

    // fan-chart data: 1-step..H-step forecasts of the holdout per method
    std::ostringstream fans;
    fans << "scheme,method,h,year,age,point\n";
    const int test_begin = series.n() - cfg.h_max;
    for (const auto& [method, fan] : table.fans) {
      for (int h = 1; h <= fan.h_max; ++h) {
        const Matrix& block = fan.point[h - 1];
        for (int i = 0; i < block.rows(); ++i) {
          const int year = series.years[test_begin + h - 1 + i];
          for (int a = 0; a < series.dim(); ++a) {
            fans << scheme_name << ',' << method << ',' << h << ',' << year << ','
                 << series.ages[a] << ',' << format_number(block(i, a)) << "\n";
          }
        }
      }
    }
    atomic_write(out_dir / ("fan_data_" + scheme_name + ".csv"), fans.str());

    for (const auto& cell : table.cells) {
      ++total_cells;
      if (cell.failed) {
        ++failed_cells;
        std::cout << "cell failed: " << cell.method << " / " << cell.criterion
                  << ": " << cell.failure_reason << "\n";
      }
    }
  }
  std::cout << "evaluation complete: " << (total_cells - failed_cells) << "/"
            << total_cells << " cells scored\n";
  return failed_cells == total_cells ? kExitComputeError : kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"compositional forecasting of life-table death counts"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  std::optional<int> threads;
  bool rebuild_on = false, rebuild_off = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration")->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed_override, "override forecast.seed");
    cmd->add_option("--threads", threads, "OpenMP thread count");
  };
  CLI::App* ingest = app.add_subcommand("ingest", "parse input, emit canonical series CSV");
  add_common(ingest);
  ingest->add_flag("--rebuild-from-qx", rebuild_on,
                   "rebuild death counts from qx (overrides config)");
  ingest->add_flag("--no-rebuild-from-qx", rebuild_off,
                   "use the raw dx column (overrides config)");
  CLI::App* tune = app.add_subcommand("tune", "select alpha on the validation block");
  add_common(tune);
  CLI::App* forecast_cmd = app.add_subcommand("forecast", "fit and forecast with intervals");
  add_common(forecast_cmd);
  CLI::App* evaluate = app.add_subcommand("evaluate", "expanding/rolling window comparison");
  add_common(evaluate);

  std::vector<const char*> argv;
  argv.push_back("codafc");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInputError;
  }

#ifdef _OPENMP
  if (threads && *threads > 0) omp_set_num_threads(*threads);
#endif

  try {
    RunConfig cfg = load_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (rebuild_on && rebuild_off) {
      std::cerr << "config contradiction: both --rebuild-from-qx and "
                   "--no-rebuild-from-qx given\n";
      return kExitConfigContradiction;
    }
    if (rebuild_on) cfg.rebuild_from_qx = true;
    if (rebuild_off) cfg.rebuild_from_qx = false;
    fs::create_directories(out_dir);

    if (ingest->parsed()) return cmd_ingest(cfg, out_dir);
    if (tune->parsed()) return cmd_tune(cfg, out_dir);
    if (forecast_cmd->parsed()) return cmd_forecast(cfg, out_dir);
    if (evaluate->parsed()) return cmd_evaluate(cfg, out_dir);
    return kExitInputError;
  } catch (const parse_error& e) {
    std::cerr << "input error";
    if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
    std::cerr << ": " << e.what() << "\n";
    return kExitInputError;
  } catch (const data_gap_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const format_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const error& e) {
    std::cerr << "computation error: " << e.what() << "\n";
    return kExitComputeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitComputeError;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace coda::cli
