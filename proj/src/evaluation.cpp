#include "coda/evaluation.hpp"

#include "coda/errors.hpp"
#include "coda/rng.hpp"

#include <json.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace coda {

namespace {

// one year's composition -> q_x through the survivorship recursion
std::vector<double> composition_to_qx(const Vector& d) {
  const int dim = static_cast<int>(d.size());
  std::vector<double> qx(dim);
  double l = 1.0;
  for (int x = 0; x < dim; ++x) {
    if (l <= 1e-300) {
      qx[x] = 1.0;
      continue;
    }
    qx[x] = std::clamp(d[x] / l, 0.0, 1.0);
    l -= d[x];
  }
  qx[dim - 1] = 1.0;
  return qx;
}

}  // namespace

Matrix implied_log_rates(const CompositionSeries& series, double average_fraction) {
  const int n = series.n();
  const int dim = series.dim();
  Matrix log_rates(n, dim);
  for (int t = 0; t < n; ++t) {
    const auto qx = composition_to_qx(series.values.row(t).transpose());
    for (int x = 0; x < dim; ++x) {
      const double denom = 1.0 - (1.0 - average_fraction) * qx[x];
      const double m = qx[x] / std::max(denom, 1e-300);
      if (!(m > 0.0)) {
        std::ostringstream os;
        os << "zero death rate at year " << series.years[t] << ", age "
           << series.ages[x] << "; Lee-Carter needs positive rates";
        throw domain_error(os.str());
      }
      log_rates(t, x) = std::log(m);
    }
  }
  return log_rates;
}

LeeCarterFit lee_carter_fit_forecast(const Matrix& log_rates, int h_max) {
  if (!log_rates.allFinite()) {
    throw numeric_error("lee_carter: non-finite log rates");
  }
  const int n = static_cast<int>(log_rates.rows());
  const int dim = static_cast<int>(log_rates.cols());
  if (n < 3) throw domain_error("lee_carter: needs at least 3 years");

  LeeCarterFit fit;
  fit.a = log_rates.colwise().mean();
  const Matrix centered = log_rates.rowwise() - fit.a.transpose();

  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues().size() == 0 || !(svd.singularValues()[0] > 0.0)) {
    throw fit_error("lee_carter: zero-variance rate matrix");
  }
  const double s0 = svd.singularValues()[0];
  const Vector u = svd.matrixU().col(0);  // year direction
  const Vector v = svd.matrixV().col(0);  // age direction
  const double v_sum = v.sum();
  if (std::abs(v_sum) < 1e-12) {
    throw fit_error("lee_carter: age loading sums to zero, cannot normalize");
  }
  fit.b = v / v_sum;           // sum(b) = 1
  fit.kappa = u * (s0 * v_sum);  // sum(kappa) ~ 0 from column centering

  const FittedModel rwd = fit_rwd(fit.kappa);
  fit.drift = rwd.drift;
  const Vector kappa_hat = forecast(rwd, fit.kappa, h_max);

  fit.forecast_log_rates.resize(h_max, dim);
  for (int h = 0; h < h_max; ++h) {
    fit.forecast_log_rates.row(h) =
        (fit.a + fit.b * kappa_hat[h]).transpose();
  }
  return fit;
}

RatesToCompositions rates_to_death_compositions(const Matrix& rates, double radix,
                                                double average_fraction) {
  if ((rates.array() < 0.0).any()) {
    throw domain_error("rates_to_death_compositions: negative rate");
  }
  const int n = static_cast<int>(rates.rows());
  const int dim = static_cast<int>(rates.cols());
  RatesToCompositions out;
  out.compositions.resize(n, dim);
  for (int t = 0; t < n; ++t) {
    double l = radix;
    double total = 0.0;
    for (int x = 0; x < dim; ++x) {
      const double m = rates(t, x);
      double q = m / (1.0 + (1.0 - average_fraction) * m);
      if (q < 0.0 || q > 1.0) {
        q = std::clamp(q, 0.0, 1.0);
        ++out.clipped_cells;
      }
      if (x == dim - 1) q = 1.0;  // close the table
      const double d = l * q;
      out.compositions(t, x) = d;
      l -= d;
      total += d;
    }
    if (!(total > 0.0)) {
      throw domain_error("rates_to_death_compositions: empty death distribution");
    }
    out.compositions.row(t) /= total;
  }
  return out;
}

namespace {

// Point-forecast fan for the Lee-Carter baseline: refit per origin, convert
// forecast rates back to compositions.
ForecastFan lee_carter_fan(const CompositionSeries& series, int holdout_len,
                           WindowScheme scheme) {
  const int n = series.n();
  const int first_origin = n - holdout_len;
  ForecastFan fan;
  fan.h_max = holdout_len;
  fan.point.resize(holdout_len);
  for (int h = 1; h <= holdout_len; ++h) {
    fan.point[h - 1].resize(holdout_len + 1 - h, series.dim());
  }
  for (int origin = first_origin; origin < n; ++origin) {
    const int steps = n - origin;
    const int slot = origin - first_origin;
    const CompositionSeries training =
        (scheme == WindowScheme::expanding)
            ? series.head(origin)
            : series.slice(origin - first_origin, first_origin);
    const Matrix log_rates = implied_log_rates(training);
    const LeeCarterFit fit = lee_carter_fit_forecast(log_rates, steps);
    const Matrix rates = fit.forecast_log_rates.array().exp();
    const RatesToCompositions converted =
        rates_to_death_compositions(rates, series.radix);
    for (int j = 1; j <= steps; ++j) {
      fan.point[j - 1].row(slot) = converted.compositions.row(j - 1);
    }
  }
  return fan;
}

}  // namespace

ComparisonTable run_window_experiment(const CompositionSeries& series,
                                      const ExperimentConfig& config,
                                      const std::string& series_label) {
  const int n = series.n();
  const int h_max = config.h_max;
  make_split(n, h_max);  // validates n > 2H + 10

  ComparisonTable table;
  table.series_label = series_label;
  table.scheme = config.scheme;
  table.h_max = h_max;

  const Matrix holdout = series.values.bottomRows(h_max);
  const bool wants_intervals =
      std::any_of(config.criteria.begin(), config.criteria.end(),
                  [](const Criterion& c) { return c.needs_intervals(); });

  // gammas needed by interval criteria
  std::vector<double> gammas;
  for (const auto& criterion : config.criteria) {
    if (criterion.needs_intervals()) gammas.push_back(criterion.gamma);
  }
  std::sort(gammas.begin(), gammas.end());
  gammas.erase(std::unique(gammas.begin(), gammas.end()), gammas.end());

  // tuned alpha per criterion (shared across methods labelled "alpha")
  std::map<std::string, double> alpha_star;
  const bool needs_tuning = std::any_of(
      config.methods.begin(), config.methods.end(), [](const Method& m) {
        return m.kind == Method::Kind::transform &&
               m.transform == TransformKind::alpha && !m.alpha.has_value();
      });
  std::string tuning_failure;
  if (needs_tuning && !config.retune_per_origin) {
    TuneOptions topts = config.tuning;
    topts.k_rule = config.k_rule;
    topts.model_rule = config.model_rule;
    if (wants_intervals) {
      BootstrapOptions boot;
      boot.replicates = config.bootstrap_replicates;
      boot.gammas = gammas;
      boot.seed = CounterRng::key(config.seed, 0xa1);
      topts.bootstrap = boot;
    }
    try {
      const auto tuned = tune_alpha_multi(series, h_max, config.criteria, topts);
      for (const auto& result : tuned) {
        alpha_star[result.criterion.name()] = result.alpha_star;
        table.tuning_profiles[result.criterion.name()] = result.profile;
      }
    } catch (const error& e) {
      tuning_failure = e.what();
    }
  }

  WindowOptions wopts;
  wopts.scheme = config.scheme;
  if (wants_intervals) {
    BootstrapOptions boot;
    boot.replicates = config.bootstrap_replicates;
    boot.gammas = gammas;
    boot.seed = CounterRng::key(config.seed, 0xeb);
    wopts.bootstrap = boot;
  }

  std::map<std::string, ForecastFan> fan_cache;  // keyed by transform name
  auto fan_for_spec = [&](const TransformSpec& spec) -> const ForecastFan& {
    const std::string key = spec.name();
    auto it = fan_cache.find(key);
    if (it == fan_cache.end()) {
      it = fan_cache
               .emplace(key, window_forecasts(series, h_max, spec, config.k_rule,
                                              config.model_rule, wopts))
               .first;
    }
    return it->second;
  };

  // per-origin retuning (off by default): alpha re-chosen inside each
  // training window instead of once on the fixed validation block
  auto retuned_fan = [&](const Criterion& criterion) -> ForecastFan {
    const int first_origin = n - h_max;
    ForecastFan fan;
    fan.h_max = h_max;
    fan.point.resize(h_max);
    for (int h = 1; h <= h_max; ++h) {
      fan.point[h - 1].resize(h_max + 1 - h, series.dim());
    }
    for (int origin = first_origin; origin < n; ++origin) {
      const int steps = n - origin;
      const int slot = origin - first_origin;
      const CompositionSeries training =
          (config.scheme == WindowScheme::expanding)
              ? series.head(origin)
              : series.slice(origin - first_origin, first_origin);
      TuneOptions topts = config.tuning;
      topts.k_rule = config.k_rule;
      topts.model_rule = config.model_rule;
      const TuneResult tuned = tune_alpha(training, h_max, criterion, topts);
      const TransformSpec spec =
          TransformSpec::make_alpha(tuned.alpha_star, series.dim());
      const ForecastResult result =
          fit_forecast(training, spec, steps, config.k_rule, config.model_rule);
      for (int j = 1; j <= steps; ++j) {
        fan.point[j - 1].row(slot) = result.point.row(j - 1);
      }
    }
    return fan;
  };

  for (const auto& method : config.methods) {
    for (const auto& criterion : config.criteria) {
      ExperimentCell cell;
      cell.method = method.label;
      cell.criterion = criterion.name();
      try {
        if (method.kind == Method::Kind::lee_carter) {
          if (criterion.needs_intervals()) {
            cell.failed = true;
            cell.failure_reason =
                "not applicable: Lee-Carter interval pathway excluded";
            table.cells.push_back(std::move(cell));
            continue;
          }
          const std::string key = "lee_carter";
          auto it = fan_cache.find(key);
          if (it == fan_cache.end()) {
            it = fan_cache.emplace(key, lee_carter_fan(series, h_max, config.scheme))
                     .first;
          }
          cell.per_horizon = score_fan_horizons(it->second, holdout, criterion);
          cell.value = score_fan(it->second, holdout, criterion);
          table.cells.push_back(std::move(cell));
          continue;
        }

        if (method.transform == TransformKind::alpha && !method.alpha &&
            config.retune_per_origin) {
          if (criterion.needs_intervals()) {
            throw tuning_error("per-origin retuning supports point criteria only");
          }
          const ForecastFan fan = retuned_fan(criterion);
          cell.per_horizon = score_fan_horizons(fan, holdout, criterion);
          cell.value = score_fan(fan, holdout, criterion);
          table.cells.push_back(std::move(cell));
          continue;
        }

        TransformSpec spec;
        if (method.transform == TransformKind::alpha) {
          double alpha;
          if (method.alpha.has_value()) {
            alpha = *method.alpha;
          } else if (!tuning_failure.empty()) {
            throw tuning_error(tuning_failure);
          } else {
            const auto found = alpha_star.find(criterion.name());
            if (found == alpha_star.end()) {
              throw tuning_error("no tuned alpha for " + criterion.name());
            }
            alpha = found->second;
            cell.alpha_star = alpha;
          }
          spec = TransformSpec::make_alpha(alpha, series.dim());
        } else if (method.transform == TransformKind::ilr) {
          spec = TransformSpec::make_ilr(series.dim());
        } else if (method.transform == TransformKind::clr) {
          spec = TransformSpec::make_clr(series.dim());
        } else {
          spec = TransformSpec::make_eda(series.dim());
        }

        const ForecastFan& fan = fan_for_spec(spec);
        cell.per_horizon = score_fan_horizons(fan, holdout, criterion);
        cell.value = score_fan(fan, holdout, criterion);
      } catch (const error& e) {
        cell.failed = true;
        cell.failure_reason = e.what();
      }
      table.cells.push_back(std::move(cell));
    }
  }

  // per-criterion bold-min markers
  for (const auto& criterion : config.criteria) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& cell : table.cells) {
      if (!cell.failed && cell.criterion == criterion.name()) {
        best = std::min(best, cell.value);
      }
    }
    for (auto& cell : table.cells) {
      if (!cell.failed && cell.criterion == criterion.name() &&
          cell.value == best) {
        cell.is_min = true;
      }
    }
  }

  // keep fans for plot emission
  for (auto& [key, fan] : fan_cache) table.fans.emplace(key, std::move(fan));
  return table;
}

void write_table_csv(const ComparisonTable& table, std::ostream& out) {
  out << "series,scheme,H,method,criterion,value,is_min,alpha_star,failed,"
         "failure_reason\n";
  const char* scheme =
      table.scheme == WindowScheme::expanding ? "expanding" : "rolling";
  for (const auto& cell : table.cells) {
    out << table.series_label << ',' << scheme << ',' << table.h_max << ','
        << cell.method << ',' << cell.criterion << ','
        << (cell.failed ? "" : format_number(cell.value)) << ','
        << (cell.is_min ? "true" : "false") << ','
        << (cell.alpha_star ? format_number(*cell.alpha_star) : "") << ','
        << (cell.failed ? "true" : "false") << ',' << cell.failure_reason
        << "\n";
  }
}

void write_table_json(const ComparisonTable& table, std::ostream& out) {
  nlohmann::json doc;
  doc["series"] = table.series_label;
  doc["scheme"] = table.scheme == WindowScheme::expanding ? "expanding" : "rolling";
  doc["H"] = table.h_max;
  doc["cells"] = nlohmann::json::array();
  for (const auto& cell : table.cells) {
    nlohmann::json c;
    c["method"] = cell.method;
    c["criterion"] = cell.criterion;
    if (cell.failed) {
      c["failed"] = true;
      c["failure_reason"] = cell.failure_reason;
    } else {
      c["value"] = cell.value;
      c["is_min"] = cell.is_min;
      if (!cell.per_horizon.empty()) c["per_horizon"] = cell.per_horizon;
    }
    if (cell.alpha_star) c["alpha_star"] = *cell.alpha_star;
    doc["cells"].push_back(std::move(c));
  }
  if (!table.tuning_profiles.empty()) {
    nlohmann::json profiles = nlohmann::json::object();
    for (const auto& [name, profile] : table.tuning_profiles) {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& [alpha, value] : profile) {
        rows.push_back({{"alpha", alpha}, {"error", value}});
      }
      profiles[name] = std::move(rows);
    }
    doc["tuning_profiles"] = std::move(profiles);
  }
  out << doc.dump(2) << "\n";
}

}  // namespace coda
