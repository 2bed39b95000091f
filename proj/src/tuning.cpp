#include "coda/tuning.hpp"

#include "coda/errors.hpp"
#include "coda/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

namespace coda {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

SplitPlan make_split(int n, int h_max) {
  if (h_max < 1) throw domain_error("make_split: horizon must be >= 1");
  if (n <= 2 * h_max + 10) {
    throw domain_error("make_split: need n > 2H + 10 years");
  }
  SplitPlan plan;
  plan.n = n;
  plan.h_max = h_max;
  plan.train_begin = 0;
  plan.train_end = n - 2 * h_max;
  plan.validation_begin = plan.train_end;
  plan.validation_end = n - h_max;
  plan.test_begin = plan.validation_end;
  plan.test_end = n;
  return plan;
}

std::string Criterion::name() const {
  switch (kind) {
    case Kind::kld: return "KLD";
    case Kind::jsd_arithmetic: return "JSD_a";
    case Kind::jsd_geometric: return "JSD_g";
    case Kind::interval_score: return "interval_score(" + format_number(gamma) + ")";
    case Kind::cpd: return "CPD(" + format_number(gamma) + ")";
  }
  return "?";
}

std::optional<Criterion> Criterion::parse(const std::string& name) {
  auto with_gamma = [&](Kind kind, const std::string& prefix) -> std::optional<Criterion> {
    // forms: "CPD(0.2)" or "CPD_0.2"
    std::string rest = name.substr(prefix.size());
    if (!rest.empty() && (rest[0] == '(' || rest[0] == '_')) {
      if (rest[0] == '(') {
        if (rest.back() != ')') return std::nullopt;
        rest = rest.substr(1, rest.size() - 2);
      } else {
        rest = rest.substr(1);
      }
      try {
        const double g = parse_number(rest);
        if (g > 0.0 && g < 1.0) return Criterion{kind, g};
      } catch (const error&) {
      }
      return std::nullopt;
    }
    return Criterion{kind, 0.2};
  };
  if (name == "KLD" || name == "kld") return Criterion{Kind::kld, 0.2};
  if (name == "JSD_a" || name == "jsd_a") return Criterion{Kind::jsd_arithmetic, 0.2};
  if (name == "JSD_g" || name == "jsd_g") return Criterion{Kind::jsd_geometric, 0.2};
  if (name.rfind("interval_score", 0) == 0) {
    return with_gamma(Kind::interval_score, "interval_score");
  }
  if (name.rfind("CPD", 0) == 0) return with_gamma(Kind::cpd, "CPD");
  if (name.rfind("cpd", 0) == 0) return with_gamma(Kind::cpd, "cpd");
  return std::nullopt;
}

ForecastFan window_forecasts(const CompositionSeries& series, int holdout_len,
                             const TransformSpec& spec, const KRule& k_rule,
                             ModelRule model_rule, const WindowOptions& options) {
  const int n = series.n();
  if (holdout_len < 1 || holdout_len >= n) {
    throw domain_error("window_forecasts: bad holdout length");
  }
  const int first_origin = n - holdout_len;
  const int rolling_len =
      options.rolling_length > 0 ? options.rolling_length : first_origin;

  ForecastFan fan;
  fan.h_max = holdout_len;
  fan.point.resize(holdout_len);
  for (int h = 1; h <= holdout_len; ++h) {
    fan.point[h - 1].resize(holdout_len + 1 - h, series.dim());
  }
  if (options.bootstrap) {
    for (double gamma : options.bootstrap->gammas) {
      ForecastFan::BandFan band;
      band.gamma = gamma;
      band.lower.resize(holdout_len);
      band.upper.resize(holdout_len);
      for (int h = 1; h <= holdout_len; ++h) {
        band.lower[h - 1].resize(holdout_len + 1 - h, series.dim());
        band.upper[h - 1].resize(holdout_len + 1 - h, series.dim());
      }
      fan.bands.push_back(std::move(band));
    }
  }

  int clamp_total = 0;
  std::exception_ptr failure;
  std::atomic<bool> failed{false};

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) reduction(+ : clamp_total)
#endif
  for (int origin = first_origin; origin < n; ++origin) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      const int steps = n - origin;
      const int slot = origin - first_origin;
      CompositionSeries training =
          (options.scheme == WindowScheme::expanding)
              ? series.head(origin)
              : series.slice(origin - std::min(rolling_len, origin),
                             std::min(rolling_len, origin));
      if (options.bootstrap) {
        BootstrapOptions boot = *options.bootstrap;
        boot.seed = CounterRng::key(options.bootstrap->seed,
                                    static_cast<std::uint64_t>(origin));
        boot.keep_samples = false;
        // replicates run inside an already-parallel loop; keep them serial
        boot.threads = 1;
        ForecastResult result = bootstrap_forecast(training, spec, steps, k_rule,
                                                   model_rule, boot);
        clamp_total += result.clamp_count;
        for (int j = 1; j <= steps; ++j) {
          fan.point[j - 1].row(slot) = result.point.row(j - 1);
          for (std::size_t g = 0; g < result.intervals.size(); ++g) {
            fan.bands[g].lower[j - 1].row(slot) =
                result.intervals[g].lower.row(j - 1);
            fan.bands[g].upper[j - 1].row(slot) =
                result.intervals[g].upper.row(j - 1);
          }
        }
      } else {
        ForecastResult result =
            fit_forecast(training, spec, steps, k_rule, model_rule);
        clamp_total += result.clamp_count;
        for (int j = 1; j <= steps; ++j) {
          fan.point[j - 1].row(slot) = result.point.row(j - 1);
        }
      }
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      {
        if (!failure) failure = std::current_exception();
      }
      failed.store(true, std::memory_order_relaxed);
    }
  }
  if (failure) std::rethrow_exception(failure);
  fan.clamp_count = clamp_total;
  return fan;
}

std::vector<double> score_fan_horizons(const ForecastFan& fan,
                                       const Matrix& holdout,
                                       const Criterion& criterion) {
  const int h_max = fan.h_max;
  if (holdout.rows() != h_max) {
    throw domain_error("score_fan: holdout block does not match fan length");
  }
  std::vector<double> per_horizon(h_max);

  if (!criterion.needs_intervals()) {
    for (int h = 1; h <= h_max; ++h) {
      const Matrix& block = fan.point[h - 1];
      double value = 0.0;
      for (int i = 0; i < block.rows(); ++i) {
        const Vector actual = holdout.row(h - 1 + i).transpose();
        const Vector pred = block.row(i).transpose();
        switch (criterion.kind) {
          case Criterion::Kind::kld:
            value += kld_curve(actual, pred);
            break;
          case Criterion::Kind::jsd_arithmetic:
            value += jsd_curve(actual, pred, JsdMean::arithmetic);
            break;
          case Criterion::Kind::jsd_geometric:
            value += jsd_curve(actual, pred, JsdMean::geometric);
            break;
          default: break;
        }
      }
      per_horizon[h - 1] = value / static_cast<double>(block.rows());
    }
    return per_horizon;
  }

  const auto band_it =
      std::find_if(fan.bands.begin(), fan.bands.end(), [&](const auto& b) {
        return std::abs(b.gamma - criterion.gamma) < 1e-12;
      });
  if (band_it == fan.bands.end()) {
    throw domain_error("score_fan: no interval band for gamma " +
                       format_number(criterion.gamma));
  }
  for (int h = 1; h <= h_max; ++h) {
    const Matrix& lower = band_it->lower[h - 1];
    const Matrix& upper = band_it->upper[h - 1];
    double misses = 0.0, score = 0.0;
    long cells = 0;
    for (int i = 0; i < lower.rows(); ++i) {
      for (int x = 0; x < lower.cols(); ++x) {
        const double actual = holdout(h - 1 + i, x);
        if (actual < lower(i, x) || actual > upper(i, x)) misses += 1.0;
        score += interval_score(lower(i, x), upper(i, x), actual, criterion.gamma);
        ++cells;
      }
    }
    const double ecp = 1.0 - misses / static_cast<double>(cells);
    per_horizon[h - 1] = (criterion.kind == Criterion::Kind::cpd)
                             ? std::abs(ecp - (1.0 - criterion.gamma))
                             : score / static_cast<double>(cells);
  }
  return per_horizon;
}

double score_fan(const ForecastFan& fan, const Matrix& holdout,
                 const Criterion& criterion) {
  const auto per_horizon = score_fan_horizons(fan, holdout, criterion);
  double total = 0.0;
  for (double v : per_horizon) total += v;
  return total / static_cast<double>(per_horizon.size());
}

namespace detail {

std::vector<double> tuning_grid(double step) {
  const double s = step > 0 ? step : 0.01;
  const int grid_n = static_cast<int>(std::lround(1.0 / s));
  std::vector<double> alphas;
  alphas.reserve(grid_n + 1);
  for (int i = 0; i <= grid_n; ++i) alphas.push_back(std::min(1.0, i * s));
  return alphas;
}

SweepPoint evaluate_alpha(const CompositionSeries& train_and_validation,
                          int h_max, double alpha,
                          const std::vector<Criterion>& criteria,
                          const TuneOptions& options) {
  SweepPoint point;
  point.alpha = alpha;
  const Matrix holdout = train_and_validation.values.bottomRows(h_max);
  try {
    WindowOptions wopts;
    wopts.scheme = WindowScheme::expanding;
    if (options.bootstrap) {
      wopts.bootstrap = *options.bootstrap;
      wopts.bootstrap->seed = CounterRng::key(
          options.bootstrap->seed,
          static_cast<std::uint64_t>(std::llround(alpha * 1e9)));
    }
    const TransformSpec spec =
        TransformSpec::make_alpha(alpha, train_and_validation.dim());
    const ForecastFan fan = window_forecasts(train_and_validation, h_max, spec,
                                             options.k_rule, options.model_rule,
                                             wopts);
    point.errors.reserve(criteria.size());
    for (const auto& criterion : criteria) {
      point.errors.push_back(score_fan(fan, holdout, criterion));
    }
    point.ok = true;
  } catch (const error&) {
    point.ok = false;
  }
  return point;
}

std::vector<TuneResult> finalize_tuning(
    const CompositionSeries& tv, int h_max,
    const std::vector<Criterion>& criteria, const TuneOptions& options,
    const std::vector<SweepPoint>& points) {
  const double step = options.grid_step > 0 ? options.grid_step : 0.01;
  const bool alpha_zero_failed = !points.empty() && !points.front().ok;

  std::vector<TuneResult> results;
  results.reserve(criteria.size());
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    TuneResult result;
    result.criterion = criteria[c];
    result.ilr_infeasible = alpha_zero_failed;

    int best_index = -1;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!points[i].ok) continue;
      result.profile.emplace_back(points[i].alpha, points[i].errors[c]);
      if (best_index < 0 ||
          points[i].errors[c] < points[best_index].errors[c]) {
        best_index = static_cast<int>(i);
      }
    }
    if (best_index < 0) {
      throw tuning_error("every alpha value failed for criterion " +
                         criteria[c].name());
    }
    double best_alpha = points[best_index].alpha;
    double best_error = points[best_index].errors[c];

    if (options.refine_width > 0.0) {
      // golden-section refinement inside the bracketing grid cells
      const std::vector<Criterion> single{criteria[c]};
      auto eval_single = [&](double alpha) -> double {
        SweepPoint p = evaluate_alpha(tv, h_max, alpha, single, options);
        if (!p.ok) return kInf;
        result.profile.emplace_back(alpha, p.errors[0]);
        if (p.errors[0] < best_error ||
            (p.errors[0] == best_error && alpha < best_alpha)) {
          best_error = p.errors[0];
          best_alpha = alpha;
        }
        return p.errors[0];
      };
      const double inv_phi = 0.6180339887498949;
      double lo = std::max(0.0, best_alpha - step);
      double hi = std::min(1.0, best_alpha + step);
      double x1 = hi - inv_phi * (hi - lo);
      double x2 = lo + inv_phi * (hi - lo);
      double f1 = eval_single(x1);
      double f2 = eval_single(x2);
      while (hi - lo > options.refine_width) {
        if (f1 <= f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - inv_phi * (hi - lo);
          f1 = eval_single(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + inv_phi * (hi - lo);
          f2 = eval_single(x2);
        }
      }
    }
    result.alpha_star = best_alpha;
    results.push_back(std::move(result));
  }
  return results;
}

}  // namespace detail

std::vector<TuneResult> tune_alpha_multi(const CompositionSeries& series,
                                         int h_max,
                                         const std::vector<Criterion>& criteria,
                                         const TuneOptions& options) {
  for (const auto& criterion : criteria) {
    if (criterion.needs_intervals() && !options.bootstrap) {
      throw tuning_error("interval criterion '" + criterion.name() +
                         "' needs bootstrap options");
    }
  }
  const SplitPlan plan = make_split(series.n(), h_max);
  // the test block is dropped here; tuning code cannot even see it
  const CompositionSeries tv = series.head(plan.validation_end);

  const std::vector<double> alphas = detail::tuning_grid(options.grid_step);
  std::vector<detail::SweepPoint> points(alphas.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) \
    num_threads(options.threads > 0 ? options.threads : omp_get_max_threads())
#endif
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    points[i] = detail::evaluate_alpha(tv, h_max, alphas[i], criteria, options);
  }
  return detail::finalize_tuning(tv, h_max, criteria, options, points);
}

TuneResult tune_alpha(const CompositionSeries& series, int h_max,
                      const Criterion& criterion, const TuneOptions& options) {
  return tune_alpha_multi(series, h_max, {criterion}, options).front();
}

}  // namespace coda
