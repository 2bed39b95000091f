#include "coda/reference.hpp"

#include "coda/errors.hpp"
#include "coda/rng.hpp"

#include <algorithm>
#include <cmath>

namespace coda::ref {

namespace {

// plain reimplementation of the interpolated quantile, kept separate from
// coda::quantile_linear on purpose
double quantile_ref(std::vector<double> sample, double p) {
  std::sort(sample.begin(), sample.end());
  const std::size_t n = sample.size();
  if (p <= 0.0) return sample.front();
  if (p >= 1.0) return sample.back();
  const double pos = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= n) return sample.back();
  return sample[lo] + frac * (sample[lo + 1] - sample[lo]);
}

}  // namespace

ForecastResult bootstrap_forecast(const CompositionSeries& series,
                                  const TransformSpec& spec, int h_max,
                                  const KRule& k_rule, ModelRule model_rule,
                                  const BootstrapOptions& options) {
  if (h_max < 1) throw domain_error("forecast horizon must be >= 1");
  if (options.replicates < 100) {
    throw domain_error("bootstrap needs at least 100 replicates");
  }
  for (double gamma : options.gammas) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
      throw domain_error("bootstrap levels gamma must lie in (0,1)");
    }
  }

  const FittedPipeline fitted = fit_pipeline(series, spec, k_rule, model_rule);
  const BootstrapIngredients prep = prepare_bootstrap(fitted, h_max);

  ForecastResult result;
  result.seed = options.seed;
  result.k = fitted.decomposition.K;
  for (const auto& model : fitted.models) {
    result.score_orders.push_back(model.spec);
    result.score_is_rwd.push_back(model.is_rwd);
  }
  for (int h = 1; h <= h_max; ++h) result.horizons.push_back(h);
  result.point =
      inverse_transform_series(prep.z_point, fitted.spec, &result.clamp_count);

  const int b_total = options.replicates;
  const int k = fitted.decomposition.K;
  const int p = static_cast<int>(fitted.decomposition.mean.size());
  const int dim = fitted.spec.dim;
  const int n_res = static_cast<int>(fitted.decomposition.residuals.rows());

  std::vector<Matrix> paths(b_total, Matrix(h_max, dim));
  for (int b = 0; b < b_total; ++b) {
    for (int h = 1; h <= h_max; ++h) {
      Vector z(p);
      for (int c = 0; c < p; ++c) z[c] = fitted.decomposition.mean[c];
      for (int j = 0; j < k; ++j) {
        const auto& pool = prep.error_pools[h - 1][j];
        const std::uint64_t key =
            CounterRng::key(options.seed, static_cast<std::uint64_t>(b),
                            static_cast<std::uint64_t>(h),
                            static_cast<std::uint64_t>(j), 1);
        const double zeta = pool[CounterRng::uniform_index(key, pool.size())];
        const double beta = prep.score_forecasts(h - 1, j) + zeta;
        for (int c = 0; c < p; ++c) {
          z[c] += beta * fitted.decomposition.components(j, c);
        }
      }
      const std::uint64_t curve_key =
          CounterRng::key(options.seed, static_cast<std::uint64_t>(b),
                          static_cast<std::uint64_t>(h), 0, 2);
      const int row = static_cast<int>(CounterRng::uniform_index(curve_key, n_res));
      for (int c = 0; c < p; ++c) z[c] += fitted.decomposition.residuals(row, c);

      const InverseResult inv = alpha_inverse(z, fitted.spec);
      if (inv.clamped) ++result.clamp_count;
      paths[b].row(h - 1) = inv.composition.transpose();
    }
  }

  for (double gamma : options.gammas) {
    IntervalBand band;
    band.gamma = gamma;
    band.lower.resize(h_max, dim);
    band.upper.resize(h_max, dim);
    std::vector<double> sample(b_total);
    for (int h = 0; h < h_max; ++h) {
      for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < b_total; ++b) sample[b] = paths[b](h, a);
        band.lower(h, a) = quantile_ref(sample, gamma / 2.0);
        band.upper(h, a) = quantile_ref(sample, 1.0 - gamma / 2.0);
      }
    }
    result.intervals.push_back(std::move(band));
  }

  if (options.keep_samples) result.bootstrap = std::move(paths);
  return result;
}

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
  const CompositionSeries tv = series.head(plan.validation_end);

  const std::vector<double> alphas = detail::tuning_grid(options.grid_step);
  std::vector<detail::SweepPoint> points;
  points.reserve(alphas.size());
  for (double alpha : alphas) {
    points.push_back(detail::evaluate_alpha(tv, h_max, alpha, criteria, options));
  }
  return detail::finalize_tuning(tv, h_max, criteria, options, points);
}

}  // namespace coda::ref
