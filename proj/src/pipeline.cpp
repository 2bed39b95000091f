#include "coda/pipeline.hpp"

#include "coda/errors.hpp"
#include "coda/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <sstream>

namespace coda {

namespace {

// Positivity scan with a (year, age) in the message; log-based transforms
// cannot digest zeros.
void check_positive_for_logs(const CompositionSeries& series,
                             const TransformSpec& spec) {
  if (spec.effective_alpha() > 0.0) return;
  for (int t = 0; t < series.n(); ++t) {
    for (int a = 0; a < series.dim(); ++a) {
      if (!(series.values(t, a) > 0.0)) {
        std::ostringstream os;
        os << "zero death count at year " << series.years[t] << ", age "
           << series.ages[a] << ": log-ratio transform undefined (alpha = 0)";
        throw zero_in_log_error(os.str());
      }
    }
  }
}

// H x p reconstruction mean + sum_k betahat_{n+h|n,k} phi_k
Matrix point_z(const FittedPipeline& fitted, int h_max) {
  const int k = fitted.decomposition.K;
  const int p = static_cast<int>(fitted.decomposition.mean.size());
  Matrix score_fc(h_max, k);
  for (int j = 0; j < k; ++j) {
    score_fc.col(j) =
        forecast(fitted.models[j], fitted.decomposition.scores.col(j), h_max);
  }
  Matrix z_point(h_max, p);
  for (int h = 0; h < h_max; ++h) {
    Vector z = fitted.decomposition.mean;
    for (int j = 0; j < k; ++j) {
      z += score_fc(h, j) * fitted.decomposition.components.row(j).transpose();
    }
    z_point.row(h) = z.transpose();
  }
  return z_point;
}

}  // namespace

FittedPipeline fit_pipeline(const CompositionSeries& series,
                            const TransformSpec& spec, const KRule& k_rule,
                            ModelRule model_rule) {
  check_positive_for_logs(series, spec);

  FittedPipeline fitted;
  fitted.spec = spec;
  fitted.n = series.n();

  const Matrix z = transform_series(series.values, spec);
  PCDecomposition full = fit_pca(z);

  int k = 1;
  const bool degenerate = !(full.eigenvalues.size() > 0 && full.eigenvalues[0] > 0.0);
  if (!degenerate) {
    k = (k_rule.kind == KRule::Kind::eigenvalue_ratio)
            ? select_k(full.eigenvalues, series.n())
            : std::min(k_rule.fixed_k, full.K);
  }
  fitted.decomposition = truncate(full, k);

  fitted.models.reserve(k);
  for (int j = 0; j < k; ++j) {
    const Vector scores = fitted.decomposition.scores.col(j);
    if (model_rule == ModelRule::rwd) {
      fitted.models.push_back(fit_rwd(scores));
    } else {
      fitted.models.push_back(auto_arima(scores));
    }
  }
  return fitted;
}

BootstrapIngredients prepare_bootstrap(const FittedPipeline& fitted, int h_max) {
  const int k = fitted.decomposition.K;
  BootstrapIngredients prep;
  prep.score_forecasts.resize(h_max, k);
  prep.error_pools.assign(h_max, std::vector<std::vector<double>>(k));

  for (int j = 0; j < k; ++j) {
    const Vector scores = fitted.decomposition.scores.col(j);
    prep.score_forecasts.col(j) = forecast(fitted.models[j], scores, h_max);
    const auto insample = insample_forecasts(fitted.models[j], scores, h_max);
    for (int h = 1; h <= h_max; ++h) {
      auto& pool = prep.error_pools[h - 1][j];
      const Vector& fitted_h = insample[h - 1];
      for (int i = 0; i < fitted_h.size(); ++i) {
        const double err = scores[h + i] - fitted_h[i];
        if (std::isfinite(err)) pool.push_back(err);
      }
      if (pool.empty()) {
        throw domain_error("bootstrap: empty forecast-error pool at horizon " +
                           std::to_string(h));
      }
    }
  }

  const int p = static_cast<int>(fitted.decomposition.mean.size());
  prep.z_point.resize(h_max, p);
  for (int h = 0; h < h_max; ++h) {
    Vector z = fitted.decomposition.mean;
    for (int j = 0; j < k; ++j) {
      z += prep.score_forecasts(h, j) * fitted.decomposition.components.row(j).transpose();
    }
    prep.z_point.row(h) = z.transpose();
  }
  return prep;
}

Matrix point_forecast_from(const FittedPipeline& fitted, int h_max,
                           int* clamp_count) {
  return inverse_transform_series(point_z(fitted, h_max), fitted.spec, clamp_count);
}

ForecastResult fit_forecast(const CompositionSeries& series,
                            const TransformSpec& spec, int h_max,
                            const KRule& k_rule, ModelRule model_rule) {
  if (h_max < 1) throw domain_error("forecast horizon must be >= 1");
  const FittedPipeline fitted = fit_pipeline(series, spec, k_rule, model_rule);

  ForecastResult result;
  result.k = fitted.decomposition.K;
  for (const auto& model : fitted.models) {
    result.score_orders.push_back(model.spec);
    result.score_is_rwd.push_back(model.is_rwd);
  }
  for (int h = 1; h <= h_max; ++h) result.horizons.push_back(h);
  result.point =
      inverse_transform_series(point_z(fitted, h_max), spec, &result.clamp_count);
  return result;
}

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
  const Matrix& components = fitted.decomposition.components;
  const Vector& mean = fitted.decomposition.mean;
  const Matrix& residuals = fitted.decomposition.residuals;

  std::vector<Matrix> paths(b_total);
  int clamp_total = 0;

#ifdef _OPENMP
  const int requested = options.threads;
#pragma omp parallel for schedule(static) reduction(+ : clamp_total) \
    num_threads(requested > 0 ? requested : omp_get_max_threads())
#endif
  for (int b = 0; b < b_total; ++b) {
    Matrix path(h_max, dim);
    Vector z(p);
    for (int h = 1; h <= h_max; ++h) {
      // additions ordered: mean, score terms by k, residual curve
      for (int c = 0; c < p; ++c) z[c] = mean[c];
      for (int j = 0; j < k; ++j) {
        const auto& pool = prep.error_pools[h - 1][j];
        const std::uint64_t key =
            CounterRng::key(options.seed, static_cast<std::uint64_t>(b),
                            static_cast<std::uint64_t>(h),
                            static_cast<std::uint64_t>(j), 1);
        const double zeta = pool[CounterRng::uniform_index(key, pool.size())];
        const double beta = prep.score_forecasts(h - 1, j) + zeta;
        for (int c = 0; c < p; ++c) z[c] += beta * components(j, c);
      }
      const std::uint64_t curve_key = CounterRng::key(
          options.seed, static_cast<std::uint64_t>(b), static_cast<std::uint64_t>(h), 0, 2);
      const int row = static_cast<int>(CounterRng::uniform_index(curve_key, n_res));
      for (int c = 0; c < p; ++c) z[c] += residuals(row, c);

      const InverseResult inv = alpha_inverse(z, fitted.spec);
      if (inv.clamped) ++clamp_total;
      path.row(h - 1) = inv.composition.transpose();
    }
    paths[b] = std::move(path);
  }
  result.clamp_count += clamp_total;

  // pointwise empirical quantiles across replicates
  for (double gamma : options.gammas) {
    IntervalBand band;
    band.gamma = gamma;
    band.lower.resize(h_max, dim);
    band.upper.resize(h_max, dim);
    std::vector<double> sample(b_total);
    for (int h = 0; h < h_max; ++h) {
      for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < b_total; ++b) sample[b] = paths[b](h, a);
        std::sort(sample.begin(), sample.end());
        band.lower(h, a) = quantile_linear(sample, gamma / 2.0);
        band.upper(h, a) = quantile_linear(sample, 1.0 - gamma / 2.0);
      }
    }
    result.intervals.push_back(std::move(band));
  }

  if (options.keep_samples) result.bootstrap = std::move(paths);
  return result;
}

}  // namespace coda
