#pragma once

#include "coda/arima.hpp"
#include "coda/composition.hpp"
#include "coda/lifetable.hpp"
#include "coda/pca.hpp"

#include <cstdint>
#include <vector>

namespace coda {

/// How many principal components to keep.
struct KRule {
  enum class Kind { eigenvalue_ratio, fixed };
  Kind kind = Kind::eigenvalue_ratio;
  int fixed_k = 6;

  static KRule eigenvalue_ratio() { return {Kind::eigenvalue_ratio, 0}; }
  static KRule fixed(int k) { return {Kind::fixed, k}; }
};

enum class ModelRule { auto_arima, rwd };

/// Everything fitted on a training window: transformed data, truncated
/// decomposition and one score model per retained component. Immutable
/// once built; safe to share across threads.
struct FittedPipeline {
  TransformSpec spec;
  PCDecomposition decomposition;
  std::vector<FittedModel> models;
  int n = 0;
};

FittedPipeline fit_pipeline(const CompositionSeries& series,
                            const TransformSpec& spec, const KRule& k_rule,
                            ModelRule model_rule);

struct IntervalBand {
  double gamma = 0.2;
  Matrix lower;  // H x D
  Matrix upper;  // H x D
};

struct ForecastResult {
  std::vector<int> horizons;           // 1..H
  Matrix point;                        // H x D compositions
  std::vector<Matrix> bootstrap;       // optional: B matrices of H x D paths
  std::vector<IntervalBand> intervals; // one band per requested gamma
  int clamp_count = 0;
  std::uint64_t seed = 0;
  int k = 0;
  std::vector<ArimaSpec> score_orders;
  std::vector<bool> score_is_rwd;
};

/// Point forecasts only: forecast each score series h = 1..H ahead,
/// reconstruct in transform space and invert to the simplex.
ForecastResult fit_forecast(const CompositionSeries& series,
                            const TransformSpec& spec, int h_max,
                            const KRule& k_rule, ModelRule model_rule);

struct BootstrapOptions {
  int replicates = 1000;              // B
  std::vector<double> gammas = {0.2}; // nominal levels 1 - gamma
  std::uint64_t seed = 1;
  bool keep_samples = false;          // retain all B paths in the result
  int threads = 0;                    // 0 = library default
};

/// Two-source bootstrap: score-forecast errors zeta_{t,h,k} resampled per
/// (replicate, horizon, component) and whole residual curves resampled per
/// (replicate, horizon), added to the point reconstruction and inverted.
/// Pointwise intervals are empirical quantiles across replicates.
/// Replicates run in parallel; counter-based RNG substreams keyed by
/// (seed, b, h, k) make the result independent of scheduling order.
ForecastResult bootstrap_forecast(const CompositionSeries& series,
                                  const TransformSpec& spec, int h_max,
                                  const KRule& k_rule, ModelRule model_rule,
                                  const BootstrapOptions& options);

/// Internals shared with the serial reference and the tuning/evaluation
/// loops (point forecasts of every score, h-step error pools, ...).
struct BootstrapIngredients {
  Matrix score_forecasts;                  // H x K point forecasts
  std::vector<std::vector<std::vector<double>>> error_pools;  // [h-1][k] -> pool
  Matrix z_point;                          // H x p point reconstruction
};

BootstrapIngredients prepare_bootstrap(const FittedPipeline& fitted, int h_max);

/// Point forecast matrix (H x D) from a fitted pipeline.
Matrix point_forecast_from(const FittedPipeline& fitted, int h_max,
                           int* clamp_count = nullptr);

}  // namespace coda
