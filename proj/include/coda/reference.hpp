#pragma once

#include "coda/pipeline.hpp"
#include "coda/tuning.hpp"

namespace coda::ref {

/// Straight-line serial implementation of the two-source bootstrap, kept as
/// the reference the OpenMP kernel is tested against. Same RNG substream
/// contract, plain loops, no pragmas; results must be bit-identical to
/// coda::bootstrap_forecast.
ForecastResult bootstrap_forecast(const CompositionSeries& series,
                                  const TransformSpec& spec, int h_max,
                                  const KRule& k_rule, ModelRule model_rule,
                                  const BootstrapOptions& options);

/// Serial alpha sweep: evaluates the tuning grid one point at a time.
/// Must agree bit-for-bit with coda::tune_alpha_multi.
std::vector<TuneResult> tune_alpha_multi(const CompositionSeries& series,
                                         int h_max,
                                         const std::vector<Criterion>& criteria,
                                         const TuneOptions& options);

}  // namespace coda::ref
