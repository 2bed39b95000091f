#pragma once

#include "coda/lifetable.hpp"
#include "coda/pipeline.hpp"

#include <random>

namespace coda::testsupport {

// random strictly positive composition, parts bounded away from zero
Vector random_composition(std::mt19937_64& rng, int dim, double floor = 1e-4);

// n x dim series whose ilr image is mean + s1*load1 + s2*load2 (+ noise),
// with linear trends in the factor scores; the workhorse synthetic input
struct TwoFactorOptions {
  int n = 100;
  int dim = 111;
  double trend1 = 0.05, trend2 = -0.02;
  double score_noise1 = 0.3, score_noise2 = 0.2;
  double curve_noise = 0.0;  // iid noise on every coordinate
  double alpha0 = 0.0;       // transform space the factors live in
};

CompositionSeries two_factor_series(const TwoFactorOptions& options,
                                    unsigned seed);

// exact rank-1 series: ilr image = mean + (a + b t) * load, no noise
CompositionSeries rank1_trend_series(int n, int dim, double slope, unsigned seed);

// load a generated HMD fixture through the production parser
CompositionSeries load_fixture(const std::string& filename,
                               bool rebuild_from_qx = true);

}  // namespace coda::testsupport
