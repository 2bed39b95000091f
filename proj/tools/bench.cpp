// Timing comparison between the serial reference kernels and the OpenMP
// ones, run on a synthetic two-factor series. Also asserts the results are
// bit-identical, which the counter-based RNG substreams guarantee.

#include "coda/pipeline.hpp"
#include "coda/reference.hpp"
#include "coda/tuning.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>
#include <cstdio>
#include <cstring>
#include <random>

using namespace coda;

namespace {

CompositionSeries synthetic_series(int n, int dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Matrix h = helmert_submatrix(dim);
  Matrix z(n, dim - 1);
  Vector mean = Vector::Zero(dim - 1);
  for (int j = 0; j < dim - 1; ++j) mean[j] = 0.4 * gauss(rng);
  Vector load1 = Vector::Zero(dim - 1), load2 = Vector::Zero(dim - 1);
  for (int j = 0; j < dim - 1; ++j) {
    load1[j] = gauss(rng);
    load2[j] = gauss(rng);
  }
  load1.normalize();
  load2 -= load2.dot(load1) * load1;
  load2.normalize();
  for (int t = 0; t < n; ++t) {
    const double s1 = 0.05 * t + 0.3 * gauss(rng);
    const double s2 = -0.02 * t + 0.2 * gauss(rng);
    z.row(t) = mean.transpose() + s1 * load1.transpose() + s2 * load2.transpose();
    for (int j = 0; j < dim - 1; ++j) z(t, j) += 0.02 * gauss(rng);
  }
  CompositionSeries series;
  series.values = inverse_transform_series(z, TransformSpec::make_ilr(dim));
  for (int t = 0; t < n; ++t) series.years.push_back(1900 + t);
  for (int a = 0; a < dim; ++a) series.ages.push_back(std::to_string(a));
  return series;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

bool same_result(const ForecastResult& a, const ForecastResult& b) {
  if (a.point != b.point || a.clamp_count != b.clamp_count) return false;
  if (a.intervals.size() != b.intervals.size()) return false;
  for (std::size_t g = 0; g < a.intervals.size(); ++g) {
    if (a.intervals[g].lower != b.intervals[g].lower) return false;
    if (a.intervals[g].upper != b.intervals[g].upper) return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  int replicates = 4000;
  int n = 100, dim = 111;
  bool quick = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) quick = true;
    if (std::strcmp(argv[i], "--replicates") == 0 && i + 1 < argc) {
      replicates = std::atoi(argv[++i]);
    }
  }
  if (quick) {
    replicates = 400;
    dim = 25;
  }

  const CompositionSeries series = synthetic_series(n, dim, 7u);
  const TransformSpec spec = TransformSpec::make_ilr(dim);

  int max_threads = 1;
#ifdef _OPENMP
  max_threads = omp_get_max_threads();
#endif
  std::printf("bench: n=%d D=%d threads=%d\n", n, dim, max_threads);

  // ---- bootstrap kernel ----
  BootstrapOptions boot;
  boot.replicates = replicates;
  boot.gammas = {0.2, 0.05};
  boot.seed = 42;

  auto t0 = std::chrono::steady_clock::now();
  const ForecastResult serial = ref::bootstrap_forecast(
      series, spec, 10, KRule::fixed(2), ModelRule::rwd, boot);
  const double serial_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const ForecastResult parallel = bootstrap_forecast(
      series, spec, 10, KRule::fixed(2), ModelRule::rwd, boot);
  const double parallel_s = seconds_since(t0);

  std::printf("bootstrap  B=%-6d serial %7.3fs  parallel %7.3fs  speedup %.2fx  %s\n",
              replicates, serial_s, parallel_s, serial_s / parallel_s,
              same_result(serial, parallel) ? "bit-identical" : "MISMATCH");
  if (!same_result(serial, parallel)) return 1;

  // ---- tuning sweep ----
  TuneOptions topts;
  topts.grid_step = quick ? 0.25 : 0.05;
  topts.refine_width = 0.0;
  topts.k_rule = KRule::fixed(2);
  topts.model_rule = ModelRule::rwd;
  const std::vector<Criterion> criteria{Criterion{Criterion::Kind::kld, 0.2}};

#ifdef _OPENMP
  omp_set_num_threads(1);
#endif
  t0 = std::chrono::steady_clock::now();
  const auto tuned_serial = ref::tune_alpha_multi(series, 10, criteria, topts);
  const double tune_serial_s = seconds_since(t0);
#ifdef _OPENMP
  omp_set_num_threads(max_threads);
#endif
  t0 = std::chrono::steady_clock::now();
  const auto tuned_parallel = tune_alpha_multi(series, 10, criteria, topts);
  const double tune_parallel_s = seconds_since(t0);

  const bool tune_same =
      tuned_serial[0].alpha_star == tuned_parallel[0].alpha_star &&
      tuned_serial[0].profile == tuned_parallel[0].profile;
  std::printf("alpha sweep step=%.2f serial %7.3fs  parallel %7.3fs  speedup %.2fx  %s\n",
              topts.grid_step, tune_serial_s, tune_parallel_s,
              tune_serial_s / tune_parallel_s,
              tune_same ? "bit-identical" : "MISMATCH");
  return tune_same ? 0 : 1;
}
