#pragma once

#include "coda/metrics.hpp"
#include "coda/pipeline.hpp"

#include <optional>
#include <string>
#include <vector>

namespace coda {

/// Contiguous train / validation / test blocks: with horizon H the test set
/// is the last H years, the validation set the H before it, the training
/// set everything earlier.
struct SplitPlan {
  int n = 0;
  int h_max = 0;
  int train_begin = 0, train_end = 0;            // [begin, end) 0-based rows
  int validation_begin = 0, validation_end = 0;
  int test_begin = 0, test_end = 0;
};

SplitPlan make_split(int n, int h_max);

/// Which error the tuner minimizes.
struct Criterion {
  enum class Kind { kld, jsd_arithmetic, jsd_geometric, interval_score, cpd };
  Kind kind = Kind::kld;
  double gamma = 0.2;  // interval criteria only

  std::string name() const;
  bool needs_intervals() const {
    return kind == Kind::interval_score || kind == Kind::cpd;
  }
  static std::optional<Criterion> parse(const std::string& name);
};

enum class WindowScheme { expanding, rolling };

/// h-step-ahead forecasts of a holdout block produced by refitting at every
/// origin: by_horizon[h-1] is an (H+1-h) x D matrix whose row (xi - h) is
/// the h-step forecast of holdout year xi (xi = h..H). Interval fans are
/// filled when bootstrap options are supplied.
struct ForecastFan {
  int h_max = 0;
  std::vector<Matrix> point;  // [h-1] -> (H+1-h) x D
  struct BandFan {
    double gamma;
    std::vector<Matrix> lower, upper;
  };
  std::vector<BandFan> bands;
  int clamp_count = 0;
};

struct WindowOptions {
  WindowScheme scheme = WindowScheme::expanding;
  // fixed training length for the rolling scheme; 0 = length of the first
  // window (so both schemes agree at the first origin)
  int rolling_length = 0;
  std::optional<BootstrapOptions> bootstrap;  // engaged for interval criteria
};

/// Fit on data up to each origin m = first_holdout .. n-1 and forecast the
/// rest of the holdout block. `series` must end where the holdout ends.
ForecastFan window_forecasts(const CompositionSeries& series, int holdout_len,
                             const TransformSpec& spec, const KRule& k_rule,
                             ModelRule model_rule, const WindowOptions& options);

/// Per-horizon criterion values of a fan against the holdout block
/// (KLD(h)-style tail averages), and their mean over h.
std::vector<double> score_fan_horizons(const ForecastFan& fan,
                                       const Matrix& holdout,
                                       const Criterion& criterion);
double score_fan(const ForecastFan& fan, const Matrix& holdout,
                 const Criterion& criterion);

struct TuneResult {
  double alpha_star = 0.0;
  Criterion criterion;
  std::vector<std::pair<double, double>> profile;  // (alpha, error), evaluation order
  bool ilr_infeasible = false;  // alpha = 0 skipped because of zeros
};

struct TuneOptions {
  double grid_step = 0.01;
  double refine_width = 1e-4;  // golden-section stop width; <= 0 disables
  KRule k_rule = KRule::eigenvalue_ratio();
  ModelRule model_rule = ModelRule::auto_arima;
  std::optional<BootstrapOptions> bootstrap;  // required for interval criteria
  int threads = 0;
};

/// Grid search over alpha in [0,1] (step 0.01) followed by golden-section
/// refinement around the grid minimum, scoring forecasts of the validation
/// block from the training block with expanding windows. The test block is
/// never touched. Ties break toward smaller alpha.
TuneResult tune_alpha(const CompositionSeries& series, int h_max,
                      const Criterion& criterion, const TuneOptions& options);

/// One sweep shared by several criteria (the validation fans are criterion-
/// independent): returns one TuneResult per requested criterion.
std::vector<TuneResult> tune_alpha_multi(const CompositionSeries& series,
                                         int h_max,
                                         const std::vector<Criterion>& criteria,
                                         const TuneOptions& options);

namespace detail {

// building blocks shared between the OpenMP sweep and the serial reference

struct SweepPoint {
  double alpha = 0.0;
  bool ok = false;
  std::vector<double> errors;  // one per criterion
};

std::vector<double> tuning_grid(double step);

// expanding-window evaluation of one alpha on the last h_max years of
// `train_and_validation`
SweepPoint evaluate_alpha(const CompositionSeries& train_and_validation,
                          int h_max, double alpha,
                          const std::vector<Criterion>& criteria,
                          const TuneOptions& options);

// argmin per criterion over the grid points + golden-section refinement
std::vector<TuneResult> finalize_tuning(
    const CompositionSeries& train_and_validation, int h_max,
    const std::vector<Criterion>& criteria, const TuneOptions& options,
    const std::vector<SweepPoint>& points);

}  // namespace detail

}  // namespace coda
