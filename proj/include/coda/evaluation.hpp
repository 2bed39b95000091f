#pragma once

#include "coda/tuning.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace coda {

/// A forecasting method in a comparison: a simplex transform (alpha either
/// fixed or tuned on the validation block) or the Lee-Carter baseline.
struct Method {
  enum class Kind { transform, lee_carter };
  Kind kind = Kind::transform;
  TransformKind transform = TransformKind::ilr;
  std::optional<double> alpha;  // fixed value; empty = tune per criterion
  std::string label;            // "alpha", "ilr", "clr", "eda", "lee_carter"

  static Method alpha_tuned() { return {Kind::transform, TransformKind::alpha, {}, "alpha"}; }
  static Method alpha_fixed(double a) {
    return {Kind::transform, TransformKind::alpha, a, "alpha"};
  }
  static Method ilr() { return {Kind::transform, TransformKind::ilr, {}, "ilr"}; }
  static Method clr() { return {Kind::transform, TransformKind::clr, {}, "clr"}; }
  static Method eda() { return {Kind::transform, TransformKind::eda, {}, "eda"}; }
  static Method lee_carter() { return {Kind::lee_carter, TransformKind::ilr, {}, "lee_carter"}; }
};

struct ExperimentConfig {
  WindowScheme scheme = WindowScheme::expanding;
  int h_max = 10;
  std::vector<Method> methods;
  std::vector<Criterion> criteria;
  KRule k_rule = KRule::eigenvalue_ratio();
  ModelRule model_rule = ModelRule::auto_arima;
  std::vector<double> gammas = {0.2, 0.05};  // interval criteria levels
  int bootstrap_replicates = 1000;
  std::uint64_t seed = 1;
  bool retune_per_origin = false;  // off by default: alpha* frozen from the
                                   // Fig.-2 validation block
  TuneOptions tuning;              // grid/refinement settings for alpha
};

/// One scored cell of the comparison: (method, criterion) on one series.
struct ExperimentCell {
  std::string method;
  std::string criterion;
  double value = 0.0;
  bool failed = false;
  std::string failure_reason;
  bool is_min = false;  // smallest error within its criterion row group
  std::vector<double> per_horizon;
  std::optional<double> alpha_star;  // tuned alpha used, when applicable
};

struct ComparisonTable {
  std::string series_label;
  WindowScheme scheme = WindowScheme::expanding;
  int h_max = 10;
  std::vector<ExperimentCell> cells;
  std::map<std::string, std::vector<std::pair<double, double>>> tuning_profiles;
  // per-method point fans kept for plot emission / diagnostics
  std::map<std::string, ForecastFan> fans;
};

/// Expanding- or rolling-window out-of-sample comparison on the test block
/// (last H years). Alpha methods without a fixed alpha are tuned per
/// criterion on the validation block first; failures are recorded per cell
/// and the experiment continues.
ComparisonTable run_window_experiment(const CompositionSeries& series,
                                      const ExperimentConfig& config,
                                      const std::string& series_label = "series");

/// Lee-Carter fit of log central mortality rates: a_x age means, (b_x, k_t)
/// from the leading singular pair rescaled to sum(b) = 1, sum(k) = 0, k_t
/// extrapolated by random walk with drift.
struct LeeCarterFit {
  Vector a;            // age pattern
  Vector b;            // first component, sums to 1
  Vector kappa;        // scores, sum 0
  double drift = 0.0;  // random-walk drift of kappa
  Matrix forecast_log_rates;  // H x D
};

LeeCarterFit lee_carter_fit_forecast(const Matrix& log_rates, int h_max);

/// Death-rate path to compositions: q = m/(1 + (1-a) m) with a = 0.5, last
/// age closed at q = 1, then the life-table rebuild and closure. Cells where
/// q left [0,1] are clipped and counted.
struct RatesToCompositions {
  Matrix compositions;  // rows sum to 1
  int clipped_cells = 0;
};

RatesToCompositions rates_to_death_compositions(const Matrix& rates, double radix,
                                                double average_fraction = 0.5);

/// Central-rate matrix implied by a composition series through the life-table
/// identities (q_x = d_x / l_x, m = q/(1 - (1-a) q)).
Matrix implied_log_rates(const CompositionSeries& series, double average_fraction = 0.5);

void write_table_csv(const ComparisonTable& table, std::ostream& out);
void write_table_json(const ComparisonTable& table, std::ostream& out);

}  // namespace coda
