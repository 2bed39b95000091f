#pragma once

#include "coda/common.hpp"

#include <vector>

namespace coda {

inline constexpr double kLogFloor = 1e-15;  // applied to both sides before logs

enum class JsdMean { arithmetic, geometric };

/// Symmetric Kullback-Leibler divergence of one curve pair, averaged over
/// ages: sum_x [d (ln d - ln dhat) + dhat (ln dhat - ln d)] / D.
double kld_curve(const Vector& actual, const Vector& forecast,
                 double floor = kLogFloor);

/// Jensen-Shannon divergence of one curve pair (same 1/D normalization).
/// The geometric mean delta = sqrt(d dhat) is used unnormalized, exactly as
/// written, so JSD_g lacks the usual boundedness.
double jsd_curve(const Vector& actual, const Vector& forecast, JsdMean mean_kind,
                 double floor = kLogFloor);

/// Per-horizon values KLD(h) = mean over target rows xi = h..H of the
/// curve divergences, plus their mean over h. Rows of `actual`/`forecast`
/// are the H target years in order.
struct HorizonValues {
  std::vector<double> per_horizon;  // index h-1
  double averaged = 0.0;
};

HorizonValues kld(const Matrix& actual, const Matrix& forecast,
                  double floor = kLogFloor);
HorizonValues jsd(const Matrix& actual, const Matrix& forecast, JsdMean mean_kind,
                  double floor = kLogFloor);

/// In-sample goodness of fit on the death-count scale:
/// R^2 = 1 - SSE / total variation about the age-wise means, and the RMSE
/// over all n x D cells.
struct GoodnessOfFit {
  double r2 = 0.0;
  double rmse = 0.0;
};

GoodnessOfFit goodness_of_fit(const Matrix& actual, const Matrix& fitted);

/// Interval-forecast accuracy at nominal level 1-gamma: empirical coverage
/// ECP(h), its deviation CPD(h) = |ECP(h) - (1-gamma)|, and the mean
/// interval score S_gamma(h), all with the literal (D x (H+1-h)) divisors
/// and strict inequalities in the indicators.
struct IntervalMetrics {
  std::vector<double> ecp;    // per horizon
  std::vector<double> cpd;    // per horizon
  std::vector<double> score;  // per horizon
  double cpd_avg = 0.0;
  double score_avg = 0.0;
};

IntervalMetrics interval_metrics(const Matrix& actual, const Matrix& lower,
                                 const Matrix& upper, double gamma);

/// Interval score of a single cell.
double interval_score(double lower, double upper, double actual, double gamma);

}  // namespace coda
