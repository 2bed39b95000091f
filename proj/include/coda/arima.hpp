#pragma once

#include "coda/common.hpp"

#include <vector>

namespace coda {

/// Non-seasonal ARIMA(p, d, q) orders plus a drift switch. Drift means the
/// mean of the d-times-differenced series (an intercept when d = 0), and is
/// only allowed for d <= 1.
struct ArimaSpec {
  int p = 0;
  int d = 0;
  int q = 0;
  bool include_drift = false;
};

/// A fitted score model: either an ARIMA with exact-Gaussian-likelihood
/// estimates or a closed-form random walk with drift. AR and MA polynomial
/// roots lie outside the 1.001 circle for every model the fitters return.
struct FittedModel {
  ArimaSpec spec;
  Vector ar;       // phi_1..phi_p
  Vector ma;       // theta_1..theta_q
  double drift = 0.0;
  double sigma2 = 0.0;
  double loglik = 0.0;
  double aicc = 0.0;
  Vector residuals;       // one-step innovations on the original scale,
                          // first d entries zero
  bool css_fallback = false;  // exact likelihood failed; conditional SS used
  bool is_rwd = false;
};

/// KPSS level-stationarity statistic with Bartlett long-run variance,
/// bandwidth floor(4 (n/100)^(1/4)). 5% critical value is 0.463.
double kpss_statistic(const Vector& y);
inline constexpr double kKpssCritical5 = 0.463;

/// Number of differences (0..max_d) chosen by repeated KPSS tests at 5%.
int choose_differences(const Vector& y, int max_d = 2);

/// Maximum-likelihood fit of the given spec. Gaussian likelihood is
/// evaluated exactly through the ARMA state-space recursion; a conditional
/// sum-of-squares objective is the flagged fallback if that fails.
/// Optimization is Nelder-Mead from method-of-moments starts.
FittedModel fit_arima(const Vector& y, const ArimaSpec& spec);

struct AutoArimaOptions {
  int max_p = 5;
  int max_q = 5;
  int max_d = 2;
};

/// Hyndman-Khandakar style automatic selection: d from repeated KPSS tests,
/// then stepwise AICc search over (p, q) from the starts
/// {(0,0),(1,0),(0,1),(2,2)}, drift toggled when d <= 1.
FittedModel auto_arima(const Vector& y, const AutoArimaOptions& options = {});

/// Random walk with drift: drift = mean of first differences, sigma2 their
/// sample variance. Forecasts are y_n + h * drift.
FittedModel fit_rwd(const Vector& y);

/// Point forecasts for horizons 1..h (conditional means).
Vector forecast(const FittedModel& model, const Vector& y, int h);

/// In-sample multi-step forecasts with parameters fixed from the full fit:
/// element [h-1] holds yhat_{t|t-h} for t = h+1..n (1-based t), i.e. a
/// vector of length n-h. Entries whose origin predates the model's
/// differencing requirement are NaN.
std::vector<Vector> insample_forecasts(const FittedModel& model,
                                       const Vector& y, int max_h);

// AICc from a log-likelihood: k = p + q + drift + 1 parameters, n_eff the
// sample size after differencing.
double aicc_from_loglik(double loglik, int k, int n_eff);

}  // namespace coda
