#include "coda/metrics.hpp"

#include "coda/errors.hpp"

#include <cmath>

namespace coda {

namespace {

void check_pair(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw domain_error("metric inputs have mismatched shapes");
  }
  if (a.rows() == 0 || a.cols() == 0) {
    throw domain_error("metric inputs are empty");
  }
}

// mean over target rows xi = h..H of per-curve values c[xi-1]
HorizonValues tail_average(const std::vector<double>& curve_values) {
  const int h_max = static_cast<int>(curve_values.size());
  HorizonValues out;
  out.per_horizon.resize(h_max);
  for (int h = 1; h <= h_max; ++h) {
    double sum = 0.0;
    for (int xi = h; xi <= h_max; ++xi) sum += curve_values[xi - 1];
    out.per_horizon[h - 1] = sum / (h_max + 1 - h);
  }
  double total = 0.0;
  for (double v : out.per_horizon) total += v;
  out.averaged = total / h_max;
  return out;
}

}  // namespace

double kld_curve(const Vector& actual, const Vector& forecast, double floor) {
  if (actual.size() != forecast.size() || actual.size() == 0) {
    throw domain_error("kld_curve: mismatched curve lengths");
  }
  if (!(floor > 0.0)) throw domain_error("kld_curve: floor must be positive");
  double total = 0.0;
  for (int x = 0; x < actual.size(); ++x) {
    const double d = std::max(actual[x], floor);
    const double dh = std::max(forecast[x], floor);
    total += d * (std::log(d) - std::log(dh)) + dh * (std::log(dh) - std::log(d));
  }
  return total / static_cast<double>(actual.size());
}

double jsd_curve(const Vector& actual, const Vector& forecast, JsdMean mean_kind,
                 double floor) {
  if (actual.size() != forecast.size() || actual.size() == 0) {
    throw domain_error("jsd_curve: mismatched curve lengths");
  }
  if (!(floor > 0.0)) throw domain_error("jsd_curve: floor must be positive");
  double total = 0.0;
  for (int x = 0; x < actual.size(); ++x) {
    const double d = std::max(actual[x], floor);
    const double dh = std::max(forecast[x], floor);
    const double delta = (mean_kind == JsdMean::arithmetic)
                             ? 0.5 * (d + dh)
                             : std::sqrt(d * dh);
    total += 0.5 * d * (std::log(d) - std::log(delta)) +
             0.5 * dh * (std::log(dh) - std::log(delta));
  }
  return total / static_cast<double>(actual.size());
}

HorizonValues kld(const Matrix& actual, const Matrix& forecast, double floor) {
  check_pair(actual, forecast);
  std::vector<double> curves(actual.rows());
  for (int t = 0; t < actual.rows(); ++t) {
    curves[t] = kld_curve(actual.row(t).transpose(), forecast.row(t).transpose(), floor);
  }
  return tail_average(curves);
}

HorizonValues jsd(const Matrix& actual, const Matrix& forecast, JsdMean mean_kind,
                  double floor) {
  check_pair(actual, forecast);
  std::vector<double> curves(actual.rows());
  for (int t = 0; t < actual.rows(); ++t) {
    curves[t] =
        jsd_curve(actual.row(t).transpose(), forecast.row(t).transpose(), mean_kind, floor);
  }
  return tail_average(curves);
}

GoodnessOfFit goodness_of_fit(const Matrix& actual, const Matrix& fitted) {
  check_pair(actual, fitted);
  const Vector age_means = actual.colwise().mean();
  const double sse = (actual - fitted).squaredNorm();
  const double sst = (actual.rowwise() - age_means.transpose()).squaredNorm();
  if (!(sst > 0.0)) {
    throw domain_error("goodness_of_fit: zero total variance, R^2 undefined");
  }
  GoodnessOfFit out;
  out.r2 = 1.0 - sse / sst;
  out.rmse = std::sqrt(sse / static_cast<double>(actual.rows() * actual.cols()));
  return out;
}

double interval_score(double lower, double upper, double actual, double gamma) {
  double score = upper - lower;
  if (actual < lower) score += 2.0 / gamma * (lower - actual);
  if (actual > upper) score += 2.0 / gamma * (actual - upper);
  return score;
}

IntervalMetrics interval_metrics(const Matrix& actual, const Matrix& lower,
                                 const Matrix& upper, double gamma) {
  check_pair(actual, lower);
  check_pair(actual, upper);
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw domain_error("interval_metrics: gamma must lie in (0,1)");
  }
  if ((lower.array() > upper.array()).any()) {
    throw domain_error("interval_metrics: lower bound exceeds upper bound");
  }
  const int h_max = static_cast<int>(actual.rows());
  const int dim = static_cast<int>(actual.cols());

  std::vector<double> miss_rate(h_max), row_score(h_max);
  for (int t = 0; t < h_max; ++t) {
    int misses = 0;
    double score_sum = 0.0;
    for (int x = 0; x < dim; ++x) {
      if (actual(t, x) < lower(t, x) || actual(t, x) > upper(t, x)) ++misses;
      score_sum += interval_score(lower(t, x), upper(t, x), actual(t, x), gamma);
    }
    miss_rate[t] = static_cast<double>(misses) / dim;
    row_score[t] = score_sum / dim;
  }

  IntervalMetrics out;
  out.ecp.resize(h_max);
  out.cpd.resize(h_max);
  out.score.resize(h_max);
  for (int h = 1; h <= h_max; ++h) {
    double miss = 0.0, score = 0.0;
    for (int xi = h; xi <= h_max; ++xi) {
      miss += miss_rate[xi - 1];
      score += row_score[xi - 1];
    }
    const double denom = h_max + 1 - h;
    out.ecp[h - 1] = 1.0 - miss / denom;
    out.cpd[h - 1] = std::abs(out.ecp[h - 1] - (1.0 - gamma));
    out.score[h - 1] = score / denom;
  }
  double cpd_sum = 0.0, score_sum = 0.0;
  for (int h = 0; h < h_max; ++h) {
    cpd_sum += out.cpd[h];
    score_sum += out.score[h];
  }
  out.cpd_avg = cpd_sum / h_max;
  out.score_avg = score_sum / h_max;
  return out;
}

}  // namespace coda
