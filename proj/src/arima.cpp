#include "coda/arima.hpp"

#include "coda/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

namespace coda {

namespace {

constexpr double kRootBound = 1.001;  // AR/MA roots must lie outside this circle
constexpr double kInf = std::numeric_limits<double>::infinity();

Vector difference(const Vector& y, int d) {
  Vector w = y;
  for (int i = 0; i < d; ++i) {
    Vector next(w.size() - 1);
    for (int t = 0; t + 1 < w.size(); ++t) next[t] = w[t + 1] - w[t];
    w = next;
  }
  return w;
}

// Spectral radius of the companion matrix of z^p - c_1 z^{p-1} - ... - c_p,
// i.e. the largest inverse root of 1 - c_1 z - ... - c_p z^p.
double max_inverse_root(const Vector& coeffs) {
  const int p = static_cast<int>(coeffs.size());
  if (p == 0) return 0.0;
  Matrix companion = Matrix::Zero(p, p);
  companion.row(0) = coeffs.transpose();
  for (int i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Matrix> solver(companion, false);
  if (solver.info() != Eigen::Success) return kInf;
  double radius = 0.0;
  for (int i = 0; i < p; ++i) {
    radius = std::max(radius, std::abs(solver.eigenvalues()[i]));
  }
  return radius;
}

// stationarity (AR) / invertibility (MA) penalty; 0 when admissible
double root_penalty(const Vector& phi, const Vector& theta) {
  double penalty = 0.0;
  const double ar_radius = max_inverse_root(phi);
  if (ar_radius >= 1.0 / kRootBound) penalty += 1.0 + ar_radius;
  const double ma_radius = max_inverse_root(-theta);
  if (ma_radius >= 1.0 / kRootBound) penalty += 1.0 + ma_radius;
  return penalty;
}

// ARMA state space (Harvey): x_t = alpha_t[0],
// alpha_{t+1} = T alpha_t + R eps_{t+1}, r = max(p, q+1).
struct StateSpace {
  Matrix transition;  // r x r
  Vector impact;      // r
  int r = 0;

  static StateSpace make(const Vector& phi, const Vector& theta) {
    const int p = static_cast<int>(phi.size());
    const int q = static_cast<int>(theta.size());
    StateSpace ss;
    ss.r = std::max(p, q + 1);
    ss.transition = Matrix::Zero(ss.r, ss.r);
    for (int i = 0; i < p; ++i) ss.transition(i, 0) = phi[i];
    for (int i = 0; i + 1 < ss.r; ++i) ss.transition(i, i + 1) = 1.0;
    ss.impact = Vector::Zero(ss.r);
    ss.impact[0] = 1.0;
    for (int j = 0; j < q; ++j) ss.impact[j + 1] = theta[j];
    return ss;
  }

  // stationary covariance: P = T P T' + R R'
  bool stationary_covariance(Matrix& p0) const {
    const int r2 = r * r;
    Matrix lhs = Matrix::Identity(r2, r2);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j)
        for (int k = 0; k < r; ++k)
          for (int l = 0; l < r; ++l)
            lhs(i * r + j, k * r + l) -= transition(i, k) * transition(j, l);
    const Matrix rr = impact * impact.transpose();
    Vector rhs(r2);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) rhs(i * r + j) = rr(i, j);
    Eigen::PartialPivLU<Matrix> lu(lhs);
    Vector vec_p = lu.solve(rhs);
    if (!vec_p.allFinite()) return false;
    p0.resize(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) p0(i, j) = vec_p(i * r + j);
    p0 = 0.5 * (p0 + p0.transpose());
    return true;
  }
};

struct KalmanRun {
  Vector innovations;       // v_t
  Vector variances;         // F_t (sigma^2 = 1 units)
  double sum_log_f = 0.0;
  double weighted_ssq = 0.0;  // sum v^2/F
  std::vector<Vector> predicted_states;  // E[alpha_i | x_0..x_{i-1}], i=0..m
  bool ok = false;
};

KalmanRun run_kalman(const Vector& x, const StateSpace& ss, bool keep_states) {
  KalmanRun run;
  const int m = static_cast<int>(x.size());
  const int r = ss.r;
  Matrix p0;
  if (!ss.stationary_covariance(p0)) return run;

  Vector a = Vector::Zero(r);
  Matrix p = p0;
  const Matrix rr = ss.impact * ss.impact.transpose();
  run.innovations.resize(m);
  run.variances.resize(m);
  if (keep_states) run.predicted_states.reserve(m + 1);

  bool steady = false;
  Vector gain_tpz;  // T P Z'
  double f = 0.0;
  for (int t = 0; t < m; ++t) {
    if (keep_states) run.predicted_states.push_back(a);
    if (!steady) {
      f = p(0, 0);
      if (!(f > 1e-300) || !std::isfinite(f)) return run;
      gain_tpz = ss.transition * p.col(0);
      Matrix p_next = ss.transition * p * ss.transition.transpose() -
                      gain_tpz * gain_tpz.transpose() / f + rr;
      p_next = 0.5 * (p_next + p_next.transpose());
      if ((p_next - p).cwiseAbs().maxCoeff() < 1e-13 * (1.0 + f)) steady = true;
      p = p_next;
    }
    const double v = x[t] - a[0];
    run.innovations[t] = v;
    run.variances[t] = f;
    run.sum_log_f += std::log(f);
    run.weighted_ssq += v * v / f;
    a = ss.transition * a + gain_tpz * (v / f);
  }
  if (keep_states) run.predicted_states.push_back(a);
  run.ok = true;
  return run;
}

// exact Gaussian log-likelihood with sigma^2 concentrated out
double concentrated_loglik(const KalmanRun& run, int m, double* sigma2_out) {
  const double sigma2 = std::max(run.weighted_ssq / m, 0.0);
  if (sigma2_out) *sigma2_out = sigma2;
  const double floored = std::max(sigma2, 1e-300);
  return -0.5 * (m * std::log(2.0 * M_PI) + m + m * std::log(floored) +
                 run.sum_log_f);
}

// conditional sum of squares, the flagged fallback objective
double css_loglik(const Vector& x, const Vector& phi, const Vector& theta,
                  double* sigma2_out) {
  const int m = static_cast<int>(x.size());
  const int p = static_cast<int>(phi.size());
  const int q = static_cast<int>(theta.size());
  Vector e = Vector::Zero(m);
  double ssq = 0.0;
  int used = 0;
  for (int t = 0; t < m; ++t) {
    double pred = 0.0;
    for (int i = 0; i < p; ++i)
      if (t - 1 - i >= 0) pred += phi[i] * x[t - 1 - i];
    for (int j = 0; j < q; ++j)
      if (t - 1 - j >= 0) pred += theta[j] * e[t - 1 - j];
    e[t] = x[t] - pred;
    if (t >= p) {
      ssq += e[t] * e[t];
      ++used;
    }
  }
  if (used == 0) return -kInf;
  const double sigma2 = ssq / used;
  if (sigma2_out) *sigma2_out = sigma2;
  return -0.5 * used * (std::log(2.0 * M_PI) + std::log(std::max(sigma2, 1e-300)) + 1.0);
}

struct NelderMeadResult {
  Vector x;
  double f = kInf;
  int evals = 0;
};

NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& objective,
                             const Vector& x0, double tol, int max_evals) {
  const int dim = static_cast<int>(x0.size());
  NelderMeadResult result;
  if (dim == 0) {
    result.x = x0;
    result.f = objective(x0);
    result.evals = 1;
    return result;
  }
  std::vector<Vector> simplex(dim + 1, x0);
  std::vector<double> values(dim + 1);
  int evals = 0;
  auto eval = [&](const Vector& x) {
    ++evals;
    return objective(x);
  };
  for (int i = 0; i < dim; ++i) {
    simplex[i + 1][i] += (std::abs(x0[i]) > 1.0 ? 0.1 * std::abs(x0[i]) : 0.1);
  }
  for (int i = 0; i <= dim; ++i) values[i] = eval(simplex[i]);

  while (evals < max_evals) {
    std::vector<int> order(dim + 1);
    for (int i = 0; i <= dim; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return values[a] < values[b]; });
    const int best = order[0], worst = order[dim], second = order[dim - 1];
    if (std::isfinite(values[best]) &&
        std::abs(values[worst] - values[best]) < tol) {
      break;
    }
    Vector centroid = Vector::Zero(dim);
    for (int i = 0; i <= dim; ++i)
      if (i != worst) centroid += simplex[i];
    centroid /= dim;

    const Vector reflected = centroid + (centroid - simplex[worst]);
    const double f_reflected = eval(reflected);
    if (f_reflected < values[best]) {
      const Vector expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
    } else if (f_reflected < values[second]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
    } else {
      const Vector contracted =
          centroid + 0.5 * ((f_reflected < values[worst] ? reflected
                                                         : simplex[worst]) -
                            centroid);
      const double f_contracted = eval(contracted);
      if (f_contracted < std::min(values[worst], f_reflected)) {
        simplex[worst] = contracted;
        values[worst] = f_contracted;
      } else {  // shrink toward best
        for (int i = 0; i <= dim; ++i) {
          if (i == best) continue;
          simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
          values[i] = eval(simplex[i]);
        }
      }
    }
  }
  int arg = 0;
  for (int i = 1; i <= dim; ++i)
    if (values[i] < values[arg]) arg = i;
  result.x = simplex[arg];
  result.f = values[arg];
  result.evals = evals;
  return result;
}

// Yule-Walker AR start values, shrunk into the stationary region if needed.
Vector yule_walker_start(const Vector& x, int p) {
  if (p == 0) return Vector(0);
  const int m = static_cast<int>(x.size());
  Vector acov = Vector::Zero(p + 1);
  for (int lag = 0; lag <= p; ++lag) {
    double s = 0.0;
    for (int t = lag; t < m; ++t) s += x[t] * x[t - lag];
    acov[lag] = s / m;
  }
  if (!(acov[0] > 0.0)) return Vector::Zero(p);
  Matrix toeplitz(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) toeplitz(i, j) = acov[std::abs(i - j)];
  Vector rhs = acov.segment(1, p);
  Eigen::FullPivLU<Matrix> lu(toeplitz);
  if (!lu.isInvertible()) return Vector::Zero(p);
  Vector phi = lu.solve(rhs);
  for (int tries = 0; tries < 40 && root_penalty(phi, Vector(0)) > 0.0; ++tries) {
    phi *= 0.9;
  }
  if (root_penalty(phi, Vector(0)) > 0.0) phi.setZero();
  return phi;
}

struct ParamLayout {
  int p, q;
  bool drift;
  int size() const { return p + q + (drift ? 1 : 0); }
  Vector phi(const Vector& params) const { return params.head(p); }
  Vector theta(const Vector& params) const { return params.segment(p, q); }
  double mu(const Vector& params) const { return drift ? params[p + q] : 0.0; }
};

}  // namespace

double aicc_from_loglik(double loglik, int k, int n_eff) {
  if (n_eff - k - 1 <= 0) return kInf;
  return -2.0 * loglik +
         2.0 * k * static_cast<double>(n_eff) / static_cast<double>(n_eff - k - 1);
}

FittedModel fit_arima(const Vector& y, const ArimaSpec& spec) {
  const int n = static_cast<int>(y.size());
  if (spec.p < 0 || spec.p > 5 || spec.q < 0 || spec.q > 5 || spec.d < 0 ||
      spec.d > 2) {
    throw invalid_parameter_error("ARIMA orders must satisfy p,q in 0..5, d in 0..2");
  }
  if (spec.include_drift && spec.d > 1) {
    throw invalid_parameter_error("drift requires d <= 1");
  }
  if (n - spec.d < spec.p + spec.q + 2) {
    throw domain_error("series too short for requested ARIMA orders");
  }
  if (!y.allFinite()) throw numeric_error("fit_arima: non-finite input");

  const Vector w = difference(y, spec.d);
  const int m = static_cast<int>(w.size());
  const ParamLayout layout{spec.p, spec.q, spec.include_drift};
  const double mean_w = w.mean();

  auto exact_objective = [&](const Vector& params) -> double {
    const Vector phi = layout.phi(params);
    const Vector theta = layout.theta(params);
    const double penalty = root_penalty(phi, theta);
    if (penalty > 0.0) return 1e8 * penalty;
    const Vector x = w.array() - layout.mu(params);
    const KalmanRun run = run_kalman(x, StateSpace::make(phi, theta), false);
    if (!run.ok) return 1e12;
    return -concentrated_loglik(run, m, nullptr);
  };
  auto css_objective = [&](const Vector& params) -> double {
    const Vector phi = layout.phi(params);
    const Vector theta = layout.theta(params);
    const double penalty = root_penalty(phi, theta);
    if (penalty > 0.0) return 1e8 * penalty;
    const Vector x = w.array() - layout.mu(params);
    const double ll = css_loglik(x, phi, theta, nullptr);
    return std::isfinite(ll) ? -ll : 1e12;
  };

  // method-of-moments start plus (for MA models) a conservative zero start
  std::vector<Vector> starts;
  {
    Vector start(layout.size());
    const Vector x0 = spec.include_drift ? Vector(w.array() - mean_w) : w;
    start.head(spec.p) = yule_walker_start(x0, spec.p);
    start.segment(spec.p, spec.q).setZero();
    if (spec.include_drift) start[spec.p + spec.q] = mean_w;
    starts.push_back(start);
    if (spec.q > 0 && spec.p > 0) {
      Vector zero = Vector::Zero(layout.size());
      if (spec.include_drift) zero[spec.p + spec.q] = mean_w;
      starts.push_back(zero);
    }
  }

  bool css_fallback = false;
  NelderMeadResult best;
  for (const Vector& start : starts) {
    NelderMeadResult run = nelder_mead(exact_objective, start, 1e-8, 1000);
    if (run.f < best.f) best = run;
  }
  if (!std::isfinite(best.f) || best.f >= 1e11) {
    css_fallback = true;
    for (const Vector& start : starts) {
      NelderMeadResult run = nelder_mead(css_objective, start, 1e-8, 1000);
      if (run.f < best.f) best = run;
    }
    if (!std::isfinite(best.f) || best.f >= 1e11) {
      std::ostringstream os;
      os << "ARIMA(" << spec.p << "," << spec.d << "," << spec.q
         << (spec.include_drift ? ")+drift" : ")")
         << " failed to converge; best objective " << best.f;
      throw fit_error(os.str());
    }
  }

  FittedModel model;
  model.spec = spec;
  model.ar = layout.phi(best.x);
  model.ma = layout.theta(best.x);
  model.drift = layout.mu(best.x);
  model.css_fallback = css_fallback;

  // final pass for innovations, variance and the exact likelihood
  const Vector x = w.array() - model.drift;
  const KalmanRun run = run_kalman(x, StateSpace::make(model.ar, model.ma), false);
  if (!run.ok) throw fit_error("ARIMA likelihood evaluation failed at the optimum");
  model.loglik = concentrated_loglik(run, m, &model.sigma2);
  model.residuals = Vector::Zero(n);
  model.residuals.tail(m) = run.innovations;
  const int k = spec.p + spec.q + (spec.include_drift ? 1 : 0) + 1;
  model.aicc = aicc_from_loglik(model.loglik, k, m);
  return model;
}

double kpss_statistic(const Vector& y) {
  const int n = static_cast<int>(y.size());
  if (n < 3) return 0.0;
  const double mean = y.mean();
  const Vector resid = y.array() - mean;

  double cumulative = 0.0;
  double sum_sq_partial = 0.0;
  for (int t = 0; t < n; ++t) {
    cumulative += resid[t];
    sum_sq_partial += cumulative * cumulative;
  }

  double variance = resid.squaredNorm() / n;
  if (variance < 1e-300) return 0.0;

  int bandwidth = static_cast<int>(std::floor(4.0 * std::pow(n / 100.0, 0.25)));
  bandwidth = std::max(0, std::min(bandwidth, n - 1));
  double long_run = variance;
  for (int lag = 1; lag <= bandwidth; ++lag) {
    double acov = 0.0;
    for (int t = lag; t < n; ++t) acov += resid[t] * resid[t - lag];
    acov /= n;
    long_run += 2.0 * (1.0 - lag / double(bandwidth + 1)) * acov;
  }
  if (long_run <= 0.0) long_run = variance;
  return sum_sq_partial / (double(n) * double(n) * long_run);
}

int choose_differences(const Vector& y, int max_d) {
  Vector current = y;
  int d = 0;
  while (d < max_d && static_cast<int>(current.size()) >= 6 &&
         kpss_statistic(current) > kKpssCritical5) {
    current = difference(current, 1);
    ++d;
  }
  return d;
}

FittedModel auto_arima(const Vector& y, const AutoArimaOptions& options) {
  const int n = static_cast<int>(y.size());
  if (n < 10) throw domain_error("auto_arima needs at least 10 observations");
  const int d = choose_differences(y, options.max_d);

  using Key = std::tuple<int, int, bool>;
  std::map<Key, FittedModel> fitted;
  auto aicc_of = [&](int p, int q, bool drift) -> double {
    if (p < 0 || q < 0 || p > options.max_p || q > options.max_q) return kInf;
    if (drift && d > 1) return kInf;
    if (n - d < p + q + 2) return kInf;
    const Key key{p, q, drift};
    auto it = fitted.find(key);
    if (it == fitted.end()) {
      try {
        FittedModel model = fit_arima(y, ArimaSpec{p, d, q, drift});
        it = fitted.emplace(key, std::move(model)).first;
      } catch (const error&) {
        FittedModel failed;
        failed.aicc = kInf;
        it = fitted.emplace(key, std::move(failed)).first;
      }
    }
    return it->second.aicc;
  };

  struct Candidate {
    int p, q;
    bool drift;
  };
  std::vector<Candidate> initial;
  for (auto [p, q] : std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {0, 1}, {2, 2}}) {
    initial.push_back({p, q, false});
    if (d <= 1) initial.push_back({p, q, true});
  }

  Candidate current{0, 0, false};
  double current_aicc = kInf;
  for (const auto& c : initial) {
    const double a = aicc_of(c.p, c.q, c.drift);
    if (a < current_aicc) {
      current_aicc = a;
      current = c;
    }
  }
  if (!std::isfinite(current_aicc)) {
    throw fit_error("auto_arima: no admissible starting model");
  }

  bool improved = true;
  while (improved) {
    improved = false;
    std::vector<Candidate> neighbors;
    for (int dp = -1; dp <= 1; ++dp) {
      for (int dq = -1; dq <= 1; ++dq) {
        if (dp == 0 && dq == 0) continue;
        neighbors.push_back({current.p + dp, current.q + dq, current.drift});
      }
    }
    if (d <= 1) neighbors.push_back({current.p, current.q, !current.drift});
    for (const auto& c : neighbors) {
      const double a = aicc_of(c.p, c.q, c.drift);
      if (a < current_aicc - 1e-8) {
        current_aicc = a;
        current = c;
        improved = true;
      }
    }
  }
  return fitted.at({current.p, current.q, current.drift});
}

FittedModel fit_rwd(const Vector& y) {
  const int n = static_cast<int>(y.size());
  if (n < 3) throw domain_error("fit_rwd needs at least 3 observations");
  const Vector diffs = difference(y, 1);
  const int m = static_cast<int>(diffs.size());

  FittedModel model;
  model.is_rwd = true;
  model.spec = ArimaSpec{0, 1, 0, true};
  model.drift = diffs.mean();
  const double ss = (diffs.array() - model.drift).matrix().squaredNorm();
  model.sigma2 = (m > 1) ? ss / (m - 1) : 0.0;
  const double mle_var = std::max(ss / m, 1e-300);
  model.loglik = -0.5 * m * (std::log(2.0 * M_PI) + std::log(mle_var) + 1.0);
  model.aicc = aicc_from_loglik(model.loglik, 2, m);
  model.residuals = Vector::Zero(n);
  for (int t = 1; t < n; ++t) model.residuals[t] = y[t] - y[t - 1] - model.drift;
  return model;
}

namespace {

// integrate forecasts of the differenced series back to the original scale;
// tail = last d observed values (oldest first)
Vector integrate_forecasts(const Vector& w_hat, const std::vector<double>& tail, int d) {
  const int h = static_cast<int>(w_hat.size());
  Vector out(h);
  if (d == 0) {
    out = w_hat;
  } else if (d == 1) {
    double level = tail[0];
    for (int j = 0; j < h; ++j) {
      level += w_hat[j];
      out[j] = level;
    }
  } else {  // d == 2
    double level = tail[1];
    double slope = tail[1] - tail[0];
    for (int j = 0; j < h; ++j) {
      slope += w_hat[j];
      level += slope;
      out[j] = level;
    }
  }
  return out;
}

}  // namespace

Vector forecast(const FittedModel& model, const Vector& y, int h) {
  if (h < 1) throw domain_error("forecast horizon must be >= 1");
  const int n = static_cast<int>(y.size());
  if (n == 0) throw domain_error("forecast needs observations");

  if (model.is_rwd) {
    Vector out(h);
    for (int j = 0; j < h; ++j) out[j] = y[n - 1] + (j + 1) * model.drift;
    return out;
  }

  const int d = model.spec.d;
  if (n < d + 1) throw domain_error("forecast: series shorter than d");
  const Vector w = difference(y, d);
  const Vector x = w.array() - model.drift;
  const StateSpace ss = StateSpace::make(model.ar, model.ma);
  const KalmanRun run = run_kalman(x, ss, true);
  if (!run.ok) throw numeric_error("forecast: state-space recursion failed");

  Vector a = run.predicted_states.back();
  Vector w_hat(h);
  for (int j = 0; j < h; ++j) {
    w_hat[j] = a[0] + model.drift;
    a = ss.transition * a;
  }
  std::vector<double> tail;
  for (int i = d; i >= 1; --i) tail.push_back(y[n - i]);
  return integrate_forecasts(w_hat, tail, d);
}

std::vector<Vector> insample_forecasts(const FittedModel& model, const Vector& y,
                                       int max_h) {
  if (max_h < 1) throw domain_error("insample_forecasts: horizon must be >= 1");
  const int n = static_cast<int>(y.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<Vector> out;
  out.reserve(max_h);
  for (int h = 1; h <= max_h; ++h) {
    out.push_back(Vector::Constant(std::max(n - h, 0), nan));
  }

  if (model.is_rwd) {
    for (int h = 1; h <= max_h; ++h) {
      for (int target = h; target < n; ++target) {
        out[h - 1][target - h] = y[target - h] + h * model.drift;
      }
    }
    return out;
  }

  const int d = model.spec.d;
  const Vector w = difference(y, d);
  const Vector x = w.array() - model.drift;
  const StateSpace ss = StateSpace::make(model.ar, model.ma);
  const KalmanRun run = run_kalman(x, ss, true);
  if (!run.ok) {
    throw numeric_error("insample_forecasts: state-space recursion failed");
  }

  // one forward pass per origin, filling every horizon on the way out
  for (int observed = std::max(d, 1); observed < n; ++observed) {
    Vector a = run.predicted_states[observed - d];
    std::vector<double> tail;
    for (int i = d; i >= 1; --i) tail.push_back(y[observed - i]);
    const int steps = std::min(max_h, n - observed);
    Vector w_hat(steps);
    for (int j = 0; j < steps; ++j) {
      w_hat[j] = a[0] + model.drift;
      a = ss.transition * a;
    }
    const Vector y_hat = integrate_forecasts(w_hat, tail, d);
    for (int j = 1; j <= steps; ++j) {
      const int target = observed + j - 1;
      out[j - 1][target - j] = y_hat[j - 1];
    }
  }
  return out;
}

}  // namespace coda
