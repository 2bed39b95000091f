#include "coda/pca.hpp"

#include "coda/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace coda {

Matrix PCDecomposition::reconstruct() const {
  Matrix fitted = scores * components;
  fitted.rowwise() += mean.transpose();
  return fitted;
}

PCDecomposition fit_pca(const Matrix& z) {
  const int n = static_cast<int>(z.rows());
  const int p = static_cast<int>(z.cols());
  if (n < 3) throw domain_error("fit_pca needs at least 3 observations");
  if (!z.allFinite()) throw numeric_error("fit_pca: non-finite input");

  PCDecomposition out;
  out.mean = z.colwise().mean();
  Matrix centered = z.rowwise() - out.mean.transpose();

  const int k_all = std::min(n - 1, p);
  Vector eigvals(k_all);
  Matrix comps(k_all, p);

  if (p <= n) {
    const Matrix cov = centered.transpose() * centered / double(n - 1);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
    if (solver.info() != Eigen::Success) {
      throw numeric_error("fit_pca: eigensolver failed");
    }
    // Eigen returns ascending order
    for (int k = 0; k < k_all; ++k) {
      const int src = p - 1 - k;
      eigvals[k] = std::max(solver.eigenvalues()[src], 0.0);
      comps.row(k) = solver.eigenvectors().col(src).transpose();
    }
  } else {
    // Gram trick: eigenpairs of X X^T/(n-1) share the nonzero spectrum;
    // components are X^T u / sqrt((n-1) lambda).
    const Matrix gram = centered * centered.transpose() / double(n - 1);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
    if (solver.info() != Eigen::Success) {
      throw numeric_error("fit_pca: eigensolver failed");
    }
    for (int k = 0; k < k_all; ++k) {
      const int src = n - 1 - k;
      const double lambda = std::max(solver.eigenvalues()[src], 0.0);
      eigvals[k] = lambda;
      if (lambda > 0.0) {
        Vector phi = centered.transpose() * solver.eigenvectors().col(src);
        const double norm = phi.norm();
        if (norm > 0.0) {
          comps.row(k) = (phi / norm).transpose();
        } else {
          comps.row(k).setZero();
        }
      } else {
        comps.row(k).setZero();
      }
    }
  }

  // reproducible sign: largest-magnitude entry positive
  for (int k = 0; k < k_all; ++k) {
    int arg = 0;
    comps.row(k).cwiseAbs().maxCoeff(&arg);
    if (comps(k, arg) < 0.0) comps.row(k) = -comps.row(k);
  }

  out.eigenvalues = eigvals;
  out.components = comps;
  out.K = k_all;
  out.scores = centered * comps.transpose();
  out.residuals = centered - out.scores * comps;
  return out;
}

int select_k(const Vector& eigenvalues, int n) {
  const int total = static_cast<int>(eigenvalues.size());
  if (total == 0) throw domain_error("select_k: empty eigenvalue list");
  if (n < 2) throw domain_error("select_k: n must be at least 2");
  const double lambda1 = eigenvalues[0];
  if (!(lambda1 > 0.0)) throw domain_error("select_k: leading eigenvalue not positive");

  // drop near-zero tail so the ratios never hit 0/0
  int usable = 0;
  while (usable < total && eigenvalues[usable] > 1e-14 * lambda1) ++usable;

  const double mean_all = eigenvalues.mean();
  int k_max = 0;
  while (k_max < usable && eigenvalues[k_max] >= mean_all) ++k_max;
  k_max = std::max(k_max, 1);

  const double theta = 1.0 / std::log(std::max(lambda1, static_cast<double>(n)));

  int best_k = 1;
  double best_value = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_max; ++k) {
    double value;
    if (eigenvalues[k - 1] / lambda1 < theta) {
      value = 1.0;
    } else {
      const double next = (k < usable) ? eigenvalues[k] : 0.0;
      value = next / eigenvalues[k - 1];
    }
    if (value < best_value) {  // strict: ties keep the smaller k
      best_value = value;
      best_k = k;
    }
  }
  return best_k;
}

PCDecomposition truncate(const PCDecomposition& full, int K) {
  if (K < 1 || K > full.K) throw domain_error("truncate: K out of range");
  PCDecomposition out;
  out.mean = full.mean;
  out.eigenvalues = full.eigenvalues;
  out.K = K;
  out.components = full.components.topRows(K);
  out.scores = full.scores.leftCols(K);
  // residuals re-derived from the dropped pairs
  Matrix centered = full.scores * full.components + full.residuals;
  out.residuals = centered - out.scores * out.components;
  return out;
}

}  // namespace coda
