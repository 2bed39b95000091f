#pragma once

#include "coda/common.hpp"

namespace coda {

/// Principal-component decomposition of an n x p matrix of transformed
/// curves: mean, eigenpairs of the sample covariance (divisor n-1), score
/// series and residual curves. Reconstruction
///   row_t = mean + scores.row(t) * components + residuals.row(t)
/// holds exactly for every t.
struct PCDecomposition {
  Vector mean;         // p
  Vector eigenvalues;  // all min(n-1, p) sample eigenvalues, non-increasing
  Matrix components;   // K x p, orthonormal rows
  Matrix scores;       // n x K, column means are zero
  Matrix residuals;    // n x p
  int K = 0;

  Matrix reconstruct() const;  // n x p fitted values (mean + scores*components)
};

/// Eigendecomposition of the sample covariance, all min(n-1, p) components
/// retained. Uses the p x p eigensolver when p <= n and the n x n Gram
/// matrix otherwise (same eigenpairs, better conditioning). Sign convention:
/// the largest-magnitude entry of each component is positive.
PCDecomposition fit_pca(const Matrix& z);

/// Ridge-type eigenvalue-ratio choice of K:
///   theta = 1/ln(max(lambda_1, n)),
///   K_max = #{k : lambda_k >= mean(all lambdas)},
///   K = argmin_{1<=k<=K_max} ratio(k)*1{lambda_k/lambda_1 >= theta}
///                            + 1{lambda_k/lambda_1 < theta},
/// ties to the smallest k. Eigenvalues below 1e-14*lambda_1 are dropped
/// before forming ratios.
int select_k(const Vector& eigenvalues, int n);

/// Keep the first K component/score pairs and recompute residuals.
PCDecomposition truncate(const PCDecomposition& full, int K);

}  // namespace coda
