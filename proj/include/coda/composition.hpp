#pragma once

#include "coda/common.hpp"

#include <string>
#include <vector>

namespace coda {

/// A point on the unit simplex: D non-negative parts summing to one.
/// Construction applies closure; inputs whose sum is off by more than
/// kClosureTolerance are renormalized and flagged, negative entries are
/// rejected. The 10^5 life-table radix never appears here -- it is series
/// metadata applied at I/O boundaries only.
class Composition {
 public:
  explicit Composition(Vector values);

  const Vector& values() const { return values_; }
  int dim() const { return static_cast<int>(values_.size()); }
  bool renormalized() const { return renormalized_; }

 private:
  Vector values_;
  bool renormalized_ = false;
};

enum class TransformKind { alpha, ilr, clr, eda };

/// Which map takes the simplex to unconstrained space. `alpha` carries the
/// power parameter; ilr is the exact alpha -> 0 limit, eda the alpha = 1
/// case, clr the unrotated log-ratio (length D instead of D-1).
struct TransformSpec {
  TransformKind kind = TransformKind::ilr;
  double alpha = 0.0;  // meaningful only when kind == alpha
  int dim = 0;         // D

  static TransformSpec make_alpha(double alpha, int dim);
  static TransformSpec make_ilr(int dim) { return {TransformKind::ilr, 0.0, dim}; }
  static TransformSpec make_clr(int dim) { return {TransformKind::clr, 0.0, dim}; }
  static TransformSpec make_eda(int dim) { return {TransformKind::eda, 1.0, dim}; }

  // alpha when kind==alpha; 0 for ilr/clr, 1 for eda.
  double effective_alpha() const;
  // D-1 for Helmert-rotated kinds, D for clr.
  int transformed_dim() const { return kind == TransformKind::clr ? dim : dim - 1; }
  std::string name() const;
};

/// (D-1) x D sub-matrix of the Helmert matrix (constant first row dropped).
/// Row k has k entries 1/sqrt(k(k+1)) followed by -k/sqrt(k(k+1)), then
/// zeros, so rows are orthonormal and sum to zero.
Matrix helmert_submatrix(int dim);

/// Centre log-ratio: s_x = ln(d_x / g(d)) with g the geometric mean.
/// Output sums to zero. Throws zero_in_log_error on any non-positive part.
Vector clr_transform(const Vector& composition);

/// The compositional power transform z = H (D d^alpha - 1)/alpha, with the
/// alpha-powered closure d^alpha; ilr (= exact alpha->0 limit H clr d), clr
/// and eda as special kinds. Zeros are allowed only when alpha > 0.
Vector alpha_transform(const Vector& composition, const TransformSpec& spec);

struct InverseResult {
  Vector composition;   // valid simplex point (closure applied)
  bool clamped = false; // some nu component went negative and was zeroed
};

/// Inverse transform. For alpha > 0, nu = alpha H^T z + 1; negative nu
/// components (forecasts can leave the transform's image) are clamped to 0
/// before the 1/alpha power and closure. Throws degenerate_inverse_error
/// when everything clamps.
InverseResult alpha_inverse(const Vector& z, const TransformSpec& spec);

/// Row-wise transform of an n x D matrix of compositions; n x p result.
Matrix transform_series(const Matrix& compositions, const TransformSpec& spec);

/// Row-wise inverse; `clamp_count`, when given, accumulates the number of
/// rows where clamping occurred.
Matrix inverse_transform_series(const Matrix& z, const TransformSpec& spec,
                                int* clamp_count = nullptr);

}  // namespace coda
