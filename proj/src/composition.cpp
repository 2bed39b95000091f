#include "coda/composition.hpp"

#include "coda/errors.hpp"

#include <cmath>
#include <sstream>

namespace coda {

Composition::Composition(Vector values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw invalid_dimension_error("composition needs at least 2 parts");
  }
  if ((values_.array() < 0.0).any()) {
    throw domain_error("composition has a negative part");
  }
  const double total = values_.sum();
  if (total <= 0.0) {
    throw domain_error("composition sums to zero");
  }
  if (std::abs(total - 1.0) > kClosureTolerance) {
    renormalized_ = true;
  }
  values_ /= total;
}

TransformSpec TransformSpec::make_alpha(double alpha, int dim) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw invalid_parameter_error("alpha must lie in [0, 1]");
  }
  return {TransformKind::alpha, alpha, dim};
}

double TransformSpec::effective_alpha() const {
  switch (kind) {
    case TransformKind::alpha: return alpha;
    case TransformKind::ilr:
    case TransformKind::clr: return 0.0;
    case TransformKind::eda: return 1.0;
  }
  return 0.0;
}

std::string TransformSpec::name() const {
  switch (kind) {
    case TransformKind::alpha: {
      std::ostringstream os;
      os << "alpha(" << format_number(alpha) << ")";
      return os.str();
    }
    case TransformKind::ilr: return "ilr";
    case TransformKind::clr: return "clr";
    case TransformKind::eda: return "eda";
  }
  return "?";
}

Matrix helmert_submatrix(int dim) {
  if (dim < 2) {
    throw invalid_dimension_error("Helmert sub-matrix needs dim >= 2");
  }
  Matrix h = Matrix::Zero(dim - 1, dim);
  for (int k = 1; k < dim; ++k) {
    const double v = 1.0 / std::sqrt(static_cast<double>(k) * (k + 1));
    for (int j = 0; j < k; ++j) h(k - 1, j) = v;
    h(k - 1, k) = -static_cast<double>(k) * v;
  }
  return h;
}

Vector clr_transform(const Vector& d) {
  if (d.size() < 2) {
    throw invalid_dimension_error("clr needs at least 2 parts");
  }
  if ((d.array() <= 0.0).any()) {
    throw zero_in_log_error("clr undefined: zero or negative part");
  }
  const Vector logs = d.array().log();
  return logs.array() - logs.mean();
}

namespace {

// alpha-powered closure of a non-negative vector.
Vector power_closure(const Vector& d, double alpha) {
  Vector powered = d.array().pow(alpha);
  const double total = powered.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw numeric_error("power closure degenerated");
  }
  return powered / total;
}

void check_spec(const TransformSpec& spec, int dim) {
  if (spec.dim != dim) {
    throw invalid_dimension_error("transform spec dimension mismatch");
  }
  if (spec.kind == TransformKind::alpha && (spec.alpha < 0.0 || spec.alpha > 1.0)) {
    throw invalid_parameter_error("alpha must lie in [0, 1]");
  }
}

}  // namespace

Vector alpha_transform(const Vector& d, const TransformSpec& spec) {
  check_spec(spec, static_cast<int>(d.size()));
  const int dim = spec.dim;
  const double a = spec.effective_alpha();

  if (spec.kind == TransformKind::clr) {
    return clr_transform(d);
  }
  const Matrix h = helmert_submatrix(dim);
  if (a == 0.0) {
    // exact ilr limit; a small-alpha evaluation would cancel catastrophically
    return h * clr_transform(d);
  }
  if ((d.array() < 0.0).any()) {
    throw domain_error("composition has a negative part");
  }
  const Vector closed = power_closure(d, a);
  const Vector bracket =
      (static_cast<double>(dim) * closed.array() - 1.0) / a;
  return h * bracket.matrix();
}

InverseResult alpha_inverse(const Vector& z, const TransformSpec& spec) {
  const int dim = spec.dim;
  if (dim < 2) {
    throw invalid_dimension_error("inverse transform needs dim >= 2");
  }
  if (static_cast<int>(z.size()) != spec.transformed_dim()) {
    throw invalid_dimension_error("inverse transform: wrong z length");
  }
  const double a = spec.effective_alpha();

  Vector parts;
  bool clamped = false;
  if (spec.kind == TransformKind::clr) {
    parts = z.array().exp();
  } else if (a == 0.0) {
    const Matrix h = helmert_submatrix(dim);
    parts = (h.transpose() * z).array().exp();
  } else {
    const Matrix h = helmert_submatrix(dim);
    Vector nu = a * (h.transpose() * z) + Vector::Ones(dim);
    for (int i = 0; i < dim; ++i) {
      if (nu[i] < 0.0) {
        nu[i] = 0.0;
        clamped = true;
      }
    }
    if (nu.maxCoeff() <= 0.0) {
      throw degenerate_inverse_error("inverse transform: all parts clamped to zero");
    }
    parts = nu.array().pow(1.0 / a);
  }
  const double total = parts.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw numeric_error("inverse transform produced a non-finite composition");
  }
  return {parts / total, clamped};
}

Matrix transform_series(const Matrix& compositions, const TransformSpec& spec) {
  const int n = static_cast<int>(compositions.rows());
  Matrix z(n, spec.transformed_dim());
  for (int t = 0; t < n; ++t) {
    z.row(t) = alpha_transform(compositions.row(t).transpose(), spec).transpose();
  }
  return z;
}

Matrix inverse_transform_series(const Matrix& z, const TransformSpec& spec,
                                int* clamp_count) {
  const int n = static_cast<int>(z.rows());
  Matrix d(n, spec.dim);
  for (int t = 0; t < n; ++t) {
    InverseResult r = alpha_inverse(z.row(t).transpose(), spec);
    d.row(t) = r.composition.transpose();
    if (clamp_count && r.clamped) ++*clamp_count;
  }
  return d;
}

}  // namespace coda
