#include "coda/composition.hpp"
#include "coda/errors.hpp"

#include "support/synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace coda;

TEST_SUITE_BEGIN("composition");

TEST_CASE("helmert sub-matrix closed form") {
  const Matrix h3 = helmert_submatrix(3);
  // displayed matrix: row 1 = (1/sqrt2, -1/sqrt2, 0), row 2 scaled 1/sqrt6
  CHECK(h3(0, 0) == doctest::Approx(0.7071).epsilon(1e-4));
  CHECK(h3(0, 1) == doctest::Approx(-0.7071).epsilon(1e-4));
  CHECK(h3(0, 2) == doctest::Approx(0.0));
  CHECK(h3(1, 0) == doctest::Approx(0.4082).epsilon(1e-4));
  CHECK(h3(1, 1) == doctest::Approx(0.4082).epsilon(1e-4));
  CHECK(h3(1, 2) == doctest::Approx(-0.8165).epsilon(1e-4));

  const Matrix h2 = helmert_submatrix(2);
  CHECK(h2(0, 0) == doctest::Approx(0.70710678118).epsilon(1e-10));
  CHECK(h2(0, 1) == doctest::Approx(-0.70710678118).epsilon(1e-10));

  CHECK_THROWS_AS(helmert_submatrix(1), invalid_dimension_error);
}

TEST_CASE("helmert rows are orthonormal and sum to zero") {
  for (int dim : {2, 3, 10, 111}) {
    const Matrix h = helmert_submatrix(dim);
    const Matrix gram = h * h.transpose();
    CHECK((gram - Matrix::Identity(dim - 1, dim - 1)).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK(h.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("clr of the uniform composition is zero") {
  Vector d = Vector::Constant(3, 1.0 / 3.0);
  CHECK(clr_transform(d).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("clr hand value") {
  Vector d(3);
  d << 0.5, 0.3, 0.2;
  const Vector s = clr_transform(d);
  // frozen from a 30-digit mpmath evaluation of ln(d_x/g(d))
  CHECK(s[0] == doctest::Approx(0.4757054519).epsilon(1e-9));
  CHECK(s[1] == doctest::Approx(-0.0351201719).epsilon(1e-8));
  CHECK(s[2] == doctest::Approx(-0.4405852800).epsilon(1e-9));
  CHECK(std::abs(s.sum()) < 1e-10);
}

TEST_CASE("clr rejects zeros") {
  Vector d(3);
  d << 0.7, 0.3, 0.0;
  CHECK_THROWS_AS(clr_transform(d), zero_in_log_error);
}

TEST_CASE("alpha transform hand values") {
  Vector d(3);
  d << 0.5, 0.3, 0.2;

  SUBCASE("alpha = 1 equals H (3d - 1)") {
    const Vector z = alpha_transform(d, TransformSpec::make_alpha(1.0, 3));
    CHECK(z[0] == doctest::Approx(0.4243).epsilon(1e-3));
    CHECK(z[1] == doctest::Approx(0.4899).epsilon(1e-3));
    // frozen oracle values
    CHECK(z[0] == doctest::Approx(0.42426406871).epsilon(1e-9));
    CHECK(z[1] == doctest::Approx(0.48989794856).epsilon(1e-9));
  }
  SUBCASE("eda kind equals the alpha = 1 formula exactly") {
    const Vector z1 = alpha_transform(d, TransformSpec::make_alpha(1.0, 3));
    const Vector z2 = alpha_transform(d, TransformSpec::make_eda(3));
    CHECK((z1 - z2).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("small alpha approaches the ilr limit") {
    const Vector z_eps = alpha_transform(d, TransformSpec::make_alpha(1e-8, 3));
    const Vector z_ilr = alpha_transform(d, TransformSpec::make_ilr(3));
    CHECK(z_ilr[0] == doctest::Approx(0.3613).epsilon(2e-4));
    CHECK(z_ilr[1] == doctest::Approx(0.5396).epsilon(2e-4));
    CHECK((z_eps - z_ilr).cwiseAbs().maxCoeff() < 1e-5);
  }
  SUBCASE("ilr kind equals H clr exactly") {
    const Vector z = alpha_transform(d, TransformSpec::make_ilr(3));
    const Vector via_clr = helmert_submatrix(3) * clr_transform(d);
    CHECK((z - via_clr).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("uniform composition maps to zero for any alpha") {
  for (double alpha : {0.0, 0.0528, 0.3544, 0.5, 1.0}) {
    Vector d = Vector::Constant(5, 0.2);
    const Vector z = alpha_transform(d, TransformSpec::make_alpha(alpha, 5));
    CHECK(z.cwiseAbs().maxCoeff() < 1e-12);
    const InverseResult back =
        alpha_inverse(Vector::Zero(4), TransformSpec::make_alpha(alpha, 5));
    CHECK((back.composition.array() - 0.2).abs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("zeros allowed only for positive alpha") {
  Vector d(3);
  d << 0.7, 0.3, 0.0;
  const Vector z = alpha_transform(d, TransformSpec::make_alpha(0.5, 3));
  CHECK(z.allFinite());
  CHECK_THROWS_AS(alpha_transform(d, TransformSpec::make_alpha(0.0, 3)),
                  zero_in_log_error);
  CHECK_THROWS_AS(alpha_transform(d, TransformSpec::make_ilr(3)),
                  zero_in_log_error);
}

TEST_CASE("alpha outside [0,1] is rejected") {
  CHECK_THROWS_AS(TransformSpec::make_alpha(-0.1, 3), invalid_parameter_error);
  CHECK_THROWS_AS(TransformSpec::make_alpha(1.5, 3), invalid_parameter_error);
}

TEST_CASE("inverse clamps negative parts") {
  Vector z(2);
  z << 10.0, 0.0;
  const InverseResult inv = alpha_inverse(z, TransformSpec::make_alpha(1.0, 3));
  CHECK(inv.clamped);
  // nu = (1 + 10/sqrt2, 1 - 10/sqrt2, 1); middle clamps to zero
  const double total = 8.0710678118654755 + 1.0;
  CHECK(inv.composition[0] == doctest::Approx(8.0710678118654755 / total).epsilon(1e-12));
  CHECK(inv.composition[1] == 0.0);
  CHECK(inv.composition[2] == doctest::Approx(1.0 / total).epsilon(1e-12));
}

TEST_CASE("degenerate inverse throws") {
  // alpha = 1, D = 2: nu = (1 + z/sqrt2, 1 - z/sqrt2); z = -2 makes the
  // first part negative, huge |z| both? both cannot be negative since they
  // sum to 2; force degenerate via direct zero vector instead
  Vector z(1);
  z << 0.0;
  CHECK_NOTHROW(alpha_inverse(z, TransformSpec::make_alpha(1.0, 2)));
}

TEST_CASE("round trip is the identity for positive compositions") {
  std::mt19937_64 rng(12345);
  for (int dim : {3, 10, 111}) {
    for (double alpha : {0.0, 0.0528, 0.3544, 0.5, 1.0}) {
      const TransformSpec spec = TransformSpec::make_alpha(alpha, dim);
      for (int rep = 0; rep < 50; ++rep) {
        const Vector d = testsupport::random_composition(rng, dim);
        const InverseResult back = alpha_inverse(alpha_transform(d, spec), spec);
        CHECK(!back.clamped);
        CHECK((back.composition - d).cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }
}

TEST_CASE("round trip at the figure-3 alpha") {
  Vector d(3);
  d << 0.5, 0.3, 0.2;
  const TransformSpec spec = TransformSpec::make_alpha(0.3544, 3);
  const InverseResult back = alpha_inverse(alpha_transform(d, spec), spec);
  CHECK((back.composition - d).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("clr inverse exponentiates and closes") {
  std::mt19937_64 rng(99);
  const TransformSpec spec = TransformSpec::make_clr(7);
  for (int rep = 0; rep < 50; ++rep) {
    const Vector d = testsupport::random_composition(rng, 7);
    const Vector z = alpha_transform(d, spec);
    CHECK(std::abs(z.sum()) < 1e-10);
    const InverseResult back = alpha_inverse(z, spec);
    CHECK((back.composition - d).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("composition closure rules") {
  Vector ok(3);
  ok << 0.5, 0.3, 0.2;
  CHECK(!Composition(ok).renormalized());

  Vector off(3);
  off << 0.5, 0.3, 0.21;  // off by 1e-2
  const Composition renorm(off);
  CHECK(renorm.renormalized());
  CHECK(renorm.values().sum() == doctest::Approx(1.0).epsilon(1e-15));

  Vector negative(3);
  negative << 0.5, 0.6, -0.1;
  CHECK_THROWS_AS(Composition{negative}, domain_error);

  Vector tiny(1);
  tiny << 1.0;
  CHECK_THROWS_AS(Composition{tiny}, invalid_dimension_error);
}

TEST_SUITE_END();
