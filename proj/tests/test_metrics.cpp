#include "coda/errors.hpp"
#include "coda/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace coda;

TEST_SUITE_BEGIN("metrics");

namespace {

Matrix as_row(std::initializer_list<double> values) {
  Matrix m(1, static_cast<int>(values.size()));
  int j = 0;
  for (double v : values) m(0, j++) = v;
  return m;
}

}  // namespace

TEST_CASE("symmetric KLD hand value") {
  const Matrix d = as_row({0.5, 0.3, 0.2});
  const Matrix dh = as_row({0.4, 0.4, 0.2});
  // frozen from a 30-digit mpmath evaluation of
  // (1/3) [0.5 ln(0.5/0.4) + 0.3 ln(0.3/0.4) + 0.4 ln(0.4/0.5) + 0.4 ln(0.4/0.3)]
  const HorizonValues v = kld(d, dh);
  CHECK(v.averaged == doctest::Approx(0.0170275208).epsilon(1e-4));
  CHECK(v.per_horizon[0] == doctest::Approx(0.0170275208).epsilon(1e-4));
  // symmetry
  CHECK(kld(dh, d).averaged == doctest::Approx(v.averaged).epsilon(1e-12));
  // identity
  CHECK(kld(d, d).averaged == doctest::Approx(0.0));
}

TEST_CASE("JSD hand values") {
  const Matrix d = as_row({0.5, 0.3, 0.2});
  const Matrix dh = as_row({0.4, 0.4, 0.2});
  // arithmetic delta: frozen oracle value
  CHECK(jsd(d, dh, JsdMean::arithmetic).averaged ==
        doctest::Approx(0.0021223994).epsilon(1e-4));
  // geometric delta equals sym-KLD/4 exactly (ln sqrt = half log)
  CHECK(jsd(d, dh, JsdMean::geometric).averaged ==
        doctest::Approx(0.0042568802).epsilon(1e-4));
  CHECK(jsd(d, dh, JsdMean::geometric).averaged ==
        doctest::Approx(kld(d, dh).averaged / 4.0).epsilon(1e-12));
  // identities
  CHECK(jsd(d, d, JsdMean::arithmetic).averaged == doctest::Approx(0.0));
  CHECK(jsd(d, d, JsdMean::geometric).averaged == doctest::Approx(0.0));
}

TEST_CASE("KLD/JSD positivity and the log-sum bound") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> uniform(1e-3, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    Vector a(6), b(6);
    for (int i = 0; i < 6; ++i) {
      a[i] = uniform(rng);
      b[i] = uniform(rng);
    }
    a /= a.sum();
    b /= b.sum();
    const double k = kld_curve(a, b);
    const double ja = jsd_curve(a, b, JsdMean::arithmetic);
    const double jg = jsd_curve(a, b, JsdMean::geometric);
    CHECK(k >= 0.0);
    CHECK(ja >= 0.0);
    CHECK(jg >= 0.0);
    CHECK(ja <= 0.5 * k + 1e-15);
  }
}

TEST_CASE("floor sensitivity is negligible on positive data") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> uniform(1e-3, 1.0);
  Vector a(10), b(10);
  for (int i = 0; i < 10; ++i) {
    a[i] = uniform(rng);
    b[i] = uniform(rng);
  }
  a /= a.sum();
  b /= b.sum();
  CHECK(std::abs(kld_curve(a, b, kLogFloor) - kld_curve(a, b, kLogFloor / 2)) <
        1e-6);
}

TEST_CASE("tail averaging over remaining horizons") {
  // two horizons: KLD(1) averages both target rows, KLD(2) only the last
  Matrix actual(2, 3), forecast(2, 3);
  actual << 0.5, 0.3, 0.2, 0.5, 0.3, 0.2;
  forecast << 0.5, 0.3, 0.2, 0.4, 0.4, 0.2;  // first row perfect
  const HorizonValues v = kld(actual, forecast);
  const double pair_value = 0.0170275208;
  CHECK(v.per_horizon[0] == doctest::Approx(pair_value / 2).epsilon(1e-4));
  CHECK(v.per_horizon[1] == doctest::Approx(pair_value).epsilon(1e-4));
  CHECK(v.averaged ==
        doctest::Approx((v.per_horizon[0] + v.per_horizon[1]) / 2).epsilon(1e-12));
}

TEST_CASE("goodness of fit identities") {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix actual(20, 5);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 5; ++j) actual(i, j) = gauss(rng);

  SUBCASE("perfect fit") {
    const GoodnessOfFit g = goodness_of_fit(actual, actual);
    CHECK(g.r2 == doctest::Approx(1.0));
    CHECK(g.rmse == doctest::Approx(0.0));
  }
  SUBCASE("age-wise mean gives R2 = 0") {
    Matrix fitted(20, 5);
    const Vector means = actual.colwise().mean();
    fitted.rowwise() = means.transpose();
    const GoodnessOfFit g = goodness_of_fit(actual, fitted);
    CHECK(g.r2 == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("zero variance is an error") {
    Matrix constant = Matrix::Constant(10, 4, 0.25);
    CHECK_THROWS_AS(goodness_of_fit(constant, constant), domain_error);
  }
}

TEST_CASE("interval score hand value") {
  // lb=1, ub=2, d=0.5, gamma=0.2: (2-1) + (2/0.2)(1-0.5) = 6
  CHECK(interval_score(1.0, 2.0, 0.5, 0.2) == doctest::Approx(6.0));
  // inside the band: width only
  CHECK(interval_score(1.0, 2.0, 1.5, 0.2) == doctest::Approx(1.0));
  // boundary: strict inequalities, no penalty
  CHECK(interval_score(1.0, 2.0, 1.0, 0.2) == doctest::Approx(1.0));
  CHECK(interval_score(1.0, 2.0, 2.0, 0.2) == doctest::Approx(1.0));
}

TEST_CASE("interval score is minimized by the degenerate covering band") {
  const double d = 0.37;
  const double best = interval_score(d, d, d, 0.2);
  CHECK(best == doctest::Approx(0.0));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    double lo = uniform(rng), hi = uniform(rng);
    if (lo > hi) std::swap(lo, hi);
    CHECK(interval_score(lo, hi, d, 0.2) >= best);
  }
  // widening a covering band strictly increases the score
  CHECK(interval_score(d - 0.1, d + 0.1, d, 0.2) <
        interval_score(d - 0.2, d + 0.2, d, 0.2));
}

TEST_CASE("interval metrics coverage accounting") {
  Matrix actual(2, 4), lower(2, 4), upper(2, 4);
  actual << 0.1, 0.2, 0.3, 0.4, 0.1, 0.2, 0.3, 0.4;
  lower = actual.array() - 0.05;
  upper = actual.array() + 0.05;

  SUBCASE("full coverage: ECP 1, CPD gamma") {
    const IntervalMetrics m = interval_metrics(actual, lower, upper, 0.2);
    for (double e : m.ecp) CHECK(e == doctest::Approx(1.0));
    for (double c : m.cpd) CHECK(c == doctest::Approx(0.2));
    CHECK(m.cpd_avg == doctest::Approx(0.2));
    // score = mean width
    CHECK(m.score_avg == doctest::Approx(0.1));
  }
  SUBCASE("one miss in the last row") {
    Matrix shifted = actual;
    shifted(1, 3) = upper(1, 3) + 0.01;
    const IntervalMetrics m = interval_metrics(shifted, lower, upper, 0.2);
    // h=2 only sees the last row: 1 of 4 cells outside
    CHECK(m.ecp[1] == doctest::Approx(0.75));
    // h=1 averages both rows: 1 of 8 cells outside
    CHECK(m.ecp[0] == doctest::Approx(1.0 - 1.0 / 8.0));
  }
  SUBCASE("crossed bounds rejected") {
    Matrix bad = lower;
    bad(0, 0) = upper(0, 0) + 1.0;
    CHECK_THROWS_AS(interval_metrics(actual, bad, upper, 0.2), domain_error);
  }
  SUBCASE("bad gamma rejected") {
    CHECK_THROWS_AS(interval_metrics(actual, lower, upper, 0.0), domain_error);
    CHECK_THROWS_AS(interval_metrics(actual, lower, upper, 1.0), domain_error);
  }
}

TEST_CASE("shape mismatch rejected") {
  Matrix a = Matrix::Constant(2, 3, 0.3);
  Matrix b = Matrix::Constant(3, 2, 0.3);
  CHECK_THROWS_AS(kld(a, b), domain_error);
  CHECK_THROWS_AS(jsd(a, b, JsdMean::arithmetic), domain_error);
  CHECK_THROWS_AS(goodness_of_fit(a, b), domain_error);
}

TEST_SUITE_END();
