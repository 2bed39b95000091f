#include "coda/errors.hpp"
#include "coda/lifetable.hpp"

#include "support/synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace coda;

TEST_SUITE_BEGIN("lifetable");

namespace {

std::string small_hmd(int years = 2) {
  // complete miniature table, 111 ages per year
  std::ostringstream os;
  os << "Testland, Life tables (period 1x1), Females\tLast modified: test\n\n";
  os << "  Year          Age             mx              qx              ax"
        "              lx              dx              Lx              Tx"
        "              ex\n";
  for (int year = 1921; year < 1921 + years; ++year) {
    double l = 1e5;
    for (int age = 0; age <= 110; ++age) {
      double q = age == 0 ? 0.065 : std::min(1.0, 0.002 + age * 0.004);
      if (age == 110) q = 1.0;
      const double d = l * q;
      os << "  " << year << "  " << (age == 110 ? "110+" : std::to_string(age))
         << "  " << q / (1 - 0.5 * q) << "  " << q << "  0.5  " << std::round(l)
         << "  " << std::round(d) << "  " << std::round(l - d / 2) << "  1000  10.0\n";
      l -= d;
    }
  }
  return os.str();
}

}  // namespace

TEST_CASE("parses HMD rows into records") {
  std::istringstream in(small_hmd(1));
  const auto records = parse_hmd_lifetable(in);
  REQUIRE(records.size() == 111);
  CHECK(records[0].year == 1921);
  CHECK(records[0].age == 0);
  CHECK(records[0].qx == doctest::Approx(0.065));
  CHECK(records[0].lx == doctest::Approx(1e5));
  CHECK(records[110].age == 110);  // "110+" sentinel
  CHECK(records[110].qx == doctest::Approx(1.0));
}

TEST_CASE("malformed rows carry line numbers") {
  std::istringstream in(
      "Banner\n\n  Year Age mx qx ax lx dx Lx Tx ex\n"
      "  1921 0 0.1 0.1 0.5\n");  // 5 columns
  try {
    parse_hmd_lifetable(in);
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("missing qx is a data gap") {
  std::istringstream in(
      "Banner\n\n  Year Age mx qx ax lx dx Lx Tx ex\n"
      "  1921 0 0.1 . 0.5 100000 6500 96750 100 1.0\n");
  CHECK_THROWS_AS(parse_hmd_lifetable(in), data_gap_error);
}

TEST_CASE("sex column variant filters rows") {
  std::istringstream in(
      "Banner\n\n  Year Age mx qx ax lx dx Lx Tx ex\n"
      "  Female 1921 0 0.1 0.065 0.5 100000 6500 96750 100 1.0\n"
      "  Male 1921 0 0.1 0.080 0.5 100000 8000 96000 100 1.0\n");
  const auto records = parse_hmd_lifetable(in, std::string("Male"));
  REQUIRE(records.size() == 1);
  CHECK(records[0].qx == doctest::Approx(0.08));
}

TEST_CASE("rebuild from qx follows the survivorship recursion") {
  std::vector<double> qx(kAgeGridSize, 0.0);
  qx[0] = 0.01;
  for (int age = 1; age <= 110; ++age) qx[age] = 0.02;
  const Vector d = rebuild_dx_from_qx(qx, 1e5);
  CHECK(d[0] == doctest::Approx(1000.0));
  // l(1) = 99000, d(1) = 99000 * 0.02
  CHECK(d[1] == doctest::Approx(99000.0 * 0.02));
  // telescoping: deaths exhaust the radix
  CHECK(d.sum() == doctest::Approx(1e5).epsilon(1e-9));
}

TEST_CASE("absorbing q0 = 1 puts everything at age 0") {
  std::vector<double> qx(kAgeGridSize, 0.5);
  qx[0] = 1.0;
  const Vector d = rebuild_dx_from_qx(qx, 1e5);
  CHECK(d[0] == doctest::Approx(1e5));
  CHECK(d.tail(110).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("q outside [0,1] rejected") {
  std::vector<double> qx(kAgeGridSize, 0.5);
  qx[40] = 1.2;
  CHECK_THROWS_AS(rebuild_dx_from_qx(qx, 1e5), domain_error);
}

TEST_CASE("build_series from a complete table") {
  std::istringstream in(small_hmd(3));
  const auto records = parse_hmd_lifetable(in);
  const CompositionSeries series = build_series(records);
  CHECK(series.n() == 3);
  CHECK(series.dim() == 111);
  CHECK(series.years == std::vector<int>{1921, 1922, 1923});
  for (int t = 0; t < series.n(); ++t) {
    CHECK(series.values.row(t).sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("life-table identity holds on the fixture") {
  const CompositionSeries series = testsupport::load_fixture("AUS_female_lt.txt");
  REQUIRE(series.n() == 100);
  REQUIRE(series.dim() == 111);
  // monotone survivorship: l(x+1) <= l(x), and l runs out exactly at 110+
  for (int t = 0; t < series.n(); t += 17) {
    double l = 1.0;
    for (int x = 0; x < series.dim(); ++x) {
      const double next = l - series.values(t, x);
      CHECK(next <= l + 1e-12);
      l = next;
    }
    CHECK(std::abs(l) < 1e-9);
  }
}

TEST_CASE("missing cell names the gap") {
  std::istringstream in(small_hmd(1));
  auto records = parse_hmd_lifetable(in);
  records.erase(records.begin() + 40);  // drop age 40
  try {
    build_series(records);
    FAIL("expected data_gap_error");
  } catch (const data_gap_error& e) {
    CHECK(std::string(e.what()).find("1921") != std::string::npos);
    CHECK(std::string(e.what()).find("40") != std::string::npos);
  }
}

TEST_CASE("rebuilt rows have fewer zero cells than raw rounded dx") {
  const CompositionSeries rebuilt = testsupport::load_fixture("AUS_female_lt.txt", true);
  const CompositionSeries raw = testsupport::load_fixture("AUS_female_lt.txt", false);
  CHECK(rebuilt.zero_cells() == 0);
  CHECK(raw.zero_cells() > 0);
  CHECK(rebuilt.zero_cells() < raw.zero_cells());
}

TEST_CASE("series CSV round trip") {
  const CompositionSeries series = testsupport::load_fixture("AUS_male_lt.txt");
  std::ostringstream out;
  write_series_csv(series, out);
  std::istringstream in(out.str());
  const CompositionSeries back = read_series_csv(in);
  REQUIRE(back.n() == series.n());
  REQUIRE(back.dim() == series.dim());
  CHECK(back.radix == series.radix);
  CHECK(back.years == series.years);
  CHECK(back.ages == series.ages);
  CHECK((back.values - series.values).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("series CSV format errors") {
  std::istringstream empty("");
  CHECK_THROWS_AS(read_series_csv(empty), format_error);

  std::istringstream header_only("year,age,value\n");
  try {
    read_series_csv(header_only);
    FAIL("expected format_error");
  } catch (const format_error& e) {
    CHECK(std::string(e.what()).find("year,age,value") != std::string::npos);
  }

  std::istringstream bad_header("time,age,value\n1921,0,0.5\n");
  CHECK_THROWS_AS(read_series_csv(bad_header), format_error);

  std::istringstream missing_value("year,age,value\n1921,0,.\n");
  CHECK_THROWS_AS(read_series_csv(missing_value), format_error);

  std::istringstream ragged(
      "year,age,value\n1921,0,0.5\n1921,1,0.5\n1922,0,1.0\n");
  CHECK_THROWS_AS(read_series_csv(ragged), format_error);
}

TEST_SUITE_END();
