#pragma once

#include "coda/common.hpp"

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace coda {

inline constexpr int kMaxAge = 110;       // "110+" open age group
inline constexpr int kAgeGridSize = 111;  // single-year ages 0..110+
inline constexpr double kDefaultRadix = 1e5;

/// One (year, age) row of an HMD-style period life table. Only the fields
/// the pipeline needs are kept; missing ('.') numeric fields come through
/// as NaN except qx, which is required.
struct LifeTableRecord {
  int year = 0;
  int age = 0;  // 110 encodes "110+"
  double qx = 0.0;
  double dx = std::numeric_limits<double>::quiet_NaN();
  double lx = std::numeric_limits<double>::quiet_NaN();
};

/// n x D matrix of yearly death-count compositions on the age grid 0..110+,
/// rows closed to sum one; the radix is carried as metadata for I/O.
struct CompositionSeries {
  std::vector<int> years;          // strictly increasing, consecutive
  std::vector<std::string> ages;   // "0", "1", ..., "110+"
  Matrix values;                   // n x D, each row sums to 1
  double radix = kDefaultRadix;
  bool any_renormalized = false;   // some input row needed renormalizing

  int n() const { return static_cast<int>(values.rows()); }
  int dim() const { return static_cast<int>(values.cols()); }
  int zero_cells() const;

  // First m years (fitting windows copy their data, so code holding a
  // window physically cannot read the holdout).
  CompositionSeries head(int m) const { return slice(0, m); }
  CompositionSeries slice(int first, int count) const;
};

std::vector<std::string> canonical_age_labels();

/// Parse an HMD period life table (columns Year Age mx qx ax lx dx Lx Tx ex,
/// 1-2 header lines, "110+" sentinel, '.' for missing). An optional leading
/// Sex column is tolerated; `sex_filter` then selects matching rows.
std::vector<LifeTableRecord> parse_hmd_lifetable(
    std::istream& input, const std::optional<std::string>& sex_filter = {});

/// Death counts for one year from the q column: l(0) = radix,
/// d(x) = l(x) q(x), l(x+1) = l(x)(1 - q(x)), with q(110) forced to 1.
/// Output is on the radix scale and telescopes to the radix exactly.
Vector rebuild_dx_from_qx(const std::vector<double>& qx, double radix);

struct BuildOptions {
  bool rebuild_from_qx = true;  // default per the estimated-count path
  double radix = kDefaultRadix;
};

/// Assemble records into a CompositionSeries on the canonical 0..110+ grid.
/// Every year in the covered range must be complete; gaps raise
/// data_gap_error naming the missing (year, age).
CompositionSeries build_series(const std::vector<LifeTableRecord>& records,
                               const BuildOptions& options = {});

/// Long-format CSV (year,age,value), 12 significant digits, preceded by a
/// "# radix=..." comment so the round trip is lossless.
void write_series_csv(const CompositionSeries& series, std::ostream& out);
CompositionSeries read_series_csv(std::istream& input);

}  // namespace coda
