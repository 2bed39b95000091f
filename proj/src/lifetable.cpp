#include "coda/lifetable.hpp"

#include "coda/composition.hpp"
#include "coda/errors.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace coda {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

bool is_missing(const std::string& tok) { return tok == "."; }

int parse_age_token(const std::string& tok, long line_no) {
  if (tok == "110+") return kMaxAge;
  // tolerate other open groups spelled like "95+" only at 110
  try {
    const double v = parse_number(tok);
    const int age = static_cast<int>(v);
    if (v != age || age < 0 || age > kMaxAge) {
      throw parse_error("age out of range: '" + tok + "'", line_no);
    }
    return age;
  } catch (const parse_error&) {
    throw parse_error("bad age token: '" + tok + "'", line_no);
  }
}

}  // namespace

std::vector<std::string> canonical_age_labels() {
  std::vector<std::string> ages;
  ages.reserve(kAgeGridSize);
  for (int a = 0; a < kMaxAge; ++a) ages.push_back(std::to_string(a));
  ages.push_back("110+");
  return ages;
}

int CompositionSeries::zero_cells() const {
  return static_cast<int>((values.array() == 0.0).count());
}

CompositionSeries CompositionSeries::slice(int first, int count) const {
  if (first < 0 || count < 0 || first + count > n()) {
    throw domain_error("series slice out of range");
  }
  CompositionSeries out;
  out.years.assign(years.begin() + first, years.begin() + first + count);
  out.ages = ages;
  out.values = values.middleRows(first, count);
  out.radix = radix;
  out.any_renormalized = any_renormalized;
  return out;
}

std::vector<LifeTableRecord> parse_hmd_lifetable(
    std::istream& input, const std::optional<std::string>& sex_filter) {
  std::vector<LifeTableRecord> records;
  std::string line;
  long line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    const bool leading_numeric =
        std::isdigit(static_cast<unsigned char>(toks[0][0])) != 0;
    std::size_t base = 0;
    std::optional<std::string> row_sex;
    if (!leading_numeric && toks.size() == 11) {
      // data row with a leading Sex column
      row_sex = toks[0];
      base = 1;
    } else if (!leading_numeric) {
      // header lines: country banner and the column-name row
      if (toks[0] == "Year" || line_no <= 2) continue;
      throw parse_error("unexpected non-numeric row", line_no);
    } else if (toks.size() != 10) {
      std::ostringstream os;
      os << "life-table row has " << toks.size() << " columns, expected 10";
      throw parse_error(os.str(), line_no);
    }
    if (sex_filter && row_sex && *row_sex != *sex_filter) continue;

    LifeTableRecord rec;
    try {
      rec.year = static_cast<int>(parse_number(toks[base + 0]));
      rec.age = parse_age_token(toks[base + 1], line_no);
      const std::string& qx_tok = toks[base + 3];
      if (is_missing(qx_tok)) {
        std::ostringstream os;
        os << "missing qx at year " << rec.year << " age " << toks[base + 1];
        throw data_gap_error(os.str());
      }
      rec.qx = parse_number(qx_tok);
      if (!is_missing(toks[base + 5])) rec.lx = parse_number(toks[base + 5]);
      if (!is_missing(toks[base + 6])) rec.dx = parse_number(toks[base + 6]);
    } catch (const parse_error& e) {
      throw parse_error(std::string(e.what()), line_no);
    }
    if (rec.qx < 0.0 || rec.qx > 1.0) {
      std::ostringstream os;
      os << "qx out of [0,1] at year " << rec.year << " age " << rec.age;
      throw parse_error(os.str(), line_no);
    }
    records.push_back(rec);
  }
  return records;
}

Vector rebuild_dx_from_qx(const std::vector<double>& qx, double radix) {
  if (static_cast<int>(qx.size()) != kAgeGridSize) {
    throw domain_error("rebuild_dx_from_qx needs all 111 single-year ages");
  }
  if (radix <= 0.0) throw domain_error("radix must be positive");
  Vector d(kAgeGridSize);
  double l = radix;
  for (int x = 0; x < kAgeGridSize; ++x) {
    double q = qx[x];
    if (q < 0.0 || q > 1.0 || !std::isfinite(q)) {
      throw domain_error("qx outside [0,1] at age " + std::to_string(x));
    }
    if (x == kMaxAge) q = 1.0;  // closes the table
    d[x] = l * q;
    l *= (1.0 - q);
  }
  return d;
}

CompositionSeries build_series(const std::vector<LifeTableRecord>& records,
                               const BuildOptions& options) {
  if (records.empty()) throw data_gap_error("no life-table records");

  std::map<int, std::vector<const LifeTableRecord*>> by_year;
  for (const auto& r : records) {
    auto& rows = by_year[r.year];
    if (rows.empty()) rows.assign(kAgeGridSize, nullptr);
    if (r.age < 0 || r.age >= kAgeGridSize) continue;
    rows[r.age] = &r;
  }

  CompositionSeries series;
  series.ages = canonical_age_labels();
  series.radix = options.radix;
  series.years.reserve(by_year.size());

  const int n = static_cast<int>(by_year.size());
  series.values.resize(n, kAgeGridSize);

  int row_index = 0;
  int prev_year = 0;
  for (const auto& [year, rows] : by_year) {
    if (row_index > 0 && year != prev_year + 1) {
      std::ostringstream os;
      os << "gap in years between " << prev_year << " and " << year;
      throw data_gap_error(os.str());
    }
    prev_year = year;
    Vector counts(kAgeGridSize);
    if (options.rebuild_from_qx) {
      std::vector<double> qx(kAgeGridSize);
      for (int a = 0; a < kAgeGridSize; ++a) {
        if (!rows[a]) {
          std::ostringstream os;
          os << "missing record at year " << year << " age " << a;
          throw data_gap_error(os.str());
        }
        qx[a] = rows[a]->qx;
      }
      counts = rebuild_dx_from_qx(qx, options.radix);
    } else {
      for (int a = 0; a < kAgeGridSize; ++a) {
        if (!rows[a] || !std::isfinite(rows[a]->dx)) {
          std::ostringstream os;
          os << "missing dx at year " << year << " age " << a;
          throw data_gap_error(os.str());
        }
        counts[a] = rows[a]->dx;
      }
    }
    Composition comp(counts / options.radix);
    series.any_renormalized = series.any_renormalized || comp.renormalized();
    series.values.row(row_index) = comp.values().transpose();
    series.years.push_back(year);
    ++row_index;
  }
  return series;
}

void write_series_csv(const CompositionSeries& series, std::ostream& out) {
  out << "# radix=" << format_number(series.radix) << "\n";
  out << "year,age,value\n";
  for (int t = 0; t < series.n(); ++t) {
    for (int a = 0; a < series.dim(); ++a) {
      out << series.years[t] << ',' << series.ages[a] << ','
          << format_number(series.values(t, a)) << "\n";
    }
  }
}

CompositionSeries read_series_csv(std::istream& input) {
  std::string line;
  long line_no = 0;
  double radix = kDefaultRadix;
  bool saw_header = false;
  // (year, age label) -> value, insertion-ordered through maps below
  std::map<int, std::map<std::string, double>> cells;
  std::vector<std::string> age_order;

  while (std::getline(input, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find("radix=");
      if (eq != std::string::npos) radix = parse_number(line.substr(eq + 6));
      continue;
    }
    std::vector<std::string> toks;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) toks.push_back(tok);
    if (!saw_header) {
      if (toks.size() != 3 || toks[0] != "year" || toks[1] != "age" ||
          toks[2] != "value") {
        throw format_error("series CSV must start with header year,age,value");
      }
      saw_header = true;
      continue;
    }
    if (toks.size() != 3) {
      throw format_error("series CSV row " + std::to_string(line_no) +
                         " does not have 3 columns");
    }
    if (toks[2] == ".") {
      throw format_error("'.' value at row " + std::to_string(line_no));
    }
    const int year = static_cast<int>(parse_number(toks[0]));
    auto& row = cells[year];
    if (row.find(toks[1]) != row.end()) {
      throw format_error("duplicate cell at row " + std::to_string(line_no));
    }
    if (std::find(age_order.begin(), age_order.end(), toks[1]) == age_order.end()) {
      age_order.push_back(toks[1]);
    }
    row[toks[1]] = parse_number(toks[2]);
  }
  if (!saw_header) {
    throw format_error("empty series CSV; expected header year,age,value");
  }
  if (cells.empty()) {
    throw format_error("series CSV has a header but no rows (year,age,value)");
  }

  CompositionSeries series;
  series.radix = radix;
  series.ages = age_order;
  const int n = static_cast<int>(cells.size());
  const int dim = static_cast<int>(age_order.size());
  if (dim < 2) throw format_error("series CSV needs at least 2 ages");
  series.values.resize(n, dim);
  series.years.reserve(n);

  int row_index = 0;
  int prev_year = 0;
  for (const auto& [year, row] : cells) {
    if (row_index > 0 && year != prev_year + 1) {
      throw format_error("years not consecutive at " + std::to_string(year));
    }
    prev_year = year;
    if (static_cast<int>(row.size()) != dim) {
      throw format_error("inconsistent age grid at year " + std::to_string(year));
    }
    for (int a = 0; a < dim; ++a) {
      const auto it = row.find(series.ages[a]);
      if (it == row.end()) {
        throw format_error("inconsistent age grid at year " + std::to_string(year));
      }
      series.values(row_index, a) = it->second;
    }
    Composition comp(series.values.row(row_index).transpose());
    series.any_renormalized = series.any_renormalized || comp.renormalized();
    series.values.row(row_index) = comp.values().transpose();
    series.years.push_back(year);
    ++row_index;
  }
  return series;
}

}  // namespace coda
