#include "coda/common.hpp"

#include "coda/errors.hpp"
#include "coda/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace coda {

std::string format_number(double x) {
  // std::to_chars is locale-independent; general format, 12 significant digits
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), x,
                           std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& token) {
  double out = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto res = std::from_chars(first, last, out);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw parse_error("not a number: '" + token + "'", 0);
  }
  return out;
}

double quantile_linear(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw domain_error("quantile of empty sample");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double CounterRng::normal(std::uint64_t k) {
  const double u1 = uniform01(mix(k ^ 0x243f6a8885a308d3ULL));
  const double u2 = uniform01(mix(k ^ 0x13198a2e03707344ULL));
  const double r = std::sqrt(-2.0 * std::log(u1 + 0x1.0p-60));
  return r * std::cos(6.283185307179586476925287 * u2);
}

}  // namespace coda
