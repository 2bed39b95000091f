#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace coda {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;  // rows = years, cols = ages unless noted

// Locale-independent "%.12g"-style formatting used for every numeric output
// (CSV, JSON, logs). 12 significant digits.
std::string format_number(double x);

// Parse a C-locale decimal; throws coda::parse_error on garbage.
double parse_number(const std::string& token);

// Empirical quantile with linear interpolation between order statistics
// (position (n-1)p, the common "type 7" convention). `sorted` must be
// ascending and non-empty.
double quantile_linear(const std::vector<double>& sorted, double p);

inline constexpr double kClosureTolerance = 1e-9;

}  // namespace coda
