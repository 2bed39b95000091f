#pragma once

#include <stdexcept>
#include <string>

namespace coda {

// Base type for every error the library raises on bad input or failed
// computation. Callers that just want "did it work" can catch this.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

class invalid_dimension_error : public error {
 public:
  using error::error;
};

// log of a zero or negative component (clr, or alpha-transform at alpha = 0)
class zero_in_log_error : public error {
 public:
  using error::error;
};

class invalid_parameter_error : public error {
 public:
  using error::error;
};

// inverse transform collapsed: every component clamped to zero
class degenerate_inverse_error : public error {
 public:
  using error::error;
};

class domain_error : public error {
 public:
  using error::error;
};

class parse_error : public error {
 public:
  parse_error(const std::string& what, long line) : error(what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_ = 0;
};

class data_gap_error : public error {
 public:
  using error::error;
};

class format_error : public error {
 public:
  using error::error;
};

class numeric_error : public error {
 public:
  using error::error;
};

class fit_error : public error {
 public:
  using error::error;
};

class tuning_error : public error {
 public:
  using error::error;
};

class config_error : public error {
 public:
  using error::error;
};

}  // namespace coda
