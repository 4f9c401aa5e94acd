#pragma once

#include <stdexcept>
#include <string>

namespace qcool {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rectangular kind asked for a dual-side operation.
struct non_realizable_error : error {
  using error::error;
};

struct domain_error : error {
  using error::error;
};

struct dimension_error : error {
  using error::error;
};

struct parse_error : error {
  parse_error(const std::string& what, int line)
      : error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line(line) {}
  int line;
};

struct config_error : error {
  using error::error;
};

// D-hat too small to divide by.
struct degenerate_estimate_error : error {
  degenerate_estimate_error(const std::string& what, double d_hat, double floor)
      : error(what), d_hat(d_hat), floor(floor) {}
  double d_hat;
  double floor;
};

}  // namespace qcool
