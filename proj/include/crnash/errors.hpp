#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace crnash {

// Error taxonomy mirrored by the CLI exit codes:
//   input problems -> 2, non-convergence -> 3, internal assertion -> 4.

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string msg, int line, int col)
      : std::runtime_error("parse error at line " + std::to_string(line) + ", col " +
                           std::to_string(col) + ": " + msg),
        line_(line),
        col_(col) {}

  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

class SpecError : public std::runtime_error {
 public:
  explicit SpecError(const std::string& msg) : std::runtime_error(msg) {}
};

// Carries the last iterate so callers can inspect where a solve stalled.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& msg, std::vector<std::complex<double>> last_iterate,
                   double residual)
      : std::runtime_error(msg + " (residual " + std::to_string(residual) + ")"),
        last_iterate_(std::move(last_iterate)),
        residual_(residual) {}

  const std::vector<std::complex<double>>& last_iterate() const { return last_iterate_; }
  double residual() const { return residual_; }

 private:
  std::vector<std::complex<double>> last_iterate_;
  double residual_;
};

class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace crnash
