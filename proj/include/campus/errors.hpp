#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace campus {

// Bad input to an operation (out-of-range rate, negative count, bad grid).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SingularMatrix : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an ABC run accepted nothing; carries the best acceptance rate seen.
class NoAcceptances : public std::runtime_error {
 public:
  explicit NoAcceptances(double max_rate)
      : std::runtime_error("no accepted draws (max acceptance rate " +
                           std::to_string(max_rate) + ")"),
        max_rate_(max_rate) {}
  double max_rate() const noexcept { return max_rate_; }

 private:
  double max_rate_;
};

class InsufficientCurves : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file problems. line() is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace campus
