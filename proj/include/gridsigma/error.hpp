#pragma once

#include <stdexcept>
#include <string>

namespace gridsigma {

/// Base class for every failure that stems from bad input data or an
/// unsatisfiable request, as opposed to a programming error.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text input rejected at a specific line (1-based; 0 when not applicable).
class ParseError : public DomainError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DomainError(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace gridsigma
