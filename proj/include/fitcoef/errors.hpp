#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fitcoef {

/// Base class of every error raised by the library. `kind()` is a stable
/// identifier surfaced by the command-line front end.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define FITCOEF_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(#Name, what) {}   \
  }

FITCOEF_DEFINE_ERROR(DegenerateSample);
FITCOEF_DEFINE_ERROR(DimensionMismatch);
FITCOEF_DEFINE_ERROR(LengthMismatch);
FITCOEF_DEFINE_ERROR(InvalidParameter);
FITCOEF_DEFINE_ERROR(SupportViolation);
FITCOEF_DEFINE_ERROR(NonConvergence);
FITCOEF_DEFINE_ERROR(Indistinguishable);
FITCOEF_DEFINE_ERROR(DomainError);

#undef FITCOEF_DEFINE_ERROR

/// Malformed input file; `line` and `column` are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error("ParseError", "line " + std::to_string(line) + ", column " +
                                std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace fitcoef
