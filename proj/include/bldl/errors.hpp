#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bldl {

enum class ErrorKind {
  NegativeEntry,
  ColumnSumViolation,
  ShapeMismatch,
  InvalidDistribution,
  InvalidConfig,
  InvalidRank,
  SingularSystem,
  NonFinite,
  AllZeroDifferences,
  ParseError,
  RowCountMismatch,
  Io,
};

// Base of every error thrown by the library. The CLI maps kind() onto its
// exit codes: numerical failures exit with 2, everything else with 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  bool numerical() const noexcept {
    return kind_ == ErrorKind::SingularSystem || kind_ == ErrorKind::NonFinite;
  }

 private:
  ErrorKind kind_;
};

class NegativeEntry : public Error {
 public:
  NegativeEntry(std::size_t row, std::size_t col, double value)
      : Error(ErrorKind::NegativeEntry, "negative entry " + std::to_string(value) + " at (" +
                                            std::to_string(row) + ", " + std::to_string(col) + ")"),
        row(row),
        col(col) {}
  std::size_t row, col;
};

class ColumnSumViolation : public Error {
 public:
  ColumnSumViolation(std::size_t col, double sum)
      : Error(ErrorKind::ColumnSumViolation,
              "column " + std::to_string(col) + " sums to " + std::to_string(sum)),
        col(col),
        sum(sum) {}
  std::size_t col;
  double sum;
};

class ShapeMismatch : public Error {
 public:
  explicit ShapeMismatch(const std::string& what) : Error(ErrorKind::ShapeMismatch, what) {}
};

class InvalidDistribution : public Error {
 public:
  InvalidDistribution(std::size_t index, const std::string& why)
      : Error(ErrorKind::InvalidDistribution,
              "invalid distribution at index " + std::to_string(index) + ": " + why),
        index(index) {}
  std::size_t index;
};

class InvalidConfig : public Error {
 public:
  explicit InvalidConfig(const std::string& what) : Error(ErrorKind::InvalidConfig, what) {}
};

class InvalidRank : public Error {
 public:
  explicit InvalidRank(const std::string& what) : Error(ErrorKind::InvalidRank, what) {}
};

class SingularSystem : public Error {
 public:
  SingularSystem(const std::string& which, double condition)
      : Error(ErrorKind::SingularSystem, which + " normal matrix is numerically singular (condition estimate " +
                                             std::to_string(condition) + ")"),
        condition(condition) {}
  double condition;
};

class NonFinite : public Error {
 public:
  explicit NonFinite(int iter, const std::string& what = "iterate")
      : Error(ErrorKind::NonFinite, what + " left the finite range at iteration " + std::to_string(iter)),
        iter(iter) {}
  int iter;
};

class AllZeroDifferences : public Error {
 public:
  AllZeroDifferences() : Error(ErrorKind::AllZeroDifferences, "all paired differences are zero") {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& why)
      : Error(ErrorKind::ParseError, file + ":" + std::to_string(line) + ": " + why), line(line) {}
  std::size_t line;
};

class RowCountMismatch : public Error {
 public:
  RowCountMismatch(std::size_t a, std::size_t b)
      : Error(ErrorKind::RowCountMismatch,
              "row counts differ: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace bldl
