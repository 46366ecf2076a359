// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace lipal {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller supplied arguments outside an operation's contract
/// (dimension mismatch, out-of-range parameter, empty cluster, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// An oracle produced NaN/Inf, or a safeguarded loop ran out of budget.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// A point left the domain of g (g(x) = +inf where a finite value is needed).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data. Carries a 1-based row/column location when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, long row = -1, long column = -1)
      : Error(format(what, row, column)), row_(row), column_(column) {}

  long row() const { return row_; }
  long column() const { return column_; }

 private:
  static std::string format(const std::string& what, long row, long column) {
    if (row < 0) return what;
    std::string out = what + " (row " + std::to_string(row);
    if (column >= 0) out += ", column " + std::to_string(column);
    return out + ")";
  }

  long row_;
  long column_;
};

}  // namespace lipal
