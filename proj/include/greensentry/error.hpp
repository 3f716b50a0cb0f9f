#pragma once

#include <stdexcept>
#include <string>

namespace greensentry {

/// Base of every error raised by the library. The CLI maps subclasses to
/// exit codes: UsageError -> 1, DataError -> 2, NumericalError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (files, datasets, model state).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Text that does not parse; `field()` names the offending component.
class ParseError : public DataError {
 public:
  ParseError(std::string field, const std::string& what);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// CSV ingestion failure at a 1-based data row (header is row 0).
class IngestError : public DataError {
 public:
  IngestError(std::size_t row, const std::string& what);
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Non-finite values during forward passes or training.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace greensentry
