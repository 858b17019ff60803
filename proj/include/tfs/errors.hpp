#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tfs {

// Base for every failure raised by the library. The CLI maps subclasses to
// exit codes, so new error kinds should derive from DataError or Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input content (files, records, models). CLI exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

class MalformedRecord : public DataError {
 public:
  MalformedRecord(std::size_t line, const std::string& cause)
      : DataError("line " + std::to_string(line) + ": " + cause),
        line_(line),
        cause_(cause) {}

  std::size_t line() const { return line_; }
  const std::string& cause() const { return cause_; }

 private:
  std::size_t line_;
  std::string cause_;
};

class DimensionMismatch : public DataError {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual)
      : DataError("feature length " + std::to_string(actual) + " does not match model input " +
                  std::to_string(expected)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const { return expected_; }
  std::size_t actual() const { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

class CorruptModel : public DataError {
 public:
  using DataError::DataError;
};

class InvalidKeypointMap : public DataError {
 public:
  using DataError::DataError;
};

class InsufficientData : public DataError {
 public:
  using DataError::DataError;
};

class UnknownLabel : public DataError {
 public:
  explicit UnknownLabel(const std::string& label)
      : DataError("unknown label '" + label + "'"), label_(label) {}
  const std::string& label() const { return label_; }

 private:
  std::string label_;
};

class InvalidParams : public Error {
 public:
  using Error::Error;
};

class NonFiniteLoss : public Error {
 public:
  explicit NonFiniteLoss(int epoch)
      : Error("training loss became non-finite in epoch " + std::to_string(epoch)), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

class EmptyMatrix : public Error {
 public:
  EmptyMatrix() : Error("confusion matrix has no samples") {}
};

class DegenerateSample : public Error {
 public:
  using Error::Error;
};

// A bootstrap repeat failed; wraps the training error message.
class BootstrapFailure : public Error {
 public:
  BootstrapFailure(int repeat, const std::string& cause)
      : Error("bootstrap repeat " + std::to_string(repeat) + ": " + cause), repeat_(repeat) {}
  int repeat() const { return repeat_; }

 private:
  int repeat_;
};

}  // namespace tfs
