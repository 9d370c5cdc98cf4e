#pragma once

#include <stdexcept>
#include <string>

namespace klrhop {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument, shape mismatch or out-of-range index.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss or gradient.
class TrainingDivergedError : public Error {
 public:
  TrainingDivergedError(long neuron, long epoch, const std::string& what)
      : Error("training diverged at neuron " + std::to_string(neuron) + ", epoch " +
              std::to_string(epoch) + ": " + what),
        neuron_(neuron),
        epoch_(epoch) {}

  [[nodiscard]] long neuron() const noexcept { return neuron_; }
  [[nodiscard]] long epoch() const noexcept { return epoch_; }

 private:
  long neuron_;
  long epoch_;
};

/// Non-finite values met in a linear-algebra routine.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Stable rank requested for an all-zero matrix.
class UndefinedRankError : public Error {
 public:
  using Error::Error;
};

/// A reduction over records found nothing usable.
class EmptyResultError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class MissingFileError : public IoError {
 public:
  using IoError::IoError;
};

class SchemaError : public IoError {
 public:
  using IoError::IoError;
};

class DimensionMismatchError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace klrhop
