#pragma once

#include <stdexcept>
#include <string>

namespace linktheft {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number of the offending line.
class ParseError : public Error {
 public:
  ParseError(const std::string& path, int line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Inputs parse individually but are mutually inconsistent (dangling ids, ...).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value (bad fraction, empty label set, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Requested sampling is infeasible (not enough negative pairs, ...).
class SamplingError : public Error {
 public:
  using Error::Error;
};

/// Dimension mismatch between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Training diverged. Carries the epoch at which the divergence was detected.
class TrainingError : public Error {
 public:
  TrainingError(int epoch, const std::string& what)
      : Error("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// An attack was asked to use an artifact its knowledge triplet does not hold.
class KnowledgeError : public Error {
 public:
  using Error::Error;
};

/// A metric is undefined on the given input (single-class AUC, ...).
class MetricError : public Error {
 public:
  using Error::Error;
};

/// Degenerate input on which the operation has no meaningful answer.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Oracle-level failure: unknown node, protocol violation.
class OracleError : public Error {
 public:
  using Error::Error;
};

/// Socket / wire failure talking to a remote oracle.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Results with mismatched configurations cannot be aggregated.
class AggregationError : public Error {
 public:
  using Error::Error;
};

/// Filesystem-level failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace linktheft
