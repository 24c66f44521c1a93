#pragma once

#include <stdexcept>
#include <string>

namespace cpn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: config files, CLI flags, metric vectors that do not match a SpecSet.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

class DegenerateMetricError : public Error {
 public:
  using Error::Error;
};

class InvalidPosterior : public Error {
 public:
  using Error::Error;
};

/// Probability vector deviates from unit sum by more than the accepted tolerance.
class NormalizationError : public InvalidPosterior {
 public:
  using InvalidPosterior::InvalidPosterior;
};

class OrderingError : public InvalidPosterior {
 public:
  using InvalidPosterior::InvalidPosterior;
};

/// R^2 against truths with zero variance.
class UndefinedVarianceError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// Unparseable frame, unexpected op, or an explicit error frame from the peer.
class ProtocolError : public BackendError {
 public:
  using BackendError::BackendError;
};

class ContextLimitError : public BackendError {
 public:
  using BackendError::BackendError;
};

}  // namespace cpn
