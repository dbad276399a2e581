#pragma once

#include <stdexcept>
#include <string>

namespace deferlab {

// All precondition violations raise a subclass of Error so callers can
// distinguish "bad input" from genuine std:: failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class EmptyDataError : public Error {
 public:
  explicit EmptyDataError(const std::string& msg = "empty data") : Error(msg) {}
};

// A deferred sample is missing its expert prediction; silently skipping it
// would bias every risk estimate, so this is always fatal.
class MissingExpertLabelError : public Error {
 public:
  explicit MissingExpertLabelError(const std::string& msg = "deferred sample lacks expert label")
      : Error(msg) {}
};

class OutOfRangeError : public Error {
 public:
  explicit OutOfRangeError(const std::string& msg = "value out of range") : Error(msg) {}
};

class DimensionMismatchError : public Error {
 public:
  explicit DimensionMismatchError(const std::string& msg = "dimension mismatch") : Error(msg) {}
};

class NegativeInputError : public Error {
 public:
  explicit NegativeInputError(const std::string& msg = "negative input") : Error(msg) {}
};

class InvalidDistributionError : public Error {
 public:
  explicit InvalidDistributionError(const std::string& msg = "invalid probability vector")
      : Error(msg) {}
};

// Exhaustive scans refuse to run past their configured caps.
class SizeLimitError : public Error {
 public:
  explicit SizeLimitError(const std::string& msg = "enumeration size limit exceeded")
      : Error(msg) {}
};

class ConstructionFailedError : public Error {
 public:
  explicit ConstructionFailedError(const std::string& msg = "world construction failed")
      : Error(msg) {}
};

class EmptyPoolError : public Error {
 public:
  explicit EmptyPoolError(const std::string& msg = "empty initialization pool") : Error(msg) {}
};

class EmptyVersionSpaceError : public Error {
 public:
  explicit EmptyVersionSpaceError(const std::string& msg = "version space became empty")
      : Error(msg) {}
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& msg = "training diverged") : Error(msg) {}
};

// Active-learning runs report these two conditions through result flags by
// default; the exception types exist for callers that want to hard-fail.
class BudgetExhaustedError : public Error {
 public:
  explicit BudgetExhaustedError(const std::string& msg = "draw budget exhausted") : Error(msg) {}
};

class NoConsistentPairError : public Error {
 public:
  explicit NoConsistentPairError(const std::string& msg = "no zero-violation triple exists")
      : Error(msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace deferlab
