#pragma once

#include <stdexcept>
#include <string>

namespace orars {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A caller broke an API contract (shape mismatch, empty input, ...).
struct ContractViolation : Error {
  using Error::Error;
};

/// Input data violates a documented invariant (non-finite values, ...).
struct InvalidData : Error {
  using Error::Error;
};

/// A configuration value is out of its valid domain.
struct InvalidConfig : Error {
  using Error::Error;
};

/// All labels in a range computation are identical; distance weights are undefined.
struct DegenerateRange : Error {
  using Error::Error;
};

/// An analytic formula was requested outside the domain it is derived for.
struct OutOfDomain : Error {
  using Error::Error;
};

/// Training produced non-finite losses or gradients.
struct TrainingDiverged : Error {
  using Error::Error;
};

/// Every candidate in a hyperparameter search diverged.
struct GridSearchFailed : Error {
  using Error::Error;
};

/// A text input (CSV, config file) could not be parsed.
struct ParseError : Error {
  using Error::Error;
};

/// A file could not be read or written.
struct IoError : Error {
  using Error::Error;
};

}  // namespace orars
