#pragma once

#include <stdexcept>
#include <string>

namespace zsgan {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operand shapes disagree (matrix products, layer widths, batch sizes).
struct DimensionError : Error {
  using Error::Error;
};

/// A documented precondition was broken by the caller.
struct ContractError : Error {
  using Error::Error;
};

/// Dataset or checkpoint files are missing, unreadable or inconsistent.
struct LoadError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

/// Non-finite values surfaced while optimizing.
struct TrainingError : Error {
  using Error::Error;
};

}  // namespace zsgan
