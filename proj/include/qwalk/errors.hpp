#pragma once

#include <stdexcept>
#include <string>

namespace qwalk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition was violated (range, unitarity, normalization, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver hit its sweep budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Lattice extent the radix-2 FFT cannot handle.
class UnsupportedSizeError : public Error {
 public:
  using Error::Error;
};

/// Two eigenphases closer than the degeneracy tolerance on the unit circle.
class DegenerateSpectrum : public Error {
 public:
  using Error::Error;
};

/// The n-dimensional reversion protocol cannot run: some momentum block is
/// degenerate. The message names the offending momentum.
class ProtocolInapplicable : public Error {
 public:
  using Error::Error;
};

}  // namespace qwalk
