#pragma once

#include <stdexcept>
#include <string>

namespace lrmip {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or incomplete configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Numerical state drifted outside its invariants (eigenvalues outside [0,1], ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Orbital matrix lost column rank.
class DegenerateStateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Projective measurement requested on a site with vanishing occupation.
class EmptySiteError : public Error {
 public:
  using Error::Error;
};

// Lattice size incompatible with a region partition.
class PartitionError : public Error {
 public:
  using Error::Error;
};

// Fit could not be carried out (too few points, degenerate design, ...).
class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace lrmip
