#pragma once

#include <stdexcept>
#include <string>

namespace bear {

// Error taxonomy. Every failure mode surfaces as one of these so the CLI can
// map them onto stable exit codes (see tools/).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Operand shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Input is mathematically unusable (e.g. zero denominator in a relative metric).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// A size cap was exceeded (e.g. svd_small called on an over-cap matrix).
class SizeError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value (rank 0, rho outside [0,1], ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Divergence or non-convergence of an iterative routine.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents (bad magic, dtype, truncation).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Underlying I/O failure (open/read/write/rename).
class StorageError : public Error {
 public:
  using Error::Error;
};

// An allocation would exceed the configured memory budget.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Input outside the operation's domain (e.g. negative entries fed to NMF).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace bear
