#pragma once

#include <stdexcept>
#include <string>

namespace ccc {

// Bad input contents: unnormalized shares, malformed files, missing rows.
// Maps to exit code 2 in the CLI.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A conditional table or mapping does not cover a class that was encountered.
class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// No-data or missing band at a pixel that must carry a value.
class DataIntegrityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Zero households, non-positive household size and similar.
class DegenerateInputError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Requested counts cannot be met (too few valid cells, targets not matching
// pixel totals). Maps to exit code 3.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite activations or losses, integer cost overflow.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ccc
