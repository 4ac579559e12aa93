#pragma once

#include <stdexcept>
#include <string>

namespace motocal {

// Error taxonomy maps 1:1 onto CLI exit codes (see exit_code_for below).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unreadable/malformed/empty inputs, bad config values, unknown config keys.
struct InputError : Error {
  using Error::Error;
};

struct ParseError : InputError {
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : InputError(path + ":" + std::to_string(line) + ": " + what) {}
  using InputError::InputError;
};

struct EmptyInputError : InputError {
  using InputError::InputError;
};

// Geometry does not constrain all four parameters (rank(JtWJ) < 4),
// or a local plane fit is rank-deficient.
struct DegenerateGeometryError : Error {
  using Error::Error;
};

// No cross-angle point pairs could be built: the motor sweep never
// revisited a surface at a sufficiently different angle.
struct InsufficientOverlapError : DegenerateGeometryError {
  using DegenerateGeometryError::DegenerateGeometryError;
};

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitInputError = 2,
  kExitDegenerateGeometry = 3,
  kExitNotConverged = 4,
};

}  // namespace motocal
