#pragma once

#include <stdexcept>
#include <string>

namespace scholmig {

// Unreadable stream, missing file, failed write.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input that violates the declared schema or an operation's data contract
// (degenerate label sets, zero-exposure rates, malformed config values, ...).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace scholmig
