#pragma once

#include <stdexcept>
#include <string>

namespace cubefpp {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Error taxonomy.  Process-level exit codes map onto these:
//   ConfigError -> 2, CapExceeded -> 3, everything else fatal -> 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

// A declared resource budget (memory, particle count, subdivision cap for
// hard caps that are resources) was exhausted.
struct CapExceeded : Error {
  using Error::Error;
};

}  // namespace cubefpp
