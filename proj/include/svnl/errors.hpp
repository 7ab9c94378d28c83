#pragma once

#include <stdexcept>
#include <string>

namespace svnl {

/// Malformed or unusable input data (files, series values).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The particle system or a linear-algebra step has collapsed.
class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, priors or options.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace svnl
