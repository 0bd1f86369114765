#pragma once

#include <stdexcept>
#include <string>

namespace raresim {

/// All normalized importance weights vanished (no sample carries mass).
class DegenerateWeightsError : public std::runtime_error {
 public:
  explicit DegenerateWeightsError(const std::string& what)
      : std::runtime_error(what) {}
};

/// The mean estimate is zero, so the projection direction is undefined.
class ZeroMeanDirectionError : public std::runtime_error {
 public:
  explicit ZeroMeanDirectionError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Coefficient of variation requested for a zero-mean sample.
class ZeroMeanCovError : public std::runtime_error {
 public:
  explicit ZeroMeanCovError(const std::string& what)
      : std::runtime_error(what) {}
};

class DimensionMismatchError : public std::invalid_argument {
 public:
  explicit DimensionMismatchError(const std::string& what)
      : std::invalid_argument(what) {}
};

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what)
      : std::invalid_argument(what) {}
};

}  // namespace raresim
