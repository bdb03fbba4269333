#pragma once

#include <stdexcept>
#include <string>

namespace tsc {

/// Error categories double as process exit codes for the command-line tool.
enum class ErrorCategory : int {
  usage = 2,
  config = 3,
  io = 4,
  checkpoint = 5,
  divergence = 6,
  shape = 7,
  simulation = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Dimension or structure mismatch between networks, caches, gradients or data.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorCategory::shape, what) {}
};

/// Non-finite values appeared during training.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what) : Error(ErrorCategory::divergence, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

/// Malformed serialized data: bad magic, version, truncation, checksum or digest.
class DecodeError : public Error {
 public:
  explicit DecodeError(const std::string& what) : Error(ErrorCategory::checkpoint, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

/// Invalid use of the simulator (bad action, step after done, unknown id).
class SimulationError : public Error {
 public:
  explicit SimulationError(const std::string& what) : Error(ErrorCategory::simulation, what) {}
};

}  // namespace tsc
