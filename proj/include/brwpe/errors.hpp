#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace brwpe {

/// Invalid parameters or configuration supplied by the caller.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A requested window, box or population does not fit the configured limits.
class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, std::uint64_t required)
      : std::runtime_error(what + " (required " + std::to_string(required) + ")"), required_(required) {}
  std::uint64_t required() const noexcept { return required_; }

 private:
  std::uint64_t required_;
};

class PopulationExplosion : public ResourceError {
 public:
  PopulationExplosion(std::uint64_t cap, double time_reached)
      : ResourceError("population cap exceeded at t=" + std::to_string(time_reached), cap),
        time_reached_(time_reached) {}
  double time_reached() const noexcept { return time_reached_; }

 private:
  double time_reached_;
};

class LineageOverflow : public ResourceError {
 public:
  explicit LineageOverflow(std::uint64_t cap) : ResourceError("lineage cap exceeded", cap) {}
};

/// Adaptive step size fell below the representable minimum.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SnapshotError : public std::runtime_error {
 public:
  enum class Kind { Corrupt, VersionMismatch, IdentityMismatch, Io };
  SnapshotError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace brwpe
