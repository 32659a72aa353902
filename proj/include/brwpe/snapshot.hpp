#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "brwpe/environment.hpp"

namespace brwpe {

inline constexpr int kSnapshotVersion = 1;

/// Materialized environment window in the versioned text format:
///
///   BRWPE-SNAPSHOT 1 d=<d> alpha=<a> seed=<s> window=l1ball center=<c0,c1,..> radius=<r>
///     count=<n> [tool=<v>] [digest=<hex>]
///   <x1> ... <xd> <value>      (n lines, value at round-trip precision)
///   END
struct EnvironmentSnapshot {
  int version = kSnapshotVersion;
  int d = 1;
  double alpha = 2;
  std::uint64_t seed = 0;
  Site center;
  double radius = 0;
  std::string tool;
  std::string digest;
  std::vector<std::pair<Site, double>> records;
};

EnvironmentSnapshot make_snapshot(const PotentialField& field, const Window& window);

void write_snapshot(std::ostream& os, const EnvironmentSnapshot& snap);
EnvironmentSnapshot read_snapshot(std::istream& is);

void save_snapshot(const std::filesystem::path& path, const EnvironmentSnapshot& snap);

/// Loads a snapshot and checks it belongs to `expected` (same d, alpha and seed);
/// throws SnapshotError otherwise.
EnvironmentSnapshot load_snapshot(const std::filesystem::path& path, const PotentialField& expected);
EnvironmentSnapshot load_snapshot(const std::filesystem::path& path);

}  // namespace brwpe
