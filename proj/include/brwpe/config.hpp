#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "brwpe/lattice.hpp"

namespace brwpe {

inline constexpr const char* kToolVersion = "brwpe/1.0.0";

/// Flat key = value run configuration. Lines starting with '#' are comments.
///
/// Keys: d, alpha, seed, workers, T, t, env_seeds, replicas, window_radius,
/// snapshot.center, snapshot.radius, box_radius, horizon, population_cap, lineage_cap,
/// start, y, theta, planted_xi, pam.times, target_local_error, splitting_order, top_k, out,
/// verify.instances, verify.mc_replicas, verify.m2o_replicas, verify.m2o_t,
/// verify.bd_replicas, verify.chernoff_replicas, verify.ks_replicas.
/// Lists are comma separated; sites are comma-separated coordinates.
struct RunConfig {
  int d = 1;
  double alpha = 2.0;
  std::uint64_t seed = 1;
  unsigned workers = 1;

  std::vector<double> T_grid = {3, 4, 5, 6};
  double t = 1.0;
  std::vector<std::uint64_t> env_seeds = {1, 2, 3};
  std::uint64_t replicas = 100;
  double window_radius = 0;  ///< lattice units; 0 selects rho_T r_T

  Site snapshot_center;
  double snapshot_radius = 10;

  int box_radius = 15;
  double horizon = 1.0;
  std::uint64_t population_cap = 10'000'000;
  std::uint64_t lineage_cap = 10'000;
  Site start;
  std::optional<Site> y;
  double theta = 0;  ///< > 0 with y set enables U_{y,theta}
  std::optional<double> planted_xi;  ///< pins xi(y)
  std::vector<double> pam_times = {1.0};
  double target_local_error = 1e-10;
  int splitting_order = 2;
  std::uint64_t top_k = 10;
  std::string out;  ///< empty: standard output

  std::uint64_t verify_instances = 20;
  std::uint64_t verify_mc_replicas = 10'000;
  std::uint64_t verify_m2o_replicas = 20'000;
  double verify_m2o_t = 1.5;
  std::uint64_t verify_bd_replicas = 100'000;
  std::uint64_t verify_chernoff_replicas = 100'000;
  std::uint64_t verify_ks_replicas = 2'000;

  bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError on unknown keys, malformed values, or violated invariants.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);
void validate_config(const RunConfig& cfg);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& cfg);
void save_config(const RunConfig& cfg, const std::string& path);

/// FNV-1a 64 over the canonical form without the keys that cannot change results
/// (workers, out).
std::uint64_t config_digest(const RunConfig& cfg);
std::string digest_hex(std::uint64_t digest);

}  // namespace brwpe
