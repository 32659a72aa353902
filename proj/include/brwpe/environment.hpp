#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "brwpe/lattice.hpp"

namespace brwpe {

/// I.i.d. Pareto(alpha) potential on Z^d, generated lazily from (master_seed, site).
///
/// The value at a site is xi = U^{-1/alpha} where U in (0,1] comes from a counter-based
/// hash of the seed and the coordinates, so it does not depend on query order or on which
/// window is materialized. Test variants can pin individual sites (planted values) or
/// replace the whole field by a constant; those bypass the Pareto law.
class PotentialField {
 public:
  PotentialField(int d, double alpha, std::uint64_t master_seed);

  int dimension() const noexcept { return d_; }
  double alpha() const noexcept { return alpha_; }
  std::uint64_t seed() const noexcept { return seed_; }

  double at(const Site& z) const;

  /// The uniform variate U in (0,1] behind site z.
  double uniform_at(const Site& z) const;

  /// Copy with the value at z pinned.
  PotentialField with_planted(const Site& z, double value) const;
  /// Copy whose every unplanted site takes `value` (e.g. 0 for the heat-equation check).
  PotentialField with_constant(double value) const;

  bool is_pareto() const noexcept { return !constant_ && planted_.empty(); }
  std::span<const std::pair<Site, double>> planted() const noexcept { return planted_; }

 private:
  int d_;
  double alpha_;
  std::uint64_t seed_;
  std::optional<double> constant_;
  std::vector<std::pair<Site, double>> planted_;  // sorted by site
};

/// xi = U^{-1/alpha}; exposed for the inverse-CDF unit checks.
double pareto_from_uniform(double u, double alpha);

/// Rescaling constants at time T together with the parameter suite used for the
/// environment-level diagnostics.
struct ScalingContext {
  int d = 1;
  double alpha = 2;
  double T = 0;
  double q = 0;      ///< d / (alpha - d)
  double a_T = 0;    ///< (T / log T)^q, potential scale
  double r_T = 0;    ///< (T / log T)^{q+1}, space scale
  double rho_T = 0;  ///< log log T
  double nu_T = 0;   ///< (log T)^{-d/(16 alpha)}
  double K_T = 0;    ///< nu_T^{-2 alpha} rho_T^{2d}
  double eps_T = 0;  ///< (3/q) r_T (log T)^{-1/4}
  double theta_T = 0;  ///< nu_T^{2+2 alpha} a_T

  /// Default lilypad window radius in lattice units, rho_T r_T.
  double window_radius() const { return rho_T * r_T; }
};

ScalingContext make_scaling(const PotentialField& field, double T);

/// Maps a rescaled point z to the lattice point r_T z. A coordinate c = r_T z_i is on the
/// lattice iff |c - round(c)| <= 1e-9 * max(1, |c|).
std::optional<Site> rescaled_to_lattice(const ScalingContext& ctx, std::span<const double> z);

/// Rescaled coordinates z = site / r_T.
std::vector<double> lattice_to_rescaled(const ScalingContext& ctx, const Site& site);

/// xi_T(z) = xi(r_T z) / a_T, and 0 off the rescaled lattice.
double rescaled_potential(const ScalingContext& ctx, const PotentialField& field, std::span<const double> z);

inline double rescaled_potential_at(const ScalingContext& ctx, const PotentialField& field, const Site& site) {
  return field.at(site) / ctx.a_T;
}

/// Sites and values of an explicitly materialized L1-ball window.
struct Window {
  Site center;
  double radius = 0;
  std::vector<Site> sites;   ///< lexicographic order
  std::vector<double> values;
};

inline constexpr std::uint64_t kDefaultMaxWindowSites = 20'000'000;

/// Materializes the open L1 ball {z : |z - center| < radius}; throws ResourceError when
/// it would hold more than max_sites sites.
Window materialize_window(const PotentialField& field, const Site& center, double radius,
                          std::uint64_t max_sites = kDefaultMaxWindowSites);

struct EnvironmentDiagnostics {
  double window_radius = 0;
  std::uint64_t window_sites = 0;
  double kappa_threshold = 0;  ///< nu_T a_T / 2
  std::vector<std::pair<Site, double>> kappa;  ///< sites with xi >= nu_T a_T / 2
  bool kappa_within_bound = true;               ///< #kappa <= K_T
  bool close_pair_event = false;                ///< event A_T
  std::optional<std::pair<Site, Site>> close_pair;
  std::optional<Site> w;
  bool near_w_event = false;  ///< some z in B(w, eps_T) \ {w} has xi >= nu_T a_T / 2
  std::optional<Site> near_w_witness;
  bool huge_value_event = false;  ///< some window site has xi >= a_T / nu_T
  std::optional<Site> huge_value_witness;
};

/// Environment-level events on the window B(0, window_radius) (default rho_T r_T).
EnvironmentDiagnostics environment_diagnostics(const ScalingContext& ctx, const PotentialField& field,
                                               std::optional<Site> w = std::nullopt,
                                               std::optional<double> window_radius = std::nullopt,
                                               std::uint64_t max_sites = kDefaultMaxWindowSites);

}  // namespace brwpe
