#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "brwpe/brw_sim.hpp"
#include "brwpe/environment.hpp"

namespace brwpe {

/// Cube [center - radius, center + radius]^d; sites outside are absorbing.
struct Box {
  int d = 1;
  Site center;
  int radius = 0;

  bool contains(const Site& z) const;
  std::size_t size() const;
  /// Box sites in lexicographic order.
  std::vector<Site> sites() const;
};

struct SolverSettings {
  int box_radius = 20;
  double target_local_error = 1e-10;
  /// 1 = Lie splitting, 2 = Strang splitting.
  int splitting_order = 2;
  /// Entries below relative_floor * max are excluded from the relative error control.
  double relative_floor = 1e-24;
  double boundary_tolerance = 1e-8;
  bool fail_on_box_too_small = false;
  std::uint64_t max_steps = 20'000'000;
};

/// Expected-mass profile u(., t) stored as profile * exp(log_scale) with max(profile) = 1.
class PamSolution {
 public:
  const Box& box() const noexcept { return box_; }
  double time() const noexcept { return t_; }
  double log_scale() const noexcept { return log_scale_; }
  /// Profile over box().sites() order; entries in [0, 1], max entry 1 (all zero if extinct).
  std::span<const double> profile() const noexcept { return profile_; }
  std::span<const std::uint8_t> killed() const noexcept { return killed_; }

  /// log u(z, t); -inf where u vanishes or z lies outside the box.
  double log_u(const Site& z) const;
  double profile_at(const Site& z) const;
  /// log of sum_z u(z, t), optionally leaving one site out.
  double log_total(std::optional<Site> exclude = std::nullopt) const;

  double boundary_mass_fraction() const noexcept { return boundary_fraction_; }
  bool box_too_small() const noexcept { return box_too_small_; }
  /// Accumulated local error estimate; bounds the error of log u at the dominant sites.
  double error_estimate() const noexcept { return error_estimate_; }
  std::uint64_t steps() const noexcept { return steps_; }
  std::uint64_t rejected_steps() const noexcept { return rejected_; }

 private:
  friend class PamIntegrator;
  Box box_;
  double t_ = 0;
  double log_scale_ = 0;
  std::vector<double> profile_;
  std::vector<std::uint8_t> killed_;
  double boundary_fraction_ = 0;
  bool box_too_small_ = false;
  double error_estimate_ = 0;
  std::uint64_t steps_ = 0;
  std::uint64_t rejected_ = 0;

  std::size_t index(const Site& z) const;
};

/// Adaptive integrator for du/dt = Delta u + xi u on a box, with u = 0 on the killing set
/// and outside the box. Each step splits the flow into the exact diagonal factor
/// exp((xi - 2d) h) and the nearest-neighbour hopping flow exp(h A), whose Taylor series
/// has only non-negative terms and is summed to full precision. Step sizes are controlled
/// by comparing one step against two half steps.
class PamIntegrator {
 public:
  PamIntegrator(const PotentialField& field, const Site& start, const SolverSettings& settings,
                const SitePredicate& killing = {});

  void advance_to(double t);
  double time() const noexcept { return t_; }
  PamSolution solution() const;

 private:
  void step_once(double h, std::vector<double>& out, const std::vector<double>& in);
  void diagonal(std::vector<double>& u, double h);
  void hop_flow(std::vector<double>& u, double h);

  Box box_;
  SolverSettings settings_;
  int d_;
  std::vector<std::ptrdiff_t> offsets_;
  std::size_t first_ = 0, last_ = 0;  // padded-index range covering the box
  std::vector<std::size_t> box_index_;  // box site i -> padded index
  std::vector<double> mask_;
  std::vector<double> rate_;  // xi - 2d on active sites
  std::vector<std::uint8_t> boundary_;
  std::vector<std::uint8_t> killed_;
  double max_rate_ = 0;

  std::vector<double> u_, y1_, y2_, mid_;
  std::vector<double> tmp_, term_, acc_;  // hop_flow workspace
  double cached_h_ = -1;
  std::vector<double> growth_;

  double t_ = 0;
  double log_scale_ = 0;
  double h_ = 0;
  double error_estimate_ = 0;
  std::uint64_t steps_ = 0, rejected_ = 0;
};

PamSolution solve_pam(const PotentialField& field, const Site& start, double t, const SolverSettings& settings);

struct KilledSolution {
  PamSolution solution;  ///< E_y[N(z, t; U_{y,theta})] for all box sites z
  double log_f = 0;      ///< log f_theta(y, t)
};

KilledSolution solve_killed(const PotentialField& field, const Site& y, double theta, double t,
                            const SolverSettings& settings);

/// Killed solutions at several increasing times from one integration.
std::vector<KilledSolution> solve_killed_at(const PotentialField& field, const Site& y, double theta,
                                            std::span<const double> times, const SolverSettings& settings);

/// log f_theta(y, s) on a uniform grid over [0, t_max], linearly interpolated in s.
class FThetaTable {
 public:
  FThetaTable(const PotentialField& field, const Site& y, double theta, double t_max, std::size_t intervals,
              const SolverSettings& settings);
  double log_f(double s) const;
  double t_max() const noexcept { return t_max_; }

 private:
  double t_max_;
  std::vector<double> log_f_;
};

/// Records "x1 ... xd log_u" for every box site with positive mass.
void write_log_profile(std::ostream& os, const PamSolution& sol);

// ---------------------------------------------------------------------------
// Numerical checks of the growth and decay inequalities for the killed problem.

struct GrowthInequalityReport {
  double s = 0, t = 0;
  double factor_log = 0;  ///< -(xi(y) - 2d)(t - s)
  /// min over sites of 1 - E_y[N(z,s)] / (e^{factor} E_y[N(z,t)]); >= 0 when the inequality holds.
  double worst_margin = 0;
  Site worst_site;
  std::size_t sites_checked = 0;
  bool passed = false;
};

/// Checks E_y[N(z,s;U)] <= e^{-(xi(y)-2d)(t-s)} E_y[N(z,t;U)] on every box site, U = U_{y,theta}.
/// Passes when the worst relative margin is >= -tolerance.
GrowthInequalityReport verify_growth_inequality(const PotentialField& field, const Site& y, double theta, double s,
                                                double t, const SolverSettings& settings, double tolerance = 1e-9);

struct ShellDecayReport {
  double eta = 0, theta = 0, s = 0;
  bool hypotheses_ok = false;  ///< eta in (0, 1/(8d)), theta > 2d + log 2 / eta, s > eta
  std::vector<double> log_shell_sup;  ///< index k: log sup_{|z-y|=k} E_y[N(z,s;U)] (-inf if empty/zero)
  double log_bound = 0;              ///< log(8 d eta)
  std::vector<bool> shell_ok;        ///< index k >= 1
  /// Shells whose supremum is below the solver's relative accuracy floor; reported, not judged.
  std::size_t unresolved_shells = 0;
  bool sup_at_y = false;
  bool passed = false;
};

ShellDecayReport verify_shell_decay(const PotentialField& field, const Site& y, double theta, double eta, double s,
                                    const SolverSettings& settings);

struct OffsiteRatioReport {
  double theta = 0, s = 0;
  double xi_y = 0;
  bool hypotheses_ok = false;  ///< theta > 10 d xi(y)^{19/20}, xi(y) >= 2
  double log_offsite = 0;      ///< log sum_{z != y} E_y[N(z,s;U)]
  double log_f = 0;            ///< log f_theta(y, s)
  double bound = 0;            ///< 2d xi(y)^{-19/20} / (1 - 2^{-19/20})^2
  double ratio = 0;            ///< offsite / f
  bool passed = false;
};

OffsiteRatioReport verify_offsite_mass_ratio(const PotentialField& field, const Site& y, double theta, double s,
                                             const SolverSettings& settings);

}  // namespace brwpe
