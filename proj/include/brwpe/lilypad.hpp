#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "brwpe/environment.hpp"

namespace brwpe {

/// h_T on a finite window of lattice sites, plus what is needed to evaluate m_T.
///
/// h(z) is the infimum over site sequences z = y_0, ..., y_n = 0 within the window of
/// sum_j q |y_{j-1} - y_j|_T / xi_T(y_j), where |.|_T is the L1 distance in rescaled units.
/// It is computed as a single-source shortest path from the origin on the complete graph
/// over the window, where the edge u -> v costs q |u - v|_T / xi_T(u).
class LilypadSolution {
 public:
  const ScalingContext& context() const noexcept { return ctx_; }
  int dimension() const noexcept { return ctx_.d; }
  std::size_t size() const noexcept { return sites_.size(); }
  std::span<const Site> sites() const noexcept { return sites_; }
  std::span<const double> h() const noexcept { return h_; }
  std::span<const double> xi_T() const noexcept { return xi_T_; }

  /// Window index of a site, if present.
  std::optional<std::size_t> index_of(const Site& z) const;
  double h_at(std::size_t i) const { return h_[i]; }

  /// m(z, t) = max over window sites y of xi_T(y)(t - h(y))_+ - q |z - y|_T.
  double m(const Site& z, double t) const;

  /// m(z, t) for every window site z, in window order.
  std::vector<double> m_on_window(double t) const;

  /// Growth term g(y) = xi_T(y)(t - h(y))_+ for every window site.
  std::vector<double> growth(double t) const;

 private:
  friend LilypadSolution compute_h(const ScalingContext&, const PotentialField&, std::span<const Site>);
  LilypadSolution() = default;

  ScalingContext ctx_;
  std::vector<Site> sites_;
  std::vector<double> xi_T_;
  std::vector<double> h_;
  std::vector<std::vector<double>> coords_;  // per dimension, lattice units
  std::vector<std::size_t> order_;  // indices sorted by site, for lookup
};

/// Throws ConfigError when the window is empty, lacks the origin, or has a site with
/// xi_T <= 0.
LilypadSolution compute_h(const ScalingContext& ctx, const PotentialField& field, std::span<const Site> window);

struct MaximizerReport {
  double t = 0;
  Site w;
  std::size_t index = 0;
  double m_value = 0;
  /// m(w,t) minus the best m over the other window sites (+inf for a single-site window).
  double runner_up_gap = 0;
};

/// Window point maximizing z -> m(z, t); ties go to the lexicographically smallest site.
MaximizerReport maximizer(const LilypadSolution& sol, double t);

struct WindowSensitivity {
  double base_radius = 0;
  std::size_t base_sites = 0;
  std::size_t doubled_sites = 0;
  double max_delta_h = 0;  ///< max over the base window of h_base - h_doubled (>= 0)
  Site w_base;
  Site w_doubled;
  bool w_changed = false;
};

/// Recomputes h and the maximizer at time t on the doubled-radius window.
WindowSensitivity window_sensitivity(const ScalingContext& ctx, const PotentialField& field, double base_radius,
                                     double t = 1.0, std::uint64_t max_sites = kDefaultMaxWindowSites);

/// Delimited records "x1 ... xd h m" for each window site at time t.
void write_lilypad_table(std::ostream& os, const LilypadSolution& sol, double t);

}  // namespace brwpe
