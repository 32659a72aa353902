#include "brwpe/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "brwpe/errors.hpp"
#include "brwpe/rng.hpp"

namespace brwpe {

PotentialField::PotentialField(int d, double alpha, std::uint64_t master_seed)
    : d_(d), alpha_(alpha), seed_(master_seed) {
  if (d < 1 || d > kMaxDim) throw ConfigError("dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  if (!(alpha > d)) throw ConfigError("Pareto exponent alpha must exceed the dimension d");
}

double pareto_from_uniform(double u, double alpha) { return std::pow(u, -1.0 / alpha); }

double PotentialField::uniform_at(const Site& z) const {
  std::uint64_t h = mix64(seed_ ^ 0x5bd1e9955bd1e995ULL);
  for (int i = 0; i < d_; ++i) h = mix64(h ^ static_cast<std::uint32_t>(z[i]));
  const std::uint64_t word = h >> 11;
  // The zero word maps to U = 1 so that U ranges over (0, 1].
  return word == 0 ? 1.0 : static_cast<double>(word) * 0x1.0p-53;
}

double PotentialField::at(const Site& z) const {
  if (!planted_.empty()) {
    auto it = std::lower_bound(planted_.begin(), planted_.end(), z,
                               [](const auto& p, const Site& s) { return p.first < s; });
    if (it != planted_.end() && it->first == z) return it->second;
  }
  if (constant_) return *constant_;
  return pareto_from_uniform(uniform_at(z), alpha_);
}

PotentialField PotentialField::with_planted(const Site& z, double value) const {
  PotentialField f = *this;
  auto it = std::lower_bound(f.planted_.begin(), f.planted_.end(), z,
                             [](const auto& p, const Site& s) { return p.first < s; });
  if (it != f.planted_.end() && it->first == z)
    it->second = value;
  else
    f.planted_.insert(it, {z, value});
  return f;
}

PotentialField PotentialField::with_constant(double value) const {
  PotentialField f = *this;
  f.constant_ = value;
  return f;
}

ScalingContext make_scaling(const PotentialField& field, double T) {
  if (!(T > std::numbers::e)) throw ConfigError("rescaling time T must exceed e");
  ScalingContext c;
  c.d = field.dimension();
  c.alpha = field.alpha();
  c.T = T;
  const double d = c.d;
  const double log_t = std::log(T);
  c.q = d / (c.alpha - d);
  const double base = T / log_t;
  c.a_T = std::pow(base, c.q);
  c.r_T = std::pow(base, c.q + 1);
  c.rho_T = std::log(log_t);
  c.nu_T = std::pow(log_t, -d / (16 * c.alpha));
  c.K_T = std::pow(c.nu_T, -2 * c.alpha) * std::pow(c.rho_T, 2 * d);
  c.eps_T = (3 / c.q) * c.r_T * std::pow(log_t, -0.25);
  c.theta_T = std::pow(c.nu_T, 2 + 2 * c.alpha) * c.a_T;
  return c;
}

std::optional<Site> rescaled_to_lattice(const ScalingContext& ctx, std::span<const double> z) {
  if (static_cast<int>(z.size()) != ctx.d) throw ConfigError("rescaled point has wrong dimension");
  Site s;
  for (int i = 0; i < ctx.d; ++i) {
    const double c = ctx.r_T * z[static_cast<std::size_t>(i)];
    const double k = std::nearbyint(c);
    if (std::abs(c - k) > 1e-9 * std::max(1.0, std::abs(c))) return std::nullopt;
    s[i] = static_cast<std::int32_t>(k);
  }
  return s;
}

std::vector<double> lattice_to_rescaled(const ScalingContext& ctx, const Site& site) {
  std::vector<double> z(static_cast<std::size_t>(ctx.d));
  for (int i = 0; i < ctx.d; ++i) z[static_cast<std::size_t>(i)] = site[i] / ctx.r_T;
  return z;
}

double rescaled_potential(const ScalingContext& ctx, const PotentialField& field, std::span<const double> z) {
  auto site = rescaled_to_lattice(ctx, z);
  if (!site) return 0.0;
  return rescaled_potential_at(ctx, field, *site);
}

Window materialize_window(const PotentialField& field, const Site& center, double radius, std::uint64_t max_sites) {
  const std::uint64_t need = l1_ball_size(field.dimension(), radius);
  if (need > max_sites) throw ResourceError("window too large to materialize", need);
  Window w;
  w.center = center;
  w.radius = radius;
  w.sites = l1_ball(field.dimension(), center, radius);
  w.values.reserve(w.sites.size());
  for (const auto& s : w.sites) w.values.push_back(field.at(s));
  return w;
}

EnvironmentDiagnostics environment_diagnostics(const ScalingContext& ctx, const PotentialField& field,
                                               std::optional<Site> w, std::optional<double> window_radius,
                                               std::uint64_t max_sites) {
  EnvironmentDiagnostics out;
  out.window_radius = window_radius.value_or(ctx.window_radius());
  const Window win = materialize_window(field, Site::origin(), out.window_radius, max_sites);
  out.window_sites = win.sites.size();
  out.kappa_threshold = ctx.nu_T * ctx.a_T / 2;
  const double huge = ctx.a_T / ctx.nu_T;

  for (std::size_t i = 0; i < win.sites.size(); ++i) {
    const double v = win.values[i];
    if (v >= out.kappa_threshold) out.kappa.emplace_back(win.sites[i], v);
    if (v >= huge && !out.huge_value_event) {
      out.huge_value_event = true;
      out.huge_value_witness = win.sites[i];
    }
  }
  out.kappa_within_bound = static_cast<double>(out.kappa.size()) <= ctx.K_T;

  // A_T: two distinct sites with xi_T >= nu_T/2 whose rescaled values are within nu_T^{2+2 alpha}.
  // The candidates with xi_T >= nu_T/2 are exactly kappa; after sorting only neighbours can be closest.
  {
    auto high = out.kappa;
    std::sort(high.begin(), high.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second < b.second : a.first < b.first;
    });
    const double gap = std::pow(ctx.nu_T, 2 + 2 * ctx.alpha);
    for (std::size_t i = 1; i < high.size(); ++i) {
      if ((high[i].second - high[i - 1].second) / ctx.a_T <= gap) {
        out.close_pair_event = true;
        out.close_pair = std::make_pair(high[i - 1].first, high[i].first);
        break;
      }
    }
  }

  if (w) {
    out.w = w;
    const std::uint64_t need = l1_ball_size(ctx.d, ctx.eps_T);
    if (need > max_sites) throw ResourceError("eps_T ball too large to materialize", need);
    for (const auto& z : l1_ball(ctx.d, *w, ctx.eps_T)) {
      if (z == *w) continue;
      if (field.at(z) >= out.kappa_threshold) {
        out.near_w_event = true;
        out.near_w_witness = z;
        break;
      }
    }
  }
  return out;
}

}  // namespace brwpe
