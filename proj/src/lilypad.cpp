#include "brwpe/lilypad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "brwpe/errors.hpp"
#include "brwpe/simd/kernels.hpp"

namespace brwpe {

namespace {

simd::PointsSoA soa(const std::vector<std::vector<double>>& coords, std::size_t n) {
  simd::PointsSoA p;
  p.d = static_cast<int>(coords.size());
  p.n = n;
  for (int k = 0; k < p.d; ++k) p.coord[k] = coords[static_cast<std::size_t>(k)].data();
  return p;
}

void site_coords(const Site& s, int d, double* out) {
  for (int k = 0; k < d; ++k) out[k] = s[k];
}

}  // namespace

LilypadSolution compute_h(const ScalingContext& ctx, const PotentialField& field, std::span<const Site> window) {
  if (window.empty()) throw ConfigError("lilypad window is empty");
  const int d = ctx.d;
  const std::size_t n = window.size();

  LilypadSolution sol;
  sol.ctx_ = ctx;
  sol.sites_.assign(window.begin(), window.end());
  sol.order_.resize(n);
  std::iota(sol.order_.begin(), sol.order_.end(), std::size_t{0});
  std::sort(sol.order_.begin(), sol.order_.end(),
            [&](std::size_t a, std::size_t b) { return sol.sites_[a] < sol.sites_[b]; });
  for (std::size_t i = 1; i < n; ++i)
    if (sol.sites_[sol.order_[i]] == sol.sites_[sol.order_[i - 1]]) throw ConfigError("lilypad window has duplicate sites");

  const auto origin = sol.index_of(Site::origin());
  if (!origin) throw ConfigError("lilypad window must contain the origin");

  sol.xi_T_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sol.xi_T_[i] = rescaled_potential_at(ctx, field, sol.sites_[i]);
    if (!(sol.xi_T_[i] > 0)) throw ConfigError("lilypad window site with non-positive potential");
  }
  sol.coords_.assign(static_cast<std::size_t>(d), std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) sol.coords_[static_cast<std::size_t>(k)][i] = sol.sites_[i][k];

  // Dense Dijkstra: O(n) selection plus one vectorized O(n) relaxation per settled site.
  const auto& kt = simd::kernels();
  const auto pts = soa(sol.coords_, n);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<std::uint8_t> settled(n + 4, 0);  // padded for 4-lane mask loads
  dist[*origin] = 0;
  const double hop = ctx.q / ctx.r_T;
  double src[kMaxDim];
  for (std::size_t iter = 0; iter < n; ++iter) {
    const std::size_t u = kt.argmin_unsettled(dist.data(), settled.data(), n);
    if (u == n) break;
    settled[u] = 1;
    site_coords(sol.sites_[u], d, src);
    kt.relax_l1(pts, src, dist[u], hop / sol.xi_T_[u], dist.data(), settled.data());
  }
  sol.h_ = std::move(dist);
  return sol;
}

std::optional<std::size_t> LilypadSolution::index_of(const Site& z) const {
  auto it = std::lower_bound(order_.begin(), order_.end(), z,
                             [&](std::size_t i, const Site& s) { return sites_[i] < s; });
  if (it != order_.end() && sites_[*it] == z) return *it;
  return std::nullopt;
}

std::vector<double> LilypadSolution::growth(double t) const {
  std::vector<double> g(size());
  for (std::size_t i = 0; i < size(); ++i) g[i] = xi_T_[i] * std::max(0.0, t - h_[i]);
  return g;
}

double LilypadSolution::m(const Site& z, double t) const {
  const auto g = growth(t);
  double zc[kMaxDim];
  site_coords(z, ctx_.d, zc);
  return simd::kernels().max_minus_l1(soa(coords_, size()), g.data(), zc, ctx_.q / ctx_.r_T);
}

std::vector<double> LilypadSolution::m_on_window(double t) const {
  const auto& kt = simd::kernels();
  const auto g = growth(t);
  const auto pts = soa(coords_, size());
  const double w = ctx_.q / ctx_.r_T;
  std::vector<double> out(size());
  double zc[kMaxDim];
  for (std::size_t i = 0; i < size(); ++i) {
    site_coords(sites_[i], ctx_.d, zc);
    out[i] = kt.max_minus_l1(pts, g.data(), zc, w);
  }
  return out;
}

MaximizerReport maximizer(const LilypadSolution& sol, double t) {
  if (!(t > 0)) throw ConfigError("maximizer needs t > 0");
  const auto m = sol.m_on_window(t);
  std::vector<std::size_t> order(sol.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sol.sites()[a] < sol.sites()[b]; });

  MaximizerReport rep;
  rep.t = t;
  double best = -std::numeric_limits<double>::infinity();
  double second = -std::numeric_limits<double>::infinity();
  for (std::size_t i : order) {
    const double v = m[i];
    if (v > best) {
      second = best;
      best = v;
      rep.index = i;
    } else if (v > second) {
      second = v;
    }
  }
  rep.w = sol.sites()[rep.index];
  rep.m_value = best;
  rep.runner_up_gap = best - second;
  return rep;
}

WindowSensitivity window_sensitivity(const ScalingContext& ctx, const PotentialField& field, double base_radius,
                                     double t, std::uint64_t max_sites) {
  WindowSensitivity rep;
  rep.base_radius = base_radius;
  const std::uint64_t need = l1_ball_size(ctx.d, 2 * base_radius);
  if (need > max_sites) throw ResourceError("doubled lilypad window exceeds the site limit", need);
  const auto base_sites = l1_ball(ctx.d, Site::origin(), base_radius);
  const auto big_sites = l1_ball(ctx.d, Site::origin(), 2 * base_radius);
  const auto base = compute_h(ctx, field, base_sites);
  const auto big = compute_h(ctx, field, big_sites);
  rep.base_sites = base.size();
  rep.doubled_sites = big.size();
  for (std::size_t i = 0; i < base.size(); ++i) {
    const auto j = big.index_of(base.sites()[i]);
    rep.max_delta_h = std::max(rep.max_delta_h, base.h_at(i) - big.h_at(*j));
  }
  rep.w_base = maximizer(base, t).w;
  rep.w_doubled = maximizer(big, t).w;
  rep.w_changed = rep.w_base != rep.w_doubled;
  return rep;
}

void write_lilypad_table(std::ostream& os, const LilypadSolution& sol, double t) {
  const auto prec = os.precision(17);
  const auto m = sol.m_on_window(t);
  for (std::size_t i = 0; i < sol.size(); ++i)
    os << format_site(sol.sites()[i], sol.dimension()) << ' ' << sol.h_at(i) << ' ' << m[i] << '\n';
  os.precision(prec);
}

}  // namespace brwpe
