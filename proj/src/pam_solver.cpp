#include "brwpe/pam_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "brwpe/errors.hpp"
#include "brwpe/simd/kernels.hpp"

namespace brwpe {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTaylorTol = 0x1p-60;
constexpr int kMaxTaylorTerms = 400;
/// Largest log-growth allowed within one step.
constexpr double kMaxStepGrowth = 30.0;

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

/// Lexicographic rank of local coordinates c in [0, L)^d (coordinate 0 most significant).
std::size_t lex_rank(const int* c, int d, std::size_t L) {
  std::size_t r = 0;
  for (int k = 0; k < d; ++k) r = r * L + static_cast<std::size_t>(c[k]);
  return r;
}

/// Sites within `floor` of the profile's accuracy threshold are judged by the checks.
double judge_floor(const SolverSettings& s) { return std::max(s.relative_floor * 1e4, 1e-280); }

}  // namespace

bool Box::contains(const Site& z) const {
  for (int k = 0; k < d; ++k)
    if (std::abs(static_cast<std::int64_t>(z[k]) - center[k]) > radius) return false;
  for (int k = d; k < kMaxDim; ++k)
    if (z[k] != 0) return false;
  return true;
}

std::size_t Box::size() const { return ipow(static_cast<std::size_t>(2 * radius + 1), d); }

std::vector<Site> Box::sites() const {
  std::vector<Site> out;
  out.reserve(size());
  const int L = 2 * radius + 1;
  std::array<int, kMaxDim> c{};
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    Site s;
    for (int k = 0; k < d; ++k) s.x[static_cast<std::size_t>(k)] = center[k] - radius + c[static_cast<std::size_t>(k)];
    out.push_back(s);
    for (int k = d - 1; k >= 0; --k) {
      if (++c[static_cast<std::size_t>(k)] < L) break;
      c[static_cast<std::size_t>(k)] = 0;
    }
  }
  return out;
}

std::size_t PamSolution::index(const Site& z) const {
  int c[kMaxDim];
  for (int k = 0; k < box_.d; ++k) c[k] = z[k] - box_.center[k] + box_.radius;
  return lex_rank(c, box_.d, static_cast<std::size_t>(2 * box_.radius + 1));
}

double PamSolution::profile_at(const Site& z) const {
  if (!box_.contains(z)) return 0.0;
  return profile_[index(z)];
}

double PamSolution::log_u(const Site& z) const {
  const double p = profile_at(z);
  if (!(p > 0)) return kNegInf;
  return std::log(p) + log_scale_;
}

double PamSolution::log_total(std::optional<Site> exclude) const {
  double s = 0;
  for (double v : profile_) s += v;
  if (exclude) s -= profile_at(*exclude);
  if (!(s > 0)) return kNegInf;
  return std::log(s) + log_scale_;
}

PamIntegrator::PamIntegrator(const PotentialField& field, const Site& start, const SolverSettings& settings,
                             const SitePredicate& killing)
    : settings_(settings), d_(field.dimension()) {
  if (settings.box_radius < 0) throw ConfigError("box radius must be non-negative");
  if (!(settings.target_local_error > 0)) throw ConfigError("target local error must be positive");
  if (settings.splitting_order != 1 && settings.splitting_order != 2) throw ConfigError("splitting order must be 1 or 2");
  if (killing && killing(start)) throw ConfigError("start site lies in the killing set");
  box_ = Box{d_, start, settings.box_radius};

  const std::size_t L = static_cast<std::size_t>(2 * settings.box_radius + 1);
  const std::size_t P = L + 2;
  const std::size_t padded = ipow(P, d_);
  if (box_.size() > 50'000'000) throw ResourceError("solver box too large", box_.size());

  std::vector<std::size_t> stride(static_cast<std::size_t>(d_));
  for (int k = 0; k < d_; ++k) stride[static_cast<std::size_t>(k)] = ipow(P, k);
  for (int k = 0; k < d_; ++k) {
    offsets_.push_back(static_cast<std::ptrdiff_t>(stride[static_cast<std::size_t>(k)]));
    offsets_.push_back(-static_cast<std::ptrdiff_t>(stride[static_cast<std::size_t>(k)]));
  }

  mask_.assign(padded, 0.0);
  rate_.assign(padded, 0.0);
  const auto sites = box_.sites();
  box_index_.resize(sites.size());
  boundary_.assign(sites.size(), 0);
  killed_.assign(sites.size(), 0);
  first_ = padded;
  last_ = 0;
  max_rate_ = 0;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    std::size_t p = 0;
    bool edge = false;
    for (int k = 0; k < d_; ++k) {
      const int c = sites[i][k] - start[k] + settings.box_radius;
      p += static_cast<std::size_t>(c + 1) * stride[static_cast<std::size_t>(k)];
      edge = edge || c == 0 || c == static_cast<int>(L) - 1;
    }
    box_index_[i] = p;
    boundary_[i] = edge;
    first_ = std::min(first_, p);
    last_ = std::max(last_, p + 1);
    if (killing && killing(sites[i])) {
      killed_[i] = 1;
      continue;
    }
    mask_[p] = 1.0;
    rate_[p] = field.at(sites[i]) - 2.0 * d_;
    max_rate_ = std::max(max_rate_, std::abs(rate_[p]));
  }

  u_.assign(padded, 0.0);
  y1_ = y2_ = mid_ = tmp_ = term_ = acc_ = growth_ = u_;
  const std::size_t centre_rank = (sites.size() - 1) / 2;  // the centre of an odd cube in lexicographic order
  u_[box_index_[centre_rank]] = 1.0;
  h_ = 0.1 / (max_rate_ + 2.0 * d_);
}

void PamIntegrator::diagonal(std::vector<double>& u, double h) {
  if (h != cached_h_) {
    for (std::size_t p = first_; p < last_; ++p) growth_[p] = mask_[p] * std::exp(rate_[p] * h);
    cached_h_ = h;
  }
  simd::kernels().multiply(u.data() + first_, growth_.data() + first_, last_ - first_);
}

void PamIntegrator::hop_flow(std::vector<double>& u, double h) {
  const auto& kt = simd::kernels();
  const std::size_t n = last_ - first_;
  const int subs = std::max(1, static_cast<int>(std::ceil(2.0 * d_ * h)));
  const double hs = h / subs;
  for (int s = 0; s < subs; ++s) {
    std::copy(u.begin() + static_cast<std::ptrdiff_t>(first_), u.begin() + static_cast<std::ptrdiff_t>(last_),
              acc_.begin() + static_cast<std::ptrdiff_t>(first_));
    std::copy(u.begin() + static_cast<std::ptrdiff_t>(first_), u.begin() + static_cast<std::ptrdiff_t>(last_),
              term_.begin() + static_cast<std::ptrdiff_t>(first_));
    int k = 1;
    for (; k <= kMaxTaylorTerms; ++k) {
      kt.masked_neighbor_sum(term_.data(), tmp_.data(), mask_.data(), first_, last_, offsets_.data(),
                             static_cast<int>(offsets_.size()));
      const double worst = kt.scale_accumulate(acc_.data() + first_, tmp_.data() + first_, hs / k, kTaylorTol, n);
      std::swap(term_, tmp_);
      if (worst <= 0) break;
    }
    if (k > kMaxTaylorTerms) throw SolverError("hopping series did not converge");
    std::copy(acc_.begin() + static_cast<std::ptrdiff_t>(first_), acc_.begin() + static_cast<std::ptrdiff_t>(last_),
              u.begin() + static_cast<std::ptrdiff_t>(first_));
  }
}

void PamIntegrator::step_once(double h, std::vector<double>& out, const std::vector<double>& in) {
  std::copy(in.begin() + static_cast<std::ptrdiff_t>(first_), in.begin() + static_cast<std::ptrdiff_t>(last_),
            out.begin() + static_cast<std::ptrdiff_t>(first_));
  if (settings_.splitting_order == 2) {
    diagonal(out, 0.5 * h);
    hop_flow(out, h);
    diagonal(out, 0.5 * h);
  } else {
    diagonal(out, h);
    hop_flow(out, h);
  }
}

void PamIntegrator::advance_to(double t) {
  if (!(t >= t_)) throw ConfigError("integrator cannot run backwards in time");
  const auto& kt = simd::kernels();
  const std::size_t n = last_ - first_;
  const int p = settings_.splitting_order;
  const double richardson = std::pow(2.0, p) - 1.0;
  const double h_cap = kMaxStepGrowth / (max_rate_ + 2.0 * d_);
  while (t_ < t) {
    if (steps_ + rejected_ >= settings_.max_steps) throw SolverError("solver step budget exhausted");
    const double remaining = t - t_;
    double h = std::min({h_, h_cap, remaining});
    if (!(h > 0) || (h < remaining && t_ + h == t_)) throw SolverError("solver step size underflow");

    step_once(h, y1_, u_);
    step_once(0.5 * h, mid_, u_);
    step_once(0.5 * h, y2_, mid_);

    const double ymax = kt.max_value(y2_.data() + first_, n);
    double err = 0;
    if (ymax > 0)
      err = kt.max_weighted_diff(y1_.data() + first_, y2_.data() + first_, settings_.relative_floor * ymax, n) /
            richardson;
    const double tol = settings_.target_local_error;
    const double factor = err > 0 ? std::clamp(0.9 * std::pow(tol / err, 1.0 / (p + 1)), 0.2, 5.0) : 5.0;
    if (err <= tol) {
      std::swap(u_, y2_);
      t_ = (h == remaining) ? t : t_ + h;
      error_estimate_ += err;
      ++steps_;
      if (ymax > 0) {
        kt.scale(u_.data() + first_, 1.0 / ymax, n);
        log_scale_ += std::log(ymax);
      }
      if (h < remaining) h_ = h * factor;
      else h_ = std::max(h_, h * factor);
    } else {
      ++rejected_;
      h_ = h * factor;
    }
  }
}

PamSolution PamIntegrator::solution() const {
  PamSolution sol;
  sol.box_ = box_;
  sol.t_ = t_;
  sol.log_scale_ = log_scale_;
  sol.killed_ = killed_;
  sol.profile_.resize(box_index_.size());
  double total = 0, edge = 0;
  for (std::size_t i = 0; i < box_index_.size(); ++i) {
    const double v = u_[box_index_[i]];
    sol.profile_[i] = v;
    total += v;
    if (boundary_[i]) edge += v;
  }
  sol.boundary_fraction_ = total > 0 ? edge / total : 0.0;
  // A single-site box has no interior to lose mass from.
  sol.box_too_small_ = box_.radius > 0 && sol.boundary_fraction_ > settings_.boundary_tolerance;
  sol.error_estimate_ = error_estimate_;
  sol.steps_ = steps_;
  sol.rejected_ = rejected_;
  if (sol.box_too_small_ && settings_.fail_on_box_too_small)
    throw SolverError("solver box too small: boundary mass fraction exceeds tolerance");
  return sol;
}

PamSolution solve_pam(const PotentialField& field, const Site& start, double t, const SolverSettings& settings) {
  if (!(t >= 0)) throw ConfigError("time must be non-negative");
  PamIntegrator integ(field, start, settings);
  integ.advance_to(t);
  return integ.solution();
}

KilledSolution solve_killed(const PotentialField& field, const Site& y, double theta, double t,
                            const SolverSettings& settings) {
  const double times[] = {t};
  return std::move(solve_killed_at(field, y, theta, times, settings).front());
}

std::vector<KilledSolution> solve_killed_at(const PotentialField& field, const Site& y, double theta,
                                            std::span<const double> times, const SolverSettings& settings) {
  if (!(theta >= 0)) throw ConfigError("theta must be non-negative");
  // E_z[N(y, t; U)] = E_y[N(z, t; U)] by time reversal, so one forward solve from y gives every z.
  PamIntegrator integ(field, y, settings, killing_set_u(field, y, theta));
  std::vector<KilledSolution> out;
  out.reserve(times.size());
  for (double t : times) {
    if (!(t >= 0)) throw ConfigError("time must be non-negative");
    integ.advance_to(t);
    KilledSolution k{integ.solution(), 0.0};
    k.log_f = k.solution.log_u(y);
    out.push_back(std::move(k));
  }
  return out;
}

FThetaTable::FThetaTable(const PotentialField& field, const Site& y, double theta, double t_max, std::size_t intervals,
                         const SolverSettings& settings)
    : t_max_(t_max) {
  if (!(t_max > 0) || intervals == 0) throw ConfigError("f_theta table needs t_max > 0 and at least one interval");
  std::vector<double> times(intervals + 1);
  for (std::size_t j = 0; j <= intervals; ++j) times[j] = t_max * static_cast<double>(j) / static_cast<double>(intervals);
  times.back() = t_max;
  for (const auto& k : solve_killed_at(field, y, theta, times, settings)) log_f_.push_back(k.log_f);
}

double FThetaTable::log_f(double s) const {
  if (!(s >= 0) || s > t_max_) throw ConfigError("f_theta table queried outside its range");
  const double pos = s / t_max_ * static_cast<double>(log_f_.size() - 1);
  const std::size_t j = std::min(static_cast<std::size_t>(pos), log_f_.size() - 2);
  const double w = pos - static_cast<double>(j);
  return (1 - w) * log_f_[j] + w * log_f_[j + 1];
}

void write_log_profile(std::ostream& os, const PamSolution& sol) {
  const auto prec = os.precision(17);
  const auto sites = sol.box().sites();
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (!(sol.profile()[i] > 0)) continue;
    os << format_site(sites[i], sol.box().d) << ' ' << std::log(sol.profile()[i]) + sol.log_scale() << '\n';
  }
  os.precision(prec);
}

GrowthInequalityReport verify_growth_inequality(const PotentialField& field, const Site& y, double theta, double s,
                                                double t, const SolverSettings& settings, double tolerance) {
  if (!(s > 0) || !(t >= s)) throw ConfigError("growth check needs 0 < s <= t");
  const double times[] = {s, t};
  const auto sols = solve_killed_at(field, y, theta, times, settings);
  const auto& us = sols[0].solution;
  const auto& ut = sols[1].solution;

  GrowthInequalityReport rep;
  rep.s = s;
  rep.t = t;
  const int d = field.dimension();
  rep.factor_log = -(field.at(y) - 2.0 * d) * (t - s);
  rep.worst_margin = std::numeric_limits<double>::infinity();
  rep.worst_site = y;
  const auto sites = us.box().sites();
  const double floor = judge_floor(settings);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (!(us.profile()[i] >= floor)) continue;
    const double lhs = std::log(us.profile()[i]) + us.log_scale();
    const double rhs = ut.profile()[i] > 0 ? rep.factor_log + std::log(ut.profile()[i]) + ut.log_scale() : kNegInf;
    const double margin = -std::expm1(lhs - rhs);
    ++rep.sites_checked;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_site = sites[i];
    }
  }
  rep.passed = rep.sites_checked > 0 && rep.worst_margin >= -tolerance;
  return rep;
}

ShellDecayReport verify_shell_decay(const PotentialField& field, const Site& y, double theta, double eta, double s,
                                    const SolverSettings& settings) {
  const int d = field.dimension();
  ShellDecayReport rep;
  rep.eta = eta;
  rep.theta = theta;
  rep.s = s;
  rep.hypotheses_ok = eta > 0 && eta < 1.0 / (8 * d) && theta > 2.0 * d + std::log(2.0) / eta && s > eta;
  rep.log_bound = std::log(8.0 * d * eta);

  const auto sol = solve_killed(field, y, theta, s, settings).solution;
  const auto sites = sol.box().sites();
  // Only shells lying entirely inside the cube are compared.
  const std::size_t shells = static_cast<std::size_t>(settings.box_radius) + 1;
  std::vector<double> sup(shells, 0.0);
  double global = 0;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto k = static_cast<std::size_t>(l1_distance(sites[i], y, d));
    if (k < shells) sup[k] = std::max(sup[k], sol.profile()[i]);
    global = std::max(global, sol.profile()[i]);
  }
  rep.sup_at_y = sol.profile_at(y) > 0 && sol.profile_at(y) >= global;
  const double floor = judge_floor(settings);
  rep.log_shell_sup.resize(shells);
  for (std::size_t k = 0; k < shells; ++k)
    rep.log_shell_sup[k] = sup[k] > 0 ? std::log(sup[k]) + sol.log_scale() : kNegInf;
  rep.shell_ok.assign(shells, true);
  bool all = true;
  for (std::size_t k = 1; k < shells; ++k) {
    if (sup[k] == 0) continue;
    if (sup[k] < floor || sup[k - 1] < floor) {
      ++rep.unresolved_shells;
      continue;
    }
    rep.shell_ok[k] = rep.log_shell_sup[k] - rep.log_shell_sup[k - 1] < rep.log_bound;
    all = all && rep.shell_ok[k];
  }
  rep.passed = all && rep.sup_at_y;
  return rep;
}

OffsiteRatioReport verify_offsite_mass_ratio(const PotentialField& field, const Site& y, double theta, double s,
                                             const SolverSettings& settings) {
  const int d = field.dimension();
  OffsiteRatioReport rep;
  rep.theta = theta;
  rep.s = s;
  rep.xi_y = field.at(y);
  const double e = 19.0 / 20.0;
  rep.hypotheses_ok = rep.xi_y >= 2 && theta > 10.0 * d * std::pow(rep.xi_y, e);
  const double c = 1 - std::pow(2.0, -e);
  rep.bound = 2.0 * d * std::pow(rep.xi_y, -e) / (c * c);

  const auto k = solve_killed(field, y, theta, s, settings);
  rep.log_f = k.log_f;
  rep.log_offsite = k.solution.log_total(y);
  rep.ratio = std::isfinite(rep.log_offsite) ? std::exp(rep.log_offsite - rep.log_f) : 0.0;
  rep.passed = rep.ratio <= rep.bound;
  return rep;
}

}  // namespace brwpe
