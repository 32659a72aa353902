#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "brwpe/brw_sim.hpp"
#include "brwpe/environment.hpp"
#include "brwpe/lilypad.hpp"
#include "brwpe/pam_solver.hpp"
#include "brwpe/stats.hpp"

namespace brwpe {

/// Evaluates f(i) for i in [0, n) on up to `workers` threads. Results are stored by index,
/// so the output does not depend on the worker count or on scheduling.
template <class R>
std::vector<R> parallel_map(std::size_t n, unsigned workers, const std::function<R(std::size_t)>& f) {
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  const unsigned w = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  auto run = [&](unsigned k) {
    for (std::size_t i = k; i < n; i += w) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (w == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < w; ++k) pool.emplace_back(run, k);
    for (auto& th : pool) th.join();
  }
  std::vector<R> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

/// Seed streams used by the experiment drivers.
enum class Stream : std::uint64_t {
  ManyToOne = 1,
  BirthDeath = 2,
  KilledMean = 3,
  Chernoff = 4,
  LemmaPz = 5,
  LemmaOnev = 6,
  Localization = 7,
  Comparison = 8,
  FirstArrival = 9,
  Tsmall = 10,
  Bootstrap = 11,
  Simulate = 12,
};

std::uint64_t stream_seed(std::uint64_t master, Stream s, std::uint64_t index);

// ---------------------------------------------------------------------------
// Monte Carlo mean checks against exact or solver values.

struct MeanCheck {
  std::string name;
  std::uint64_t replicas = 0;
  std::uint64_t capped = 0;
  double estimate = 0;
  double se = 0;
  double expected = 0;
  double z_score = 0;  ///< (estimate - expected) / se
  bool passed = false;  ///< |estimate - expected| <= 3 se and no replica capped
};

/// Mean of N(start, t) over replicas against u(start, t) from the solver (empty killing set).
MeanCheck many_to_one_check(const PotentialField& field, const Site& start, double t, std::uint64_t replicas,
                            std::uint64_t seed, unsigned workers, const SolverSettings& settings);

/// Mean of the single-site population Upsilon_s with birth rate xi and death rate 2d against e^{(xi-2d)s}.
MeanCheck birth_death_moment_check(double xi, int d, double s, std::uint64_t replicas, std::uint64_t seed,
                                   unsigned workers);

/// Mean of N(y, t; U_{y,theta}) started at y against f_theta(y, t).
MeanCheck killed_mean_check(const PotentialField& field, const Site& y, double theta, double t,
                            std::uint64_t replicas, std::uint64_t seed, unsigned workers,
                            const SolverSettings& settings);

// ---------------------------------------------------------------------------
// Probability bounds checked with 99% Wilson intervals plus a 3-SE slack.

enum class BoundKind { AtLeast, AtMost };

struct ProbabilityCheck {
  std::string name;
  BoundKind kind = BoundKind::AtMost;
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  std::uint64_t capped = 0;
  double estimate = 0;
  stats::Interval wilson;
  double se = 0;
  double bound = 0;
  bool hypotheses_ok = false;
  /// AtLeast: wilson.lo >= bound - 3 se. AtMost: wilson.hi <= bound + 3 se.
  bool passed = false;
  double reference = 0;  ///< the expectation or threshold the event is defined against
};

ProbabilityCheck finish_probability_check(ProbabilityCheck c);

struct ChernoffRow {
  std::uint64_t n = 0;
  double p = 0;
  double threshold = 0;   ///< E[Z]/2
  double exact = 0;       ///< P(Z <= E[Z]/2)
  double bound = 0;       ///< exp(-np/8)
  ProbabilityCheck mc;    ///< MC estimate against the bound
  bool mc_consistent = false;  ///< exact value inside the 99% Wilson interval
  bool exact_ok = false;       ///< exact <= bound
  bool passed = false;
};

struct ChernoffReport {
  std::vector<ChernoffRow> rows;
  bool passed = false;
};

ChernoffReport chernoff_property_test(std::uint64_t n, const std::vector<double>& p_grid, std::uint64_t replicas,
                                      std::uint64_t seed);

/// P(N(y,t;U) >= E/2) >= 1/16 with E = f_theta(y,t). Replicas run the killed simulation from y.
ProbabilityCheck lemma_pz_check(const PotentialField& field, const Site& y, double theta, double t,
                                std::uint64_t replicas, std::uint64_t seed, unsigned workers,
                                const SolverSettings& settings);

/// P(N(y,t;U) <= f_theta(y,t) / (2 xi(y)^{1/4})) <= (3+d) xi(y)^{-1/16}.
ProbabilityCheck lemma_onev_check(const PotentialField& field, const Site& y, double theta, double t,
                                  std::uint64_t replicas, std::uint64_t seed, unsigned workers,
                                  const SolverSettings& settings);

/// Pure birth-death variant of the pz criterion (U = everything but y).
ProbabilityCheck birth_death_pz_check(double xi, int d, double t, std::uint64_t replicas, std::uint64_t seed,
                                      unsigned workers);

/// P(Upsilon_u = 0) <= 1/2 at u = 2/xi + log(xi)/(4 xi), in the regime xi >= e^{sqrt(256+100d)}.
ProbabilityCheck tsmall_extinction_check(double xi, int d, std::uint64_t replicas, std::uint64_t seed,
                                         unsigned workers);

/// One replica of the first-arrival statistics at a mark site y.
struct FirstArrivalSample {
  std::uint64_t lineages = 0;
  double at_y = 0;         ///< sum_v N^v(y, t; U)
  double off_y = 0;        ///< sum_v sum_{z != y} N^v(z, t; U)
  double f_sum = 0;        ///< sum_v f_theta(y, t - tau_y(v))
  bool capped = false;
};

struct FirstArrivalReport {
  double xi_y = 0;
  ProbabilityCheck small_at_y;  ///< at_y < xi^{-4/5} f_sum, against (3+d) xi^{-1/16} + xi t e^{-xi^{1/2}/16}
  ProbabilityCheck large_off_y;  ///< off_y >= f_sum / xi^{9/10}, against 2d xi^{-1/20} / (1 - 2^{-19/20})^2
  std::vector<FirstArrivalSample> samples;
};

/// Replicas start at `start` and track first arrivals at y under U_{y,theta}.
FirstArrivalReport first_arrival_check(const PotentialField& field, const Site& start, const Site& y, double theta,
                                       double t, std::uint64_t replicas, std::uint64_t seed, unsigned workers,
                                       const SolverSettings& settings);

/// Two-sample KS comparison of N(start, t) with coarse and finer cohort keys.
struct ExchangeabilityReport {
  std::uint64_t replicas = 0;
  stats::KsResult ks;
  bool passed = false;  ///< p-value >= 0.01
};

ExchangeabilityReport cohort_exchangeability_check(const PotentialField& field, const Site& start, double t,
                                                   std::uint64_t replicas, std::uint64_t seed, unsigned workers);

// ---------------------------------------------------------------------------
// Localization experiment.

struct LocalizationSettings {
  int d = 1;
  double alpha = 1.5;
  std::vector<std::uint64_t> env_seeds;
  std::vector<double> T_grid;
  double t = 1.0;  ///< rescaled time; the simulation horizon is t T
  std::uint64_t replicas = 200;
  std::uint64_t master_seed = 0;
  /// Lilypad window radius in lattice units; 0 selects rho_T r_T.
  double window_radius = 0;
  std::uint64_t population_cap = kDefaultPopulationCap;
  unsigned workers = 1;
};

struct LocalizationRecord {
  double T = 0;
  double t = 0;
  std::uint64_t env_seed = 0;
  std::uint64_t replica = 0;
  Site w;
  std::uint64_t n_at_w = 0;
  Site argmax;
  std::uint64_t n_at_argmax = 0;
  std::uint64_t total = 0;
  double fraction_w = 0;
  double fraction_argmax = 0;
  bool argmax_agrees = false;
  bool cap_hit = false;
  double time_reached = 0;  ///< simulation clock at the end (tT unless capped)
};

/// Lilypad maximizer w for one (environment, T) pair.
MaximizerReport localization_target(const PotentialField& field, double T, double t, double window_radius);

/// Records sorted by (T, env seed, replica).
std::vector<LocalizationRecord> localization_experiment(const LocalizationSettings& s);

struct LocalizationCell {
  double T = 0;
  std::uint64_t env_seed = 0;
  std::uint64_t records = 0;
  std::uint64_t capped = 0;
  double median_fraction_w = 0;
  stats::Interval median_fraction_w_ci;  ///< 95% percentile bootstrap
  double mean_fraction_w = 0;
  double q10 = 0, q25 = 0, q75 = 0, q90 = 0;
  double median_fraction_argmax = 0;
  double agreement_rate = 0;
  double capped_median_fraction_w = 0;  ///< over cap-hit records only
};

struct LocalizationSummary {
  std::vector<LocalizationCell> cells;  ///< sorted by (T, env seed)
  stats::SignTestResult trend;          ///< consecutive-T differences of the per-seed medians
  std::uint64_t seeds_argmax_over_half = 0;  ///< at the largest T
  bool trend_ok = false;                      ///< decreases not significant at 5%
  bool argmax_ok = false;                     ///< at least 2 seeds (or all, if fewer than 3)
  bool passed = false;
};

/// Pure sequential fold over the records.
LocalizationSummary summarize_localization(const std::vector<LocalizationRecord>& records, std::uint64_t bootstrap_seed);

// ---------------------------------------------------------------------------
// Lilypad against simulation.

struct ComparisonRecord {
  std::uint64_t replica = 0;
  Site site;
  std::vector<double> z;  ///< rescaled coordinates
  std::uint64_t count = 0;  ///< N(r_T z, tT)
  std::optional<double> H_T;
  double h_T = 0;
  double M_T = 0;
  double m_T = 0;
  bool capped = false;
};

struct ComparisonSummary {
  std::uint64_t records = 0;
  std::uint64_t hit = 0;
  double mean_abs_H_residual = 0;
  double mean_abs_M_residual = 0;
};

/// M_T(z, t) = log_+ N(r_T z, tT) / (a_T T).
double rescaled_log_mass(const ScalingContext& ctx, std::uint64_t count);

std::vector<ComparisonRecord> lilypad_vs_sim(const PotentialField& field, double T, double t, double window_radius,
                                             std::uint64_t replicas, std::uint64_t seed, unsigned workers,
                                             std::uint64_t population_cap = kDefaultPopulationCap);

ComparisonSummary summarize_comparison(const std::vector<ComparisonRecord>& records);

}  // namespace brwpe
