#include "brwpe/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "brwpe/errors.hpp"

namespace brwpe {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Accepts values a hair below a hypothesis boundary so exact boundary cases pass.
bool at_least(double x, double bound) { return x >= bound - 1e-12 * std::max(1.0, std::abs(bound)); }

SimConfig base_config(const PotentialField& field, const Site& start, double horizon, std::uint64_t seed) {
  SimConfig c;
  c.field = &field;
  c.start = start;
  c.horizon = horizon;
  c.seed = seed;
  return c;
}

MeanCheck finish_mean_check(MeanCheck m, const std::vector<std::optional<double>>& values) {
  stats::Accumulator acc;
  for (const auto& v : values) {
    if (v) acc.add(*v);
    else ++m.capped;
  }
  m.replicas = values.size();
  m.estimate = acc.mean();
  m.se = acc.se();
  const double diff = m.estimate - m.expected;
  m.z_score = m.se > 0 ? diff / m.se : (diff == 0 ? 0.0 : std::copysign(INFINITY, diff));
  m.passed = m.capped == 0 && acc.count() > 0 && std::abs(diff) <= 3 * m.se;
  return m;
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t master, Stream s, std::uint64_t index) {
  return derive_seed(master, static_cast<std::uint64_t>(s), index);
}

MeanCheck many_to_one_check(const PotentialField& field, const Site& start, double t, std::uint64_t replicas,
                            std::uint64_t seed, unsigned workers, const SolverSettings& settings) {
  MeanCheck m;
  m.name = "many_to_one";
  m.expected = std::exp(solve_pam(field, start, t, settings).log_u(start));
  const auto values = parallel_map<std::optional<double>>(replicas, workers, [&](std::size_t i) -> std::optional<double> {
    const auto out = run_simulation(base_config(field, start, t, stream_seed(seed, Stream::ManyToOne, i)));
    if (out.status != SimStatus::Completed) return std::nullopt;
    return static_cast<double>(out.state.count_at(start));
  });
  return finish_mean_check(std::move(m), values);
}

MeanCheck birth_death_moment_check(double xi, int d, double s, std::uint64_t replicas, std::uint64_t seed,
                                   unsigned workers) {
  MeanCheck m;
  m.name = "birth_death_moment";
  m.expected = std::exp((xi - 2.0 * d) * s);
  const auto values = parallel_map<std::optional<double>>(replicas, workers, [&](std::size_t i) -> std::optional<double> {
    Rng rng(stream_seed(seed, Stream::BirthDeath, i));
    BirthDeathOptions opts;
    opts.throw_on_cap = false;
    const auto tr = birth_death(xi, 2.0 * d, s, rng, opts);
    if (tr.capped) return std::nullopt;
    return static_cast<double>(tr.final_size);
  });
  return finish_mean_check(std::move(m), values);
}

MeanCheck killed_mean_check(const PotentialField& field, const Site& y, double theta, double t,
                            std::uint64_t replicas, std::uint64_t seed, unsigned workers,
                            const SolverSettings& settings) {
  MeanCheck m;
  m.name = "killed_mean";
  m.expected = std::exp(solve_killed(field, y, theta, t, settings).log_f);
  const auto killing = killing_set_u(field, y, theta);
  const auto values = parallel_map<std::optional<double>>(replicas, workers, [&](std::size_t i) -> std::optional<double> {
    auto cfg = base_config(field, y, t, stream_seed(seed, Stream::KilledMean, i));
    cfg.killing = killing;
    const auto out = run_simulation(cfg);
    if (out.status != SimStatus::Completed) return std::nullopt;
    return static_cast<double>(out.state.count_at(y));
  });
  return finish_mean_check(std::move(m), values);
}

ProbabilityCheck finish_probability_check(ProbabilityCheck c) {
  const double n = static_cast<double>(c.trials);
  c.estimate = c.trials ? static_cast<double>(c.successes) / n : 0.0;
  c.wilson = stats::wilson_interval(c.successes, c.trials);
  c.se = c.trials ? std::sqrt(c.estimate * (1 - c.estimate) / n) : 0.0;
  if (c.trials == 0) {
    c.passed = false;
  } else if (c.kind == BoundKind::AtLeast) {
    c.passed = c.wilson.lo >= c.bound - 3 * c.se;
  } else {
    c.passed = c.wilson.hi <= c.bound + 3 * c.se;
  }
  return c;
}

ChernoffReport chernoff_property_test(std::uint64_t n, const std::vector<double>& p_grid, std::uint64_t replicas,
                                      std::uint64_t seed) {
  if (n == 0) throw ConfigError("Chernoff test needs n >= 1");
  ChernoffReport rep;
  rep.passed = true;
  for (std::size_t j = 0; j < p_grid.size(); ++j) {
    const double p = p_grid[j];
    if (!(p > 0 && p <= 1)) throw ConfigError("Chernoff test needs p in (0, 1]");
    ChernoffRow row;
    row.n = n;
    row.p = p;
    row.threshold = static_cast<double>(n) * p / 2;
    const auto k = static_cast<std::uint64_t>(std::floor(row.threshold + 1e-12));
    row.exact = stats::binomial_cdf(n, p, k);
    row.bound = std::exp(-static_cast<double>(n) * p / 8);
    row.exact_ok = row.exact <= row.bound;

    Rng rng(stream_seed(seed, Stream::Chernoff, j));
    ProbabilityCheck mc;
    mc.name = "chernoff";
    mc.kind = BoundKind::AtMost;
    mc.bound = row.bound;
    mc.hypotheses_ok = true;
    mc.reference = row.threshold;
    mc.trials = replicas;
    for (std::uint64_t r = 0; r < replicas; ++r) {
      std::uint64_t z = 0;
      for (std::uint64_t i = 0; i < n; ++i) z += rng.bernoulli(p);
      if (static_cast<double>(z) <= row.threshold) ++mc.successes;
    }
    row.mc = finish_probability_check(mc);
    row.mc_consistent = replicas > 0 && row.exact >= row.mc.wilson.lo && row.exact <= row.mc.wilson.hi;
    row.passed = row.exact_ok && row.mc.passed && row.mc_consistent;
    rep.passed = rep.passed && row.passed;
    rep.rows.push_back(row);
  }
  return rep;
}

namespace {

bool lemma_hypotheses(const PotentialField& field, const Site& y, double theta, double t, double t_min) {
  const int d = field.dimension();
  const double xi = field.at(y);
  return at_least(xi, 8.0 * d) && at_least(theta, 2.0 * d + std::log(2.0) / (16.0 * d)) && at_least(t, t_min);
}

/// Runs killed replicas from y and counts those whose N(y, t; U) satisfies `event`.
void run_killed_event(ProbabilityCheck& c, const PotentialField& field, const Site& y, double theta, double t,
                      std::uint64_t replicas, std::uint64_t seed, Stream stream, unsigned workers,
                      const std::function<bool(double)>& event) {
  const auto killing = killing_set_u(field, y, theta);
  const auto outcomes = parallel_map<int>(replicas, workers, [&](std::size_t i) {
    auto cfg = base_config(field, y, t, stream_seed(seed, stream, i));
    cfg.killing = killing;
    const auto out = run_simulation(cfg);
    if (out.status != SimStatus::Completed) return -1;
    return event(static_cast<double>(out.state.count_at(y))) ? 1 : 0;
  });
  for (int o : outcomes) {
    if (o < 0) {
      ++c.capped;
      continue;
    }
    ++c.trials;
    c.successes += static_cast<std::uint64_t>(o);
  }
}

}  // namespace

ProbabilityCheck lemma_pz_check(const PotentialField& field, const Site& y, double theta, double t,
                                std::uint64_t replicas, std::uint64_t seed, unsigned workers,
                                const SolverSettings& settings) {
  ProbabilityCheck c;
  c.name = "lemma_pz";
  c.kind = BoundKind::AtLeast;
  c.bound = 1.0 / 16;
  const double xi = field.at(y);
  c.hypotheses_ok = lemma_hypotheses(field, y, theta, t, 1.0 / xi);
  const double expected = std::exp(solve_killed(field, y, theta, t, settings).log_f);
  c.reference = expected;
  run_killed_event(c, field, y, theta, t, replicas, seed, Stream::LemmaPz, workers,
                   [&](double n) { return n >= expected / 2; });
  return finish_probability_check(c);
}

ProbabilityCheck lemma_onev_check(const PotentialField& field, const Site& y, double theta, double t,
                                  std::uint64_t replicas, std::uint64_t seed, unsigned workers,
                                  const SolverSettings& settings) {
  ProbabilityCheck c;
  c.name = "lemma_onev";
  c.kind = BoundKind::AtMost;
  const int d = field.dimension();
  const double xi = field.at(y);
  c.bound = (3.0 + d) * std::pow(xi, -1.0 / 16);
  c.hypotheses_ok = lemma_hypotheses(field, y, theta, t, 1.0 / xi + std::log(xi) / (4 * xi));
  const double threshold = std::exp(solve_killed(field, y, theta, t, settings).log_f) / (2 * std::pow(xi, 0.25));
  c.reference = threshold;
  run_killed_event(c, field, y, theta, t, replicas, seed, Stream::LemmaOnev, workers,
                   [&](double n) { return n <= threshold; });
  return finish_probability_check(c);
}

ProbabilityCheck birth_death_pz_check(double xi, int d, double t, std::uint64_t replicas, std::uint64_t seed,
                                      unsigned workers) {
  ProbabilityCheck c;
  c.name = "birth_death_pz";
  c.kind = BoundKind::AtLeast;
  c.bound = 1.0 / 16;
  c.hypotheses_ok = at_least(xi, 8.0 * d) && at_least(t, 1.0 / xi);
  const double expected = std::exp((xi - 2.0 * d) * t);
  c.reference = expected;
  const auto outcomes = parallel_map<int>(replicas, workers, [&](std::size_t i) {
    Rng rng(stream_seed(seed, Stream::LemmaPz, i));
    BirthDeathOptions opts;
    opts.throw_on_cap = false;
    const auto tr = birth_death(xi, 2.0 * d, t, rng, opts);
    if (tr.capped) return -1;
    return static_cast<double>(tr.final_size) >= expected / 2 ? 1 : 0;
  });
  for (int o : outcomes) {
    if (o < 0) {
      ++c.capped;
      continue;
    }
    ++c.trials;
    c.successes += static_cast<std::uint64_t>(o);
  }
  return finish_probability_check(c);
}

ProbabilityCheck tsmall_extinction_check(double xi, int d, std::uint64_t replicas, std::uint64_t seed,
                                         unsigned workers) {
  ProbabilityCheck c;
  c.name = "tsmall_extinction";
  c.kind = BoundKind::AtMost;
  c.bound = 0.5;
  c.hypotheses_ok = at_least(std::log(xi), std::sqrt(256.0 + 100.0 * d));
  const double u = 2.0 / xi + std::log(xi) / (4 * xi);
  c.reference = u;
  const auto outcomes = parallel_map<int>(replicas, workers, [&](std::size_t i) {
    Rng rng(stream_seed(seed, Stream::Tsmall, i));
    BirthDeathOptions opts;
    opts.throw_on_cap = false;
    const auto tr = birth_death(xi, 2.0 * d, u, rng, opts);
    if (tr.capped) return -1;
    return tr.final_size == 0 ? 1 : 0;
  });
  for (int o : outcomes) {
    if (o < 0) {
      ++c.capped;
      continue;
    }
    ++c.trials;
    c.successes += static_cast<std::uint64_t>(o);
  }
  return finish_probability_check(c);
}

FirstArrivalReport first_arrival_check(const PotentialField& field, const Site& start, const Site& y, double theta,
                                       double t, std::uint64_t replicas, std::uint64_t seed, unsigned workers,
                                       const SolverSettings& settings) {
  if (!(t > 0)) throw ConfigError("first-arrival check needs t > 0");
  const int d = field.dimension();
  const double xi = field.at(y);
  FirstArrivalReport rep;
  rep.xi_y = xi;
  const FThetaTable table(field, y, theta, t, 200, settings);
  const auto killing = killing_set_u(field, y, theta);

  struct Run {
    FirstArrivalSample sample;
    double first_tau = 0;
  };
  const auto runs = parallel_map<Run>(replicas, workers, [&](std::size_t i) {
    auto cfg = base_config(field, start, t, stream_seed(seed, Stream::FirstArrival, i));
    cfg.killing = killing;
    cfg.mark = y;
    Run run;
    try {
      const auto ld = first_arrival_descendants(cfg);
      run.sample.lineages = ld.arrivals.size();
      for (const auto& a : ld.arrivals) run.sample.f_sum += std::exp(table.log_f(std::max(0.0, t - a.tau)));
      if (!ld.arrivals.empty()) run.first_tau = ld.arrivals.front().tau;
      for (const auto& [lineage, sites] : ld.counts)
        for (const auto& [z, n] : sites) (z == y ? run.sample.at_y : run.sample.off_y) += static_cast<double>(n);
    } catch (const ResourceError&) {
      run.sample.capped = true;
    }
    return run;
  });

  rep.small_at_y.name = "first_arrival_at_y";
  rep.small_at_y.kind = BoundKind::AtMost;
  rep.small_at_y.bound = (3.0 + d) * std::pow(xi, -1.0 / 16) + xi * t * std::exp(-std::sqrt(xi) / 16);
  rep.small_at_y.hypotheses_ok = (3.0 + d) * std::pow(xi, -1.0 / 16) <= 0.5 &&
                                 at_least(std::log(xi), std::sqrt(256.0 + 100.0 * d)) &&
                                 at_least(theta, 2.0 * d + std::log(2.0) / (16.0 * d));
  rep.small_at_y.reference = std::pow(xi, -0.8);
  rep.large_off_y.name = "first_arrival_off_y";
  rep.large_off_y.kind = BoundKind::AtMost;
  const double c = 1 - std::pow(2.0, -19.0 / 20);
  rep.large_off_y.bound = 2.0 * d * std::pow(xi, -1.0 / 20) / (c * c);
  rep.large_off_y.hypotheses_ok = xi >= 2 && theta > 10.0 * d * std::pow(xi, 19.0 / 20);
  rep.large_off_y.reference = std::pow(xi, -0.9);

  const double late = (1 + std::log(xi) / 4) / xi;
  for (const auto& run : runs) {
    const auto& s = run.sample;
    rep.samples.push_back(s);
    if (s.capped) {
      ++rep.small_at_y.capped;
      ++rep.large_off_y.capped;
      continue;
    }
    if (s.lineages == 0) continue;  // both events are conditional on some arrival at y
    if (at_least(t - run.first_tau, late) || static_cast<double>(s.lineages) >= std::sqrt(xi)) {
      ++rep.small_at_y.trials;
      if (s.at_y < rep.small_at_y.reference * s.f_sum) ++rep.small_at_y.successes;
    }
    ++rep.large_off_y.trials;
    if (s.off_y >= rep.large_off_y.reference * s.f_sum) ++rep.large_off_y.successes;
  }
  rep.small_at_y = finish_probability_check(rep.small_at_y);
  rep.large_off_y = finish_probability_check(rep.large_off_y);
  return rep;
}

ExchangeabilityReport cohort_exchangeability_check(const PotentialField& field, const Site& start, double t,
                                                   std::uint64_t replicas, std::uint64_t seed, unsigned workers) {
  ExchangeabilityReport rep;
  rep.replicas = replicas;
  auto sample = [&](bool finer) {
    return parallel_map<double>(replicas, workers, [&](std::size_t i) {
      auto cfg = base_config(field, start, t, stream_seed(seed, Stream::Simulate, 2 * i + (finer ? 1 : 0)));
      cfg.finer_cohorts = finer;
      return static_cast<double>(simulate(cfg).count_at(start));
    });
  };
  rep.ks = stats::ks_two_sample(sample(false), sample(true));
  rep.passed = rep.ks.p_value >= 0.01;
  return rep;
}

MaximizerReport localization_target(const PotentialField& field, double T, double t, double window_radius) {
  const auto ctx = make_scaling(field, T);
  const double radius = window_radius > 0 ? window_radius : ctx.window_radius();
  const auto window = l1_ball(field.dimension(), Site::origin(), std::max(radius, 0.5));
  return maximizer(compute_h(ctx, field, window), t);
}

std::vector<LocalizationRecord> localization_experiment(const LocalizationSettings& s) {
  if (!(s.t > 0)) throw ConfigError("localization needs t > 0");
  std::vector<double> grid = s.T_grid;
  std::sort(grid.begin(), grid.end());
  struct Cell {
    double T;
    std::size_t ti;
    std::uint64_t env_seed;
    std::size_t ei;
    PotentialField field;
    Site w;
  };
  std::vector<Cell> cells;
  for (std::size_t ti = 0; ti < grid.size(); ++ti)
    for (std::size_t ei = 0; ei < s.env_seeds.size(); ++ei) {
      PotentialField field(s.d, s.alpha, s.env_seeds[ei]);
      const Site w = localization_target(field, grid[ti], s.t, s.window_radius).w;
      cells.push_back({grid[ti], ti, s.env_seeds[ei], ei, std::move(field), w});
    }
  const std::size_t n = cells.size() * s.replicas;
  return parallel_map<LocalizationRecord>(n, s.workers, [&](std::size_t job) {
    const Cell& cell = cells[job / s.replicas];
    const std::uint64_t r = job % s.replicas;
    const std::uint64_t index = (static_cast<std::uint64_t>(cell.ti) << 40) | (static_cast<std::uint64_t>(cell.ei) << 24) | r;
    auto cfg = base_config(cell.field, Site::origin(), s.t * cell.T, stream_seed(s.master_seed, Stream::Localization, index));
    cfg.population_cap = s.population_cap;
    const auto out = run_simulation(cfg);

    LocalizationRecord rec;
    rec.T = cell.T;
    rec.t = s.t;
    rec.env_seed = cell.env_seed;
    rec.replica = r;
    rec.w = cell.w;
    rec.total = out.state.total();
    rec.cap_hit = out.status != SimStatus::Completed;
    rec.time_reached = out.state.clock();
    const auto counts = out.state.site_counts();
    for (const auto& [z, c] : counts) {
      if (c > rec.n_at_argmax) {
        rec.n_at_argmax = c;
        rec.argmax = z;
      }
      if (z == cell.w) rec.n_at_w = c;
    }
    const double total = static_cast<double>(rec.total);
    rec.fraction_w = total > 0 ? static_cast<double>(rec.n_at_w) / total : 0.0;
    rec.fraction_argmax = total > 0 ? static_cast<double>(rec.n_at_argmax) / total : 0.0;
    rec.argmax_agrees = rec.argmax == rec.w;
    return rec;
  });
}

LocalizationSummary summarize_localization(const std::vector<LocalizationRecord>& records, std::uint64_t bootstrap_seed) {
  std::vector<LocalizationRecord> sorted = records;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.T != b.T) return a.T < b.T;
    if (a.env_seed != b.env_seed) return a.env_seed < b.env_seed;
    return a.replica < b.replica;
  });

  LocalizationSummary sum;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].T == sorted[i].T && sorted[j].env_seed == sorted[i].env_seed) ++j;
    LocalizationCell cell;
    cell.T = sorted[i].T;
    cell.env_seed = sorted[i].env_seed;
    std::vector<double> fw, fa, capped_fw;
    std::uint64_t agree = 0;
    for (std::size_t k = i; k < j; ++k) {
      const auto& r = sorted[k];
      ++cell.records;
      if (r.cap_hit) {
        ++cell.capped;
        capped_fw.push_back(r.fraction_w);
        continue;
      }
      fw.push_back(r.fraction_w);
      fa.push_back(r.fraction_argmax);
      agree += r.argmax_agrees;
    }
    if (fw.empty()) {
      cell.median_fraction_w = cell.mean_fraction_w = cell.median_fraction_argmax = cell.agreement_rate = kNaN;
      cell.q10 = cell.q25 = cell.q75 = cell.q90 = kNaN;
      cell.median_fraction_w_ci = {kNaN, kNaN};
    } else {
      cell.median_fraction_w = stats::median(fw);
      cell.median_fraction_w_ci =
          stats::bootstrap_median_interval(fw, 1000, 0.95, stream_seed(bootstrap_seed, Stream::Bootstrap, sum.cells.size()));
      cell.mean_fraction_w = stats::mean(fw);
      cell.q10 = stats::quantile(fw, 0.10);
      cell.q25 = stats::quantile(fw, 0.25);
      cell.q75 = stats::quantile(fw, 0.75);
      cell.q90 = stats::quantile(fw, 0.90);
      cell.median_fraction_argmax = stats::median(fa);
      cell.agreement_rate = static_cast<double>(agree) / static_cast<double>(fw.size());
    }
    cell.capped_median_fraction_w = capped_fw.empty() ? kNaN : stats::median(capped_fw);
    sum.cells.push_back(cell);
    i = j;
  }

  // Per-seed sequences in increasing T, restricted to cells with uncapped data.
  std::map<std::uint64_t, std::vector<const LocalizationCell*>> by_seed;
  for (const auto& c : sum.cells)
    if (!std::isnan(c.median_fraction_w)) by_seed[c.env_seed].push_back(&c);
  std::vector<double> diffs;
  for (const auto& [seed, seq] : by_seed) {
    for (std::size_t k = 1; k < seq.size(); ++k) diffs.push_back(seq[k]->median_fraction_w - seq[k - 1]->median_fraction_w);
    if (!seq.empty() && seq.back()->median_fraction_argmax > 0.5) ++sum.seeds_argmax_over_half;
  }
  sum.trend = stats::sign_test(diffs);
  sum.trend_ok = sum.trend.p_decrease >= 0.05;
  const std::uint64_t seeds = by_seed.size();
  const std::uint64_t need = seeds >= 3 ? (2 * seeds + 2) / 3 : seeds;
  sum.argmax_ok = seeds > 0 && sum.seeds_argmax_over_half >= need;
  sum.passed = !diffs.empty() && sum.trend_ok && sum.argmax_ok;
  return sum;
}

double rescaled_log_mass(const ScalingContext& ctx, std::uint64_t count) {
  if (count <= 1) return 0.0;
  return std::log(static_cast<double>(count)) / (ctx.a_T * ctx.T);
}

std::vector<ComparisonRecord> lilypad_vs_sim(const PotentialField& field, double T, double t, double window_radius,
                                             std::uint64_t replicas, std::uint64_t seed, unsigned workers,
                                             std::uint64_t population_cap) {
  const auto ctx = make_scaling(field, T);
  const double radius = window_radius > 0 ? window_radius : ctx.window_radius();
  const auto window = l1_ball(field.dimension(), Site::origin(), std::max(radius, 0.5));
  const auto sol = compute_h(ctx, field, window);
  const auto m = sol.m_on_window(t);
  const auto per_replica = parallel_map<std::vector<ComparisonRecord>>(replicas, workers, [&](std::size_t r) {
    auto cfg = base_config(field, Site::origin(), t * T, stream_seed(seed, Stream::Comparison, r));
    cfg.population_cap = population_cap;
    const auto out = run_simulation(cfg);
    const bool capped = out.status != SimStatus::Completed;
    std::vector<ComparisonRecord> recs;
    recs.reserve(sol.size());
    const auto counts = out.state.site_counts();
    for (std::size_t i = 0; i < sol.size(); ++i) {
      ComparisonRecord rec;
      rec.replica = r;
      rec.site = sol.sites()[i];
      rec.z = lattice_to_rescaled(ctx, rec.site);
      const auto it = counts.find(rec.site);
      rec.count = it == counts.end() ? 0 : it->second;
      if (auto h = rescaled_hitting_time(out.state, ctx, rec.site)) rec.H_T = *h;
      rec.h_T = sol.h_at(i);
      rec.M_T = rescaled_log_mass(ctx, rec.count);
      rec.m_T = m[i];
      rec.capped = capped;
      recs.push_back(std::move(rec));
    }
    return recs;
  });
  std::vector<ComparisonRecord> out;
  for (const auto& v : per_replica) out.insert(out.end(), v.begin(), v.end());
  return out;
}

ComparisonSummary summarize_comparison(const std::vector<ComparisonRecord>& records) {
  ComparisonSummary s;
  stats::Accumulator h, m;
  for (const auto& r : records) {
    ++s.records;
    if (r.H_T) {
      ++s.hit;
      h.add(std::abs(*r.H_T - r.h_T));
    }
    m.add(std::abs(r.M_T - r.m_T));
  }
  s.mean_abs_H_residual = h.count() ? h.mean() : kNaN;
  s.mean_abs_M_residual = m.count() ? m.mean() : kNaN;
  return s;
}

}  // namespace brwpe
