#include "brwpe/brw_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "brwpe/errors.hpp"

namespace brwpe {

SitePredicate killing_set_u(const PotentialField& field, const Site& y, double theta) {
  const double level = field.at(y) - theta;
  return [field, y, level](const Site& z) { return z != y && field.at(z) > level; };
}

SitePredicate everything_except(std::vector<Site> keep) {
  std::sort(keep.begin(), keep.end());
  return [keep = std::move(keep)](const Site& z) { return !std::binary_search(keep.begin(), keep.end(), z); };
}

namespace {

/// Sum tree over cohort rates; internal nodes are recomputed from their children so
/// the root carries no accumulated drift.
class RateTree {
 public:
  std::size_t size() const { return leaves_; }

  void ensure(std::size_t n) {
    if (n <= leaves_) return;
    std::size_t cap = std::max<std::size_t>(leaves_ ? leaves_ : 16, 16);
    while (cap < n) cap *= 2;
    std::vector<double> t(2 * cap, 0.0);
    for (std::size_t i = 0; i < leaves_; ++i) t[cap + i] = tree_[leaves_ + i];
    for (std::size_t i = cap - 1; i >= 1; --i) t[i] = t[2 * i] + t[2 * i + 1];
    tree_ = std::move(t);
    leaves_ = cap;
  }

  void set(std::size_t i, double v) {
    std::size_t node = leaves_ + i;
    tree_[node] = v;
    for (node /= 2; node >= 1; node /= 2) tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
  }

  double total() const { return leaves_ ? tree_[1] : 0.0; }

  std::size_t select(double target) const {
    std::size_t node = 1;
    while (node < leaves_) {
      const std::size_t left = 2 * node;
      if (target < tree_[left] || tree_[left + 1] <= 0) {
        node = left;
      } else {
        target -= tree_[left];
        node = left + 1;
      }
    }
    return node - leaves_;
  }

 private:
  std::size_t leaves_ = 0;
  std::vector<double> tree_;
};

}  // namespace

class Simulator {
 public:
  explicit Simulator(const SimConfig& cfg)
      : cfg_(cfg), d_(cfg.field->dimension()), jump_rate_(2.0 * d_), rng_(cfg.seed) {}

  SimOutcome run() {
    SimOutcome out;
    if (cfg_.killing && cfg_.killing(cfg_.start)) throw ConfigError("simulation cannot start inside the killing set");
    if (!(cfg_.horizon >= 0)) throw ConfigError("horizon must be non-negative");
    if (cfg_.population_cap == 0 || cfg_.lineage_cap == 0) throw ConfigError("caps must be positive");

    state_.hitting_[cfg_.start] = 0.0;
    CohortKey k0{cfg_.start, Status::Virgin, 0, 0};
    if (cfg_.mark && *cfg_.mark == cfg_.start) k0 = promote(k0, out.status);
    add(k0, 1);
    state_.total_ = 1;

    const long double horizon = cfg_.horizon;
    while (out.status == SimStatus::Completed) {
      const double rate = tree_.total();
      if (!(rate > 0)) {
        state_.clock_ = horizon;
        break;
      }
      const long double next = state_.clock_ + static_cast<long double>(rng_.exponential(rate));
      if (next > horizon) {
        state_.clock_ = horizon;
        break;
      }
      state_.clock_ = next;
      step(out.status);
      if (++state_.events_ % 100'000 == 0) check_conservation();
    }
    check_conservation();
    out.state = std::move(state_);
    return out;
  }

 private:
  void step(SimStatus& status) {
    const std::size_t slot = tree_.select(rng_.uniform() * tree_.total());
    Cohort& c = state_.cohorts_[slot];
    const double xi = c.xi;
    if (rng_.uniform() * (xi + jump_rate_) < xi) {
      CohortKey child = c.key;
      if (cfg_.finer_cohorts) child.tag ^= 1;
      add(child, 1);
      ++state_.total_;
      if (state_.total_ > cfg_.population_cap) status = SimStatus::PopulationCap;
      return;
    }
    const CohortKey from = c.key;
    add(from, -1);
    const Site dest = neighbour(from.site, static_cast<int>(rng_.below(static_cast<std::uint32_t>(2 * d_))));
    if (cfg_.killing && cfg_.killing(dest)) {
      --state_.total_;
      return;
    }
    state_.hitting_.try_emplace(dest, static_cast<double>(state_.clock_));
    CohortKey to{dest, from.status, from.lineage, from.tag};
    if (cfg_.mark && dest == *cfg_.mark && from.status == Status::Virgin) to = promote(to, status);
    add(to, 1);
  }

  CohortKey promote(CohortKey k, SimStatus& status) {
    if (state_.first_arrivals_.size() >= cfg_.lineage_cap) {
      status = SimStatus::LineageCap;
      return k;
    }
    k.status = Status::Marked;
    k.lineage = static_cast<std::uint32_t>(state_.first_arrivals_.size() + 1);
    state_.first_arrivals_.push_back({k.lineage, static_cast<double>(state_.clock_)});
    return k;
  }

  void add(const CohortKey& key, std::int64_t delta) {
    auto [it, fresh] = index_.try_emplace(key, static_cast<std::uint32_t>(state_.cohorts_.size()));
    if (fresh) {
      state_.cohorts_.push_back({key, 0, cfg_.field->at(key.site)});
      tree_.ensure(state_.cohorts_.size());
    }
    Cohort& c = state_.cohorts_[it->second];
    c.count = static_cast<std::uint64_t>(static_cast<std::int64_t>(c.count) + delta);
    tree_.set(it->second, static_cast<double>(c.count) * (c.xi + jump_rate_));
  }

  void check_conservation() const {
    std::uint64_t sum = 0;
    for (const auto& c : state_.cohorts_) sum += c.count;
    if (sum != state_.total_) throw std::logic_error("cohort counts out of sync with population total");
  }

  const SimConfig& cfg_;
  int d_;
  double jump_rate_;
  Rng rng_;
  SimState state_;
  RateTree tree_;
  std::unordered_map<CohortKey, std::uint32_t, CohortKeyHash> index_;
};

SimOutcome run_simulation(const SimConfig& cfg) {
  if (!cfg.field) throw ConfigError("simulation needs a potential field");
  return Simulator(cfg).run();
}

SimState simulate(const SimConfig& cfg) {
  auto out = run_simulation(cfg);
  if (out.status == SimStatus::PopulationCap) throw PopulationExplosion(cfg.population_cap, out.state.clock());
  if (out.status == SimStatus::LineageCap) throw LineageOverflow(cfg.lineage_cap);
  return std::move(out.state);
}

KilledCounts simulate_killed_counts(const SimConfig& cfg) {
  if (!cfg.killing || !cfg.mark) throw ConfigError("killed counts need a killing set and a mark site");
  KilledCounts out;
  out.state = simulate(cfg);
  out.unmarked = out.state.counts_with_status(Status::Virgin);
  out.marked = out.state.counts_with_status(Status::Marked);
  return out;
}

LineageDescendants first_arrival_descendants(const SimConfig& cfg) {
  if (!cfg.mark) throw ConfigError("first-arrival tracking needs a mark site");
  LineageDescendants out;
  out.state = simulate(cfg);
  out.arrivals = out.state.first_arrivals();
  for (const auto& a : out.arrivals) out.counts[a.lineage];
  for (const auto& c : out.state.cohorts())
    if (c.key.status == Status::Marked && c.count > 0) out.counts[c.key.lineage][c.key.site] += c.count;
  return out;
}

std::optional<double> SimState::hitting_time(const Site& z) const {
  auto it = hitting_.find(z);
  if (it == hitting_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<Site, double>> SimState::hitting_times() const {
  std::vector<std::pair<Site, double>> out(hitting_.begin(), hitting_.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::map<Site, std::uint64_t> SimState::site_counts() const {
  std::map<Site, std::uint64_t> out;
  for (const auto& c : cohorts_)
    if (c.count) out[c.key.site] += c.count;
  return out;
}

std::map<Site, std::uint64_t> SimState::counts_with_status(Status s) const {
  std::map<Site, std::uint64_t> out;
  for (const auto& c : cohorts_)
    if (c.count && c.key.status == s) out[c.key.site] += c.count;
  return out;
}

std::uint64_t SimState::count_at(const Site& z) const {
  std::uint64_t n = 0;
  for (const auto& c : cohorts_)
    if (c.key.site == z) n += c.count;
  return n;
}

std::optional<double> rescaled_hitting_time(const SimState& state, const ScalingContext& ctx, const Site& z) {
  auto h = state.hitting_time(z);
  if (!h) return std::nullopt;
  return *h / ctx.T;
}

BirthDeathTrace birth_death(double birth_rate, double death_rate, double duration, Rng& rng,
                            const BirthDeathOptions& opts) {
  if (!(birth_rate > 0)) throw ConfigError("birth rate must be positive");
  if (!(death_rate >= 0)) throw ConfigError("death rate must be non-negative");
  BirthDeathTrace tr;
  std::uint64_t n = 1;
  long double clock = 0;
  std::vector<std::uint64_t> levels = opts.levels;
  std::sort(levels.begin(), levels.end());
  // n moves by +-1 from 1, so T_L is the first time n exceeds its running maximum at L.
  std::uint64_t max_reached = 1;
  auto next_level = std::find_if(levels.begin(), levels.end(), [](std::uint64_t l) { return l > 1; });
  for (auto l : levels)
    if (l == 1) tr.hit_times[1] = 0.0;
  if (opts.record_trace) {
    tr.times.push_back(0);
    tr.sizes.push_back(1);
  }
  while (n > 0) {
    const double rate = static_cast<double>(n) * (birth_rate + death_rate);
    const long double next = clock + static_cast<long double>(rng.exponential(rate));
    if (next > duration) break;
    clock = next;
    if (rng.uniform() * (birth_rate + death_rate) < birth_rate) {
      ++n;
      if (n > opts.population_cap) {
        tr.capped = true;
        if (opts.throw_on_cap) throw PopulationExplosion(opts.population_cap, static_cast<double>(clock));
        break;
      }
      if (n > max_reached) {
        max_reached = n;
        if (next_level != levels.end() && *next_level == n) {
          tr.hit_times[n] = static_cast<double>(clock);
          while (next_level != levels.end() && *next_level <= n) ++next_level;
        }
      }
    } else {
      --n;
      if (!tr.first_death) tr.first_death = static_cast<double>(clock);
    }
    if (opts.record_trace) {
      tr.times.push_back(static_cast<double>(clock));
      tr.sizes.push_back(n);
    }
  }
  tr.final_size = n;
  return tr;
}

}  // namespace brwpe
