#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "brwpe/environment.hpp"
#include "brwpe/rng.hpp"

namespace brwpe {

/// Whether a particle (and hence its whole ancestry) has visited the mark site y.
enum class Status : std::uint8_t { Virgin = 0, Marked = 1 };

using SitePredicate = std::function<bool(const Site&)>;

/// U_{y,theta} = {z : xi(z) > xi(y) - theta} \ {y}.
SitePredicate killing_set_u(const PotentialField& field, const Site& y, double theta);

/// Everything except the listed sites.
SitePredicate everything_except(std::vector<Site> keep);

inline constexpr std::uint64_t kDefaultPopulationCap = 10'000'000;
inline constexpr std::uint64_t kDefaultLineageCap = 10'000;

struct SimConfig {
  const PotentialField* field = nullptr;
  Site start;
  double horizon = 0;
  SitePredicate killing;       ///< absorbing set U; empty means none
  std::optional<Site> mark;    ///< site y whose first arrivals are tracked
  std::uint64_t population_cap = kDefaultPopulationCap;
  std::uint64_t lineage_cap = kDefaultLineageCap;
  std::uint64_t seed = 0;
  /// Splits each cohort by an extra dummy tag that children inherit flipped. Only the
  /// aggregation changes; the process law is the same.
  bool finer_cohorts = false;
};

struct CohortKey {
  Site site;
  Status status = Status::Virgin;
  std::uint32_t lineage = 0;  ///< 0 for virgin particles, promotion order otherwise
  std::uint8_t tag = 0;
  bool operator==(const CohortKey&) const = default;
};

struct CohortKeyHash {
  std::size_t operator()(const CohortKey& k) const noexcept {
    return SiteHash{}(k.site) ^ (static_cast<std::size_t>(k.lineage) * 0x9e3779b97f4a7c15ULL) ^
           (static_cast<std::size_t>(k.status) << 1) ^ k.tag;
  }
};

struct Cohort {
  CohortKey key;
  std::uint64_t count = 0;
  double xi = 0;
};

struct FirstArrival {
  std::uint32_t lineage = 0;
  double tau = 0;
};

/// Population state of one replica.
class SimState {
 public:
  double clock() const noexcept { return static_cast<double>(clock_); }
  std::uint64_t total() const noexcept { return total_; }
  std::uint64_t events() const noexcept { return events_; }
  const std::vector<Cohort>& cohorts() const noexcept { return cohorts_; }
  const std::vector<FirstArrival>& first_arrivals() const noexcept { return first_arrivals_; }

  /// First time the site was occupied, if it was before the stopping time.
  std::optional<double> hitting_time(const Site& z) const;
  /// All recorded hitting times ordered by site.
  std::vector<std::pair<Site, double>> hitting_times() const;

  /// N(z, t) by site (all statuses), ordered by site, zero counts dropped.
  std::map<Site, std::uint64_t> site_counts() const;
  std::map<Site, std::uint64_t> counts_with_status(Status s) const;
  std::uint64_t count_at(const Site& z) const;

 private:
  friend class Simulator;
  long double clock_ = 0;
  std::uint64_t total_ = 0;
  std::uint64_t events_ = 0;
  std::vector<Cohort> cohorts_;
  std::unordered_map<Site, double, SiteHash> hitting_;
  std::vector<FirstArrival> first_arrivals_;
};

enum class SimStatus { Completed, PopulationCap, LineageCap };

struct SimOutcome {
  SimState state;
  SimStatus status = SimStatus::Completed;
};

/// Exact Gillespie simulation. Stops at the horizon or, without throwing, when a cap is hit.
SimOutcome run_simulation(const SimConfig& cfg);

/// As run_simulation, but throws PopulationExplosion / LineageOverflow on a cap.
SimState simulate(const SimConfig& cfg);

struct KilledCounts {
  std::map<Site, std::uint64_t> unmarked;  ///< N(z, t; U)
  std::map<Site, std::uint64_t> marked;    ///< N(z, t; U, y)
  SimState state;
};

/// Requires cfg.killing and cfg.mark.
KilledCounts simulate_killed_counts(const SimConfig& cfg);

struct LineageDescendants {
  std::vector<FirstArrival> arrivals;
  /// lineage id -> (site -> N^v(z, t; U)); lineages without survivors map to an empty table.
  std::map<std::uint32_t, std::map<Site, std::uint64_t>> counts;
  SimState state;
};

/// Requires cfg.mark.
LineageDescendants first_arrival_descendants(const SimConfig& cfg);

/// H_T(z) = H(z)/T for the lattice site z = r_T z_rescaled.
std::optional<double> rescaled_hitting_time(const SimState& state, const ScalingContext& ctx, const Site& z);

/// Single-site linear birth-death process started from one individual.
struct BirthDeathTrace {
  std::vector<double> times;        ///< event times (empty unless recorded)
  std::vector<std::uint64_t> sizes; ///< population after each event
  std::optional<double> first_death;
  std::map<std::uint64_t, double> hit_times;  ///< requested n -> T_n
  std::uint64_t final_size = 1;
  bool capped = false;
};

struct BirthDeathOptions {
  bool record_trace = false;
  std::vector<std::uint64_t> levels;  ///< n values whose T_n is recorded
  std::uint64_t population_cap = kDefaultPopulationCap;
  bool throw_on_cap = true;
};

BirthDeathTrace birth_death(double birth_rate, double death_rate, double duration, Rng& rng,
                            const BirthDeathOptions& opts = {});

}  // namespace brwpe
