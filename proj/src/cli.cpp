#include "brwpe/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <ostream>
#include <sstream>

#include "brwpe/analysis.hpp"
#include "brwpe/errors.hpp"
#include "brwpe/snapshot.hpp"

namespace brwpe {

using json = nlohmann::ordered_json;

namespace {

json site_json(const Site& s, int d) {
  json a = json::array();
  for (int k = 0; k < d; ++k) a.push_back(s[k]);
  return a;
}

/// NaN and infinities become null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void emit(std::ostream& os, const json& j) { os << j.dump() << '\n'; }

void header(std::ostream& os, const RunConfig& cfg, const std::string& sub) {
  emit(os, {{"type", "header"},
            {"tool", kToolVersion},
            {"subcommand", sub},
            {"digest", digest_hex(config_digest(cfg))},
            {"seed", cfg.seed}});
}

PotentialField config_field(const RunConfig& cfg) {
  PotentialField f(cfg.d, cfg.alpha, cfg.seed);
  if (cfg.y && cfg.planted_xi) f = f.with_planted(*cfg.y, *cfg.planted_xi);
  return f;
}

SolverSettings config_settings(const RunConfig& cfg) {
  SolverSettings s;
  s.box_radius = cfg.box_radius;
  s.target_local_error = cfg.target_local_error;
  s.splitting_order = cfg.splitting_order;
  return s;
}

json probability_json(const ProbabilityCheck& c) {
  return {{"successes", c.successes},
          {"trials", c.trials},
          {"capped", c.capped},
          {"estimate", num(c.estimate)},
          {"wilson99", {num(c.wilson.lo), num(c.wilson.hi)}},
          {"se", num(c.se)},
          {"bound", num(c.bound)},
          {"bound_kind", c.kind == BoundKind::AtLeast ? "at_least" : "at_most"},
          {"reference", num(c.reference)},
          {"hypotheses_ok", c.hypotheses_ok}};
}

json mean_json(const MeanCheck& m) {
  return {{"replicas", m.replicas}, {"capped", m.capped},   {"estimate", num(m.estimate)},
          {"se", num(m.se)},        {"expected", num(m.expected)}, {"z_score", num(m.z_score)}};
}

class VerifyLog {
 public:
  explicit VerifyLog(std::ostream& os) : os_(os) {}
  void item(const std::string& suite, const std::string& item, bool passed, json details) {
    json j = {{"type", "verify"}, {"suite", suite}, {"item", item}, {"passed", passed}};
    j["details"] = std::move(details);
    emit(os_, j);
    ++items_;
    failed_ += !passed;
    auto [it, fresh] = suites_.try_emplace(suite, true);
    it->second = it->second && passed;
    if (fresh) order_.push_back(suite);
  }
  int finish() {
    json suites = json::array();
    for (const auto& s : order_) suites.push_back({{"suite", s}, {"passed", suites_[s]}});
    emit(os_, {{"type", "verify_summary"}, {"items", items_}, {"failed", failed_}, {"suites", suites}, {"passed", failed_ == 0}});
    return failed_ == 0 ? kExitOk : kExitVerification;
  }

 private:
  std::ostream& os_;
  std::uint64_t items_ = 0, failed_ = 0;
  std::map<std::string, bool> suites_{};
  std::vector<std::string> order_;
};

/// Suite instances are anchored at the origin; their environments are derived from the master seed.
PotentialField instance_field(const RunConfig& cfg, std::uint64_t k) {
  return PotentialField(cfg.d, cfg.alpha, derive_seed(cfg.seed, 100, k));
}

}  // namespace

int cmd_gen_env(const RunConfig& cfg, std::ostream& os) {
  const auto field = config_field(cfg);
  const auto window = materialize_window(field, cfg.snapshot_center, cfg.snapshot_radius);
  auto snap = make_snapshot(field, window);
  snap.tool = kToolVersion;
  snap.digest = digest_hex(config_digest(cfg));
  write_snapshot(os, snap);
  return kExitOk;
}

int cmd_lilypad(const RunConfig& cfg, std::ostream& os) {
  header(os, cfg, "lilypad");
  const auto field = config_field(cfg);
  for (double T : cfg.T_grid) {
    const auto ctx = make_scaling(field, T);
    const double radius = cfg.window_radius > 0 ? cfg.window_radius : ctx.window_radius();
    const auto window = l1_ball(cfg.d, Site::origin(), std::max(radius, 0.5));
    const auto sol = compute_h(ctx, field, window);
    const auto m = sol.m_on_window(cfg.t);
    emit(os, {{"type", "scaling"}, {"T", T},           {"q", ctx.q},         {"a_T", ctx.a_T},
              {"r_T", ctx.r_T},    {"rho_T", ctx.rho_T}, {"nu_T", ctx.nu_T},  {"K_T", ctx.K_T},
              {"eps_T", ctx.eps_T}, {"theta_T", ctx.theta_T}, {"window_radius", radius}, {"window_sites", sol.size()}});
    for (std::size_t i = 0; i < sol.size(); ++i) {
      emit(os, {{"type", "lilypad"},
                {"T", T},
                {"t", cfg.t},
                {"site", site_json(sol.sites()[i], cfg.d)},
                {"xi_T", sol.xi_T()[i]},
                {"h", num(sol.h_at(i))},
                {"m", num(m[i])}});
    }
    const auto mx = maximizer(sol, cfg.t);
    emit(os, {{"type", "maximizer"}, {"T", T}, {"t", cfg.t}, {"w", site_json(mx.w, cfg.d)},
              {"m", num(mx.m_value)}, {"runner_up_gap", num(mx.runner_up_gap)}});
    const auto diag = environment_diagnostics(ctx, field, mx.w, radius);
    json kappa = json::array();
    for (const auto& [z, v] : diag.kappa) kappa.push_back({{"site", site_json(z, cfg.d)}, {"xi", v}});
    emit(os, {{"type", "diagnostics"},
              {"T", T},
              {"kappa_threshold", diag.kappa_threshold},
              {"kappa", kappa},
              {"kappa_within_bound", diag.kappa_within_bound},
              {"close_pair_event", diag.close_pair_event},
              {"near_w_event", diag.near_w_event},
              {"huge_value_event", diag.huge_value_event}});
  }
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& os) {
  header(os, cfg, "simulate");
  const auto field = config_field(cfg);
  SitePredicate killing;
  if (cfg.y && cfg.theta > 0) killing = killing_set_u(field, *cfg.y, cfg.theta);
  struct Result {
    SimOutcome out;
    std::uint64_t seed;
  };
  const auto results = parallel_map<Result>(cfg.replicas, cfg.workers, [&](std::size_t i) {
    SimConfig sc;
    sc.field = &field;
    sc.start = cfg.start;
    sc.horizon = cfg.horizon;
    sc.killing = killing;
    sc.mark = cfg.y;
    sc.population_cap = cfg.population_cap;
    sc.lineage_cap = cfg.lineage_cap;
    sc.seed = stream_seed(cfg.seed, Stream::Simulate, i);
    return Result{run_simulation(sc), sc.seed};
  });
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& st = results[i].out.state;
    std::vector<std::pair<Site, std::uint64_t>> counts;
    for (const auto& kv : st.site_counts()) counts.push_back(kv);
    std::stable_sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (counts.size() > cfg.top_k) counts.resize(cfg.top_k);
    json top = json::array();
    for (const auto& [z, n] : counts) top.push_back({{"site", site_json(z, cfg.d)}, {"count", n}});
    json hits = json::array();
    for (const auto& [z, h] : st.hitting_times()) hits.push_back({{"site", site_json(z, cfg.d)}, {"H", h}});
    json arrivals = json::array();
    for (const auto& a : st.first_arrivals()) arrivals.push_back({{"lineage", a.lineage}, {"tau", a.tau}});
    const auto status = results[i].out.status;
    emit(os, {{"type", "replica"},
              {"index", i},
              {"seed", results[i].seed},
              {"status", status == SimStatus::Completed       ? "completed"
                         : status == SimStatus::PopulationCap ? "population_cap"
                                                              : "lineage_cap"},
              {"clock", st.clock()},
              {"total", st.total()},
              {"events", st.events()},
              {"top_sites", top},
              {"hitting_times", hits},
              {"first_arrivals", arrivals}});
  }
  return kExitOk;
}

int cmd_pam(const RunConfig& cfg, std::ostream& os) {
  header(os, cfg, "pam");
  const auto field = config_field(cfg);
  const auto settings = config_settings(cfg);
  std::vector<double> times = cfg.pam_times;
  std::sort(times.begin(), times.end());
  PamIntegrator integ(field, cfg.start, settings);
  for (double t : times) {
    integ.advance_to(t);
    const auto sol = integ.solution();
    const auto sites = sol.box().sites();
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if (!(sol.profile()[i] > 0)) continue;
      emit(os, {{"type", "pam_site"}, {"t", t}, {"site", site_json(sites[i], cfg.d)},
                {"log_u", std::log(sol.profile()[i]) + sol.log_scale()}});
    }
    emit(os, {{"type", "pam_summary"},
              {"t", t},
              {"log_total", num(sol.log_total())},
              {"boundary_mass_fraction", sol.boundary_mass_fraction()},
              {"box_too_small", sol.box_too_small()},
              {"error_estimate", sol.error_estimate()},
              {"steps", sol.steps()},
              {"rejected_steps", sol.rejected_steps()}});
  }
  if (cfg.y && cfg.theta > 0) {
    for (const auto& k : solve_killed_at(field, *cfg.y, cfg.theta, times, settings))
      emit(os, {{"type", "f_theta"}, {"y", site_json(*cfg.y, cfg.d)}, {"theta", cfg.theta},
                {"t", k.solution.time()}, {"log_f", num(k.log_f)},
                {"boundary_mass_fraction", k.solution.boundary_mass_fraction()}});
  }
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& os) {
  header(os, cfg, "verify");
  VerifyLog log(os);
  const int d = cfg.d;
  const auto settings = config_settings(cfg);
  const Site o = Site::origin();
  const unsigned w = cfg.workers;

  {
    const PotentialField field(d, cfg.alpha, cfg.seed);
    const auto m = many_to_one_check(field, o, cfg.verify_m2o_t, cfg.verify_m2o_replicas, cfg.seed, w, settings);
    log.item("many_to_one", "mean_N0_vs_u0", m.passed, mean_json(m));
  }
  {
    const auto field = PotentialField(d, cfg.alpha, cfg.seed).with_constant(0.0);
    SolverSettings s = settings;
    s.box_radius = 30;
    const auto sol = solve_pam(field, o, 1.0, s);
    const double mass = std::exp(sol.log_total());
    log.item("heat_conservation", "mass_at_t1", std::abs(mass - 1) <= 1e-6, {{"mass", mass}, {"tolerance", 1e-6}});
  }
  {
    const PotentialField field(d, cfg.alpha, cfg.seed);
    SolverSettings s = settings;
    s.box_radius = 0;
    const double t = 1.0;
    const double exact = (field.at(o) - 2.0 * d) * t;
    const double got = solve_pam(field, o, t, s).log_u(o);
    const double rel = std::abs(std::expm1(got - exact));
    log.item("scalar_exactness", "single_site_box", rel <= 1e-12, {{"relative_error", rel}, {"tolerance", 1e-12}});
    const double xi = 4.0 * d;
    const auto m = birth_death_moment_check(xi, d, 1.0, cfg.verify_bd_replicas, cfg.seed, w);
    log.item("birth_death", "moment", m.passed, mean_json(m));
  }
  for (std::uint64_t k = 0; k < cfg.verify_instances; ++k) {
    const double xi_y = 5.0 + 10.0 * static_cast<double>(k) / static_cast<double>(std::max<std::uint64_t>(1, cfg.verify_instances - 1));
    const auto field = instance_field(cfg, k).with_planted(o, xi_y);
    const auto r = verify_growth_inequality(field, o, 2.0, 0.5, 1.0, settings);
    log.item("lemma_tr", "instance_" + std::to_string(k), r.passed,
             {{"xi_y", xi_y}, {"theta", 2.0}, {"worst_margin", num(r.worst_margin)}, {"worst_site", site_json(r.worst_site, d)}, {"sites_checked", r.sites_checked}});
  }
  const double eta = 0.8 / (8.0 * d);
  const double theta_ybest = 2.0 * d + std::log(2.0) / eta + 1.0;
  for (std::uint64_t k = 0; k < cfg.verify_instances; ++k) {
    const double xi_y = 30.0 + 70.0 * static_cast<double>(k) / static_cast<double>(std::max<std::uint64_t>(1, cfg.verify_instances - 1));
    const auto field = instance_field(cfg, k).with_planted(o, xi_y);
    const auto r = verify_shell_decay(field, o, theta_ybest, eta, 0.5, settings);
    json ratios = json::array();
    for (std::size_t j = 1; j < r.log_shell_sup.size(); ++j) ratios.push_back(num(r.log_shell_sup[j] - r.log_shell_sup[j - 1]));
    log.item("lemma_ybest", "instance_" + std::to_string(k), r.passed && r.hypotheses_ok,
             {{"xi_y", xi_y}, {"eta", eta}, {"theta", theta_ybest}, {"hypotheses_ok", r.hypotheses_ok},
              {"log_bound", r.log_bound}, {"log_shell_ratios", ratios}, {"unresolved_shells", r.unresolved_shells},
              {"sup_at_y", r.sup_at_y}});
  }
  for (std::uint64_t k = 0; k < cfg.verify_instances; ++k) {
    const double xi_y = 30.0 + 70.0 * static_cast<double>(k) / static_cast<double>(std::max<std::uint64_t>(1, cfg.verify_instances - 1));
    const double theta = 10.0 * d * std::pow(xi_y, 0.95) * 1.01;
    const auto field = instance_field(cfg, k).with_planted(o, xi_y);
    const auto r = verify_offsite_mass_ratio(field, o, theta, 0.5, settings);
    log.item("offsite_ratio", "instance_" + std::to_string(k), r.passed && r.hypotheses_ok,
             {{"xi_y", xi_y}, {"theta", theta}, {"hypotheses_ok", r.hypotheses_ok}, {"ratio", num(r.ratio)},
              {"bound", r.bound}, {"log_f", num(r.log_f)}});
  }
  {
    const double xi_y = 20.0 * d;
    const double theta = 2.0 * d + std::log(2.0) / (16.0 * d) + 1.0;
    const double t = 0.25;
    const auto field = PotentialField(d, cfg.alpha, cfg.seed).with_planted(o, xi_y);
    const auto km = killed_mean_check(field, o, theta, t, cfg.verify_mc_replicas, cfg.seed, w, settings);
    log.item("killed_mean", "N_y_vs_f_theta", km.passed, mean_json(km));
    const auto pz = lemma_pz_check(field, o, theta, t, cfg.verify_mc_replicas, cfg.seed, w, settings);
    log.item("lemma_pz", "killed_instance", pz.passed && pz.hypotheses_ok, probability_json(pz));
    const auto bd = birth_death_pz_check(xi_y, d, t, cfg.verify_mc_replicas, cfg.seed, w);
    log.item("lemma_pz", "birth_death", bd.passed && bd.hypotheses_ok, probability_json(bd));
    const auto onev = lemma_onev_check(field, o, theta, t, cfg.verify_mc_replicas, cfg.seed, w, settings);
    log.item("lemma_onev", "killed_instance", onev.passed && onev.hypotheses_ok, probability_json(onev));
  }
  {
    const double xi = std::exp(std::sqrt(256.0 + 100.0 * d)) * 1.01;
    const auto c = tsmall_extinction_check(xi, d, cfg.verify_mc_replicas, cfg.seed, w);
    log.item("birth_death", "tsmall_extinction", c.passed && c.hypotheses_ok, probability_json(c));
  }
  {
    const auto rep = chernoff_property_test(64, {0.5, 0.25, 1.0}, cfg.verify_chernoff_replicas, cfg.seed);
    for (const auto& row : rep.rows)
      log.item("chernoff", "n64_p" + std::to_string(row.p).substr(0, 4), row.passed,
               {{"exact", row.exact}, {"bound", row.bound}, {"exact_ok", row.exact_ok}, {"mc_consistent", row.mc_consistent},
                {"mc", probability_json(row.mc)}});
  }
  {
    const PotentialField field(d, cfg.alpha, cfg.seed);
    const auto ex = cohort_exchangeability_check(field, o, 1.0, cfg.verify_ks_replicas, cfg.seed, w);
    log.item("exchangeability", "finer_cohorts_ks", ex.passed, {{"statistic", ex.ks.statistic}, {"p_value", ex.ks.p_value}});
  }
  {
    const double xi_y = std::max(std::pow(2.0 * (3.0 + d), 16.0), std::exp(std::sqrt(256.0 + 100.0 * d))) * 1.01;
    const double theta = 2.0 * d + std::log(2.0) / (16.0 * d) + 1.0;
    const double t = (1 + std::log(xi_y) / 4) / xi_y;
    const auto field = PotentialField(d, cfg.alpha, cfg.seed).with_planted(o, xi_y);
    const auto rep = first_arrival_check(field, o, o, theta, t, std::min<std::uint64_t>(cfg.verify_mc_replicas, 1000),
                                         cfg.seed, w, settings);
    log.item("first_arrival", "at_y_lower_tail", rep.small_at_y.passed && rep.small_at_y.hypotheses_ok,
             probability_json(rep.small_at_y));
    // With theta this small the off-site hypothesis fails; reported only.
    json off = probability_json(rep.large_off_y);
    off["reported_only"] = true;
    log.item("first_arrival", "off_y_upper_tail", true, off);
  }
  return log.finish();
}

int cmd_localize(const RunConfig& cfg, std::ostream& os) {
  header(os, cfg, "localize");
  LocalizationSettings s;
  s.d = cfg.d;
  s.alpha = cfg.alpha;
  s.env_seeds = cfg.env_seeds;
  s.T_grid = cfg.T_grid;
  s.t = cfg.t;
  s.replicas = cfg.replicas;
  s.master_seed = cfg.seed;
  s.window_radius = cfg.window_radius;
  s.population_cap = cfg.population_cap;
  s.workers = cfg.workers;
  const auto records = localization_experiment(s);
  for (const auto& r : records)
    emit(os, {{"type", "localization"},
              {"T", r.T},
              {"t", r.t},
              {"env_seed", r.env_seed},
              {"replica", r.replica},
              {"w", site_json(r.w, cfg.d)},
              {"n_at_w", r.n_at_w},
              {"argmax", site_json(r.argmax, cfg.d)},
              {"n_at_argmax", r.n_at_argmax},
              {"total", r.total},
              {"fraction_w", r.fraction_w},
              {"fraction_argmax", r.fraction_argmax},
              {"argmax_agrees", r.argmax_agrees},
              {"cap_hit", r.cap_hit},
              {"time_reached", r.time_reached}});
  const auto sum = summarize_localization(records, cfg.seed);
  for (const auto& c : sum.cells)
    emit(os, {{"type", "localization_cell"},
              {"T", c.T},
              {"env_seed", c.env_seed},
              {"records", c.records},
              {"capped", c.capped},
              {"median_fraction_w", num(c.median_fraction_w)},
              {"median_fraction_w_ci95", {num(c.median_fraction_w_ci.lo), num(c.median_fraction_w_ci.hi)}},
              {"mean_fraction_w", num(c.mean_fraction_w)},
              {"quantiles", {num(c.q10), num(c.q25), num(c.q75), num(c.q90)}},
              {"median_fraction_argmax", num(c.median_fraction_argmax)},
              {"agreement_rate", num(c.agreement_rate)},
              {"capped_median_fraction_w", num(c.capped_median_fraction_w)}});
  json summary = {{"type", "localization_summary"},
                  {"records", records.size()},
                  {"increases", sum.trend.increases},
                  {"decreases", sum.trend.decreases},
                  {"ties", sum.trend.ties},
                  {"p_decrease", sum.trend.p_decrease},
                  {"p_increase", sum.trend.p_increase},
                  {"seeds_argmax_over_half", sum.seeds_argmax_over_half},
                  {"trend_ok", sum.trend_ok},
                  {"argmax_ok", sum.argmax_ok},
                  {"passed", sum.passed}};
  if (records.empty()) summary["note"] = "no data";
  emit(os, summary);
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Branching random walk in a Pareto potential: simulation, solvers and checks", "brwpe"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", kToolVersion);
  std::string config_path, out_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "flat key = value config file");
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--workers", workers, "worker threads for replicas");
  app.add_option("--out", out_path, "output file (default: standard output)");
  app.add_option("--set", sets, "extra key=value overrides, applied last");

  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&, std::ostream&);
  };
  const Sub subs[] = {
      {"gen-env", "write an environment snapshot", cmd_gen_env},
      {"lilypad", "h_T, m_T and the maximizer w on the lilypad window", cmd_lilypad},
      {"simulate", "branching random walk replicas", cmd_simulate},
      {"pam", "expected-mass profiles and f_theta tables", cmd_pam},
      {"verify", "lemma verification suite", cmd_verify},
      {"localize", "localization experiment", cmd_localize},
  };
  for (const auto& s : subs) app.add_subcommand(s.name, s.help)->fallthrough();

  auto error_record = [&](const char* kind, const std::string& msg, int code) {
    err << json{{"type", "error"}, {"kind", kind}, {"message", msg}, {"exit_code", code}}.dump() << '\n';
    return code;
  };

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return error_record("usage", e.what(), kExitConfig);
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (!out_path.empty()) cfg.out = out_path;
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    validate_config(cfg);

    const Sub* chosen = nullptr;
    for (const auto& s : subs)
      if (app.got_subcommand(s.name)) chosen = &s;
    if (cfg.out.empty()) return chosen->fn(cfg, out);
    std::ofstream file(cfg.out, std::ios::binary);
    if (!file) throw ResourceError("cannot open output file '" + cfg.out + "'", 0);
    const int code = chosen->fn(cfg, file);
    file.flush();
    if (!file) throw ResourceError("failed writing output file '" + cfg.out + "'", 0);
    return code;
  } catch (const ConfigError& e) {
    return error_record("config", e.what(), kExitConfig);
  } catch (const ResourceError& e) {
    return error_record("resource", e.what(), kExitResource);
  } catch (const SolverError& e) {
    return error_record("solver", e.what(), kExitResource);
  } catch (const SnapshotError& e) {
    return error_record("snapshot", e.what(), kExitResource);
  } catch (const std::exception& e) {
    return error_record("internal", e.what(), kExitFailure);
  }
}

}  // namespace brwpe
