// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "brwpe/analysis.hpp"
#include "brwpe/cli.hpp"
#include "oracles.hpp"

using namespace brwpe;

namespace {

const Site o = Site::origin();
const unsigned kWorkers = std::max(1u, std::thread::hardware_concurrency());
int failures = 0;

void report(int n, bool ok, const std::string& what, double seconds) {
  std::printf("%s criterion %d: %s [%.1fs]\n", ok ? "PASS" : "FAIL", n, what.c_str(), seconds);
  std::fflush(stdout);
  failures += !ok;
}

template <class F>
void criterion(int n, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string what;
  bool ok = false;
  try {
    ok = f(what);
  } catch (const std::exception& e) {
    what += std::string(" exception: ") + e.what();
    ok = false;
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(n, ok, what, s);
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

SolverSettings box(int r) {
  SolverSettings s;
  s.box_radius = r;
  return s;
}

double spread(std::uint64_t k, std::uint64_t n, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
}

}  // namespace

int main() {
  criterion(1, [](std::string& what) {
    const PotentialField f(1, 2.0, 1);
    const auto m = many_to_one_check(f, o, 1.5, 20000, 1, kWorkers, box(15));
    what = fmt("many-to-one d=1 alpha=2 t=1.5 N=2e4: MC %.5f  u %.5f  SE %.5f  z %.2f", m.estimate, m.expected, m.se,
               m.z_score);
    return m.capped == 0 && std::abs(m.estimate - m.expected) <= 3 * m.se;
  });

  criterion(2, [](std::string& what) {
    const auto f = PotentialField(1, 2.0, 1).with_constant(0.0);
    const auto sol = solve_pam(f, o, 1.0, box(30));
    const double dev = std::abs(std::exp(sol.log_total()) - 1.0);
    what = fmt("heat kernel conservation box 30 t=1: |sum u - 1| = %.3g", dev);
    return dev <= 1e-6;
  });

  criterion(3, [](std::string& what) {
    const PotentialField f(1, 2.0, 1);
    const double t = 1.0;
    const double rel = std::abs(std::expm1(solve_pam(f, o, t, box(0)).log_u(o) - (f.at(o) - 2.0) * t));
    const auto m = birth_death_moment_check(5.0, 1, 1.0, 100000, 1, kWorkers);
    what = fmt("single-site rel err %.3g; birth-death E[Y_1] MC %.4f vs %.4f (SE %.4f)", rel, m.estimate, m.expected,
               m.se);
    return rel <= 1e-12 && m.passed;
  });

  criterion(4, [](std::string& what) {
    std::mt19937_64 g(4);
    double worst = 0;
    int argmax_mismatch = 0, windows = 0, ties = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const int d = 1 + trial % 3;
      const std::size_t n = 1 + static_cast<std::size_t>(trial % 7);
      auto f = PotentialField(d, d + 0.5 + 0.5 * (trial % 3), 5000 + trial);
      std::uniform_int_distribution<int> c(-5, 5);
      std::set<Site> s{o};
      while (s.size() < n) {
        Site z;
        for (int k = 0; k < d; ++k) z[k] = c(g);
        s.insert(z);
      }
      std::vector<Site> win(s.begin(), s.end());
      std::shuffle(win.begin(), win.end(), g);
      // Every tenth window is made symmetric with equal planted values to force ties.
      if (trial % 10 == 9) {
        f = f.with_constant(1.0).with_planted(Site::axis(0, 3), 1e4).with_planted(Site::axis(0, -3), 1e4);
        win = {o, Site::axis(0, 3), Site::axis(0, -3), Site::axis(0, 1), Site::axis(0, -1)};
        ++ties;
      }
      const auto ctx = make_scaling(f, 3.5 + trial % 6);
      const auto sol = compute_h(ctx, f, win);
      const auto h = oracle::brute_h(ctx, f, win, 6);
      for (std::size_t i = 0; i < win.size(); ++i) {
        const double err = std::abs(sol.h_at(i) - h[i]) / std::max(1.0, std::abs(h[i]));
        worst = std::max(worst, err);
      }
      const double t = 0.1 + 0.3 * (trial % 5);
      const auto m = oracle::brute_m(ctx, f, win, h, t);
      argmax_mismatch += maximizer(sol, t).w != oracle::brute_argmax(win, m);
      ++windows;
    }
    what = fmt("%.0f windows (%.0f with ties): max rel |h - brute| %.3g, argmax mismatches %.0f", windows, ties, worst,
               argmax_mismatch);
    return worst <= 1e-12 && argmax_mismatch == 0;
  });

  criterion(5, [](std::string& what) {
    const int d = 1;
    int tr_ok = 0, yb_ok = 0, off_ok = 0;
    double worst_margin = INFINITY, worst_ratio = -INFINITY, worst_off = 0;
    const int n = 20;
    for (int k = 0; k < n; ++k) {
      const PotentialField base(d, 1.5, 700 + k);
      {
        const double xi = spread(k, n, 5, 15);
        const auto r = verify_growth_inequality(base.with_planted(o, xi), o, 2.0, 0.5, 1.0, box(15));
        tr_ok += r.passed;
        worst_margin = std::min(worst_margin, r.worst_margin);
      }
      {
        const double eta = 0.1, theta = 2.0 * d + std::log(2.0) / eta + 1.0;
        const auto r = verify_shell_decay(base.with_planted(o, spread(k, n, 30, 100)), o, theta, eta, 0.5, box(15));
        yb_ok += r.passed && r.hypotheses_ok;
        for (std::size_t j = 1; j < r.log_shell_sup.size(); ++j)
          if (std::isfinite(r.log_shell_sup[j]) && std::isfinite(r.log_shell_sup[j - 1]))
            worst_ratio = std::max(worst_ratio, r.log_shell_sup[j] - r.log_shell_sup[j - 1]);
      }
      {
        const double xi = spread(k, n, 30, 100);
        const double theta = 10.0 * d * std::pow(xi, 0.95) * 1.01;
        const auto r = verify_offsite_mass_ratio(base.with_planted(o, xi), o, theta, 0.5, box(15));
        off_ok += r.passed && r.hypotheses_ok;
        worst_off = std::max(worst_off, r.ratio / r.bound);
      }
    }
    what = fmt("tr %.0f/20 (worst margin %.3g); ybest %.0f/20 (max log shell ratio %.3f", tr_ok, worst_margin, yb_ok,
               worst_ratio) +
           fmt(" vs log 8d eta %.3f); offsite %.0f/20 (max ratio/bound %.3g)", std::log(0.8), off_ok, worst_off);
    return tr_ok == n && yb_ok == n && off_ok == n && worst_margin >= -1e-9;
  });

  criterion(6, [](std::string& what) {
    const int d = 1;
    const double xi = 20.0, t = 0.25, theta = 2.0 * d + std::log(2.0) / (16.0 * d) + 1.0;
    const auto f = PotentialField(d, 1.5, 6).with_planted(o, xi);
    const auto pz = lemma_pz_check(f, o, theta, t, 10000, 6, kWorkers, box(15));
    const auto onev = lemma_onev_check(f, o, theta, t, 10000, 6, kWorkers, box(15));
    what = fmt("pz: P-hat %.4f, Wilson lo %.4f vs 1/16; onev: P-hat %.4f, Wilson hi %.4f", pz.estimate, pz.wilson.lo,
               onev.estimate, onev.wilson.hi) +
           fmt(" vs %.4f", onev.bound);
    return pz.hypotheses_ok && pz.passed && pz.wilson.lo >= 1.0 / 16 - 3 * pz.se && onev.passed;
  });

  criterion(7, [](std::string& what) {
    const auto rep = chernoff_property_test(64, {0.5}, 100000, 7);
    const auto& r = rep.rows.at(0);
    const double oracle_tail = static_cast<double>(oracle::binom64_half_cdf(16));
    what = fmt("n=64 p=1/2: exact %.6g (oracle %.6g) <= e^-4 = %.6g; MC %.3g", r.exact, oracle_tail, r.bound,
               r.mc.estimate) +
           fmt(" in 99%% Wilson [%.3g, %.3g]", r.mc.wilson.lo, r.mc.wilson.hi);
    return r.exact_ok && r.mc_consistent && std::abs(r.exact - oracle_tail) <= 1e-12 * oracle_tail;
  });

  criterion(8, [](std::string& what) {
    LocalizationSettings s;
    s.d = 1;
    s.alpha = 1.5;
    s.env_seeds = {1, 2, 3};
    s.T_grid = {3, 4, 5, 6};
    s.t = 0.25;
    s.replicas = 200;
    s.master_seed = 8;
    s.window_radius = 30;
    s.population_cap = 10'000'000;
    s.workers = kWorkers;
    const auto records = localization_experiment(s);
    const auto sum = summarize_localization(records, 8);
    std::uint64_t capped = 0;
    for (const auto& c : sum.cells) {
      capped += c.capped;
      std::printf("  T=%g seed=%llu median N(w)/N %.4f CI95 [%.4f, %.4f] argmax median %.4f capped %llu/%llu\n", c.T,
                  static_cast<unsigned long long>(c.env_seed), c.median_fraction_w, c.median_fraction_w_ci.lo,
                  c.median_fraction_w_ci.hi, c.median_fraction_argmax, static_cast<unsigned long long>(c.capped),
                  static_cast<unsigned long long>(c.records));
    }
    what = fmt("sign test +%.0f/-%.0f p_decrease %.3f p_increase %.3f;", sum.trend.increases, sum.trend.decreases,
               sum.trend.p_decrease, sum.trend.p_increase) +
           fmt(" seeds with argmax fraction > 0.5 at largest T: %.0f/3; capped replicas %.0f", sum.seeds_argmax_over_half,
               capped);
    return sum.passed;
  });

  criterion(9, [](std::string& what) {
    const std::string cfg = BRWPE_SOURCE_DIR "/configs/tiny.cfg";
    int same = 0, total = 0;
    std::string bad;
    for (const char* sub : {"gen-env", "lilypad", "simulate", "pam", "verify", "localize"}) {
      std::vector<std::string> outs;
      for (const char* w : {"1", "1", "4"}) {
        std::ostringstream out, err;
        run_cli({"brwpe", "--config", cfg, "--workers", w, sub}, out, err);
        outs.push_back(out.str());
      }
      ++total;
      if (!outs[0].empty() && outs[0] == outs[1] && outs[1] == outs[2]) ++same;
      else bad += std::string(" ") + sub;
    }
    what = fmt("%.0f/%.0f subcommands byte-identical across reruns and workers 1 vs 4", same, total) + bad;
    return same == total;
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
