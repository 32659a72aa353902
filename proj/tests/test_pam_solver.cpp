#include <doctest.h>

#include <cmath>

#include "brwpe/errors.hpp"
#include "brwpe/pam_solver.hpp"
#include "oracles.hpp"

using namespace brwpe;

namespace {

SolverSettings box(int r, double tol = 1e-10) {
  SolverSettings s;
  s.box_radius = r;
  s.target_local_error = tol;
  return s;
}

const Site o = Site::origin();

}  // namespace

TEST_CASE("zero potential reproduces the lattice heat kernel") {
  const auto f = PotentialField(1, 2.0, 1).with_constant(0.0);
  for (double t : {0.3, 1.0, 2.5}) {
    const auto sol = solve_pam(f, o, t, box(40));
    for (int x = -12; x <= 12; ++x) {
      const double want = oracle::heat_kernel_1d(x, t);
      CHECK(std::exp(sol.log_u(Site::axis(0, x))) == doctest::Approx(want).epsilon(1e-8));
    }
    CHECK(std::exp(sol.log_total()) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_FALSE(sol.box_too_small());
  }
}

TEST_CASE("two-dimensional heat kernel factorizes") {
  const auto f = PotentialField(2, 3.0, 1).with_constant(0.0);
  const double t = 0.6;
  const auto sol = solve_pam(f, o, t, box(12));
  for (int x = -3; x <= 3; ++x)
    for (int y = -3; y <= 3; ++y) {
      const double want = oracle::heat_kernel_1d(x, t) * oracle::heat_kernel_1d(y, t);
      CHECK(std::exp(sol.log_u(Site{{x, y, 0, 0}})) == doctest::Approx(want).epsilon(1e-8));
    }
}

TEST_CASE("constant potential multiplies the heat kernel by e^{ct}") {
  const double c = 3.0, t = 0.8;
  const auto f = PotentialField(1, 2.0, 1).with_constant(c);
  const auto sol = solve_pam(f, o, t, box(30));
  for (int x = 0; x <= 6; ++x)
    CHECK(sol.log_u(Site::axis(0, x)) == doctest::Approx(c * t + std::log(oracle::heat_kernel_1d(x, t))).epsilon(1e-9));
}

TEST_CASE("single-site box is the scalar ODE") {
  const PotentialField f(2, 3.0, 8);
  for (double t : {0.1, 1.0, 4.0}) {
    const auto sol = solve_pam(f, o, t, box(0));
    const double want = (f.at(o) - 4.0) * t;
    CHECK(std::abs(std::expm1(sol.log_u(o) - want)) <= 1e-12);
  }
}

TEST_CASE("profile normalization and bookkeeping") {
  const PotentialField f(1, 1.5, 3);
  const auto sol = solve_pam(f, o, 1.0, box(10));
  double mx = 0;
  for (double v : sol.profile()) {
    CHECK(v >= 0);
    mx = std::max(mx, v);
  }
  CHECK(mx == 1.0);
  CHECK(sol.profile().size() == sol.box().size());
  CHECK(sol.log_u(Site::axis(0, 11)) == -std::numeric_limits<double>::infinity());
  CHECK(sol.steps() > 0);
  CHECK(sol.time() == 1.0);
}

TEST_CASE("monotone in the potential") {
  const PotentialField f(1, 2.0, 10);
  const auto g = f.with_planted(Site::axis(0, 2), f.at(Site::axis(0, 2)) + 3.0);
  const auto a = solve_pam(f, o, 1.0, box(12));
  const auto b = solve_pam(g, o, 1.0, box(12));
  for (const auto& z : a.box().sites()) CHECK(b.log_u(z) >= a.log_u(z) - 1e-9);
  CHECK(b.log_u(Site::axis(0, 2)) > a.log_u(Site::axis(0, 2)) + 0.1);
}

TEST_CASE("monotone in the killing set") {
  const auto f = PotentialField(1, 1.5, 21).with_planted(o, 12.0);
  const auto small = solve_killed(f, o, 2.0, 0.7, box(12));
  const auto large = solve_killed(f, o, 11.5, 0.7, box(12));
  const double slack = small.solution.error_estimate() + large.solution.error_estimate();
  for (const auto& z : small.solution.box().sites())
    CHECK(large.solution.log_u(z) <= small.solution.log_u(z) + slack);
  const auto none = solve_pam(f, o, 0.7, box(12));
  CHECK(small.log_f <= none.log_u(o) + small.solution.error_estimate() + none.error_estimate());
  CHECK(large.log_f < none.log_u(o) - 0.01);
}

TEST_CASE("tightening the tolerance converges and both splittings agree") {
  const PotentialField f(1, 1.5, 4);
  const auto coarse = solve_pam(f, o, 1.0, box(12, 1e-6));
  const auto fine = solve_pam(f, o, 1.0, box(12, 1e-11));
  auto lie_s = box(12, 1e-8);
  lie_s.splitting_order = 1;
  const auto lie = solve_pam(f, o, 1.0, lie_s);
  for (int x = -5; x <= 5; ++x) {
    const Site z = Site::axis(0, x);
    CHECK(std::abs(coarse.log_u(z) - fine.log_u(z)) <= coarse.error_estimate() + fine.error_estimate());
    CHECK(std::abs(lie.log_u(z) - fine.log_u(z)) <= lie.error_estimate() + fine.error_estimate());
  }
  CHECK(fine.steps() > coarse.steps());
  CHECK(fine.error_estimate() < coarse.error_estimate());
  CHECK(std::abs(coarse.log_u(o) - fine.log_u(o)) > std::abs(solve_pam(f, o, 1.0, box(12, 1e-9)).log_u(o) - fine.log_u(o)));
}

TEST_CASE("advancing in pieces matches one solve") {
  const PotentialField f(1, 2.0, 6);
  PamIntegrator integ(f, o, box(10));
  integ.advance_to(0.4);
  integ.advance_to(1.0);
  const auto a = integ.solution();
  const auto b = solve_pam(f, o, 1.0, box(10));
  for (int x = -4; x <= 4; ++x) CHECK(a.log_u(Site::axis(0, x)) == doctest::Approx(b.log_u(Site::axis(0, x))).epsilon(1e-8));
  CHECK_THROWS_AS(integ.advance_to(0.5), ConfigError);
}

TEST_CASE("killed problem special cases") {
  const auto f = PotentialField(1, 1.5, 2).with_planted(o, 9.0);
  // U = all sites but y.
  const auto all = solve_killed(f, o, 1e6, 0.6, box(8));
  CHECK(std::abs(all.log_f - (9.0 - 2.0) * 0.6) <= 1e-12);
  CHECK(std::isinf(all.solution.log_total(o)));
  // f(y, 0) = 1.
  CHECK(solve_killed(f, o, 3.0, 0.0, box(8)).log_f == 0.0);
  // theta = 0 with y the strict maximum of the box is the free problem.
  const auto big = f.with_planted(o, 1e3);
  const auto k0 = solve_killed(big, o, 0.0, 0.01, box(6));
  const auto free = solve_pam(big, o, 0.01, box(6));
  CHECK(k0.log_f == doctest::Approx(free.log_u(o)).epsilon(1e-12));
}

TEST_CASE("time reversal: E_y[N(z,t;U)] = E_z[N(y,t;U)]") {
  const auto f = PotentialField(1, 1.5, 5).with_planted(o, 8.0);
  const double theta = 3.0;
  const auto U = killing_set_u(f, o, theta);
  const auto fwd = solve_killed(f, o, theta, 0.5, box(10)).solution;
  for (int x : {-3, -1, 2, 4}) {
    const Site z = Site::axis(0, x);
    if (U(z)) continue;
    PamIntegrator back(f, z, box(10), U);
    back.advance_to(0.5);
    // Same cube is needed for the identity, so compare only well inside both boxes.
    CHECK(back.solution().log_u(o) == doctest::Approx(fwd.log_u(z)).epsilon(1e-6));
  }
}

TEST_CASE("f_theta table") {
  const auto f = PotentialField(1, 1.5, 2).with_planted(o, 6.0);
  const FThetaTable tab(f, o, 2.0, 1.0, 10, box(8));
  const double times[] = {0.3, 1.0};
  const auto direct = solve_killed_at(f, o, 2.0, times, box(8));
  CHECK(tab.log_f(0.3) == doctest::Approx(direct[0].log_f).epsilon(1e-9));
  CHECK(tab.log_f(1.0) == doctest::Approx(direct[1].log_f).epsilon(1e-9));
  CHECK(tab.log_f(0.0) == 0.0);
  CHECK_THROWS_AS(tab.log_f(1.5), ConfigError);
}

TEST_CASE("growth inequality") {
  const auto f = PotentialField(1, 1.5, 7).with_planted(o, 10.0);
  const auto same = verify_growth_inequality(f, o, 2.0, 0.5, 0.5, box(10));
  CHECK(same.passed);
  CHECK(std::abs(same.worst_margin) <= 1e-12);
  const auto r = verify_growth_inequality(f, o, 2.0, 0.3, 1.0, box(10));
  CHECK(r.passed);
  CHECK(r.sites_checked > 1);
  const auto single = verify_growth_inequality(f, o, 2.0, 0.3, 1.0, box(0));
  CHECK(single.passed);
  CHECK(std::abs(single.worst_margin) <= 1e-12);
  CHECK_THROWS_AS(verify_growth_inequality(f, o, 2.0, 1.0, 0.5, box(4)), ConfigError);
}

TEST_CASE("shell decay and offsite ratio") {
  const auto f = PotentialField(1, 1.5, 9).with_planted(o, 40.0);
  const double eta = 0.1, theta = 2 + std::log(2.0) / eta + 1;
  const auto r = verify_shell_decay(f, o, theta, eta, 0.5, box(12));
  CHECK(r.hypotheses_ok);
  CHECK(r.sup_at_y);
  CHECK(r.passed);
  const auto bad = verify_shell_decay(f, o, 2.0, eta, 0.5, box(6));
  CHECK_FALSE(bad.hypotheses_ok);
  const auto e = verify_offsite_mass_ratio(f, o, 10 * std::pow(40.0, 0.95) + 1, 0.5, box(8));
  CHECK(e.hypotheses_ok);
  CHECK(e.passed);
}

TEST_CASE("box too small is flagged") {
  const PotentialField f(1, 2.0, 1);
  const auto sol = solve_pam(f.with_constant(0.0), o, 5.0, box(3));
  CHECK(sol.box_too_small());
  CHECK(sol.boundary_mass_fraction() > 1e-8);
  auto strict = box(3);
  strict.fail_on_box_too_small = true;
  CHECK_THROWS_AS(solve_pam(f.with_constant(0.0), o, 5.0, strict), SolverError);
}

TEST_CASE("settings are validated") {
  const PotentialField f(1, 2.0, 1);
  auto s = box(3);
  s.splitting_order = 3;
  CHECK_THROWS_AS(solve_pam(f, o, 1.0, s), ConfigError);
  CHECK_THROWS_AS(solve_pam(f, o, -1.0, box(3)), ConfigError);
  CHECK_THROWS_AS(PamIntegrator(f, o, box(3), everything_except({})), ConfigError);
}
