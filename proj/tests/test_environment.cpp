#include <doctest.h>

#include <cmath>

#include "brwpe/environment.hpp"
#include "brwpe/errors.hpp"
#include "brwpe/stats.hpp"

using namespace brwpe;

TEST_CASE("potential is a pure function of seed and site") {
  const PotentialField a(2, 3.0, 42), b(2, 3.0, 42), c(2, 3.0, 43);
  const Site z{{3, -7, 0, 0}};
  CHECK(a.at(z) == b.at(z));
  CHECK(a.at(z) != c.at(z));
  // Query order does not matter.
  const double first = a.at(Site::origin());
  for (int i = 0; i < 100; ++i) (void)a.at(Site::axis(0, i));
  CHECK(a.at(Site::origin()) == first);
}

TEST_CASE("values follow the Pareto law") {
  const double alpha = 1.5;
  const PotentialField f(1, alpha, 9);
  const std::uint64_t n = 200000;
  for (double x : {1.5, 3.0, 10.0}) {
    std::uint64_t above = 0;
    for (std::uint64_t i = 0; i < n; ++i) above += f.at(Site::axis(0, static_cast<std::int32_t>(i))) > x;
    const auto ci = stats::wilson_interval(above, n);
    const double p = std::pow(x, -alpha);
    CHECK(ci.lo <= p);
    CHECK(p <= ci.hi);
  }
  for (int i = -50; i < 50; ++i) CHECK(f.at(Site::axis(0, i)) >= 1.0);
}

TEST_CASE("inverse CDF") {
  CHECK(pareto_from_uniform(1.0, 2.0) == 1.0);
  CHECK(pareto_from_uniform(0.25, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
  const PotentialField f(1, 2.5, 3);
  const Site z = Site::axis(0, 17);
  CHECK(f.at(z) == doctest::Approx(std::pow(f.uniform_at(z), -1 / 2.5)).epsilon(1e-15));
}

TEST_CASE("planted and constant variants") {
  const PotentialField f(1, 2.0, 5);
  const auto g = f.with_planted(Site::axis(0, 3), 123.0);
  CHECK(g.at(Site::axis(0, 3)) == 123.0);
  CHECK(g.at(Site::axis(0, 4)) == f.at(Site::axis(0, 4)));
  CHECK_FALSE(g.is_pareto());
  const auto h = f.with_constant(0.0).with_planted(Site::origin(), 7.0);
  CHECK(h.at(Site::axis(0, 1)) == 0.0);
  CHECK(h.at(Site::origin()) == 7.0);
}

TEST_CASE("constructor checks") {
  CHECK_THROWS_AS(PotentialField(1, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(PotentialField(0, 2.0, 1), ConfigError);
  CHECK_THROWS_AS(PotentialField(5, 9.0, 1), ConfigError);
}

TEST_CASE("scaling constants follow their definitions") {
  const PotentialField f(2, 3.0, 1);
  const double T = 50;
  const auto c = make_scaling(f, T);
  const double L = std::log(T);
  const double q = 2.0 / (3.0 - 2.0);
  CHECK(c.q == doctest::Approx(q));
  CHECK(c.a_T == doctest::Approx(std::pow(T / L, q)));
  CHECK(c.r_T == doctest::Approx(std::pow(T / L, q + 1)));
  CHECK(c.rho_T == doctest::Approx(std::log(L)));
  CHECK(c.nu_T == doctest::Approx(std::pow(L, -2.0 / 48.0)));
  CHECK(c.K_T == doctest::Approx(std::pow(c.nu_T, -6.0) * std::pow(c.rho_T, 4.0)));
  CHECK(c.eps_T == doctest::Approx(3 / q * c.r_T * std::pow(L, -0.25)));
  CHECK(c.theta_T == doctest::Approx(std::pow(c.nu_T, 8.0) * c.a_T));
  CHECK(c.window_radius() == doctest::Approx(c.rho_T * c.r_T));
  CHECK_THROWS_AS(make_scaling(f, 2.5), ConfigError);
}

TEST_CASE("rescaled lattice") {
  const PotentialField f(1, 2.0, 11);
  const auto c = make_scaling(f, 20);
  const Site s = Site::axis(0, 7);
  const auto z = lattice_to_rescaled(c, s);
  const auto back = rescaled_to_lattice(c, z);
  REQUIRE(back);
  CHECK(*back == s);
  CHECK(rescaled_potential(c, f, z) == doctest::Approx(f.at(s) / c.a_T));
  const double off[] = {(7.5) / c.r_T};
  CHECK_FALSE(rescaled_to_lattice(c, off));
  CHECK(rescaled_potential(c, f, off) == 0.0);
}

TEST_CASE("materialized windows") {
  const PotentialField f(2, 3.0, 2);
  const auto w = materialize_window(f, Site::axis(1, 4), 3.0);
  CHECK(w.sites.size() == l1_ball_size(2, 3.0));
  for (std::size_t i = 0; i < w.sites.size(); ++i) {
    CHECK(w.values[i] == f.at(w.sites[i]));
    CHECK(l1_distance(w.sites[i], Site::axis(1, 4), 2) < 3);
  }
  CHECK_THROWS_AS(materialize_window(f, Site::origin(), 100.0, 1000), ResourceError);
}

TEST_CASE("environment diagnostics") {
  const auto f = PotentialField(1, 1.5, 4).with_planted(Site::axis(0, 3), 1e6);
  const auto c = make_scaling(f, 10);
  const auto diag = environment_diagnostics(c, f, Site::origin(), 20.0);
  CHECK(diag.kappa_threshold == doctest::Approx(c.nu_T * c.a_T / 2));
  bool found = false;
  for (const auto& [z, v] : diag.kappa) {
    CHECK(v >= diag.kappa_threshold);
    found = found || z == Site::axis(0, 3);
  }
  CHECK(found);
  CHECK(diag.huge_value_event);
  CHECK(diag.kappa_within_bound == (static_cast<double>(diag.kappa.size()) <= c.K_T));
}
