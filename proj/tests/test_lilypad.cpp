#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "brwpe/errors.hpp"
#include "brwpe/lilypad.hpp"
#include "oracles.hpp"

using namespace brwpe;

namespace {

std::vector<Site> random_window(std::mt19937_64& g, int d, std::size_t n, int spread) {
  std::uniform_int_distribution<int> c(-spread, spread);
  std::set<Site> s{Site::origin()};
  while (s.size() < n) {
    Site z;
    for (int k = 0; k < d; ++k) z[k] = c(g);
    s.insert(z);
  }
  std::vector<Site> v(s.begin(), s.end());
  std::shuffle(v.begin(), v.end(), g);
  return v;
}

}  // namespace

TEST_CASE("dense Dijkstra agrees with path enumeration on small windows") {
  std::mt19937_64 g(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 1 + trial % 3;
    const PotentialField f(d, d + 0.5 + (trial % 4) * 0.5, 1000 + trial);
    const auto ctx = make_scaling(f, 4.0 + trial % 5);
    const auto win = random_window(g, d, 1 + trial % 7, 6);
    const auto sol = compute_h(ctx, f, win);
    const auto h = oracle::brute_h(ctx, f, win);
    for (std::size_t i = 0; i < win.size(); ++i) CHECK(sol.h_at(i) == doctest::Approx(h[i]).epsilon(1e-12));
    for (double t : {0.05, 0.5, 2.0}) {
      const auto m = oracle::brute_m(ctx, f, win, h, t);
      const auto mm = sol.m_on_window(t);
      for (std::size_t i = 0; i < win.size(); ++i) {
        CHECK(mm[i] == doctest::Approx(m[i]).epsilon(1e-12));
        CHECK(sol.m(win[i], t) == mm[i]);
      }
      CHECK(maximizer(sol, t).w == oracle::brute_argmax(win, m));
    }
  }
}

TEST_CASE("basic properties of h") {
  const PotentialField f(2, 3.0, 5);
  const auto ctx = make_scaling(f, 10);
  const auto win = l1_ball(2, Site::origin(), 6);
  const auto sol = compute_h(ctx, f, win);
  CHECK(sol.h_at(*sol.index_of(Site::origin())) == 0.0);
  // Direct one-hop bound and strict positivity away from the origin.
  for (std::size_t i = 0; i < sol.size(); ++i) {
    if (sol.sites()[i] == Site::origin()) continue;
    const double direct = ctx.q * static_cast<double>(l1_norm(sol.sites()[i], 2)) / ctx.r_T /
                          rescaled_potential_at(ctx, f, Site::origin());
    CHECK(sol.h_at(i) <= direct * (1 + 1e-15));
    CHECK(sol.h_at(i) > 0);
  }
  // m >= growth at the site itself.
  const auto g = sol.growth(1.0);
  const auto m = sol.m_on_window(1.0);
  for (std::size_t i = 0; i < sol.size(); ++i) CHECK(m[i] >= g[i]);
}

TEST_CASE("single-site window") {
  const PotentialField f(1, 2.0, 3);
  const auto ctx = make_scaling(f, 6);
  const Site o = Site::origin();
  const auto sol = compute_h(ctx, f, std::vector<Site>{o});
  CHECK(sol.h_at(0) == 0.0);
  const auto mx = maximizer(sol, 0.7);
  CHECK(mx.w == o);
  CHECK(mx.m_value == doctest::Approx(f.at(o) / ctx.a_T * 0.7));
  CHECK(mx.runner_up_gap == std::numeric_limits<double>::infinity());
}

TEST_CASE("maximizer ties go to the lexicographically smallest site") {
  const auto f = PotentialField(1, 2.0, 1).with_constant(1.0).with_planted(Site::axis(0, -3), 1e4).with_planted(
      Site::axis(0, 3), 1e4);
  const auto ctx = make_scaling(f, 6);
  const auto win = l1_ball(1, Site::origin(), 5);
  const auto sol = compute_h(ctx, f, win);
  const auto mx = maximizer(sol, 1.0);
  const auto m = sol.m_on_window(1.0);
  REQUIRE(m[*sol.index_of(Site::axis(0, -3))] == m[*sol.index_of(Site::axis(0, 3))]);
  CHECK(mx.w == Site::axis(0, -3));
  CHECK(mx.runner_up_gap == 0.0);
}

TEST_CASE("window errors") {
  const PotentialField f(1, 2.0, 3);
  const auto ctx = make_scaling(f, 6);
  CHECK_THROWS_AS(compute_h(ctx, f, std::vector<Site>{}), ConfigError);
  CHECK_THROWS_AS(compute_h(ctx, f, std::vector<Site>{Site::axis(0, 1)}), ConfigError);
  CHECK_THROWS_AS(compute_h(ctx, f, std::vector<Site>{Site::origin(), Site::origin()}), ConfigError);
  const auto zero = f.with_planted(Site::axis(0, 1), 0.0);
  CHECK_THROWS_AS(compute_h(ctx, zero, std::vector<Site>{Site::origin(), Site::axis(0, 1)}), ConfigError);
}

TEST_CASE("enlarging the window can only lower h") {
  const PotentialField f(1, 1.5, 8);
  const auto ctx = make_scaling(f, 5);
  const auto ws = window_sensitivity(ctx, f, 20.0, 0.5);
  CHECK(ws.base_sites == 39);
  CHECK(ws.doubled_sites == 79);
  CHECK(ws.max_delta_h >= 0);
}

TEST_CASE("table output") {
  const PotentialField f(1, 2.0, 3);
  const auto ctx = make_scaling(f, 6);
  const auto sol = compute_h(ctx, f, l1_ball(1, Site::origin(), 3));
  std::ostringstream os;
  write_lilypad_table(os, sol, 1.0);
  std::istringstream is(os.str());
  int x;
  double h, m;
  std::size_t rows = 0;
  while (is >> x >> h >> m) {
    const auto i = *sol.index_of(Site::axis(0, x));
    CHECK(h == sol.h_at(i));
    ++rows;
  }
  CHECK(rows == sol.size());
}
