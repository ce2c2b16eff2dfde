#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "l1rom/core.hpp"
#include "l1rom/rng.hpp"

using namespace l1rom;

TEST_CASE("l1_norm definition") {
  CHECK(l1_norm(std::vector<double>{0, 0, 0}) == 0.0);
  CHECK(l1_norm(std::vector<double>{1, -2, 3}) == 6.0);
  CHECK(l1_norm(std::vector<double>{-0.5}) == 0.5);
}

TEST_CASE("l1_norm rejects non-finite input") {
  CHECK_THROWS_AS(l1_norm(std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN()}),
                  std::invalid_argument);
  CHECK_THROWS_AS(l1_norm(std::vector<double>{std::numeric_limits<double>::infinity()}),
                  std::invalid_argument);
}

TEST_CASE("l1_norm triangle inequality on random pairs") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(20), b(20), s(20);
    for (int i = 0; i < 20; ++i) {
      a[i] = rng.uniform(-5, 5);
      b[i] = rng.uniform(-5, 5);
      s[i] = a[i] + b[i];
    }
    CHECK(l1_norm(s) <= l1_norm(a) + l1_norm(b) + 1e-12);
  }
}

TEST_CASE("relative_l2_error basics") {
  Grid1D grid(0, 1, 4);
  GridField ref(grid, std::vector<double>{1, 2, 3, 4});
  CHECK(relative_l2_error(ref, ref) == 0.0);

  GridField twice(grid, std::vector<double>{2, 4, 6, 8});
  CHECK(relative_l2_error(twice, ref) == doctest::Approx(1.0));

  // unit basis perturbation scaled by ||ref||_2 gives exactly 1
  const double norm = std::sqrt(1.0 + 4.0 + 9.0 + 16.0);
  GridField shifted(grid, std::vector<double>{1 + norm, 2, 3, 4});
  CHECK(relative_l2_error(shifted, ref) == doctest::Approx(1.0).epsilon(1e-12));

  GridField zero(grid, std::vector<double>{0, 0, 0, 0});
  CHECK_THROWS_AS(relative_l2_error(ref, zero), std::invalid_argument);
}

TEST_CASE("total_variation discrete sums") {
  Grid1D grid(0, 1, 3);
  CHECK(total_variation(GridField(grid, std::vector<double>{2, 2, 2})) == 0.0);
  CHECK(total_variation(GridField(grid, std::vector<double>{1, 0.5, 0})) ==
        doctest::Approx(1.0));

  Grid1D g2(0, 1, 2);
  CHECK(total_variation(GridField(g2, std::vector<double>{1, 0})) == doctest::Approx(1.0));

  Grid1D per(0, 1, 3, true);
  // periodic wrap adds |first - last|
  CHECK(total_variation(GridField(per, std::vector<double>{1, 0.5, 0})) ==
        doctest::Approx(2.0));
}

TEST_CASE("total_variation invariant under constant shift, monotone = |last-first|") {
  Rng rng(7);
  Grid1D grid(0, 1, 30);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(30);
    for (auto& x : v) x = rng.uniform(-2, 2);
    GridField f(grid, v);
    std::vector<double> shifted = v;
    for (auto& x : shifted) x += 3.7;
    CHECK(total_variation(GridField(grid, shifted)) ==
          doctest::Approx(total_variation(f)).epsilon(1e-12));

    std::sort(v.begin(), v.end());
    CHECK(total_variation(GridField(grid, v)) ==
          doctest::Approx(std::abs(v.back() - v.front())).epsilon(1e-12));
  }
}

TEST_CASE("grid and field invariants") {
  CHECK_THROWS_AS(Grid1D(1.0, 0.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(Grid1D(0.0, 1.0, 1), std::invalid_argument);
  Grid1D g(0, 1, 10);
  CHECK(g.dx() == doctest::Approx(0.1));
  CHECK(g.center(0) == doctest::Approx(0.05));
  CHECK_THROWS_AS(GridField(g, std::vector<double>(7), 1), std::invalid_argument);

  GridField f(g, 2, 1.5);
  CHECK(f.size() == 20);
  CHECK(f.component(1).size() == 10);
  CHECK_THROWS_AS(f.component(2), std::out_of_range);
}

TEST_CASE("trajectory validation") {
  Grid1D g(0, 1, 4);
  Trajectory t;
  t.mu = {0.5};
  t.times = {0.0, 0.1};
  t.states = {GridField(g, 1), GridField(g, 1)};
  CHECK_NOTHROW(t.validate());

  t.times = {0.1, 0.2};
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t.times = {0.0, 0.0};
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t.times = {0.0};
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}
