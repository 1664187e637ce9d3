#include <cmath>

#include "doctest.h"
#include "fluxfno/grid.hpp"
#include "test_util.hpp"

using namespace fluxfno;
using fluxfno::testing::random_grid;

TEST_CASE("roll shifts content rightward") {
  GridFunction u({1, 2, 3, 4});
  CHECK(roll(u, 0).vector() == std::vector<double>{1, 2, 3, 4});
  CHECK(roll(u, 1).vector() == std::vector<double>{4, 1, 2, 3});
  CHECK(roll(u, -1).vector() == std::vector<double>{2, 3, 4, 1});
  CHECK(roll(u, 5).vector() == roll(u, 1).vector());
}

TEST_CASE("roll is a bijection") {
  const auto u = random_grid(256, 11);
  for (long s : {-300L, -3L, 0L, 1L, 3L, 255L, 256L, 1000L}) {
    CHECK(roll(roll(u, s), -s) == u);
  }
}

TEST_CASE("stencil pair index bookkeeping") {
  GridFunction u({1, 2, 3, 4});
  auto [l, r] = build_stencil_pair(u, 0, 1);
  REQUIRE(l.channels == 2);
  const double lv[] = {1, 2, 2, 3, 3, 4, 4, 1};
  const double rv[] = {4, 1, 1, 2, 2, 3, 3, 4};
  for (int i = 0; i < 8; ++i) {
    CHECK(l.values[i] == lv[i]);
    CHECK(r.values[i] == rv[i]);
  }
}

TEST_CASE("stencil channels follow the shift rule") {
  const auto u = random_grid(256, 3);
  for (auto [p, q] : {std::pair{1, 1}, std::pair{0, 0}, std::pair{2, 3}}) {
    auto [l, r] = build_stencil_pair(u, p, q);
    REQUIRE(l.channels == static_cast<std::size_t>(p + q + 1));
    for (std::size_t j = 0; j < 256; ++j) {
      for (int c = 0; c <= p + q; ++c) {
        CHECK(l.at(j, c) == u[(j - p + c + 256) % 256]);
        CHECK(r.at(j, c) == u[(j - p - 1 + c + 256) % 256]);
      }
    }
  }
  auto [l, r] = build_stencil_pair(u, 1, 1);
  for (std::size_t j = 0; j < 256; ++j) CHECK(l.at(j, 1) == u[j]);
}

TEST_CASE("zero-width stencil is (u, roll(u, 1))") {
  const auto u = random_grid(16, 5);
  auto [l, r] = build_stencil_pair(u, 0, 0);
  CHECK(l.values == u.vector());
  CHECK(r.values == roll(u, 1).vector());
}

TEST_CASE("stencils of a constant are constant") {
  auto [l, r] = build_stencil_pair(GridFunction::constant(8, 2.5), 2, 1);
  for (double v : l.values) CHECK(v == 2.5);
  for (double v : r.values) CHECK(v == 2.5);
}

TEST_CASE("stencil wider than the grid is rejected") {
  CHECK_THROWS(build_stencil_pair(GridFunction::zeros(4), 2, 2));
  CHECK_THROWS(build_stencil_pair(GridFunction::zeros(4), -1, 1));
}

TEST_CASE("rel_l2") {
  const auto u = random_grid(32, 1);
  CHECK(rel_l2(u, u) == 0.0);
  std::vector<double> twice(u.vector());
  for (auto& x : twice) x *= 2;
  CHECK(rel_l2(GridFunction(twice), u) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> a{1, 2}, b{1, 1};
  CHECK(rel_l2(a, b) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS(rel_l2(u, GridFunction::zeros(32)));
}

TEST_CASE("rel_l2 triangle bound on random triples") {
  auto norm = [](const GridFunction& g) {
    double s = 0;
    for (double v : g.values()) s += v * v;
    return std::sqrt(s);
  };
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto a = random_grid(64, 3 * s), b = random_grid(64, 3 * s + 1), c = random_grid(64, 3 * s + 2);
    CHECK(rel_l2(a, c) <= rel_l2(a, b) * norm(b) / norm(c) + rel_l2(b, c) + 1e-12);
  }
}

TEST_CASE("linf is absolute") {
  const std::vector<double> a{0, 3}, z{0, 0};
  CHECK(linf(a, z) == 3.0);
  const auto u = random_grid(64, 2);
  CHECK(linf(u, u) == 0.0);
  std::vector<double> shifted(u.vector());
  for (auto& x : shifted) x += 0.5;
  CHECK(linf(GridFunction(shifted), u) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("total variation is periodic") {
  CHECK(total_variation(GridFunction::constant(8, 3.0)) == 0.0);
  CHECK(total_variation(GridFunction({1, 2, 1, 2})) == 4.0);
  CHECK(total_variation(GridFunction({0, 1, 2, 3})) == 6.0);
}

TEST_CASE("mass") {
  CHECK(mass(GridFunction::zeros(16)) == 0.0);
  CHECK(mass(GridFunction::constant(256, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  const auto u = random_grid(128, 9);
  for (long s : {1L, 7L, -40L}) {
    CHECK(mass(roll(u, s)) == doctest::Approx(mass(u)).epsilon(1e-14));
    CHECK(total_variation(roll(u, s)) == doctest::Approx(total_variation(u)).epsilon(1e-14));
  }
}

TEST_CASE("grid construction") {
  CHECK_THROWS(GridFunction({1, 2, 3}));
  CHECK(GridFunction::zeros(256).dx() == 1.0 / 256);
  Trajectory t(GridFunction::zeros(8));
  t.push(GridFunction::constant(8, 1.0), 0.1);
  CHECK(t.n_steps() == 1);
  CHECK_THROWS(t.push(GridFunction::zeros(8), 0.0));
  CHECK_THROWS(t.push(GridFunction::zeros(16), 0.1));
}
