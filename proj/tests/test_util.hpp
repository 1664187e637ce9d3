#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "fluxfno/grid.hpp"
#include "fluxfno/rng.hpp"

namespace fluxfno::testing {

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline GridFunction random_grid(std::size_t n, std::uint64_t seed) { return GridFunction(random_vector(n, seed)); }

inline std::filesystem::path tmp_dir(const std::string& name) {
  auto dir = std::filesystem::path(FLUXFNO_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace fluxfno::testing
