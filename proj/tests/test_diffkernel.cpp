#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "fluxfno/diffkernel.hpp"
#include "test_util.hpp"

using namespace fluxfno;
using fluxfno::testing::random_vector;
using cplx = std::complex<double>;

namespace {

BatchedField field(std::size_t b, std::size_t n, std::size_t c, std::uint64_t seed) {
  BatchedField f(b, n, c);
  f.values = random_vector(f.values.size(), seed);
  return f;
}

// O(N^2) transform straight from the definition.
std::vector<cplx> dense_dft(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      out[k] += v[j] * std::polar(1.0, -2.0 * std::numbers::pi * double(j * k % n) / double(n));
    }
  }
  return out;
}

std::vector<double> dense_idft_real(const std::vector<cplx>& c) {
  const std::size_t n = c.size();
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    cplx s = 0;
    for (std::size_t k = 0; k < n; ++k) s += c[k] * std::polar(1.0, 2.0 * std::numbers::pi * double(j * k % n) / double(n));
    out[j] = s.real() / double(n);
  }
  return out;
}

}  // namespace

TEST_CASE("rdft of a constant") {
  BatchedField v(1, 4, 1);
  v.values = {1, 1, 1, 1};
  const auto c = rdft_trunc(v, 1);
  CHECK(std::abs(c.at(0, 0, 0) - cplx(4, 0)) < 1e-14);
  CHECK(std::abs(c.at(0, 1, 0)) < 1e-14);
}

TEST_CASE("rdft of a cosine") {
  BatchedField v(1, 8, 1);
  for (int j = 0; j < 8; ++j) v.values[j] = std::cos(2 * std::numbers::pi * j / 8);
  const auto c = rdft_trunc(v, 2);
  CHECK(std::abs(c.at(0, 0, 0)) < 1e-13);
  CHECK(std::abs(c.at(0, 1, 0) - cplx(4, 0)) < 1e-13);
  CHECK(std::abs(c.at(0, 2, 0)) < 1e-13);
}

TEST_CASE("rdft matches the dense DFT and is linear") {
  const auto v = field(2, 12, 3, 4);
  const auto c = rdft_trunc(v, 6);
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t ch = 0; ch < 3; ++ch) {
      std::vector<double> row(12);
      for (std::size_t j = 0; j < 12; ++j) row[j] = v.at(b, j, ch);
      const auto ref = dense_dft(row);
      for (std::size_t k = 0; k <= 6; ++k) CHECK(std::abs(c.at(b, k, ch) - ref[k]) < 1e-12);
    }
  }
  auto scaled = v;
  for (auto& x : scaled.values) x *= -2.5;
  const auto cs = rdft_trunc(scaled, 3);
  const auto c3 = rdft_trunc(v, 3);
  for (std::size_t i = 0; i < c3.values.size(); ++i) CHECK(std::abs(cs.values[i] + 2.5 * c3.values[i]) < 1e-12);
}

TEST_CASE("rdft rejects too many modes") {
  CHECK_THROWS(rdft_trunc(field(1, 8, 1, 1), 5));
  CHECK_NOTHROW(rdft_trunc(field(1, 8, 1, 1), 4));
}

TEST_CASE("full-mode round trip") {
  for (std::size_t n : {16u, 15u}) {
    const auto v = field(2, n, 2, 7);
    const auto back = irdft(rdft_trunc(v, n / 2), n);
    CHECK(fluxfno::testing::max_abs_diff(back.values, v.values) <= 1e-12);
  }
}

TEST_CASE("single zero mode inverts to a constant") {
  SpectralCoeffs c(1, 3, 1);
  c.at(0, 0, 0) = 8.0;
  const auto v = irdft(c, 8);
  for (double x : v.values) CHECK(x == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("truncation is the low-pass projector") {
  const std::size_t n = 16, kmax = 3;
  const auto v = field(1, n, 1, 21);
  const auto low = irdft(rdft_trunc(v, kmax), n);
  auto spec = dense_dft(v.values);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t freq = std::min(k, n - k);
    if (freq > kmax) spec[k] = 0;
  }
  const auto ref = dense_idft_real(spec);
  CHECK(fluxfno::testing::max_abs_diff(low.values, ref) <= 1e-12);
  const auto twice = irdft(rdft_trunc(low, kmax), n);
  CHECK(fluxfno::testing::max_abs_diff(twice.values, low.values) <= 1e-12);
}

TEST_CASE("Parseval on full modes") {
  for (std::size_t n : {16u, 17u}) {
    const auto v = field(1, n, 1, 5);
    const auto c = rdft_trunc(v, n / 2);
    double energy = 0;
    for (double x : v.values) energy += x * x;
    double spec = 0;
    for (std::size_t k = 0; k <= n / 2; ++k) {
      const bool self_conjugate = k == 0 || (n % 2 == 0 && k == n / 2);
      spec += (self_conjugate ? 1.0 : 2.0) * std::norm(c.at(0, k, 0));
    }
    CHECK(spec / double(n) == doctest::Approx(energy).epsilon(1e-10));
  }
}

TEST_CASE("spectral_apply examples") {
  SpectralCoeffs c(1, 1, 2);
  c.at(0, 0, 0) = {1, 0};
  c.at(0, 0, 1) = {0, 1};
  const std::vector<cplx> r{{1, 0}, {0, 1}};
  const auto out = spectral_apply(r, 2, 1, c);
  CHECK(std::abs(out.at(0, 0, 0)) < 1e-15);

  SpectralCoeffs c2(2, 3, 2);
  const auto raw = random_vector(2 * c2.values.size(), 8);
  for (std::size_t i = 0; i < c2.values.size(); ++i) c2.values[i] = {raw[2 * i], raw[2 * i + 1]};
  std::vector<cplx> eye(3 * 2 * 2);
  for (std::size_t k = 0; k < 3; ++k) eye[k * 4 + 0] = eye[k * 4 + 3] = 1.0;
  CHECK(spectral_apply(eye, 2, 2, c2).values == c2.values);
  const std::vector<cplx> zero(12);
  for (const auto& z : spectral_apply(zero, 2, 2, c2).values) CHECK(z == cplx(0, 0));
  CHECK_THROWS(spectral_apply(zero, 3, 2, c2));
}

TEST_CASE("conv1 examples") {
  const auto v = field(2, 8, 1, 3);
  const std::vector<double> two{2.0};
  const auto scaled = conv1(two, 1, 1, 1, v);
  for (std::size_t i = 0; i < v.values.size(); ++i) CHECK(scaled.values[i] == 2 * v.values[i]);
  const std::vector<double> delta{0, 1, 0};
  CHECK(conv1(delta, 3, 1, 1, v).values == v.values);

  BatchedField spike(1, 8, 1);
  spike.values[4] = 1;
  const std::vector<double> box{1, 1, 1};
  CHECK(conv1(box, 3, 1, 1, spike).values == std::vector<double>{0, 0, 0, 1, 1, 1, 0, 0});

  CHECK_THROWS(conv1(std::vector<double>{1, 1}, 2, 1, 1, v));
}

TEST_CASE("conv1 zero pads at the boundary") {
  BatchedField v(1, 6, 1);
  v.values = {1, 0, 0, 0, 0, 0};
  const std::vector<double> box{1, 1, 1};
  // A periodic filter would also touch the last cell.
  CHECK(conv1(box, 3, 1, 1, v).values == std::vector<double>{1, 1, 0, 0, 0, 0});
}

TEST_CASE("conv1 commutes with roll away from the boundary") {
  const std::size_t n = 32;
  const auto k = random_vector(3 * 2 * 2, 12);
  BatchedField v(1, n, 2);
  v.at(0, 10, 0) = 1.0;
  v.at(0, 11, 1) = -0.5;
  BatchedField shifted(1, n, 2);
  shifted.at(0, 15, 0) = 1.0;
  shifted.at(0, 16, 1) = -0.5;
  const auto a = conv1(k, 3, 2, 2, v), b = conv1(k, 3, 2, 2, shifted);
  for (std::size_t j = 2; j + 7 < n; ++j) {
    for (std::size_t c = 0; c < 2; ++c) CHECK(a.at(0, j, c) == b.at(0, j + 5, c));
  }
}

TEST_CASE("affine_pointwise examples") {
  BatchedField v(1, 4, 2);
  for (std::size_t j = 0; j < 4; ++j) {
    v.at(0, j, 0) = 3;
    v.at(0, j, 1) = 1;
  }
  const std::vector<double> w{1, -1}, b{0.5};
  const auto out = affine_pointwise(w, b, 2, 1, v);
  for (double x : out.values) CHECK(x == 2.5);

  const auto r = field(2, 5, 2, 9);
  const std::vector<double> eye{1, 0, 0, 1}, zb{0, 0};
  CHECK(affine_pointwise(eye, zb, 2, 2, r).values == r.values);
  CHECK_THROWS(affine_pointwise(eye, b, 2, 2, r));
}

TEST_CASE("gelu values") {
  CHECK(gelu(0.0) == 0.0);
  CHECK(gelu(1.0) == doctest::Approx(0.5 * (1 + std::erf(1 / std::sqrt(2.0)))).epsilon(1e-15));
  CHECK(gelu(1.0) == doctest::Approx(0.841345).epsilon(1e-6));
  CHECK(std::abs(gelu(-10.0)) <= 1e-8);
  CHECK(gelu(40.0) / 40.0 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gelu_derivative(0.0) == doctest::Approx(0.5).epsilon(1e-8));
  BatchedField z(1, 4, 1);
  BatchedField g(1, 4, 1);
  g.values = {1, 1, 1, 1};
  for (double d : gelu_backward(z, g).values) CHECK(std::abs(d - 0.5) <= 1e-8);
}

TEST_CASE("gelu backward from the forward output matches the direct derivative") {
  BatchedField v(1, 9, 1);
  v.values = {-30.0, -6.0, -1.0, -1e-3, -1e-6, 0.0, 2e-4, 0.7, 12.0};
  BatchedField g(1, 9, 1);
  g.values = random_vector(9, 4);
  const auto direct = gelu_backward(v, g);
  const auto cached = gelu_backward(v, gelu(v), g);
  for (std::size_t i = 0; i < 9; ++i)
    CHECK(std::abs(cached.values[i] - direct.values[i]) <= 1e-14 * std::max(1.0, std::abs(direct.values[i])));
}

TEST_CASE("primitive gradients match central differences") {
  const double eps = 1e-5, tol = 1e-6;
  auto run = [&](const DiffFunction& f, std::size_t np, std::size_t nx, std::uint64_t seed) {
    const auto p = random_vector(np, seed), x = random_vector(nx, seed + 1);
    const auto rep = grad_check(f, p, x, eps, tol);
    INFO(rep.failure);
    CHECK(rep.pass);
    CHECK(rep.checked == np + nx);
  };
  SUBCASE("rdft") { run(make_rdft_check(2, 16, 2, 4), 0, 2 * 16 * 2, 1); }
  SUBCASE("rdft full") { run(make_rdft_check(1, 16, 1, 8), 0, 16, 2); }
  SUBCASE("irdft") { run(make_irdft_check(2, 16, 2, 4), 0, 2 * 2 * 5 * 2, 3); }
  SUBCASE("irdft full") { run(make_irdft_check(1, 16, 1, 8), 0, 2 * 9, 4); }
  SUBCASE("spectral_apply") { run(make_spectral_apply_check(2, 3, 2, 3), 2 * 3 * 2 * 3, 2 * 2 * 3 * 2, 5); }
  SUBCASE("conv1") { run(make_conv1_check(2, 16, 3, 2, 2), 3 * 2 * 2, 2 * 16 * 2, 6); }
  SUBCASE("conv1 wide") { run(make_conv1_check(1, 16, 5, 2, 3), 5 * 2 * 3, 16 * 2, 7); }
  SUBCASE("affine") { run(make_affine_check(2, 16, 3, 2), 3 * 2 + 2, 2 * 16 * 3, 8); }
  SUBCASE("gelu") { run(make_gelu_check(), 0, 32, 9); }
}

TEST_CASE("grad_check reports a wrong gradient with its location") {
  auto f = make_gelu_check();
  f.backward = [](std::span<const double>, std::span<const double> x, std::span<const double> g,
                  std::span<double>, std::span<double> dx) {
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] = g[i] * (i == 3 ? 0.0 : gelu_derivative(x[i]));
  };
  const auto x = random_vector(8, 1, 0.5, 1.0);
  const auto rep = grad_check(f, {}, x, 1e-5, 1e-6);
  CHECK_FALSE(rep.pass);
  CHECK(rep.worst == "input[3]");

  f.backward = [](std::span<const double>, std::span<const double> x, std::span<const double>,
                  std::span<double>, std::span<double> dx) {
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] = std::nan("");
  };
  const auto bad = grad_check(f, {}, x, 1e-5, 1e-6);
  CHECK_FALSE(bad.pass);
  CHECK(bad.failure.find("input[0]") != std::string::npos);
  CHECK_THROWS(grad_check(f, {}, x, 0.0, 1e-6));
}
