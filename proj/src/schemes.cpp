#include "fluxfno/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace fluxfno {

std::string to_string(Equation e) { return e == Equation::advection ? "advection" : "burgers"; }

Equation parse_equation(const std::string& s) {
  if (s == "advection") return Equation::advection;
  if (s == "burgers") return Equation::burgers;
  throw std::invalid_argument("unknown equation '" + s + "' (expected advection or burgers)");
}

std::string to_string(Integrator i) { return i == Integrator::euler ? "euler" : "rk2"; }

Integrator parse_integrator(const std::string& s) {
  if (s == "euler") return Integrator::euler;
  if (s == "rk2" || s == "ssp_rk2") return Integrator::ssp_rk2;
  throw std::invalid_argument("unknown integrator '" + s + "' (expected euler or rk2)");
}

double PhysicalFlux::max_wave_speed(const GridFunction& u) const {
  return kind == Equation::advection ? std::abs(speed) : u.max_abs();
}

void SchemeConfig::validate() const {
  if (p < 0 || q < 0) throw std::invalid_argument("stencil offsets p and q must be non-negative");
  if (!(courant > 0.0)) throw std::invalid_argument("courant number must be positive");
  if (dt_mode == DtMode::fixed && !(dt > 0.0)) throw std::invalid_argument("fixed time step must be positive");
}

double flux_upwind(double uL, double uR, double a) { return a >= 0.0 ? a * uL : a * uR; }

double flux_lax_friedrichs(double uL, double uR, const PhysicalFlux& F, double dx, double dt) {
  return 0.5 * (F(uL) + F(uR)) - 0.5 * (dx / dt) * (uR - uL);
}

double flux_godunov_burgers(double uL, double uR) {
  if (uL <= uR) {
    if (uL > 0.0) return 0.5 * uL * uL;
    if (uR < 0.0) return 0.5 * uR * uR;
    return 0.0;
  }
  const double s = 0.5 * (uL + uR);
  return s >= 0.0 ? 0.5 * uL * uL : 0.5 * uR * uR;
}

double flux_godunov(double uL, double uR, const PhysicalFlux& F) {
  return F.kind == Equation::advection ? flux_upwind(uL, uR, F.speed) : flux_godunov_burgers(uL, uR);
}

double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return a > 0.0 ? std::min(a, b) : std::max(a, b);
}

std::pair<std::vector<double>, std::vector<double>> muscl_interface_states(const GridFunction& u) {
  const std::size_t n = u.size();
  std::vector<double> slope(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double um = u[(j + n - 1) % n], up = u[(j + 1) % n];
    slope[j] = minmod(u[j] - um, up - u[j]);
  }
  std::vector<double> left(n), right(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t jp = (j + 1) % n;
    left[j] = u[j] + 0.5 * slope[j];
    right[j] = u[jp] - 0.5 * slope[jp];
  }
  return {std::move(left), std::move(right)};
}

GridFunction reference_divergence(const GridFunction& u, const PhysicalFlux& F, Reconstruction recon) {
  const std::size_t n = u.size();
  std::vector<double> face(n);  // face[j] = F_{j+1/2}
  if (recon == Reconstruction::muscl_minmod) {
    const auto [left, right] = muscl_interface_states(u);
    for (std::size_t j = 0; j < n; ++j) face[j] = flux_godunov(left[j], right[j], F);
  } else {
    for (std::size_t j = 0; j < n; ++j) face[j] = flux_godunov(u[j], u[(j + 1) % n], F);
  }
  std::vector<double> d(n);
  for (std::size_t j = 0; j < n; ++j) d[j] = (face[j] - face[(j + n - 1) % n]) / u.dx();
  return GridFunction(std::move(d), u.dx());
}

GridFunction reference_step(const GridFunction& u, const PhysicalFlux& F, double dt, Reconstruction recon,
                            bool enforce_cfl) {
  if (!(dt > 0.0)) throw std::invalid_argument("reference_step: dt must be positive");
  if (enforce_cfl) {
    const double limit = cfl_dt(u, F, 1.0);
    if (dt > limit * (1.0 + 1e-12)) {
      throw CflViolation("reference_step: dt = " + std::to_string(dt) + " exceeds the CFL limit " +
                         std::to_string(limit));
    }
  }
  const std::size_t n = u.size();
  const GridFunction d0 = reference_divergence(u, F, recon);
  std::vector<double> u1(n);
  for (std::size_t j = 0; j < n; ++j) u1[j] = u[j] - dt * d0[j];
  const GridFunction g1(std::move(u1), u.dx());
  const GridFunction d1 = reference_divergence(g1, F, recon);
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = 0.5 * u[j] + 0.5 * (g1[j] - dt * d1[j]);
  return GridFunction(std::move(out), u.dx());
}

GridFunction reference_advance(const GridFunction& u, const PhysicalFlux& F, double dt, double courant) {
  if (!(dt > 0.0)) throw std::invalid_argument("reference_advance: dt must be positive");
  GridFunction cur = u;
  double remaining = dt;
  while (remaining > 0.0) {
    const double limit = cfl_dt(cur, F, courant);
    const auto pieces = static_cast<std::size_t>(std::ceil(remaining / limit - 1e-9));
    const double h = remaining / static_cast<double>(std::max<std::size_t>(pieces, 1));
    cur = reference_step(cur, F, h, Reconstruction::muscl_minmod, false);
    remaining -= h;
    if (remaining < 1e-14 * dt) break;
  }
  return cur;
}

GridFunction exact_advection(const GridFunction& u0, double a, double t) {
  const std::size_t n = u0.size();
  const double shift = a * t / u0.dx();  // in cells
  const double whole = std::round(shift);
  if (std::abs(shift - whole) <= 1e-9 * std::max(1.0, std::abs(shift))) {
    return roll(u0, static_cast<long>(whole));
  }

  // Trigonometric interpolation: shift each Fourier mode by exp(-2 pi i k s / n).
  std::vector<double> c(n), s(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
    c[m] = std::cos(th);
    s[m] = std::sin(th);
  }
  const std::size_t half = n / 2;
  std::vector<std::complex<double>> coef(half + 1);
  for (std::size_t k = 0; k <= half; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t m = (j * k) % n;
      acc += u0[j] * std::complex<double>(c[m], -s[m]);
    }
    const double ph = -2.0 * std::numbers::pi * static_cast<double>(k) * shift / static_cast<double>(n);
    coef[k] = acc * std::polar(1.0, ph);
  }
  if (n % 2 == 0) coef[half] = std::complex<double>(coef[half].real(), 0.0);  // keep the shifted signal real

  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    double v = coef[0].real();
    for (std::size_t k = 1; k <= half; ++k) {
      const std::size_t m = (j * k) % n;
      const double re = coef[k].real() * c[m] - coef[k].imag() * s[m];
      v += (n % 2 == 0 && k == half) ? re : 2.0 * re;
    }
    out[j] = v / static_cast<double>(n);
  }
  return GridFunction(std::move(out), u0.dx());
}

double exact_burgers_riemann(double uL, double uR, double x0, double x, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("exact_burgers_riemann: t must be positive");
  const double xi = (x - x0) / t;
  if (uL > uR) return xi < 0.5 * (uL + uR) ? uL : uR;
  if (xi <= uL) return uL;
  if (xi >= uR) return uR;
  return xi;
}

GridFunction exact_burgers_periodic_step(std::size_t n, double uL, double uR, double x0, double t) {
  GridFunction out = GridFunction::zeros(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = out.x(j);
    if (t <= 0.0) {
      out[j] = x < x0 ? uL : uR;
      continue;
    }
    // The seam at x = 0 (equivalently 1) carries the jump from uR back to uL.
    const double mid = 0.5 * x0 + 0.5;  // between the two jumps, on the uR side
    if (x < 0.5 * x0) {
      out[j] = exact_burgers_riemann(uR, uL, 0.0, x, t);
    } else if (x < mid) {
      out[j] = exact_burgers_riemann(uL, uR, x0, x, t);
    } else {
      out[j] = exact_burgers_riemann(uR, uL, 1.0, x, t);
    }
  }
  return out;
}

double cfl_dt(const GridFunction& u, const PhysicalFlux& F, double courant) {
  const double speed = F.max_wave_speed(u);
  return speed < 1e-12 ? courant * u.dx() : courant * u.dx() / speed;
}

}  // namespace fluxfno
