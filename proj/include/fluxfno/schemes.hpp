#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fluxfno/grid.hpp"

namespace fluxfno {

enum class Equation { advection, burgers };

std::string to_string(Equation e);
Equation parse_equation(const std::string& s);

/// Physical flux of u_t + F(u)_x = 0: F(u) = a u (advection) or u^2 / 2 (Burgers).
struct PhysicalFlux {
  Equation kind = Equation::burgers;
  double speed = 1.0;  // advection velocity a; unused for Burgers

  static PhysicalFlux advection(double a = 1.0) { return {Equation::advection, a}; }
  static PhysicalFlux burgers() { return {Equation::burgers, 1.0}; }

  double operator()(double u) const { return kind == Equation::advection ? speed * u : 0.5 * u * u; }
  /// |a| for advection, max |u| for Burgers.
  double max_wave_speed(const GridFunction& u) const;
};

enum class Integrator { euler, ssp_rk2 };
enum class DtMode { fixed, cfl };

std::string to_string(Integrator i);
Integrator parse_integrator(const std::string& s);

/// Stencil and time-stepping choices for a conservative update.
struct SchemeConfig {
  int p = 0;
  int q = 1;
  double courant = 0.5;
  Integrator integrator = Integrator::euler;
  DtMode dt_mode = DtMode::fixed;
  double dt = 0.0;  // used when dt_mode == fixed

  void validate() const;
};

class CflViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- Two-point numerical fluxes --------------------------------------------

double flux_upwind(double uL, double uR, double a);
double flux_lax_friedrichs(double uL, double uR, const PhysicalFlux& F, double dx, double dt);
/// Exact Riemann flux for F(u) = u^2/2.
double flux_godunov_burgers(double uL, double uR);
/// Godunov flux for either equation (upwind for advection).
double flux_godunov(double uL, double uR, const PhysicalFlux& F);

double minmod(double a, double b);

/// Limited interface states at j+1/2: uL_j = u_j + s_j/2, uR_j = u_{j+1} - s_{j+1}/2.
std::pair<std::vector<double>, std::vector<double>> muscl_interface_states(const GridFunction& u);

enum class Reconstruction { first_order, muscl_minmod };

/// D(u)_j = (F_{j+1/2} - F_{j-1/2}) / dx with Godunov fluxes on reconstructed states.
GridFunction reference_divergence(const GridFunction& u, const PhysicalFlux& F,
                                  Reconstruction recon = Reconstruction::muscl_minmod);

/// One SSP-RK2 (Heun) step of the reference semi-discretization:
///   u1 = u - dt D(u);  out = u/2 + (u1 - dt D(u1))/2.
/// Throws CflViolation when dt exceeds the Courant-1 limit unless `enforce_cfl` is false.
GridFunction reference_step(const GridFunction& u, const PhysicalFlux& F, double dt,
                            Reconstruction recon = Reconstruction::muscl_minmod, bool enforce_cfl = true);

/// Advances by `dt` using as many equal reference sub-steps as needed to keep
/// the Courant number at or below `courant`.
GridFunction reference_advance(const GridFunction& u, const PhysicalFlux& F, double dt, double courant);

/// u0(x - a t) on the periodic grid. Grid-aligned shifts are exact rolls;
/// other shifts use trigonometric interpolation. For even N the Nyquist mode
/// is kept real, so off-grid shifts compose exactly only without that mode.
GridFunction exact_advection(const GridFunction& u0, double a, double t);

/// Entropy solution of the Burgers Riemann problem with jump at x0.
double exact_burgers_riemann(double uL, double uR, double x0, double x, double t);

/// Exact periodic solution for a step uL on [0, x0), uR on [x0, 1): a Riemann
/// problem at x0 and another at the periodic seam x = 0. Valid until the two
/// waves interact.
GridFunction exact_burgers_periodic_step(std::size_t n, double uL, double uR, double x0, double t);

/// courant * dx / max wave speed; courant * dx when the speed is below 1e-12.
double cfl_dt(const GridFunction& u, const PhysicalFlux& F, double courant);

}  // namespace fluxfno
