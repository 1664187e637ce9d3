#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "fluxfno/fno.hpp"
#include "fluxfno/grid.hpp"
#include "fluxfno/schemes.hpp"

namespace fluxfno {

enum class AnalyticFlux { upwind, lax_friedrichs, godunov };

std::string to_string(AnalyticFlux a);
AnalyticFlux parse_analytic_flux(const std::string& s);  // upwind | lax | godunov

/// The numerical flux G: either a trained FNO or a classical two-point flux
/// reading channels p (u_j) and p + 1 (u_{j+1}) of the stencil.
class FluxOperator {
 public:
  static FluxOperator learned(FnoParams params, int p = 0, int q = 1);
  /// `lf_dt` is the time step assumed by the Lax-Friedrichs dissipation term.
  static FluxOperator analytic(AnalyticFlux kind, PhysicalFlux F, int p = 0, int q = 1, double lf_dt = 0.0);

  bool is_learned() const { return params_ != nullptr; }
  const FnoParams& params() const;
  int p() const { return p_; }
  int q() const { return q_; }
  std::size_t channels() const { return static_cast<std::size_t>(p_ + q_ + 1); }
  std::string describe() const;

  /// G applied to stencil rows [batch, N, p+q+1]; returns [batch, N].
  std::vector<double> apply(const BatchedField& stencils, double dx) const;

  /// Face fluxes G(U^l)_j = F_{j+1/2} of one state.
  std::vector<double> face_fluxes(const GridFunction& u) const;

  /// By default G(U^r) is taken as roll(G(U^l), 1): the flux through face
  /// j-1/2 is the one already computed for cell j-1, so the update telescopes.
  /// When set, G(U^r) is evaluated on its own stencil instead. The two agree
  /// whenever G is translation equivariant (analytic fluxes, conv_kernel = 1).
  bool literal_right_stencil = false;

 private:
  std::shared_ptr<const FnoParams> params_;
  AnalyticFlux kind_ = AnalyticFlux::upwind;
  PhysicalFlux flux_;
  double lf_dt_ = 0.0;
  int p_ = 0;
  int q_ = 1;
};

/// Raised when a state leaves the finite range or exceeds the blow-up threshold.
class BlowUp : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double kBlowUpThreshold = 1e6;

/// D(u) = (G(U^l) - G(U^r)) / dx.
GridFunction divergence(const FluxOperator& G, const GridFunction& u);

/// u - dt D(u). Throws BlowUp on non-finite output.
GridFunction step_euler(const FluxOperator& G, const GridFunction& u, double dt);

/// Heun: u1 = step_euler(u); result = u/2 + step_euler(u1)/2.
GridFunction step_rk2(const FluxOperator& G, const GridFunction& u, double dt);

GridFunction step(const FluxOperator& G, const GridFunction& u, double dt, Integrator integrator);

struct RolloutResult {
  Trajectory trajectory;
  bool truncated = false;  // stopped early by the blow-up guard
  std::string message;
  double final_time() const;
};

/// Marches from t = 0 to exactly T. In fixed mode the n-th time level is n*dt
/// and the last step is clamped to land on T.
RolloutResult integrate_to(const FluxOperator& G, const GridFunction& u0, double T, const SchemeConfig& scheme,
                           const PhysicalFlux& F);

}  // namespace fluxfno
