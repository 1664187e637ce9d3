#include "fluxfno/rollout.hpp"

#include <cmath>

namespace fluxfno {

std::string to_string(AnalyticFlux a) {
  switch (a) {
    case AnalyticFlux::upwind: return "upwind";
    case AnalyticFlux::lax_friedrichs: return "lax";
    case AnalyticFlux::godunov: return "godunov";
  }
  return "?";
}

AnalyticFlux parse_analytic_flux(const std::string& s) {
  if (s == "upwind") return AnalyticFlux::upwind;
  if (s == "lax" || s == "lax_friedrichs") return AnalyticFlux::lax_friedrichs;
  if (s == "godunov") return AnalyticFlux::godunov;
  throw std::invalid_argument("unknown analytic flux '" + s + "' (expected upwind, lax or godunov)");
}

FluxOperator FluxOperator::learned(FnoParams params, int p, int q) {
  if (p < 0 || q < 0) throw std::invalid_argument("stencil offsets must be non-negative");
  if (params.config().in_channels != static_cast<std::size_t>(p + q + 1)) {
    throw std::invalid_argument("model expects " + std::to_string(params.config().in_channels) +
                                " input channels but the stencil has " + std::to_string(p + q + 1));
  }
  if (params.config().out_channels != 1) throw std::invalid_argument("flux model must have one output channel");
  FluxOperator G;
  G.params_ = std::make_shared<const FnoParams>(std::move(params));
  G.p_ = p;
  G.q_ = q;
  return G;
}

FluxOperator FluxOperator::analytic(AnalyticFlux kind, PhysicalFlux F, int p, int q, double lf_dt) {
  if (p < 0 || q < 1) throw std::invalid_argument("two-point fluxes need p >= 0 and q >= 1");
  if (kind == AnalyticFlux::lax_friedrichs && !(lf_dt > 0.0)) {
    throw std::invalid_argument("Lax-Friedrichs flux needs a positive time step");
  }
  FluxOperator G;
  G.kind_ = kind;
  G.flux_ = F;
  G.lf_dt_ = lf_dt;
  G.p_ = p;
  G.q_ = q;
  return G;
}

const FnoParams& FluxOperator::params() const {
  if (!params_) throw std::logic_error("analytic flux has no parameters");
  return *params_;
}

std::string FluxOperator::describe() const {
  if (params_) return "fno";
  return "analytic:" + to_string(kind_);
}

std::vector<double> FluxOperator::apply(const BatchedField& stencils, double dx) const {
  if (stencils.channels != channels()) throw std::invalid_argument("stencil channel count mismatch");
  if (params_) {
    BatchedField out = forward(*params_, stencils);
    return std::move(out.values);
  }
  std::vector<double> out(stencils.rows());
  const std::size_t ch = stencils.channels;
  for (std::size_t r = 0; r < out.size(); ++r) {
    const double uL = stencils.values[r * ch + static_cast<std::size_t>(p_)];
    const double uR = stencils.values[r * ch + static_cast<std::size_t>(p_) + 1];
    switch (kind_) {
      case AnalyticFlux::upwind:
        if (flux_.kind == Equation::advection) {
          out[r] = flux_upwind(uL, uR, flux_.speed);
        } else {
          out[r] = 0.5 * (uL + uR) >= 0.0 ? flux_(uL) : flux_(uR);
        }
        break;
      case AnalyticFlux::lax_friedrichs:
        out[r] = flux_lax_friedrichs(uL, uR, flux_, dx, lf_dt_);
        break;
      case AnalyticFlux::godunov:
        out[r] = flux_godunov(uL, uR, flux_);
        break;
    }
  }
  return out;
}

std::vector<double> FluxOperator::face_fluxes(const GridFunction& u) const {
  BatchedField st(1, u.size(), channels());
  fill_stencil(u.values(), p_, q_, false, st.values);
  return apply(st, u.dx());
}

GridFunction divergence(const FluxOperator& G, const GridFunction& u) {
  const std::size_t n = u.size();
  const std::vector<double> left = G.face_fluxes(u);
  std::vector<double> right(n);
  if (G.literal_right_stencil) {
    BatchedField st(1, n, G.channels());
    fill_stencil(u.values(), G.p(), G.q(), true, st.values);
    right = G.apply(st, u.dx());
  } else {
    roll_into(left, 1, right);
  }
  std::vector<double> d(n);
  for (std::size_t j = 0; j < n; ++j) d[j] = (left[j] - right[j]) / u.dx();
  return GridFunction(std::move(d), u.dx());
}

namespace {

void check_finite(const GridFunction& u, const char* where) {
  if (!u.is_finite()) throw BlowUp(std::string(where) + ": state became non-finite");
}

}  // namespace

GridFunction step_euler(const FluxOperator& G, const GridFunction& u, double dt) {
  if (dt < 0.0) throw std::invalid_argument("step_euler: dt must be non-negative");
  if (dt == 0.0) return u;
  const GridFunction d = divergence(G, u);
  std::vector<double> out(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) out[j] = u[j] - dt * d[j];
  GridFunction next(std::move(out), u.dx());
  check_finite(next, "step_euler");
  return next;
}

GridFunction step_rk2(const FluxOperator& G, const GridFunction& u, double dt) {
  if (dt < 0.0) throw std::invalid_argument("step_rk2: dt must be non-negative");
  if (dt == 0.0) return u;
  const GridFunction u1 = step_euler(G, u, dt);
  const GridFunction u2 = step_euler(G, u1, dt);
  std::vector<double> out(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) out[j] = 0.5 * u[j] + 0.5 * u2[j];
  return GridFunction(std::move(out), u.dx());
}

GridFunction step(const FluxOperator& G, const GridFunction& u, double dt, Integrator integrator) {
  return integrator == Integrator::euler ? step_euler(G, u, dt) : step_rk2(G, u, dt);
}

double RolloutResult::final_time() const {
  double t = 0.0;
  for (double dt : trajectory.dts()) t += dt;
  return t;
}

RolloutResult integrate_to(const FluxOperator& G, const GridFunction& u0, double T, const SchemeConfig& scheme,
                           const PhysicalFlux& F) {
  if (!(T >= 0.0)) throw std::invalid_argument("integrate_to: T must be non-negative");
  scheme.validate();
  RolloutResult result{Trajectory(u0), false, {}};
  GridFunction u = u0;
  double t = 0.0;
  std::size_t n = 0;
  while (t < T) {
    double dt;
    double t_next;
    if (scheme.dt_mode == DtMode::fixed) {
      t_next = static_cast<double>(n + 1) * scheme.dt;
      dt = scheme.dt;
      // Within a tiny fraction of a step of T counts as landing on T.
      if (t_next >= T - 1e-9 * scheme.dt) {
        t_next = T;
        dt = T - t;
      }
    } else {
      dt = cfl_dt(u, F, scheme.courant);
      if (t + dt >= T - 1e-9 * dt) dt = T - t;
      t_next = dt == T - t ? T : t + dt;
    }
    try {
      GridFunction next = step(G, u, dt, scheme.integrator);
      if (next.max_abs() > kBlowUpThreshold) {
        throw BlowUp("state exceeded the blow-up threshold " + std::to_string(kBlowUpThreshold));
      }
      u = std::move(next);
    } catch (const BlowUp& e) {
      result.truncated = true;
      result.message = "blow-up at step " + std::to_string(n + 1) + " (t = " + std::to_string(t_next) +
                       "): " + e.what();
      return result;
    }
    result.trajectory.push(u, dt);
    t = t_next;
    ++n;
  }
  return result;
}

}  // namespace fluxfno
