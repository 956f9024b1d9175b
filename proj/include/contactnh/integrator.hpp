#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "contactnh/lagrangian.hpp"

namespace contactnh {

using OdeField = std::function<Vec(const Vec&)>;

/// Classical four-stage Runge-Kutta increment x' - x.
Vec rk4_increment(const OdeField& f, const Vec& x, double h);
Vec rk4_step(const OdeField& f, const Vec& x, double h);

/// Fixed-step solution with per-sample diagnostics. States are (q, p, z) for
/// Hamiltonian runs and (q, v, z) for Lagrangian runs.
struct Trajectory {
  int n = 0;
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<double> drift;            // max |phi^a| (Hamiltonian) or max |Phi^a(v)| (Lagrangian)
  std::vector<double> energy;           // H or E_L
  std::vector<double> multiplier_norm;  // |lambda|_2

  /// Set when a numerical failure halted the run early.
  std::optional<std::string> error;

  std::size_t size() const { return times.size(); }
  double max_drift() const;
};

struct IntegrationSettings {
  double t_end = 0.0;
  double h = 1e-3;
  bool project = false;
};

/// RK4 on X_{H,M} from x0 on M. The run has llround(t_end / h) steps.
Trajectory integrate(const ConstrainedSystem& sys, const PhasePoint& x0, const IntegrationSettings& s);

/// RK4 on the constrained Herglotz field from x0 with v in D. Projection
/// removes the g-orthogonal component of v outside D.
Trajectory integrate_lagrangian(const MechanicalSystem& sys, const LagrangianPoint& x0, const IntegrationSettings& s);

/// max over interior samples of |dH/dt + R(H) H + dH(Q X_H)| with dH/dt from a
/// five-point stencil. Needs at least five samples.
double energy_law_residual(const ConstrainedSystem& sys, const Trajectory& traj);

}  // namespace contactnh
