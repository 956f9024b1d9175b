#include "contactnh/integrator.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

namespace contactnh {

Vec rk4_increment(const OdeField& f, const Vec& x, double h) {
  const Vec k1 = f(x);
  const Vec k2 = f(x + (0.5 * h) * k1);
  const Vec k3 = f(x + (0.5 * h) * k2);
  const Vec k4 = f(x + h * k3);
  return (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vec rk4_step(const OdeField& f, const Vec& x, double h) { return x + rk4_increment(f, x, h); }

double Trajectory::max_drift() const {
  double d = 0.0;
  for (double v : drift) d = std::max(d, v);
  return d;
}

namespace {

long step_count(const IntegrationSettings& s) {
  if (!(s.h > 0.0) || !std::isfinite(s.h)) throw ConfigError("step size must be positive");
  if (!(s.t_end >= 0.0) || !std::isfinite(s.t_end)) throw ConfigError("t_end must be non-negative");
  return std::lround(s.t_end / s.h);
}

// Drives the fixed-step loop with compensated accumulation of increments, so
// roundoff stays below the RK4 truncation error at small h.
template <class Record, class Project>
void run(Trajectory& traj, Vec x, const OdeField& field, const IntegrationSettings& s, Record&& record,
         Project&& project) {
  const long steps = step_count(s);
  record(0.0, x);
  Vec carry = Vec::Zero(x.size());
  for (long k = 1; k <= steps; ++k) {
    try {
      const Vec y = rk4_increment(field, x, s.h) - carry;
      const Vec next = x + y;
      carry = (next - x) - y;
      x = next;
      if (s.project && project(x)) carry.setZero();
      record(static_cast<double>(k) * s.h, x);
    } catch (const EngineError& e) {
      traj.error = e.what();
      spdlog::warn("integration halted at t = {}: {}", static_cast<double>(k - 1) * s.h, e.what());
      return;
    }
  }
}

}  // namespace

Trajectory integrate(const ConstrainedSystem& sys, const PhasePoint& x0, const IntegrationSettings& s) {
  sys.require_on_M(x0);
  const int n = sys.n();
  Trajectory traj;
  traj.n = n;
  const OdeField field = [&sys, n](const Vec& x) {
    return constrained_vector(sys, PhasePoint(n, x), Membership::Extend).data();
  };
  auto record = [&](double t, const Vec& x) {
    const PhasePoint p(n, x);
    const auto solve = solve_multipliers(sys, p, sys.hamiltonian_field().value(p), Membership::Extend);
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.drift.push_back(sys.violation(p));
    traj.energy.push_back(sys.H()(p));
    traj.multiplier_norm.push_back(solve.lambdas.norm());
  };
  auto project = [&](Vec& x) {
    PhasePoint p(n, x);
    if (!project_onto_M(sys, p)) spdlog::debug("projection did not converge at |phi| = {}", sys.violation(p));
    x = p.data();
    return true;
  };
  run(traj, x0.data(), field, s, record, project);
  return traj;
}

Trajectory integrate_lagrangian(const MechanicalSystem& sys, const LagrangianPoint& x0, const IntegrationSettings& s) {
  sys.require_in_D(x0);
  const int n = sys.n();
  Trajectory traj;
  traj.n = n;
  const OdeField field = [&sys, n](const Vec& x) {
    return lagrangian_constrained_vector(sys, LagrangianPoint::from_stacked(n, x), Membership::Extend);
  };
  auto record = [&](double t, const Vec& x) {
    const auto lp = LagrangianPoint::from_stacked(n, x);
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.drift.push_back(sys.distribution_violation(lp));
    traj.energy.push_back(energy_and_form(sys, lp).energy);
    traj.multiplier_norm.push_back(herglotz_solve(sys, lp, Membership::Extend).lambdas.norm());
  };
  auto project = [&](Vec& x) {
    if (sys.m() == 0) return false;
    const Vec q = x.head(n);
    const Mat g = sys.metric(q);
    const Mat Phi = sys.forms(q);
    const Eigen::LLT<Mat> llt(g);
    const Mat giPhiT = llt.solve(Mat(Phi.transpose()));
    const Mat K = Phi * giPhiT;
    x.segment(n, n) -= giPhiT * K.ldlt().solve(Phi * x.segment(n, n));
    return true;
  };
  run(traj, x0.stacked(), field, s, record, project);
  return traj;
}

double energy_law_residual(const ConstrainedSystem& sys, const Trajectory& traj) {
  if (traj.size() < 5) throw PreconditionFailed("energy law check needs at least five samples");
  const double h = traj.times[1] - traj.times[0];
  double worst = 0.0;
  for (std::size_t k = 2; k + 2 < traj.size(); ++k) {
    const auto& E = traj.energy;
    const double dHdt = (-E[k + 2] + 8.0 * E[k + 1] - 8.0 * E[k - 1] + E[k - 2]) / (12.0 * h);
    const PhasePoint x(traj.n, traj.states[k]);
    const OneFormValue dH = sys.H().gradient(x);
    const VectorValue q = projector_Q(sys, x, sys.hamiltonian_field().value(x), Membership::Extend);
    worst = std::max(worst, std::abs(dHdt + dH.z() * sys.H()(x) + pair(dH, q)));
  }
  return worst;
}

}  // namespace contactnh
