#pragma once

#include <memory>
#include <vector>

#include "contactnh/constrained.hpp"

namespace contactnh {

/// Natural coordinates (q, v, z) on TQ x R.
struct LagrangianPoint {
  Vec q;
  Vec v;
  double z = 0.0;

  int n() const { return static_cast<int>(q.size()); }
  /// (q, v, z) stacked, the same slot layout as a PhasePoint.
  Vec stacked() const;
  static LagrangianPoint from_stacked(int n, const Vec& s);
  double inf_norm() const;
};

/// L(q, v, z) = 1/2 g_q(v, v) + V(q, z) with constraint one-forms Phi^a on Q.
/// Expressions are written over q1..qn and z.
class MechanicalSystem {
 public:
  using ExprMatrix = std::vector<std::vector<expr::Expr>>;

  MechanicalSystem(int n, ExprMatrix metric, expr::Expr potential, ExprMatrix forms);

  int n() const { return n_; }
  int m() const { return static_cast<int>(forms_.size()); }
  const ExprMatrix& metric_exprs() const { return metric_; }
  const expr::Expr& potential_expr() const { return potential_; }
  const ExprMatrix& form_exprs() const { return forms_; }

  /// g(q); throws ConfigError if it is not symmetric.
  Mat metric(const Vec& q) const;
  /// d g / d q^k.
  Mat metric_derivative(int k, const Vec& q) const;
  double potential(const Vec& q, double z) const;
  Vec potential_gradient_q(const Vec& q, double z) const;
  double potential_dz(const Vec& q, double z) const;
  /// m x n, rows Phi^a.
  Mat forms(const Vec& q) const;
  Mat form_derivative(int k, const Vec& q) const;

  double lagrangian(const LagrangianPoint& x) const;
  /// max_a |Phi^a(v)|.
  double distribution_violation(const LagrangianPoint& x) const;
  double tol_in_D(const LagrangianPoint& x) const { return 1e-8 * (1.0 + x.inf_norm()); }
  void require_in_D(const LagrangianPoint& x) const;

  /// Symbolic inverse metric via cofactors.
  ExprMatrix inverse_metric_exprs() const;

 private:
  double eval(const expr::Expr& e, const Vec& q, double z) const;

  int n_;
  ExprMatrix metric_;
  expr::Expr potential_;
  ExprMatrix forms_;
  std::vector<ExprMatrix> metric_partials_;  // [k][i][j]
  std::vector<ExprMatrix> form_partials_;    // [k][a][i]
  std::vector<expr::Expr> potential_partials_;  // q1..qn, z
};

/// Velocity Hessian W = g(q) and its Cholesky inverse.
Mat hessian_W(const MechanicalSystem& sys, const LagrangianPoint& x);
Mat hessian_W_inverse(const MechanicalSystem& sys, const LagrangianPoint& x);

struct EnergyForm {
  double energy = 0.0;
  /// eta_L = dz - (dL/dv_i) dq^i in the (dq, dv, dz) layout.
  OneFormValue eta_L;
};
EnergyForm energy_and_form(const MechanicalSystem& sys, const LagrangianPoint& x);

PhasePoint legendre(const MechanicalSystem& sys, const LagrangianPoint& x);
LagrangianPoint legendre_inverse(const MechanicalSystem& sys, const PhasePoint& x);
/// Tangent map of the Legendre transform applied to w = (qdot, vdot, zdot).
VectorValue legendre_tangent(const MechanicalSystem& sys, const LagrangianPoint& x, const Vec& w);

/// Metric projection gamma: T*Q x R -> M x R, p -> p - Phi^T K^{-1} phi with K = Phi g^{-1} Phi^T.
class MetricSplitting {
 public:
  explicit MetricSplitting(MechanicalSystem sys) : sys_(std::move(sys)) {}

  const MechanicalSystem& mechanical() const { return sys_; }
  PhasePoint gamma(const PhasePoint& x) const;
  /// Exact on M; central differences of gamma away from it.
  Mat gamma_jacobian(const PhasePoint& x) const;

 private:
  MechanicalSystem sys_;
};

/// H = 1/2 g^{ij} p_i p_j - V, phi^a = p_i g^{ij} Phi^a_j, force forms Phi^a_i dq^i.
ConstrainedSystem induced_hamiltonian_system(const MechanicalSystem& sys);

struct HerglotzSolve {
  Vec qdot;
  Vec vdot;
  double zdot = 0.0;
  Vec lambdas;
};
/// Constrained Herglotz equations: g vdot = F + Phi^T lambda, qdot = v, zdot = L.
HerglotzSolve herglotz_solve(const MechanicalSystem& sys, const LagrangianPoint& x,
                             Membership mode = Membership::Check);
/// (qdot, vdot, zdot) stacked.
Vec lagrangian_constrained_vector(const MechanicalSystem& sys, const LagrangianPoint& x,
                                  Membership mode = Membership::Check);

/// |T(FL) Gamma(x) - X_{H,M}(FL(x))|inf.
double correspondence_residual(const MechanicalSystem& sys, const ConstrainedSystem& ham, const LagrangianPoint& x);

}  // namespace contactnh
