#pragma once

#include <memory>
#include <vector>

#include "contactnh/contact.hpp"
#include "contactnh/fields.hpp"

namespace contactnh {

/// One-form Phi_i dq^i + Psi_i dp_i + mu dz with expression components.
struct ForceForm {
  std::vector<expr::Expr> dq;
  std::vector<expr::Expr> dp;
  expr::Expr dz;
};

class MetricSplitting;

/// Check: points must lie on M (OffConstraint otherwise).
/// Extend: evaluate the same formulas in a neighborhood of M.
enum class Membership { Check, Extend };

/// Hamiltonian H, constraints phi^a defining M, and one-forms Psi^a spanning ann F.
class ConstrainedSystem {
 public:
  ConstrainedSystem(int n, expr::Expr H, std::vector<expr::Expr> constraints, std::vector<ForceForm> forces);

  int n() const { return n_; }
  int dim() const { return 2 * n_ + 1; }
  int m() const { return static_cast<int>(constraints_.size()); }
  int k() const { return static_cast<int>(forces_.size()); }

  const ScalarField& H() const { return H_; }
  const std::vector<ScalarField>& constraints() const { return constraints_; }
  const std::vector<ForceForm>& forces() const { return forces_; }
  const VectorField& hamiltonian_field() const { return *xh_; }

  /// Present when the system is induced from a mechanical Lagrangian.
  const std::shared_ptr<const MetricSplitting>& splitting() const { return splitting_; }
  ConstrainedSystem with_splitting(std::shared_ptr<const MetricSplitting> s) const;
  ConstrainedSystem with_extra_force(ForceForm f) const;

  Vec constraint_values(const PhasePoint& x) const;
  /// m x (2n+1), rows d phi^a.
  Mat constraint_jacobian(const PhasePoint& x) const;
  OneFormValue force_form(int a, const PhasePoint& x) const;
  /// k x (2n+1), rows Psi^a.
  Mat force_matrix(const PhasePoint& x) const;

  double scale(const PhasePoint& x) const { return tolerance_scale(H_(x), x); }
  double tol_on_M(const PhasePoint& x) const { return 1e-8 * (1.0 + x.inf_norm()); }
  double violation(const PhasePoint& x) const;
  void require_on_M(const PhasePoint& x) const;

 private:
  int n_;
  ScalarField H_;
  std::vector<ScalarField> constraints_;
  std::vector<ForceForm> forces_;
  std::shared_ptr<const VectorField> xh_;
  std::shared_ptr<const MetricSplitting> splitting_;
};

/// X_a = sharp(Psi^a).
std::vector<VectorValue> force_vector_fields(const ConstrainedSystem& sys, const PhasePoint& x);
/// Columns X_a.
Mat force_field_matrix(const ConstrainedSystem& sys, const PhasePoint& x);

/// C_ab = X_b(phi^a), m x k.
Mat c_matrix(const ConstrainedSystem& sys, const PhasePoint& x, Membership mode = Membership::Check);

struct UniquenessReport {
  bool unique = false;
  int rank = 0;
};
/// Unique iff rank C = k, i.e. no nonzero combination of the X_a is tangent to M.
UniquenessReport uniqueness_check(const ConstrainedSystem& sys, const PhasePoint& x);

struct ExistenceReport {
  bool exists = false;
  double residual = 0.0;
  double tolerance = 0.0;
};
/// Pairs dH - (H + R(H)) eta against a basis of sharp(ann TM) intersected with F.
ExistenceReport existence_check(const ConstrainedSystem& sys, const PhasePoint& x);

struct MultiplierSolve {
  Mat C;
  Vec lambdas;
  int rank = 0;
  Mat forces;  // columns X_a
};
/// Solves C lambda = Y(phi). Least squares with a residual check when k < m.
MultiplierSolve solve_multipliers(const ConstrainedSystem& sys, const PhasePoint& x, const VectorValue& Y,
                                  Membership mode = Membership::Check);

VectorValue projector_Q(const ConstrainedSystem& sys, const PhasePoint& x, const VectorValue& Y,
                        Membership mode = Membership::Check);
VectorValue projector_P(const ConstrainedSystem& sys, const PhasePoint& x, const VectorValue& Y,
                        Membership mode = Membership::Check);
/// Matrix of the calligraphic projector P at x.
Mat projector_matrix(const ConstrainedSystem& sys, const PhasePoint& x, Membership mode = Membership::Check);

/// Projector onto TM cap F along sharp(ann(TM cap F)); needs the structural conditions.
VectorValue roman_p_projector(const ConstrainedSystem& sys, const PhasePoint& x, const VectorValue& Y,
                              Membership mode = Membership::Check);
Mat roman_p_matrix(const ConstrainedSystem& sys, const PhasePoint& x, Membership mode = Membership::Check);

/// X_{H,M}(x) = X_H - Q(X_H).
VectorValue constrained_vector(const ConstrainedSystem& sys, const PhasePoint& x,
                               Membership mode = Membership::Check);
VectorFieldPtr constrained_vf(const ConstrainedSystem& sys, Membership mode = Membership::Check);
/// The reaction part Q(X_H) as a field.
VectorFieldPtr reaction_vf(const ConstrainedSystem& sys, Membership mode = Membership::Extend);

struct StructuralReport {
  bool reeb_in_F = false;
  bool F_self_orthogonal = false;
  bool mechanical = false;
  double reeb_residual = 0.0;
  double orthogonality_residual = 0.0;
  double mechanical_residual = 0.0;
  double tolerance = 0.0;
  bool all() const { return reeb_in_F && F_self_orthogonal && mechanical; }
};
StructuralReport structural_checks(const ConstrainedSystem& sys, const PhasePoint& x);

/// max |X(phi^a)|.
double tangency_residual(const ConstrainedSystem& sys, const PhasePoint& x, const VectorValue& X);
/// Orthonormal basis (columns) of F = ker Psi at x.
Mat f_basis(const ConstrainedSystem& sys, const PhasePoint& x);
/// max |(flat X - dH + (H + R(H)) eta)(b)| over the F basis.
double force_membership_residual(const ConstrainedSystem& sys, const PhasePoint& x, const VectorValue& X);

/// The two readings of the constrained equation for a candidate field X.
/// contact_residual: flat X - dH + (H + R(H)) eta against F.
/// lie_residual: max of |eta(X) + H| and (L_X eta + R(H) eta) against F.
struct EquivalenceReport {
  double contact_residual = 0.0;
  double lie_residual = 0.0;
  double tolerance = 0.0;
  bool contact_holds() const { return contact_residual <= tolerance; }
  bool lie_holds() const { return lie_residual <= tolerance; }
};
EquivalenceReport equivalence_check(const ConstrainedSystem& sys, const PhasePoint& x, const VectorField& X);

struct IdentityReport {
  double energy_residual = 0.0;      // dH(X_{H,M}) + R(H) H + dH(Q X_H)
  double eta_residual = 0.0;         // L_{X_{H,M}} eta + R(H) eta + L_{Q X_H} eta
  double divergence_residual = 0.0;  // div X_H + (n+1) R(H)
  double tolerance = 0.0;
};
IdentityReport identity_report(const ConstrainedSystem& sys, const PhasePoint& x);

/// Newton projection onto {phi = 0} along span{X_a}: solves phi(x + sum c_a X_a(x)) = 0.
/// Returns false when it does not converge to `tol` within `max_iter` steps.
bool project_onto_M(const ConstrainedSystem& sys, PhasePoint& x, double tol = 1e-12, int max_iter = 10);

}  // namespace contactnh
