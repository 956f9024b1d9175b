#include "contactnh/constrained.hpp"

#include "contactnh/calculus.hpp"
#include "contactnh/linalg.hpp"

namespace contactnh {

namespace {

void check_form(const ForceForm& f, int n) {
  if (static_cast<int>(f.dq.size()) != n || static_cast<int>(f.dp.size()) != n) {
    throw ConfigError("force form needs n dq and n dp components");
  }
  auto check = [n](const expr::Expr& e) {
    if (e.max_index() > n) throw ConfigError("force component uses an index above n");
  };
  for (const auto& e : f.dq) check(e);
  for (const auto& e : f.dp) check(e);
  check(f.dz);
}

Mat sharp_columns(const PhasePoint& x, const Mat& rows) {
  Mat out(x.dim(), rows.rows());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    out.col(r) = contact::sharp_at(x, OneFormValue(x.n(), rows.row(r).transpose())).data();
  }
  return out;
}

// dH - (H + R(H)) eta: flat(X) must match it modulo ann F.
OneFormValue target_form(const ConstrainedSystem& sys, const PhasePoint& x) {
  const OneFormValue dH = sys.H().gradient(x);
  return dH - (sys.H()(x) + dH.z()) * contact::eta(x);
}

double max_abs(const Vec& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

}  // namespace

ConstrainedSystem::ConstrainedSystem(int n, expr::Expr H, std::vector<expr::Expr> constraints,
                                     std::vector<ForceForm> forces)
    : n_(n), H_(std::move(H), n), forces_(std::move(forces)) {
  if (n < 1) throw ConfigError("n must be >= 1");
  if (static_cast<int>(constraints.size()) > 2 * n) throw ConfigError("more than 2n constraints");
  if (static_cast<int>(forces_.size()) > 2 * n + 1) throw ConfigError("more than 2n+1 force forms");
  for (auto& c : constraints) constraints_.emplace_back(std::move(c), n);
  for (const auto& f : forces_) check_form(f, n);
  xh_ = contact::hamiltonian_vf(H_);
}

ConstrainedSystem ConstrainedSystem::with_splitting(std::shared_ptr<const MetricSplitting> s) const {
  ConstrainedSystem out = *this;
  out.splitting_ = std::move(s);
  return out;
}

ConstrainedSystem ConstrainedSystem::with_extra_force(ForceForm f) const {
  check_form(f, n_);
  ConstrainedSystem out = *this;
  out.forces_.push_back(std::move(f));
  out.splitting_.reset();
  return out;
}

Vec ConstrainedSystem::constraint_values(const PhasePoint& x) const {
  Vec v(m());
  for (int a = 0; a < m(); ++a) v(a) = constraints_[static_cast<std::size_t>(a)](x);
  return v;
}

Mat ConstrainedSystem::constraint_jacobian(const PhasePoint& x) const {
  Mat D(m(), dim());
  for (int a = 0; a < m(); ++a) D.row(a) = constraints_[static_cast<std::size_t>(a)].gradient(x).data().transpose();
  return D;
}

OneFormValue ConstrainedSystem::force_form(int a, const PhasePoint& x) const {
  const ForceForm& f = forces_[static_cast<std::size_t>(a)];
  const auto b = binding(x);
  OneFormValue out(n_);
  for (int i = 0; i < n_; ++i) {
    out.q(i) = f.dq[static_cast<std::size_t>(i)].eval(b);
    out.p(i) = f.dp[static_cast<std::size_t>(i)].eval(b);
  }
  out.z() = f.dz.eval(b);
  return out;
}

Mat ConstrainedSystem::force_matrix(const PhasePoint& x) const {
  Mat F(k(), dim());
  for (int a = 0; a < k(); ++a) F.row(a) = force_form(a, x).data().transpose();
  return F;
}

double ConstrainedSystem::violation(const PhasePoint& x) const { return max_abs(constraint_values(x)); }

void ConstrainedSystem::require_on_M(const PhasePoint& x) const {
  const double v = violation(x);
  const double tol = tol_on_M(x);
  if (!(v <= tol)) throw OffConstraint(v, tol);
}

std::vector<VectorValue> force_vector_fields(const ConstrainedSystem& sys, const PhasePoint& x) {
  std::vector<VectorValue> out;
  for (int a = 0; a < sys.k(); ++a) out.push_back(contact::sharp_at(x, sys.force_form(a, x)));
  return out;
}

Mat force_field_matrix(const ConstrainedSystem& sys, const PhasePoint& x) {
  return sharp_columns(x, sys.force_matrix(x));
}

Mat c_matrix(const ConstrainedSystem& sys, const PhasePoint& x, Membership mode) {
  if (mode == Membership::Check) sys.require_on_M(x);
  return sys.constraint_jacobian(x) * force_field_matrix(sys, x);
}

UniquenessReport uniqueness_check(const ConstrainedSystem& sys, const PhasePoint& x) {
  const Mat C = c_matrix(sys, x);
  UniquenessReport r;
  r.rank = linalg::numeric_rank(C);
  r.unique = r.rank == sys.k();
  return r;
}

ExistenceReport existence_check(const ConstrainedSystem& sys, const PhasePoint& x) {
  sys.require_on_M(x);
  ExistenceReport r;
  r.tolerance = 1e-8 * sys.scale(x);
  if (sys.m() == 0) {
    r.exists = true;
    return r;
  }
  // sharp(ann TM) is spanned by Y_c = sharp(d phi^c); intersect with F = ker Psi.
  const Mat Y = sharp_columns(x, sys.constraint_jacobian(x));
  const Mat G = sys.force_matrix(x) * Y;
  const Mat basis = Y * linalg::null_space(G);
  const Vec beta = target_form(sys, x).data();
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    const double norm = basis.col(j).lpNorm<Eigen::Infinity>();
    if (norm == 0.0) continue;
    r.residual = std::max(r.residual, std::abs(beta.dot(basis.col(j))) / norm);
  }
  r.exists = r.residual <= r.tolerance;
  return r;
}

namespace {

// lambda with C lambda = rhs; throws SingularC on rank deficiency.
linalg::LeastSquares multipliers_for(const ConstrainedSystem& sys, const PhasePoint& x, const Mat& C,
                                     const Vec& rhs, Membership mode) {
  const int k = sys.k();
  if (k == 0) return {Vec::Zero(0), 0, max_abs(rhs)};
  auto ls = linalg::solve_least_squares(C, rhs);
  if (ls.rank < k) {
    throw SingularC("multiplier matrix C has rank " + std::to_string(ls.rank) + " < k = " + std::to_string(k));
  }
  if (mode == Membership::Check && k < sys.m()) {
    const double tol = 1e-8 * sys.scale(x);
    if (ls.residual > tol) {
      throw NotInSplit("vector is not in the reaction/tangent split: residual " + std::to_string(ls.residual));
    }
  }
  return ls;
}

}  // namespace

MultiplierSolve solve_multipliers(const ConstrainedSystem& sys, const PhasePoint& x, const VectorValue& Y,
                                  Membership mode) {
  if (mode == Membership::Check) sys.require_on_M(x);
  MultiplierSolve out;
  const Mat D = sys.constraint_jacobian(x);
  out.forces = force_field_matrix(sys, x);
  out.C = D * out.forces;
  auto ls = multipliers_for(sys, x, out.C, D * Y.data(), mode);
  out.lambdas = ls.x;
  out.rank = ls.rank;
  return out;
}

VectorValue projector_Q(const ConstrainedSystem& sys, const PhasePoint& x, const VectorValue& Y, Membership mode) {
  const MultiplierSolve s = solve_multipliers(sys, x, Y, mode);
  return {x.n(), s.forces * s.lambdas};
}

VectorValue projector_P(const ConstrainedSystem& sys, const PhasePoint& x, const VectorValue& Y, Membership mode) {
  return Y - projector_Q(sys, x, Y, mode);
}

Mat projector_matrix(const ConstrainedSystem& sys, const PhasePoint& x, Membership mode) {
  if (mode == Membership::Check) sys.require_on_M(x);
  const int dim = x.dim();
  const Mat D = sys.constraint_jacobian(x);
  const Mat X = force_field_matrix(sys, x);
  const Mat C = D * X;
  Mat P = Mat::Identity(dim, dim);
  if (sys.k() == 0) return P;
  // Columns outside the split only occur when k < m; the matrix is exact on it.
  for (int j = 0; j < dim; ++j) {
    const auto ls = multipliers_for(sys, x, C, D.col(j), Membership::Extend);
    P.col(j) -= X * ls.x;
  }
  return P;
}

namespace {

struct RomanData {
  Mat D, X, C, Y, Psi, G;
};

RomanData roman_data(const ConstrainedSystem& sys, const PhasePoint& x, Membership mode) {
  if (mode == Membership::Check) {
    sys.require_on_M(x);
    const StructuralReport s = structural_checks(sys, x);
    if (!s.all()) {
      throw PreconditionFailed("roman-P projector needs R in F, sharp(ann F) inside F and the mechanical condition");
    }
  }
  RomanData d;
  d.D = sys.constraint_jacobian(x);
  d.X = force_field_matrix(sys, x);
  d.C = d.D * d.X;
  d.Y = sharp_columns(x, d.D);
  d.Psi = sys.force_matrix(x);
  d.G = d.Psi * d.Y;
  return d;
}

Vec roman_q(const ConstrainedSystem& sys, const PhasePoint& x, const RomanData& d, const Vec& y, Membership mode) {
  Vec nu = Vec::Zero(sys.m());
  if (sys.m() > 0) {
    const auto ls = linalg::solve_least_squares(d.G, d.Psi * y);
    if (ls.rank < sys.m()) {
      throw SingularG("matrix G has rank " + std::to_string(ls.rank) + " < m = " + std::to_string(sys.m()));
    }
    if (mode == Membership::Check && ls.residual > 1e-8 * sys.scale(x)) {
      throw NotInSplit("vector is not in the roman-P split: residual " + std::to_string(ls.residual));
    }
    nu = ls.x;
  }
  const Vec rhs = d.D * y - d.D * (d.Y * nu);
  const auto lam = multipliers_for(sys, x, d.C, rhs, mode);
  return d.Y * nu + d.X * lam.x;
}

}  // namespace

VectorValue roman_p_projector(const ConstrainedSystem& sys, const PhasePoint& x, const VectorValue& Y,
                              Membership mode) {
  const RomanData d = roman_data(sys, x, mode);
  return {x.n(), Y.data() - roman_q(sys, x, d, Y.data(), mode)};
}

Mat roman_p_matrix(const ConstrainedSystem& sys, const PhasePoint& x, Membership mode) {
  const RomanData d = roman_data(sys, x, mode);
  const int dim = x.dim();
  Mat P = Mat::Identity(dim, dim);
  for (int j = 0; j < dim; ++j) P.col(j) -= roman_q(sys, x, d, P.col(j), Membership::Extend);
  return P;
}

VectorValue constrained_vector(const ConstrainedSystem& sys, const PhasePoint& x, Membership mode) {
  return projector_P(sys, x, sys.hamiltonian_field().value(x), mode);
}

VectorFieldPtr constrained_vf(const ConstrainedSystem& sys, Membership mode) {
  return std::make_shared<FunctionVectorField>(
      sys.n(), [sys, mode](const PhasePoint& x) { return constrained_vector(sys, x, mode); });
}

VectorFieldPtr reaction_vf(const ConstrainedSystem& sys, Membership mode) {
  return std::make_shared<FunctionVectorField>(sys.n(), [sys, mode](const PhasePoint& x) {
    return projector_Q(sys, x, sys.hamiltonian_field().value(x), mode);
  });
}

StructuralReport structural_checks(const ConstrainedSystem& sys, const PhasePoint& x) {
  StructuralReport r;
  r.tolerance = 1e-9 * sys.scale(x);
  const Mat Psi = sys.force_matrix(x);
  const Mat X = sharp_columns(x, Psi);
  if (sys.k() > 0) {
    r.reeb_residual = Psi.col(x.dim() - 1).lpNorm<Eigen::Infinity>();
    r.orthogonality_residual = (Psi * X).lpNorm<Eigen::Infinity>();
    r.mechanical_residual = max_abs(X.transpose() * sys.H().gradient(x).data());
  }
  r.reeb_in_F = r.reeb_residual <= r.tolerance;
  r.F_self_orthogonal = r.orthogonality_residual <= r.tolerance;
  r.mechanical = r.mechanical_residual <= r.tolerance;
  return r;
}

double tangency_residual(const ConstrainedSystem& sys, const PhasePoint& x, const VectorValue& X) {
  return max_abs(sys.constraint_jacobian(x) * X.data());
}

Mat f_basis(const ConstrainedSystem& sys, const PhasePoint& x) { return linalg::null_space(sys.force_matrix(x)); }

double force_membership_residual(const ConstrainedSystem& sys, const PhasePoint& x, const VectorValue& X) {
  const OneFormValue beta = contact::flat_at(x, X) - target_form(sys, x);
  return max_abs(f_basis(sys, x).transpose() * beta.data());
}

EquivalenceReport equivalence_check(const ConstrainedSystem& sys, const PhasePoint& x, const VectorField& X) {
  EquivalenceReport r;
  r.tolerance = 1e-7 * sys.scale(x);
  const VectorValue v = X.value(x);
  r.contact_residual = force_membership_residual(sys, x, v);
  const double h = sys.H()(x);
  const double rh = sys.H().gradient(x).z();
  const OneFormValue lie = lie_eta(X, x) + rh * contact::eta(x);
  r.lie_residual = std::max(std::abs(contact::eta_at(x, v) + h), max_abs(f_basis(sys, x).transpose() * lie.data()));
  return r;
}

IdentityReport identity_report(const ConstrainedSystem& sys, const PhasePoint& x) {
  IdentityReport r;
  r.tolerance = 1e-7 * sys.scale(x);
  const double h = sys.H()(x);
  const OneFormValue dH = sys.H().gradient(x);
  const double rh = dH.z();
  const VectorValue xhm = constrained_vector(sys, x);
  const VectorValue qxh = projector_Q(sys, x, sys.hamiltonian_field().value(x));
  r.energy_residual = std::abs(pair(dH, xhm) + rh * h + pair(dH, qxh));

  const OneFormValue lhs = lie_eta(*constrained_vf(sys, Membership::Extend), x);
  const OneFormValue qlie = lie_eta(*reaction_vf(sys, Membership::Extend), x);
  r.eta_residual = (lhs + rh * contact::eta(x) + qlie).inf_norm();

  r.divergence_residual = std::abs(divergence(sys.hamiltonian_field(), x) + (sys.n() + 1) * rh);
  return r;
}

bool project_onto_M(const ConstrainedSystem& sys, PhasePoint& x, double tol, int max_iter) {
  if (sys.m() == 0) return true;
  const Mat X = force_field_matrix(sys, x);
  const PhasePoint base = x;
  Vec c = Vec::Zero(sys.k());
  for (int it = 0; it <= max_iter; ++it) {
    PhasePoint y(base.n(), base.data() + X * c);
    const Vec r = sys.constraint_values(y);
    if (max_abs(r) <= tol * (1.0 + y.inf_norm())) {
      x = y;
      return true;
    }
    if (it == max_iter || sys.k() == 0) break;
    const Mat J = sys.constraint_jacobian(y) * X;
    const auto step = linalg::solve_least_squares(J, -r);
    if (step.rank == 0) break;
    c += step.x;
  }
  return false;
}

}  // namespace contactnh
