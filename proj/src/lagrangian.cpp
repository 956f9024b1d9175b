#include "contactnh/lagrangian.hpp"

#include "contactnh/linalg.hpp"

namespace contactnh {

using expr::Expr;

Vec LagrangianPoint::stacked() const {
  Vec s(2 * n() + 1);
  s << q, v, z;
  return s;
}

LagrangianPoint LagrangianPoint::from_stacked(int n, const Vec& s) {
  if (s.size() != 2 * n + 1) throw ConfigError("expected " + std::to_string(2 * n + 1) + " components");
  return {s.head(n), s.segment(n, n), s(2 * n)};
}

double LagrangianPoint::inf_norm() const { return stacked().lpNorm<Eigen::Infinity>(); }

namespace {

void require_configuration_only(const Expr& e, int n, const char* what) {
  if (e.depends_on(expr::VarKind::P)) throw ConfigError(std::string(what) + " may only use q1..qn and z");
  if (e.max_index() > n) throw ConfigError(std::string(what) + " uses an index above n");
}

Expr determinant(const std::vector<std::vector<Expr>>& a) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0];
  if (n == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
  Expr det;
  for (std::size_t j = 0; j < n; ++j) {
    if (a[0][j].is_zero()) continue;
    std::vector<std::vector<Expr>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Expr> row;
      for (std::size_t c = 0; c < n; ++c) {
        if (c != j) row.push_back(a[r][c]);
      }
      minor.push_back(std::move(row));
    }
    const Expr term = a[0][j] * determinant(minor);
    det = (j % 2 == 0) ? det + term : det - term;
  }
  return det;
}

Eigen::LLT<Mat> cholesky(const Mat& g) {
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("metric is not positive definite");
  return llt;
}

}  // namespace

MechanicalSystem::MechanicalSystem(int n, ExprMatrix metric, Expr potential, ExprMatrix forms)
    : n_(n), metric_(std::move(metric)), potential_(std::move(potential)), forms_(std::move(forms)) {
  if (n < 1) throw ConfigError("n must be >= 1");
  if (static_cast<int>(metric_.size()) != n) throw ConfigError("metric must have n rows");
  for (const auto& row : metric_) {
    if (static_cast<int>(row.size()) != n) throw ConfigError("metric must have n columns");
    for (const auto& e : row) require_configuration_only(e, n, "metric");
  }
  require_configuration_only(potential_, n, "potential");
  if (static_cast<int>(forms_.size()) > n) throw ConfigError("more constraint forms than n");
  for (const auto& row : forms_) {
    if (static_cast<int>(row.size()) != n) throw ConfigError("constraint form must have n components");
    for (const auto& e : row) require_configuration_only(e, n, "constraint form");
  }
  for (int k = 0; k < n; ++k) {
    const expr::Variable qk{expr::VarKind::Q, k};
    ExprMatrix dg(metric_.size()), dphi(forms_.size());
    for (std::size_t i = 0; i < metric_.size(); ++i) {
      for (const auto& e : metric_[i]) dg[i].push_back(expr::diff(e, qk));
    }
    for (std::size_t a = 0; a < forms_.size(); ++a) {
      for (const auto& e : forms_[a]) dphi[a].push_back(expr::diff(e, qk));
    }
    metric_partials_.push_back(std::move(dg));
    form_partials_.push_back(std::move(dphi));
    potential_partials_.push_back(expr::diff(potential_, qk));
  }
  potential_partials_.push_back(expr::diff(potential_, expr::Variable{expr::VarKind::Z, 0}));
}

double MechanicalSystem::eval(const Expr& e, const Vec& q, double z) const {
  Vec values = Vec::Zero(2 * n_ + 1);
  values.head(n_) = q;
  values(2 * n_) = z;
  return e.eval({n_, std::span<const double>(values.data(), static_cast<std::size_t>(values.size()))});
}

namespace {

template <class F>
Mat fill(int rows, int cols, F&& f) {
  Mat out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) out(i, j) = f(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  return out;
}

}  // namespace

Mat MechanicalSystem::metric(const Vec& q) const {
  Mat g = fill(n_, n_, [&](std::size_t i, std::size_t j) { return eval(metric_[i][j], q, 0.0); });
  if ((g - g.transpose()).lpNorm<Eigen::Infinity>() > 1e-12 * (1.0 + g.lpNorm<Eigen::Infinity>())) {
    throw ConfigError("metric is not symmetric");
  }
  return g;
}

Mat MechanicalSystem::metric_derivative(int k, const Vec& q) const {
  const auto& d = metric_partials_[static_cast<std::size_t>(k)];
  return fill(n_, n_, [&](std::size_t i, std::size_t j) { return eval(d[i][j], q, 0.0); });
}

double MechanicalSystem::potential(const Vec& q, double z) const { return eval(potential_, q, z); }

Vec MechanicalSystem::potential_gradient_q(const Vec& q, double z) const {
  Vec g(n_);
  for (int k = 0; k < n_; ++k) g(k) = eval(potential_partials_[static_cast<std::size_t>(k)], q, z);
  return g;
}

double MechanicalSystem::potential_dz(const Vec& q, double z) const {
  return eval(potential_partials_.back(), q, z);
}

Mat MechanicalSystem::forms(const Vec& q) const {
  return fill(m(), n_, [&](std::size_t a, std::size_t i) { return eval(forms_[a][i], q, 0.0); });
}

Mat MechanicalSystem::form_derivative(int k, const Vec& q) const {
  const auto& d = form_partials_[static_cast<std::size_t>(k)];
  return fill(m(), n_, [&](std::size_t a, std::size_t i) { return eval(d[a][i], q, 0.0); });
}

double MechanicalSystem::lagrangian(const LagrangianPoint& x) const {
  return 0.5 * x.v.dot(metric(x.q) * x.v) + potential(x.q, x.z);
}

double MechanicalSystem::distribution_violation(const LagrangianPoint& x) const {
  if (m() == 0) return 0.0;
  return (forms(x.q) * x.v).lpNorm<Eigen::Infinity>();
}

void MechanicalSystem::require_in_D(const LagrangianPoint& x) const {
  const double v = distribution_violation(x);
  const double tol = tol_in_D(x);
  if (!(v <= tol)) throw OffConstraint(v, tol);
}

MechanicalSystem::ExprMatrix MechanicalSystem::inverse_metric_exprs() const {
  const std::size_t n = metric_.size();
  if (n == 1) return {{Expr::constant(1.0) / metric_[0][0]}};
  const Expr det = determinant(metric_);
  ExprMatrix inv(n, std::vector<Expr>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      // inverse(i, j) = cofactor(j, i) / det
      ExprMatrix minor;
      for (std::size_t r = 0; r < n; ++r) {
        if (r == j) continue;
        std::vector<Expr> row;
        for (std::size_t c = 0; c < n; ++c) {
          if (c != i) row.push_back(metric_[r][c]);
        }
        minor.push_back(std::move(row));
      }
      const Expr cof = determinant(minor);
      inv[i][j] = ((i + j) % 2 == 0 ? cof : -cof) / det;
    }
  }
  return inv;
}

Mat hessian_W(const MechanicalSystem& sys, const LagrangianPoint& x) {
  Mat g = sys.metric(x.q);
  cholesky(g);
  return g;
}

Mat hessian_W_inverse(const MechanicalSystem& sys, const LagrangianPoint& x) {
  const Mat g = sys.metric(x.q);
  return cholesky(g).solve(Mat::Identity(g.rows(), g.cols()));
}

EnergyForm energy_and_form(const MechanicalSystem& sys, const LagrangianPoint& x) {
  const Mat g = sys.metric(x.q);
  const Vec gv = g * x.v;
  EnergyForm out;
  out.energy = 0.5 * x.v.dot(gv) - sys.potential(x.q, x.z);
  out.eta_L = OneFormValue(x.n());
  out.eta_L.qs() = -gv;
  out.eta_L.z() = 1.0;
  return out;
}

PhasePoint legendre(const MechanicalSystem& sys, const LagrangianPoint& x) {
  PhasePoint p(x.n());
  p.qs() = x.q;
  p.ps() = hessian_W(sys, x) * x.v;
  p.z() = x.z;
  return p;
}

LagrangianPoint legendre_inverse(const MechanicalSystem& sys, const PhasePoint& x) {
  const Vec q = x.qs();
  const Mat g = sys.metric(q);
  return {q, cholesky(g).solve(Vec(x.ps())), x.z()};
}

VectorValue legendre_tangent(const MechanicalSystem& sys, const LagrangianPoint& x, const Vec& w) {
  const int n = x.n();
  VectorValue out(n);
  out.qs() = w.head(n);
  Vec pdot = sys.metric(x.q) * w.segment(n, n);
  for (int k = 0; k < n; ++k) pdot += w(k) * (sys.metric_derivative(k, x.q) * x.v);
  out.ps() = pdot;
  out.z() = w(2 * n);
  return out;
}

PhasePoint MetricSplitting::gamma(const PhasePoint& x) const {
  if (sys_.m() == 0) return x;
  const Vec q = x.qs();
  const auto llt = cholesky(sys_.metric(q));
  const Mat Phi = sys_.forms(q);
  const Mat giPhiT = llt.solve(Mat(Phi.transpose()));
  const Mat K = Phi * giPhiT;
  const Vec phi = Phi * llt.solve(Vec(x.ps()));
  PhasePoint out = x;
  out.ps() -= Phi.transpose() * K.ldlt().solve(phi);
  return out;
}

Mat MetricSplitting::gamma_jacobian(const PhasePoint& x) const {
  const int n = x.n();
  const int dim = x.dim();
  Mat J = Mat::Identity(dim, dim);
  if (sys_.m() == 0) return J;
  const Vec q = x.qs();
  const Vec p = x.ps();
  const Mat g = sys_.metric(q);
  const auto llt = cholesky(g);
  const Mat Phi = sys_.forms(q);
  const Mat gi = llt.solve(Mat::Identity(n, n));
  const Vec gip = gi * p;
  const Vec phi = Phi * gip;
  const double tol = 1e-8 * (1.0 + x.inf_norm());
  if (phi.lpNorm<Eigen::Infinity>() > tol) {
    const double h = fd_step(x);
    for (int s = 0; s < dim; ++s) {
      PhasePoint plus = x, minus = x;
      plus[s] += h;
      minus[s] -= h;
      J.col(s) = (gamma(plus).data() - gamma(minus).data()) / (2.0 * h);
    }
    return J;
  }
  // On M the K^{-1} phi factor vanishes, leaving Phi^T K^{-1} D phi.
  Mat Dphi = Mat::Zero(sys_.m(), dim);
  for (int k = 0; k < n; ++k) {
    Dphi.col(k) = sys_.form_derivative(k, q) * gip - Phi * (gi * (sys_.metric_derivative(k, q) * gip));
  }
  Dphi.middleCols(n, n) = Phi * gi;
  const Mat K = Phi * gi * Phi.transpose();
  J.middleRows(n, n) -= Phi.transpose() * K.ldlt().solve(Dphi);
  return J;
}

ConstrainedSystem induced_hamiltonian_system(const MechanicalSystem& sys) {
  const int n = sys.n();
  const auto gi = sys.inverse_metric_exprs();
  std::vector<Expr> p;
  for (int i = 0; i < n; ++i) p.push_back(Expr::variable({expr::VarKind::P, i}));

  // gip_i = g^{ij} p_j
  std::vector<Expr> gip(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < gip.size(); ++i) {
    for (std::size_t j = 0; j < gip.size(); ++j) gip[i] = gip[i] + gi[i][j] * p[j];
  }
  Expr kinetic;
  for (std::size_t i = 0; i < gip.size(); ++i) kinetic = kinetic + p[i] * gip[i];
  const Expr H = Expr::constant(0.5) * kinetic - sys.potential_expr();

  std::vector<Expr> constraints;
  std::vector<ForceForm> forces;
  for (const auto& form : sys.form_exprs()) {
    Expr phi;
    for (std::size_t j = 0; j < gip.size(); ++j) phi = phi + gip[j] * form[j];
    constraints.push_back(phi);
    forces.push_back({form, std::vector<Expr>(gip.size()), Expr()});
  }
  ConstrainedSystem out(n, H, std::move(constraints), std::move(forces));
  return out.with_splitting(std::make_shared<const MetricSplitting>(sys));
}

HerglotzSolve herglotz_solve(const MechanicalSystem& sys, const LagrangianPoint& x, Membership mode) {
  if (mode == Membership::Check) sys.require_in_D(x);
  const int n = x.n();
  const Mat g = sys.metric(x.q);
  const auto llt = cholesky(g);
  const Vec gv = g * x.v;

  // g vdot = F + Phi^T lambda
  Vec F = sys.potential_gradient_q(x.q, x.z) + gv * sys.potential_dz(x.q, x.z);
  Vec dgv_v = Vec::Zero(n);  // (d_k g_ij) v^k v^j
  for (int k = 0; k < n; ++k) {
    const Mat dg = sys.metric_derivative(k, x.q);
    dgv_v += x.v(k) * (dg * x.v);
    F(k) += 0.5 * x.v.dot(dg * x.v);
  }
  F -= dgv_v;

  HerglotzSolve out;
  out.qdot = x.v;
  out.zdot = sys.lagrangian(x);
  out.lambdas = Vec::Zero(sys.m());
  if (sys.m() > 0) {
    const Mat Phi = sys.forms(x.q);
    const Mat giPhiT = llt.solve(Mat(Phi.transpose()));
    const Mat C = Phi * giPhiT;
    Vec accel = Vec::Zero(sys.m());  // (d_k Phi^a_i v^k) v^i
    for (int k = 0; k < n; ++k) accel += x.v(k) * (sys.form_derivative(k, x.q) * x.v);
    const Vec rhs = -Phi * llt.solve(F) - accel;
    const auto ls = linalg::solve_least_squares(C, rhs);
    if (ls.rank < sys.m()) throw SingularC("Lagrangian multiplier matrix is singular");
    out.lambdas = ls.x;
    F += Phi.transpose() * out.lambdas;
  }
  out.vdot = llt.solve(F);
  return out;
}

Vec lagrangian_constrained_vector(const MechanicalSystem& sys, const LagrangianPoint& x, Membership mode) {
  const HerglotzSolve s = herglotz_solve(sys, x, mode);
  Vec w(2 * x.n() + 1);
  w << s.qdot, s.vdot, s.zdot;
  return w;
}

double correspondence_residual(const MechanicalSystem& sys, const ConstrainedSystem& ham, const LagrangianPoint& x) {
  const VectorValue pushed = legendre_tangent(sys, x, lagrangian_constrained_vector(sys, x));
  const VectorValue target = constrained_vector(ham, legendre(sys, x));
  return (pushed - target).inf_norm();
}

}  // namespace contactnh
