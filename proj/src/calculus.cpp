#include "contactnh/calculus.hpp"

namespace contactnh {

OneFormValue gradient(const ScalarField& f, const PhasePoint& x) { return f.gradient(x); }

double lie_scalar(const VectorField& X, const ScalarField& f, const PhasePoint& x) {
  return pair(f.gradient(x), X.value(x));
}

OneFormValue lie_eta(const VectorField& X, const PhasePoint& x) {
  const int n = x.n();
  const VectorValue v = X.value(x);
  const Mat J = X.jacobian(x);

  // g(x) = X_z(x) - sum_i p_i X_{q_i}(x)
  Eigen::RowVectorXd dg = J.row(2 * n) - x.ps().transpose() * J.topRows(n);
  dg.segment(n, n) -= v.qs().transpose();

  OneFormValue out(n);
  out.qs() = -v.ps() + dg.head(n).transpose();
  out.ps() = v.qs() + dg.segment(n, n).transpose();
  out.z() = dg(2 * n);
  return out;
}

double divergence(const VectorField& X, const PhasePoint& x) { return X.jacobian(x).trace(); }

}  // namespace contactnh
