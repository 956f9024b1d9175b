#include "contactnh/contact.hpp"

namespace contactnh::contact {

OneFormValue eta(const PhasePoint& x) {
  OneFormValue a(x.n());
  a.qs() = -x.ps();
  a.z() = 1.0;
  return a;
}

double eta_at(const PhasePoint& x, const VectorValue& v) { return v.z() - x.ps().dot(v.qs()); }

double deta_at(const VectorValue& v, const VectorValue& w) { return v.qs().dot(w.ps()) - v.ps().dot(w.qs()); }

OneFormValue flat_at(const PhasePoint& x, const VectorValue& v) {
  const double ev = eta_at(x, v);
  OneFormValue a(x.n());
  a.qs() = -v.ps() - ev * x.ps();
  a.ps() = v.qs();
  a.z() = ev;
  return a;
}

VectorValue sharp_at(const PhasePoint& x, const OneFormValue& a) {
  VectorValue v(x.n());
  v.qs() = a.ps();
  v.ps() = -a.qs() - a.z() * x.ps();
  v.z() = x.ps().dot(a.ps()) + a.z();
  return v;
}

VectorValue reeb(int n) { return basis_element<VectorValue>(n, 2 * n); }

double lambda_at(const PhasePoint& x, const OneFormValue& a, const OneFormValue& b) {
  return -deta_at(sharp_at(x, a), sharp_at(x, b));
}

VectorValue sharp_lambda_at(const PhasePoint& x, const OneFormValue& a) {
  VectorValue v = sharp_at(x, a);
  v.z() -= a.z();
  return v;
}

Mat flat_matrix(const PhasePoint& x) {
  const int dim = x.dim();
  Mat B(dim, dim);
  for (int s = 0; s < dim; ++s) B.col(s) = flat_at(x, basis_element<VectorValue>(x.n(), s)).data();
  return B;
}

namespace {

VectorValue hamiltonian_from(const PhasePoint& x, double h, const OneFormValue& dh) {
  VectorValue v(x.n());
  v.qs() = dh.ps();
  v.ps() = -dh.qs() - dh.z() * x.ps();
  v.z() = x.ps().dot(dh.ps()) - h;
  return v;
}

}  // namespace

VectorValue hamiltonian_vector(const ScalarField& H, const PhasePoint& x) {
  return hamiltonian_from(x, H(x), H.gradient(x));
}

std::shared_ptr<const VectorField> hamiltonian_vf(const ScalarField& H) {
  const int n = H.n();
  if (!H.symbolic()) {
    return std::make_shared<FunctionVectorField>(n, [H](const PhasePoint& x) { return hamiltonian_vector(H, x); });
  }
  using expr::Expr;
  std::vector<Expr> comps(static_cast<std::size_t>(2 * n + 1));
  const Expr& Hz = H.partial(2 * n);
  Expr z_comp = -H.expr();
  for (int i = 0; i < n; ++i) {
    const Expr pi = Expr::variable({expr::VarKind::P, i});
    comps[static_cast<std::size_t>(i)] = H.partial(n + i);
    comps[static_cast<std::size_t>(n + i)] = -(H.partial(i) + pi * Hz);
    z_comp = pi * H.partial(n + i) + z_comp;
  }
  comps[static_cast<std::size_t>(2 * n)] = z_comp;
  return std::make_shared<SymbolicVectorField>(n, std::move(comps));
}

double jacobi_bracket(const ScalarField& f, const ScalarField& g, const PhasePoint& x) {
  const OneFormValue df = f.gradient(x);
  const OneFormValue dg = g.gradient(x);
  return lambda_at(x, df, dg) - f(x) * dg.z() + g(x) * df.z();
}

}  // namespace contactnh::contact
