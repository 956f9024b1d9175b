#include "contactnh/fields.hpp"

namespace contactnh {

namespace {

std::vector<expr::Expr> all_partials(const expr::Expr& e, int n) {
  std::vector<expr::Expr> out;
  out.reserve(static_cast<std::size_t>(2 * n + 1));
  for (int s = 0; s < 2 * n + 1; ++s) out.push_back(expr::diff(e, expr::Variable::from_slot(s, n)));
  return out;
}

void check_indices(const expr::Expr& e, int n) {
  if (e.max_index() > n) throw ConfigError("expression uses an index above n = " + std::to_string(n));
}

}  // namespace

ScalarField::ScalarField(expr::Expr e, int n) : n_(n) {
  check_indices(e, n);
  auto sym = std::make_shared<Symbolic>();
  sym->partials = all_partials(e, n);
  sym->e = std::move(e);
  sym_ = std::move(sym);
}

ScalarField::ScalarField(int n, Function f) : n_(n), fn_(std::move(f)) {}

ScalarField ScalarField::constant(int n, double c) { return {expr::Expr::constant(c), n}; }

ScalarField ScalarField::parse(std::string_view text, int n) { return {expr::parse(text, n), n}; }

const expr::Expr& ScalarField::expr() const {
  if (!sym_) throw PreconditionFailed("scalar field has no symbolic form");
  return sym_->e;
}

const expr::Expr& ScalarField::partial(int slot) const {
  if (!sym_) throw PreconditionFailed("scalar field has no symbolic form");
  return sym_->partials[static_cast<std::size_t>(slot)];
}

double ScalarField::operator()(const PhasePoint& x) const {
  if (sym_) return sym_->e.eval(binding(x));
  return fn_(x);
}

OneFormValue ScalarField::gradient(const PhasePoint& x) const {
  OneFormValue g(n_);
  if (sym_) {
    const auto b = binding(x);
    for (int s = 0; s < g.dim(); ++s) g[s] = sym_->partials[static_cast<std::size_t>(s)].eval(b);
    return g;
  }
  const double h = fd_step(x);
  for (int s = 0; s < g.dim(); ++s) {
    PhasePoint plus = x, minus = x;
    plus[s] += h;
    minus[s] -= h;
    g[s] = (fn_(plus) - fn_(minus)) / (2.0 * h);
  }
  return g;
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  if (a.symbolic() && b.symbolic()) return {a.expr() * b.expr(), a.n()};
  return {a.n(), [a, b](const PhasePoint& x) { return a(x) * b(x); }};
}

Mat VectorField::jacobian(const PhasePoint& x) const {
  const int dim = x.dim();
  Mat J(dim, dim);
  const double h = fd_step(x);
  for (int s = 0; s < dim; ++s) {
    PhasePoint plus = x, minus = x;
    plus[s] += h;
    minus[s] -= h;
    J.col(s) = (value(plus).data() - value(minus).data()) / (2.0 * h);
  }
  return J;
}

SymbolicVectorField::SymbolicVectorField(int n, std::vector<expr::Expr> components)
    : VectorField(n), components_(std::move(components)) {
  if (static_cast<int>(components_.size()) != 2 * n + 1) throw ConfigError("vector field needs 2n+1 components");
  for (const auto& c : components_) {
    check_indices(c, n);
    partials_.push_back(all_partials(c, n));
  }
}

VectorValue SymbolicVectorField::value(const PhasePoint& x) const {
  VectorValue v(n());
  const auto b = binding(x);
  for (int s = 0; s < v.dim(); ++s) v[s] = components_[static_cast<std::size_t>(s)].eval(b);
  return v;
}

Mat SymbolicVectorField::jacobian(const PhasePoint& x) const {
  const int dim = x.dim();
  Mat J(dim, dim);
  const auto b = binding(x);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) J(i, j) = partials_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].eval(b);
  }
  return J;
}

VectorFieldPtr constant_field(const VectorValue& v) {
  std::vector<expr::Expr> comps;
  for (int s = 0; s < v.dim(); ++s) comps.push_back(expr::Expr::constant(v[s]));
  return std::make_shared<SymbolicVectorField>(v.n(), std::move(comps));
}

}  // namespace contactnh
