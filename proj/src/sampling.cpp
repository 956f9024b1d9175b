#include "contactnh/sampling.hpp"

namespace contactnh {

Vec UniformSource::vector(int size, double lo, double hi) {
  Vec v(size);
  for (int i = 0; i < size; ++i) v(i) = uniform(lo, hi);
  return v;
}

std::vector<PhasePoint> sample_on_M(const ConstrainedSystem& sys, int count, UniformSource& src, double radius) {
  std::vector<PhasePoint> out;
  const int max_attempts = 50 * count + 100;
  for (int attempt = 0; attempt < max_attempts && static_cast<int>(out.size()) < count; ++attempt) {
    PhasePoint x(sys.n(), src.vector(sys.dim(), -radius, radius));
    try {
      if (!project_onto_M(sys, x)) continue;
      sys.require_on_M(x);
    } catch (const EngineError&) {
      continue;
    }
    out.push_back(std::move(x));
  }
  if (static_cast<int>(out.size()) < count) {
    throw PreconditionFailed("could only sample " + std::to_string(out.size()) + " of " + std::to_string(count) +
                             " points on the constraint submanifold");
  }
  return out;
}

ScalarField random_polynomial(int n, UniformSource& src) {
  using expr::Expr;
  const int dim = 2 * n + 1;
  std::vector<Expr> vars;
  for (int s = 0; s < dim; ++s) vars.push_back(Expr::variable(expr::Variable::from_slot(s, n)));
  Expr f = Expr::constant(src.uniform(-1.0, 1.0));
  for (int i = 0; i < dim; ++i) {
    f = f + Expr::constant(src.uniform(-1.0, 1.0)) * vars[static_cast<std::size_t>(i)];
    for (int j = i; j < dim; ++j) {
      f = f + Expr::constant(src.uniform(-1.0, 1.0)) * vars[static_cast<std::size_t>(i)] * vars[static_cast<std::size_t>(j)];
    }
  }
  return {f, n};
}

}  // namespace contactnh
