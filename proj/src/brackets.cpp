#include "contactnh/brackets.hpp"

#include "contactnh/lagrangian.hpp"

namespace contactnh {

const char* to_string(BracketKind kind) {
  switch (kind) {
    case BracketKind::Nonholonomic: return "nh";
    case BracketKind::PNonholonomic: return "p_nh";
    case BracketKind::Eden: return "eden";
  }
  return "unknown";
}

AlmostJacobiData almost_jacobi_data(const ConstrainedSystem& sys, BracketKind kind, const PhasePoint& x,
                                    Membership mode) {
  const VectorValue R = contact::reeb(x.n());
  AlmostJacobiData d{Mat(), R, x};
  switch (kind) {
    case BracketKind::Nonholonomic: d.P = projector_matrix(sys, x, mode); break;
    case BracketKind::PNonholonomic: d.P = roman_p_matrix(sys, x, mode); break;
    case BracketKind::Eden: {
      if (!sys.splitting()) throw PreconditionFailed("the Eden bracket needs a system induced from a mechanical Lagrangian");
      if (mode == Membership::Check) sys.require_on_M(x);
      d.P = sys.splitting()->gamma_jacobian(x);
      d.base = sys.splitting()->gamma(x);
      break;
    }
  }
  d.reeb = VectorValue(x.n(), d.P * R.data());
  return d;
}

namespace {

double bracket_with(const AlmostJacobiData& d, const PhasePoint& x, const ScalarField& f, const ScalarField& g) {
  const OneFormValue df = f.gradient(d.base);
  const OneFormValue dg = g.gradient(d.base);
  const OneFormValue pf(x.n(), d.P.transpose() * df.data());
  const OneFormValue pg(x.n(), d.P.transpose() * dg.data());
  return contact::lambda_at(x, pf, pg) - f(d.base) * pair(dg, d.reeb) + g(d.base) * pair(df, d.reeb);
}

}  // namespace

double bracket(const ConstrainedSystem& sys, BracketKind kind, const ScalarField& f, const ScalarField& g,
               const PhasePoint& x, Membership mode) {
  return bracket_with(almost_jacobi_data(sys, kind, x, mode), x, f, g);
}

double nh_bracket(const ConstrainedSystem& sys, const ScalarField& f, const ScalarField& g, const PhasePoint& x) {
  return bracket(sys, BracketKind::Nonholonomic, f, g, x);
}

double p_nh_bracket(const ConstrainedSystem& sys, const ScalarField& f, const ScalarField& g, const PhasePoint& x) {
  return bracket(sys, BracketKind::PNonholonomic, f, g, x);
}

double eden_bracket(const ConstrainedSystem& sys, const ScalarField& f, const ScalarField& g, const PhasePoint& x) {
  return bracket(sys, BracketKind::Eden, f, g, x);
}

ScalarField bracket_field(const ConstrainedSystem& sys, BracketKind kind, const ScalarField& f, const ScalarField& g) {
  return {sys.n(), [sys, kind, f, g](const PhasePoint& y) { return bracket(sys, kind, f, g, y, Membership::Extend); }};
}

double evolution_residual(const ConstrainedSystem& sys, BracketKind kind, const ScalarField& f, const PhasePoint& x) {
  const AlmostJacobiData d = almost_jacobi_data(sys, kind, x);
  const double lhs = pair(f.gradient(x), constrained_vector(sys, x));
  const double rhs = bracket_with(d, x, sys.H(), f) - f(x) * pair(sys.H().gradient(x), d.reeb);
  return std::abs(lhs - rhs);
}

double jacobiator(const ConstrainedSystem& sys, BracketKind kind, const ScalarField& f, const ScalarField& g,
                  const ScalarField& h, const PhasePoint& x) {
  const AlmostJacobiData d = almost_jacobi_data(sys, kind, x);
  return bracket_with(d, x, f, bracket_field(sys, kind, g, h)) + bracket_with(d, x, g, bracket_field(sys, kind, h, f)) +
         bracket_with(d, x, h, bracket_field(sys, kind, f, g));
}

double leibniz_defect(const ConstrainedSystem& sys, BracketKind kind, const ScalarField& f, const ScalarField& g,
                      const ScalarField& h, const PhasePoint& x) {
  const AlmostJacobiData d = almost_jacobi_data(sys, kind, x);
  const double gv = g(d.base), hv = h(d.base);
  return bracket_with(d, x, f, g * h) - gv * bracket_with(d, x, f, h) - hv * bracket_with(d, x, f, g) +
         gv * hv * pair(f.gradient(d.base), d.reeb);
}

}  // namespace contactnh
