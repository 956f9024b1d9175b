#pragma once

#include "contactnh/constrained.hpp"

namespace contactnh {

enum class BracketKind {
  Nonholonomic,   // calligraphic projector
  PNonholonomic,  // roman-P projector
  Eden,           // metric projection gamma
};

const char* to_string(BracketKind kind);

/// Almost Jacobi data at x: the linear map applied to one-forms (alpha -> alpha o P),
/// the projected Reeb field, and the point where functions are evaluated.
struct AlmostJacobiData {
  Mat P;
  VectorValue reeb;
  PhasePoint base;
};
AlmostJacobiData almost_jacobi_data(const ConstrainedSystem& sys, BracketKind kind, const PhasePoint& x,
                                    Membership mode = Membership::Check);

/// {f, g} = Lambda(P* df, P* dg) - f R_{H,M}(g) + g R_{H,M}(f).
double bracket(const ConstrainedSystem& sys, BracketKind kind, const ScalarField& f, const ScalarField& g,
               const PhasePoint& x, Membership mode = Membership::Check);

double nh_bracket(const ConstrainedSystem& sys, const ScalarField& f, const ScalarField& g, const PhasePoint& x);
double p_nh_bracket(const ConstrainedSystem& sys, const ScalarField& f, const ScalarField& g, const PhasePoint& x);
double eden_bracket(const ConstrainedSystem& sys, const ScalarField& f, const ScalarField& g, const PhasePoint& x);

/// The bracket as a field defined near M, differentiated numerically.
ScalarField bracket_field(const ConstrainedSystem& sys, BracketKind kind, const ScalarField& f, const ScalarField& g);

/// X_{H,M}(f) - ({H, f} - f R_{H,M}(H)).
double evolution_residual(const ConstrainedSystem& sys, BracketKind kind, const ScalarField& f, const PhasePoint& x);

/// {f,{g,h}} + {g,{h,f}} + {h,{f,g}}; reported, not expected to vanish.
double jacobiator(const ConstrainedSystem& sys, BracketKind kind, const ScalarField& f, const ScalarField& g,
                  const ScalarField& h, const PhasePoint& x);

/// {f, gh} - g{f, h} - h{f, g} + gh R_{H,M}(f).
double leibniz_defect(const ConstrainedSystem& sys, BracketKind kind, const ScalarField& f, const ScalarField& g,
                      const ScalarField& h, const PhasePoint& x);

}  // namespace contactnh
