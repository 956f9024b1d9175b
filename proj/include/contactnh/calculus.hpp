#pragma once

#include "contactnh/fields.hpp"

namespace contactnh {

OneFormValue gradient(const ScalarField& f, const PhasePoint& x);

/// X(f) at x.
double lie_scalar(const VectorField& X, const ScalarField& f, const PhasePoint& x);

/// (L_X eta)(x) = (i_X d eta)(x) + d(eta(X))(x), using the Jacobian of X.
OneFormValue lie_eta(const VectorField& X, const PhasePoint& x);

/// Coordinate divergence; the contact volume is a constant multiple of it.
double divergence(const VectorField& X, const PhasePoint& x);

}  // namespace contactnh
