#pragma once

#include <memory>

#include "contactnh/fields.hpp"

// Canonical contact structure eta = dz - p_i dq^i on R^{2n+1}.
namespace contactnh::contact {

OneFormValue eta(const PhasePoint& x);
double eta_at(const PhasePoint& x, const VectorValue& v);
double deta_at(const VectorValue& v, const VectorValue& w);

/// flat(v) = i_v d eta + eta(v) eta.
OneFormValue flat_at(const PhasePoint& x, const VectorValue& v);
/// Inverse of flat_at.
VectorValue sharp_at(const PhasePoint& x, const OneFormValue& a);

VectorValue reeb(int n);

/// Lambda(a, b) = -d eta(sharp a, sharp b).
double lambda_at(const PhasePoint& x, const OneFormValue& a, const OneFormValue& b);
/// sharp_Lambda(a) = sharp(a) - a(R) R.
VectorValue sharp_lambda_at(const PhasePoint& x, const OneFormValue& a);

/// Matrix of flat_at: flat(v) = B v.
Mat flat_matrix(const PhasePoint& x);

/// X_H = H_p d/dq - (H_q + p H_z) d/dp + (p H_p - H) d/dz.
VectorValue hamiltonian_vector(const ScalarField& H, const PhasePoint& x);
/// Symbolic X_H for symbolic H, numeric otherwise.
std::shared_ptr<const VectorField> hamiltonian_vf(const ScalarField& H);

/// {f, g} = Lambda(df, dg) - f R(g) + g R(f).
double jacobi_bracket(const ScalarField& f, const ScalarField& g, const PhasePoint& x);

}  // namespace contactnh::contact
