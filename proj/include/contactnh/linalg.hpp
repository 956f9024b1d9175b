#pragma once

#include "contactnh/geometry.hpp"

namespace contactnh::linalg {

/// Relative singular-value threshold for rank decisions.
inline constexpr double kRankTolerance = 1e-9;

/// Number of singular values above kRankTolerance * sigma_max.
int numeric_rank(const Mat& A);

/// Orthonormal basis (columns) of ker A. A may be empty in either dimension.
Mat null_space(const Mat& A);

struct LeastSquares {
  Vec x;
  int rank = 0;
  double residual = 0.0;  // |A x - b|inf
};

/// Minimum-norm least-squares solution through a full SVD.
LeastSquares solve_least_squares(const Mat& A, const Vec& b);

}  // namespace contactnh::linalg
