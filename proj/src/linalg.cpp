#include "contactnh/linalg.hpp"

namespace contactnh::linalg {

namespace {

int rank_from(const Vec& sigma) {
  if (sigma.size() == 0) return 0;
  const double cut = kRankTolerance * sigma(0);
  int r = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cut && sigma(i) > 0.0) ++r;
  }
  return r;
}

}  // namespace

int numeric_rank(const Mat& A) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(A);
  return rank_from(svd.singularValues());
}

Mat null_space(const Mat& A) {
  const Eigen::Index cols = A.cols();
  if (A.rows() == 0) return Mat::Identity(cols, cols);
  if (cols == 0) return Mat(0, 0);
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
  const int r = rank_from(svd.singularValues());
  return svd.matrixV().rightCols(cols - r);
}

LeastSquares solve_least_squares(const Mat& A, const Vec& b) {
  LeastSquares out;
  out.x = Vec::Zero(A.cols());
  if (A.size() == 0) {
    out.residual = b.size() ? b.lpNorm<Eigen::Infinity>() : 0.0;
    return out;
  }
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.rank = rank_from(svd.singularValues());
  const Vec& s = svd.singularValues();
  Vec c = svd.matrixU().leftCols(out.rank).transpose() * b;
  for (int i = 0; i < out.rank; ++i) c(i) /= s(i);
  out.x = svd.matrixV().leftCols(out.rank) * c;
  out.residual = (A * out.x - b).lpNorm<Eigen::Infinity>();
  return out;
}

}  // namespace contactnh::linalg
