#pragma once

#include <Eigen/Dense>
#include <span>

#include "contactnh/errors.hpp"
#include "contactnh/expr.hpp"

namespace contactnh {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// 2n+1 components in the Darboux layout (q1..qn, p1..pn, z). The tag keeps
/// points, vectors and covectors from being mixed up.
template <class Tag>
class DarbouxArray {
 public:
  DarbouxArray() = default;
  explicit DarbouxArray(int n) : n_(n), data_(Vec::Zero(2 * n + 1)) {}
  DarbouxArray(int n, Vec data) : n_(n), data_(std::move(data)) {
    if (data_.size() != 2 * n + 1) throw ConfigError("expected " + std::to_string(2 * n + 1) + " components");
  }

  int n() const { return n_; }
  int dim() const { return 2 * n_ + 1; }

  double& q(int i) { return data_[i]; }
  double q(int i) const { return data_[i]; }
  double& p(int i) { return data_[n_ + i]; }
  double p(int i) const { return data_[n_ + i]; }
  double& z() { return data_[2 * n_]; }
  double z() const { return data_[2 * n_]; }

  double& operator[](int slot) { return data_[slot]; }
  double operator[](int slot) const { return data_[slot]; }

  auto qs() const { return data_.head(n_); }
  auto ps() const { return data_.segment(n_, n_); }
  auto qs() { return data_.head(n_); }
  auto ps() { return data_.segment(n_, n_); }

  const Vec& data() const { return data_; }
  Vec& data() { return data_; }

  double inf_norm() const { return data_.size() ? data_.template lpNorm<Eigen::Infinity>() : 0.0; }

  friend DarbouxArray operator+(const DarbouxArray& a, const DarbouxArray& b) { return {a.n_, a.data_ + b.data_}; }
  friend DarbouxArray operator-(const DarbouxArray& a, const DarbouxArray& b) { return {a.n_, a.data_ - b.data_}; }
  friend DarbouxArray operator-(const DarbouxArray& a) { return {a.n_, -a.data_}; }
  friend DarbouxArray operator*(double s, const DarbouxArray& a) { return {a.n_, s * a.data_}; }
  DarbouxArray& operator+=(const DarbouxArray& b) {
    data_ += b.data_;
    return *this;
  }
  DarbouxArray& operator-=(const DarbouxArray& b) {
    data_ -= b.data_;
    return *this;
  }

 private:
  int n_ = 0;
  Vec data_;
};

struct PhaseTag {};
struct VectorTag {};
struct FormTag {};

using PhasePoint = DarbouxArray<PhaseTag>;
using VectorValue = DarbouxArray<VectorTag>;
using OneFormValue = DarbouxArray<FormTag>;

/// Unit coordinate vector (or covector) for a Darboux slot.
template <class T>
T basis_element(int n, int slot) {
  T e(n);
  e[slot] = 1.0;
  return e;
}

inline double pair(const OneFormValue& a, const VectorValue& v) { return a.data().dot(v.data()); }

inline expr::Binding binding(const PhasePoint& x) {
  return {x.n(), std::span<const double>(x.data().data(), static_cast<std::size_t>(x.dim()))};
}

/// Tolerance scale used throughout: 1 + |H(x)| + |x|inf.
inline double tolerance_scale(double h_value, const PhasePoint& x) {
  return 1.0 + std::abs(h_value) + x.inf_norm();
}

}  // namespace contactnh
