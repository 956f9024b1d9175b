#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "contactnh/geometry.hpp"

namespace contactnh {

/// Central finite-difference step used wherever derivatives are taken numerically.
inline double fd_step(const PhasePoint& x) { return 1e-5 * std::max(1.0, x.inf_norm()); }

/// Real function on the chart. Either symbolic (exact partials) or backed by a
/// numeric callable (central-difference partials).
class ScalarField {
 public:
  using Function = std::function<double(const PhasePoint&)>;

  ScalarField(expr::Expr e, int n);
  ScalarField(int n, Function f);
  static ScalarField constant(int n, double c);
  static ScalarField parse(std::string_view text, int n);

  int n() const { return n_; }
  bool symbolic() const { return static_cast<bool>(sym_); }
  /// Throws PreconditionFailed for numeric fields.
  const expr::Expr& expr() const;
  const expr::Expr& partial(int slot) const;

  double operator()(const PhasePoint& x) const;
  OneFormValue gradient(const PhasePoint& x) const;

 private:
  struct Symbolic {
    expr::Expr e;
    std::vector<expr::Expr> partials;
  };
  int n_;
  std::shared_ptr<const Symbolic> sym_;
  Function fn_;
};

ScalarField operator*(const ScalarField& a, const ScalarField& b);

class VectorField {
 public:
  explicit VectorField(int n) : n_(n) {}
  virtual ~VectorField() = default;

  int n() const { return n_; }
  virtual VectorValue value(const PhasePoint& x) const = 0;
  /// J(i, j) = d X_i / d x_j. Central differences unless overridden.
  virtual Mat jacobian(const PhasePoint& x) const;
  VectorValue operator()(const PhasePoint& x) const { return value(x); }

 private:
  int n_;
};

using VectorFieldPtr = std::shared_ptr<const VectorField>;

class SymbolicVectorField final : public VectorField {
 public:
  SymbolicVectorField(int n, std::vector<expr::Expr> components);

  const expr::Expr& component(int slot) const { return components_[slot]; }
  VectorValue value(const PhasePoint& x) const override;
  Mat jacobian(const PhasePoint& x) const override;

 private:
  std::vector<expr::Expr> components_;
  std::vector<std::vector<expr::Expr>> partials_;
};

class FunctionVectorField final : public VectorField {
 public:
  using Function = std::function<VectorValue(const PhasePoint&)>;
  FunctionVectorField(int n, Function f) : VectorField(n), fn_(std::move(f)) {}
  VectorValue value(const PhasePoint& x) const override { return fn_(x); }

 private:
  Function fn_;
};

/// Constant field, e.g. the Reeb field or a coordinate direction.
VectorFieldPtr constant_field(const VectorValue& v);

}  // namespace contactnh
