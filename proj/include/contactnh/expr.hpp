#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace contactnh::expr {

enum class VarKind { Q, P, Z };

/// Variable reference: q<index+1>, p<index+1> or z (index unused).
struct Variable {
  VarKind kind = VarKind::Z;
  int index = 0;

  /// Slot in the Darboux layout (q1..qn, p1..pn, z).
  int slot(int n) const {
    switch (kind) {
      case VarKind::Q: return index;
      case VarKind::P: return n + index;
      case VarKind::Z: return 2 * n;
    }
    return 2 * n;
  }
  static Variable from_slot(int slot, int n);
  std::string name() const;
  bool operator==(const Variable&) const = default;
};

/// Values for q1..qn, p1..pn, z in Darboux slot order.
struct Binding {
  int n = 0;
  std::span<const double> values;
};

enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Log, Sqrt, Tanh };

struct Node;

/// Immutable expression tree. Copies share structure; all operations are pure.
class Expr {
 public:
  /// The constant 0.
  Expr();

  static Expr constant(double value);
  static Expr variable(Variable v);

  Op op() const;
  /// Literal value; only meaningful when op() == Op::Const.
  double constant_value() const;
  bool is_constant() const { return op() == Op::Const; }
  bool is_zero() const { return is_constant() && constant_value() == 0.0; }

  /// Evaluates with IEEE doubles. Throws DomainError instead of producing NaN/inf.
  double eval(const Binding& b) const;

  bool depends_on(VarKind kind) const;
  /// Highest 1-based index used for q or p variables (0 if none).
  int max_index() const;

  const Node& node() const { return *node_; }

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  // Child slot of a leaf; never dereferenced.
  struct Unset {};
  explicit Expr(Unset) {}
  std::shared_ptr<const Node> node_;

  friend struct Node;
  friend Expr make_node(Op, Expr, Expr, std::size_t);
  friend Expr make_leaf(Op, double, Variable, std::size_t);
};

struct Node {
  Op op = Op::Const;
  double value = 0.0;
  Variable var;
  std::size_t offset = 0;
  Expr lhs{Expr::Unset{}};  // unary argument for Neg and functions
  Expr rhs{Expr::Unset{}};
};

/// Parses infix text over q1..qn, p1..pn, z.
Expr parse(std::string_view text, int n);

/// Symbolic partial derivative with respect to `v`.
Expr diff(const Expr& e, Variable v);
Expr diff(const Expr& e, std::string_view name, int n);

/// Canonical, fully parenthesized infix form. parse(print(e)) evaluates identically.
std::string print(const Expr& e);

/// Folds subtrees whose operands are all literals. Evaluation results are unchanged.
Expr fold_constants(const Expr& e);

// Builders used when assembling expressions programmatically. They drop
// additive zeros and multiplicative ones, collapse products with a literal
// zero, and fold literal operands.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, const Expr& exponent);
Expr apply(Op function, const Expr& arg);

}  // namespace contactnh::expr
