#include "contactnh/expr.hpp"

#include <charconv>
#include <cmath>
#include <cctype>
#include <functional>

#include "contactnh/errors.hpp"

namespace contactnh {

const char* to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::DivisionByZero: return "division by zero";
    case DomainKind::LogNonPositive: return "log of non-positive value";
    case DomainKind::SqrtNegative: return "sqrt of negative value";
    case DomainKind::PowDomain: return "negative base with non-integer exponent";
    case DomainKind::NonFinite: return "non-finite result";
  }
  return "unknown";
}

}  // namespace contactnh

namespace contactnh::expr {

Variable Variable::from_slot(int slot, int n) {
  if (slot < n) return {VarKind::Q, slot};
  if (slot < 2 * n) return {VarKind::P, slot - n};
  return {VarKind::Z, 0};
}

std::string Variable::name() const {
  switch (kind) {
    case VarKind::Q: return "q" + std::to_string(index + 1);
    case VarKind::P: return "p" + std::to_string(index + 1);
    case VarKind::Z: return "z";
  }
  return "z";
}

Expr make_leaf(Op op, double value, Variable var, std::size_t offset) {
  auto node = std::make_shared<Node>();
  node->op = op;
  node->value = value;
  node->var = var;
  node->offset = offset;
  return Expr(std::shared_ptr<const Node>(std::move(node)));
}

Expr make_node(Op op, Expr lhs, Expr rhs, std::size_t offset) {
  auto node = std::make_shared<Node>();
  node->op = op;
  node->offset = offset;
  node->lhs = std::move(lhs);
  node->rhs = std::move(rhs);
  return Expr(std::shared_ptr<const Node>(std::move(node)));
}

namespace {

const std::shared_ptr<const Node>& zero_node() {
  static const std::shared_ptr<const Node> zero = std::make_shared<const Node>();
  return zero;
}

bool is_function(Op op) {
  switch (op) {
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Log:
    case Op::Sqrt:
    case Op::Tanh: return true;
    default: return false;
  }
}

bool is_binary(Op op) {
  return op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div || op == Op::Pow;
}

double checked(double v, std::size_t offset) {
  if (!std::isfinite(v)) throw DomainError(DomainKind::NonFinite, offset);
  return v;
}

double apply_binary(Op op, double a, double b, std::size_t offset) {
  switch (op) {
    case Op::Add: return checked(a + b, offset);
    case Op::Sub: return checked(a - b, offset);
    case Op::Mul: return checked(a * b, offset);
    case Op::Div:
      if (b == 0.0) throw DomainError(DomainKind::DivisionByZero, offset);
      return checked(a / b, offset);
    case Op::Pow:
      if (a == 0.0 && b < 0.0) throw DomainError(DomainKind::DivisionByZero, offset);
      if (a < 0.0 && std::trunc(b) != b) throw DomainError(DomainKind::PowDomain, offset);
      return checked(std::pow(a, b), offset);
    default: break;
  }
  return 0.0;
}

double apply_unary(Op op, double a, std::size_t offset) {
  switch (op) {
    case Op::Neg: return -a;
    case Op::Sin: return checked(std::sin(a), offset);
    case Op::Cos: return checked(std::cos(a), offset);
    case Op::Exp: return checked(std::exp(a), offset);
    case Op::Log:
      if (a <= 0.0) throw DomainError(DomainKind::LogNonPositive, offset);
      return checked(std::log(a), offset);
    case Op::Sqrt:
      if (a < 0.0) throw DomainError(DomainKind::SqrtNegative, offset);
      return checked(std::sqrt(a), offset);
    case Op::Tanh: return checked(std::tanh(a), offset);
    default: break;
  }
  return 0.0;
}

double eval_node(const Node& node, const Binding& b) {
  switch (node.op) {
    case Op::Const: return node.value;
    case Op::Var: return b.values[static_cast<std::size_t>(node.var.slot(b.n))];
    case Op::Neg: return -eval_node(node.lhs.node(), b);
    default: break;
  }
  if (is_binary(node.op)) {
    const double lhs = eval_node(node.lhs.node(), b);
    const double rhs = eval_node(node.rhs.node(), b);
    return apply_binary(node.op, lhs, rhs, node.offset);
  }
  return apply_unary(node.op, eval_node(node.lhs.node(), b), node.offset);
}

// ---------------------------------------------------------------------------
// Parser

const char* function_name(Op op) {
  switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Tanh: return "tanh";
    default: return "";
  }
}

bool lookup_function(std::string_view name, Op& op) {
  for (Op f : {Op::Sin, Op::Cos, Op::Exp, Op::Log, Op::Sqrt, Op::Tanh}) {
    if (name == function_name(f)) {
      op = f;
      return true;
    }
  }
  return false;
}

class Parser {
 public:
  Parser(std::string_view text, int n) : text_(text), n_(n) {}

  Expr parse() {
    Expr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) throw SyntaxError("unexpected '" + std::string(1, text_[pos_]) + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      skip_ws();
      const std::size_t at = pos_;
      if (accept('+')) {
        lhs = make_node(Op::Add, lhs, parse_product(), at);
      } else if (accept('-')) {
        lhs = make_node(Op::Sub, lhs, parse_product(), at);
      } else {
        return lhs;
      }
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      skip_ws();
      const std::size_t at = pos_;
      if (accept('*')) {
        lhs = make_node(Op::Mul, lhs, parse_unary(), at);
      } else if (accept('/')) {
        lhs = make_node(Op::Div, lhs, parse_unary(), at);
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    skip_ws();
    const std::size_t at = pos_;
    if (accept('-')) return make_node(Op::Neg, parse_unary(), Expr(), at);
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  // '^' binds tighter than unary minus and is right associative; the exponent
  // may carry its own sign (2^-1).
  Expr parse_power() {
    Expr base = parse_primary();
    skip_ws();
    const std::size_t at = pos_;
    if (accept('^')) return make_node(Op::Pow, base, parse_unary(), at);
    return base;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_sum();
      skip_ws();
      if (!accept(')')) throw SyntaxError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw SyntaxError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t count = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++count;
      }
      return count;
    };
    std::size_t mantissa = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw SyntaxError("malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw SyntaxError("malformed exponent", start);
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
      throw SyntaxError("malformed number", start);
    }
    return make_leaf(Op::Const, value, {}, start);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    Op fn;
    if (lookup_function(name, fn)) {
      if (!accept('(')) throw SyntaxError("expected '(' after " + std::string(name), pos_);
      Expr arg = parse_sum();
      if (!accept(')')) throw SyntaxError("expected ')'", pos_);
      return make_node(fn, arg, Expr(), start);
    }
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      throw SyntaxError("unknown function '" + std::string(name) + "'", start);
    }
    return make_leaf(Op::Var, 0.0, resolve(name, start), start);
  }

  Variable resolve(std::string_view name, std::size_t at) const {
    if (name == "z") return {VarKind::Z, 0};
    if (name.size() >= 2 && (name[0] == 'q' || name[0] == 'p')) {
      const std::string_view digits = name.substr(1);
      int index = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
      if (ec == std::errc() && ptr == digits.data() + digits.size() && index >= 1 && index <= n_ &&
          digits[0] != '0') {
        return {name[0] == 'q' ? VarKind::Q : VarKind::P, index - 1};
      }
    }
    throw UnknownVariable(std::string(name), at);
  }

  std::string_view text_;
  int n_;
  std::size_t pos_ = 0;
};

void format_double(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

void print_into(std::string& out, const Node& node) {
  switch (node.op) {
    case Op::Const:
      if (std::signbit(node.value)) {
        out += "(-";
        format_double(out, -node.value);
        out += ')';
      } else {
        format_double(out, node.value);
      }
      return;
    case Op::Var: out += node.var.name(); return;
    case Op::Neg:
      out += "(-";
      print_into(out, node.lhs.node());
      out += ')';
      return;
    default: break;
  }
  if (is_function(node.op)) {
    out += function_name(node.op);
    out += '(';
    print_into(out, node.lhs.node());
    out += ')';
    return;
  }
  static constexpr const char* symbols[] = {"", "", " + ", " - ", " * ", " / ", " ^ "};
  out += '(';
  print_into(out, node.lhs.node());
  out += symbols[static_cast<int>(node.op)];
  print_into(out, node.rhs.node());
  out += ')';
}

}  // namespace

Expr::Expr() : node_(zero_node()) {}

Expr Expr::constant(double value) { return make_leaf(Op::Const, value, {}, 0); }
Expr Expr::variable(Variable v) { return make_leaf(Op::Var, 0.0, v, 0); }

Op Expr::op() const { return node_->op; }
double Expr::constant_value() const { return node_->value; }

double Expr::eval(const Binding& b) const { return eval_node(*node_, b); }

bool Expr::depends_on(VarKind kind) const {
  const Node& n = *node_;
  if (n.op == Op::Const) return false;
  if (n.op == Op::Var) return n.var.kind == kind;
  if (n.lhs.depends_on(kind)) return true;
  return is_binary(n.op) && n.rhs.depends_on(kind);
}

int Expr::max_index() const {
  const Node& n = *node_;
  if (n.op == Op::Const) return 0;
  if (n.op == Op::Var) return n.var.kind == VarKind::Z ? 0 : n.var.index + 1;
  const int l = n.lhs.max_index();
  return is_binary(n.op) ? std::max(l, n.rhs.max_index()) : l;
}

Expr parse(std::string_view text, int n) {
  if (n < 1) throw ConfigError("chart half-dimension must be >= 1");
  return Parser(text, n).parse();
}

std::string print(const Expr& e) {
  std::string out;
  print_into(out, e.node());
  return out;
}

// ---------------------------------------------------------------------------
// Builders

namespace {

bool is_one(const Expr& e) { return e.is_constant() && e.constant_value() == 1.0; }

// Folds when every operand is a literal and the result is finite.
bool try_fold(Op op, const Expr& a, const Expr& b, double& out) {
  if (!a.is_constant() || (is_binary(op) && !b.is_constant())) return false;
  try {
    out = is_binary(op) ? apply_binary(op, a.constant_value(), b.constant_value(), 0)
                        : apply_unary(op, a.constant_value(), 0);
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

}  // namespace

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  double v;
  if (try_fold(Op::Add, a, b, v)) return Expr::constant(v);
  return make_node(Op::Add, a, b, 0);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  double v;
  if (try_fold(Op::Sub, a, b, v)) return Expr::constant(v);
  return make_node(Op::Sub, a, b, 0);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr();
  if (is_one(a)) return b;
  if (is_one(b)) return a;
  double v;
  if (try_fold(Op::Mul, a, b, v)) return Expr::constant(v);
  return make_node(Op::Mul, a, b, 0);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (is_one(b)) return a;
  double v;
  if (try_fold(Op::Div, a, b, v)) return Expr::constant(v);
  return make_node(Op::Div, a, b, 0);
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.constant_value());
  if (a.op() == Op::Neg) return a.node().lhs;
  return make_node(Op::Neg, a, Expr(), 0);
}

Expr pow(const Expr& base, const Expr& exponent) {
  if (is_one(exponent)) return base;
  if (exponent.is_zero()) return Expr::constant(1.0);
  double v;
  if (try_fold(Op::Pow, base, exponent, v)) return Expr::constant(v);
  return make_node(Op::Pow, base, exponent, 0);
}

Expr apply(Op function, const Expr& arg) {
  double v;
  if (try_fold(function, arg, Expr(), v)) return Expr::constant(v);
  return make_node(function, arg, Expr(), 0);
}

Expr fold_constants(const Expr& e) {
  const Node& n = e.node();
  if (n.op == Op::Const || n.op == Op::Var) return e;
  const Expr lhs = fold_constants(n.lhs);
  const Expr rhs = is_binary(n.op) ? fold_constants(n.rhs) : Expr();
  double v;
  if (n.op == Op::Neg) {
    if (lhs.is_constant()) return Expr::constant(-lhs.constant_value());
  } else if (try_fold(n.op, lhs, rhs, v)) {
    return Expr::constant(v);
  }
  return make_node(n.op, lhs, rhs, n.offset);
}

// ---------------------------------------------------------------------------
// Differentiation

Expr diff(const Expr& e, Variable v) {
  const Node& n = e.node();
  switch (n.op) {
    case Op::Const: return Expr();
    case Op::Var: return n.var == v ? Expr::constant(1.0) : Expr();
    case Op::Add: return diff(n.lhs, v) + diff(n.rhs, v);
    case Op::Sub: return diff(n.lhs, v) - diff(n.rhs, v);
    case Op::Mul: return diff(n.lhs, v) * n.rhs + n.lhs * diff(n.rhs, v);
    case Op::Div: {
      const Expr du = diff(n.lhs, v);
      const Expr dv = diff(n.rhs, v);
      if (dv.is_zero()) return du / n.rhs;
      return du / n.rhs - (n.lhs * dv) / (n.rhs * n.rhs);
    }
    case Op::Pow: {
      const Expr du = diff(n.lhs, v);
      const Expr dv = diff(n.rhs, v);
      if (dv.is_zero()) {
        if (du.is_zero()) return Expr();
        return n.rhs * pow(n.lhs, n.rhs - Expr::constant(1.0)) * du;
      }
      if (du.is_zero()) return e * apply(Op::Log, n.lhs) * dv;
      return e * (dv * apply(Op::Log, n.lhs) + n.rhs * du / n.lhs);
    }
    case Op::Neg: return -diff(n.lhs, v);
    case Op::Sin: return apply(Op::Cos, n.lhs) * diff(n.lhs, v);
    case Op::Cos: return -(apply(Op::Sin, n.lhs) * diff(n.lhs, v));
    case Op::Exp: return e * diff(n.lhs, v);
    case Op::Log: return diff(n.lhs, v) / n.lhs;
    case Op::Sqrt: return diff(n.lhs, v) / (Expr::constant(2.0) * e);
    case Op::Tanh: return (Expr::constant(1.0) - e * e) * diff(n.lhs, v);
  }
  return Expr();
}

Expr diff(const Expr& e, std::string_view name, int n) {
  // Resolve the name with the parser's own rules.
  const Expr var = parse(name, n);
  if (var.op() != Op::Var) throw UnknownVariable(std::string(name), 0);
  return diff(e, var.node().var);
}

}  // namespace contactnh::expr
