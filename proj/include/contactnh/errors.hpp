#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace contactnh {

/// Base of every error raised by the engine.
class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset` is the byte offset of the offending token.
class SyntaxError : public EngineError {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : EngineError(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// A variable name that is not one of q1..qn, p1..pn, z.
class UnknownVariable : public EngineError {
 public:
  UnknownVariable(const std::string& name, std::size_t offset)
      : EngineError("unknown variable '" + name + "' at offset " + std::to_string(offset)),
        name_(name),
        offset_(offset) {}
  const std::string& name() const { return name_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string name_;
  std::size_t offset_;
};

enum class DomainKind { DivisionByZero, LogNonPositive, SqrtNegative, PowDomain, NonFinite };

const char* to_string(DomainKind kind);

/// Evaluation left the domain of a sub-expression.
class DomainError : public EngineError {
 public:
  DomainError(DomainKind kind, std::size_t offset)
      : EngineError(std::string("domain error (") + to_string(kind) + ") at offset " +
                    std::to_string(offset)),
        kind_(kind),
        offset_(offset) {}
  DomainKind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

 private:
  DomainKind kind_;
  std::size_t offset_;
};

/// A point that should lie on the constraint submanifold does not.
class OffConstraint : public EngineError {
 public:
  OffConstraint(double violation, double tolerance)
      : EngineError("point is off the constraint submanifold: max|phi| = " +
                    std::to_string(violation) + " > " + std::to_string(tolerance)),
        violation_(violation) {}
  double violation() const { return violation_; }

 private:
  double violation_;
};

/// The multiplier matrix C is singular or rank deficient.
class SingularC : public EngineError {
 public:
  using EngineError::EngineError;
};

/// The matrix G of the roman-P decomposition is singular.
class SingularG : public EngineError {
 public:
  using EngineError::EngineError;
};

/// A vector does not lie in the split used by the projector (rank F > dim M case).
class NotInSplit : public EngineError {
 public:
  using EngineError::EngineError;
};

/// A structural hypothesis (mechanical condition, R in F, ...) does not hold.
class PreconditionFailed : public EngineError {
 public:
  using EngineError::EngineError;
};

class NotPositiveDefinite : public EngineError {
 public:
  using EngineError::EngineError;
};

/// Invalid system configuration or inconsistent dimensions.
class ConfigError : public EngineError {
 public:
  using EngineError::EngineError;
};

}  // namespace contactnh
