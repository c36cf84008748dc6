#pragma once

#include <stdexcept>
#include <string>

namespace skewfib {

// Base class for all library errors. Property failures are not errors:
// certificates carry fail verdicts instead.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class NoConvergence : public Error {
 public:
  NoConvergence(int iterations, double last_residual)
      : Error("newton: no convergence after " + std::to_string(iterations) +
              " iterations, residual " + std::to_string(last_residual)),
        iterations(iterations),
        last_residual(last_residual) {}
  int iterations;
  double last_residual;
};

class SingularJacobian : public Error {
 public:
  explicit SingularJacobian(const std::string& where)
      : Error("newton: singular jacobian at " + where) {}
};

class FieldBlowup : public Error {
 public:
  explicit FieldBlowup(double t)
      : Error("ode: field blowup at t=" + std::to_string(t)), t(t) {}
  double t;
};

class NotInHemisphere : public Error {
 public:
  NotInHemisphere() : Error("samples not contained in an open hemisphere") {}
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& message)
      : Error("syntax error at position " + std::to_string(position) + ": " +
              message),
        position(position) {}
  std::size_t position;
};

class UnknownVariable : public Error {
 public:
  explicit UnknownVariable(const std::string& name)
      : Error("unknown variable: " + name) {}
};

class UnknownFunction : public Error {
 public:
  explicit UnknownFunction(const std::string& name)
      : Error("unknown function: " + name) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain error: " + what) {}
};

class WrongRepresentation : public Error {
 public:
  explicit WrongRepresentation(const std::string& what)
      : Error("wrong representation: " + what) {}
};

class NonTangent : public Error {
 public:
  NonTangent() : Error("tangent vector components not orthogonal to base direction") {}
};

class NearHorizontalFiber : public Error {
 public:
  explicit NearHorizontalFiber(double cosine)
      : Error("fiber nearly horizontal, <u,V0> = " + std::to_string(cosine)) {}
};

class InconsistentChecks : public Error {
 public:
  explicit InconsistentChecks(const std::string& what)
      : Error("inconsistent cross-checks: " + what) {}
};

class NoUpperHemispherePoints : public Error {
 public:
  NoUpperHemispherePoints() : Error("great circle does not meet the open upper hemisphere") {}
};

class LostTransversality : public Error {
 public:
  explicit LostTransversality(double t)
      : Error("legendrian lift lost transversality at t=" + std::to_string(t)),
        t(t) {}
  double t;
};

class DegenerateCurve : public Error {
 public:
  DegenerateCurve() : Error("closed curve needs at least 8 samples") {}
};

class PreconditionFailed : public Error {
 public:
  explicit PreconditionFailed(const std::string& what)
      : Error("precondition failed: " + what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config error: " + what) {}
};

}  // namespace skewfib
