#pragma once

#include <stdexcept>
#include <string>

namespace netsyn {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Block partitions or shapes do not fit together.
class StructureError : public Error {
 public:
  using Error::Error;
};

/// A system, spec or trace file does not validate.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The conic backend failed (not the same thing as an infeasible problem).
class SolverError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// An operation was called out of protocol order.
class StateError : public Error {
 public:
  using Error::Error;
};

/// A design or QSR specification violates a structural hypothesis.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// A necessary condition for the requested synthesis fails up front.
class DiagnosticError : public Error {
 public:
  DiagnosticError(int subsystem, const std::string& what)
      : Error(what), subsystem_(subsystem) {}
  /// Zero-based index of the offending subsystem.
  int subsystem() const { return subsystem_; }

 private:
  int subsystem_;
};

/// The local LMI problem at one step of the sequential synthesis is infeasible.
class StepInfeasible : public Error {
 public:
  StepInfeasible(int subsystem, const std::string& what)
      : Error(what), subsystem_(subsystem) {}
  int subsystem() const { return subsystem_; }

 private:
  int subsystem_;
};

class SimulationError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class VerificationError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace netsyn
