#pragma once

#include <stdexcept>
#include <string>

namespace dhflex {

// Raised when a caller breaks a documented precondition (e.g. modulation factor
// outside the unit's operating range).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class SizingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IngestError : public std::runtime_error {
 public:
  IngestError(const std::string& what, long row)
      : std::runtime_error(what), row_(row) {}
  long row() const { return row_; }

 private:
  long row_;
};

class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Wraps any module failure during a simulation run with its position.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& module, double time_s, const std::string& what)
      : std::runtime_error(module + " failed at t=" + std::to_string(time_s) + " s: " + what),
        module_(module),
        time_s_(time_s) {}
  const std::string& module() const { return module_; }
  double time_s() const { return time_s_; }

 private:
  std::string module_;
  double time_s_;
};

}  // namespace dhflex
