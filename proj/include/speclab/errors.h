#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace speclab {

// Bad parameters, malformed descriptors, violated preconditions. CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Mesh cannot be assembled into a finite element form (degenerate triangle, non-manifold input).
class AssemblyError : public std::runtime_error {
public:
  AssemblyError(const std::string& what, int triangle) : std::runtime_error(what), triangle_(triangle) {}
  int triangle() const { return triangle_; }

private:
  int triangle_;
};

// Iterative solver failed to converge. Carries the best residuals reached. CLI exit code 3.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, std::vector<double> bestResiduals)
      : std::runtime_error(what), bestResiduals_(std::move(bestResiduals)) {}
  const std::vector<double>& bestResiduals() const { return bestResiduals_; }

private:
  std::vector<double> bestResiduals_;
};

// Requested spectrum window is too short to decide a threshold count; caller should raise the count.
class InsufficientSpectrumError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A pointwise construction hit a singular configuration (zero section, degenerate span).
class SingularPointError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace speclab
