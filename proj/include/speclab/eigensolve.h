#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "speclab/fem.h"

namespace speclab {

using Partition = std::vector<std::vector<int>>;

struct SpectrumResult {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // M-orthonormal columns
  Eigen::VectorXd residualNorms; // |K u - lambda M u| / |M u|
  Partition clusters;
  int iterations = 0;
  bool dense = false;

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

struct EigenOptions {
  double tol = 1e-8;
  std::uint64_t seed = 42;
  int maxIterations = 400;
  // Problems of at most this dimension go to a dense generalized solve.
  int denseLimit = 400;
  // Preconditioner is (K + shift M)^{-1}; shift must make that matrix positive definite.
  double shift = 1.0;
  // Extra block columns beyond `count`; negative selects max(4, count / 4).
  int extraVectors = -1;
  // Deflate the constant vector (known kernel of a connected stiffness form).
  bool deflateConstant = false;
  double clusterTol = 2e-2;
};

// Lowest `count` eigenpairs of K u = lambda M u. Requires count < dimension / 2 for the iterative path.
SpectrumResult solveLowest(const SymmetricForm& K, const SymmetricForm& M, int count,
                           const EigenOptions& options = {});

// Full dense solve of the pencil; the oracle for small problems.
SpectrumResult solveDense(const SymmetricForm& K, const SymmetricForm& M, int count, double clusterTol = 2e-2);

// Maximal runs of an ascending list whose consecutive relative gaps are below relTol.
// Values within absTol of zero are grouped with each other and nothing else.
Partition cluster(std::span<const double> eigenvalues, double relTol, double absTol = 1e-8);

struct ThresholdCount {
  int below = 0;  // #{lambda < threshold - guard}
  int at = 0;     // #{|lambda - threshold| <= guard}
  double guard = 0.0;
  bool stable = true; // counts unchanged with the guard scaled by 0.75 and 1.25
};

// Throws InsufficientSpectrumError when the spectrum does not reach past threshold + 1.25 guard.
ThresholdCount countThreshold(const SpectrumResult& spectrum, double threshold, double guard);
ThresholdCount countThreshold(std::span<const double> eigenvalues, double threshold, double guard);

// CSV "index,eigenvalue,residual,cluster_id".
void writeSpectrumCsv(const SpectrumResult& spectrum, std::ostream& out);

} // namespace speclab
