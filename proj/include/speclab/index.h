#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "speclab/eigensolve.h"
#include "speclab/fem.h"
#include "speclab/maps.h"
#include "speclab/mesh.h"

namespace speclab {

enum class Surface { S2, RP2 };

std::string toString(Surface s);
// "s2" or "rp2", case-insensitive. Throws ConfigError otherwise.
Surface parseSurface(const std::string& text);

struct IndexOptions {
  EigenOptions eigen;
  // Guard band for the scalar threshold 2 count.
  double spectralGuard = 0.1;
  // Guard for the Jacobi zero count as a fraction of the smallest nonzero |eigenvalue| in the window.
  double jacobiGuardFraction = 0.05;
  // Initial eigenpair counts; doubled until the window reaches past the guard.
  int spectralCount = 24;
  int jacobiCount = 48;
};

/// Index and nullity read off a spectrum window around a threshold.
struct CountPair {
  int index = 0;
  int nullity = 0;
  bool stable = true;
  double guard = 0.0;
  std::vector<double> eigenvalues;
};

// Eigenvalues of Delta_{g_Phi} below 2 and equal to 2, on the whole sphere.
CountPair spectralIndex(const HarmonicMap& map, const SphereMesh& mesh, const IndexOptions& options = {});
// Same on the antipodally even sector. Requires an even map and an antipodal mesh.
CountPair rp2SpectralIndex(const HarmonicMap& map, const SphereMesh& mesh, const IndexOptions& options = {});

/// Jacobi form restricted to fields with V(x_i) . Phi(x_i) = 0, in per-vertex frames of Phi^perp.
struct JacobiPencil {
  SymmetricForm stiffness; // P^T (K - W) P with W = diag(|grad Phi|^2 A_i)
  SymmetricForm mass;      // diag(A_i) per frame direction
  // frames[i] has the n orthonormal columns spanning Phi(x_i)^perp.
  std::vector<Eigen::MatrixXd> frames;
  int fiber = 0; // n = number of frame vectors per vertex
  int ambient = 0; // n + 1

  // Ambient field (one (n+1)-vector per vertex) from a reduced vector, and back by projection.
  std::vector<Eigen::VectorXd> reconstruct(const Eigen::VectorXd& reduced) const;
  Eigen::VectorXd reduce(const std::vector<Eigen::VectorXd>& field) const;
};

// Householder frame: orthonormal columns completing phi to a basis.
Eigen::MatrixXd orthogonalFrame(const Eigen::VectorXd& phi);

JacobiPencil buildJacobiPencil(const HarmonicMap& map, const SphereMesh& mesh);
// Restriction to V(sigma x) = sign V(x). Requires an even map and an antipodal mesh.
SparseMatrix jacobiSectorBasis(const SphereMesh& mesh, int fiber, int sign);

// Lowest eigenpairs of the Jacobi pencil (sector 0 = all fields, +1 even, -1 odd).
SpectrumResult jacobiSpectrum(const JacobiPencil& pencil, const SphereMesh& mesh, int count, const EigenOptions& options,
                              int sector = 0);

// Negative and near-zero eigenvalue counts of the Jacobi pencil.
CountPair energyIndex(const HarmonicMap& map, const SphereMesh& mesh, const IndexOptions& options = {},
                      int sector = 0);
// Zero guard used for a Jacobi window: fraction times the smallest |lambda| beyond the near-zero cluster.
double jacobiGuard(std::span<const double> eigenvalues, double fraction);

struct Rp2EnergyResult {
  CountPair even;
  CountPair odd;
  CountPair full;
  bool indexHalves = false;
  bool nullityHalves = false;
};
Rp2EnergyResult rp2EnergyIndex(const HarmonicMap& map, const SphereMesh& mesh, const IndexOptions& options = {});

struct InequalityVerdict {
  std::string name;
  bool pass = false;
  bool equality = false;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string relation; // ">=" or ">"
  std::string citation;
  bool operator==(const InequalityVerdict&) const = default;
};

struct IndexReport {
  std::string map;
  Surface surface = Surface::S2;
  int meshLevel = 0;
  int jacobiMeshLevel = 0;
  int m = 0;
  int n = 0; // target sphere dimension
  int d = 0;
  int indS = 0, nulS = 0, indE = 0, nulE = 0;
  bool stable = true;
  bool linearlyFull = true;
  double spectralGuard = 0.0;
  double jacobiGuard = 0.0;
  std::vector<InequalityVerdict> inequalities;
  bool operator==(const IndexReport&) const = default;
};

// Evaluates every inequality that applies to the report's surface with integer arithmetic.
std::vector<InequalityVerdict> verifyInequalities(const IndexReport& report);

// Full pipeline for one map on one surface: degree, spectral and energy counts, verdicts.
// The Jacobi pencil is built on icosphere(jacobiMeshLevel), or on the scalar mesh when it is negative.
IndexReport computeIndexReport(const HarmonicMap& map, Surface surface, int meshLevel,
                               const IndexOptions& options = {}, int jacobiMeshLevel = -1);

} // namespace speclab
