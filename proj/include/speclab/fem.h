#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Sparse>

#include "speclab/mesh.h"

namespace speclab {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Per-vertex conformal weight rho >= 0 of the metric rho * g_round.
/// Zeros are allowed at isolated vertices (conical points); assembly clamps them to `floor()`.
struct Density {
  std::vector<double> values;
  double clampFactor = 1e-10;

  static Density constant(int n, double value) { return Density{std::vector<double>(n, value)}; }

  int size() const { return static_cast<int>(values.size()); }
  double mean() const;
  // eps_rho = clampFactor * mean density (clampFactor alone for an identically zero density).
  double floor() const;
  // Throws ConfigError on negative or non-finite entries, or a size mismatch.
  void validate(int vertexCount) const;
};

/// Sparse symmetric form. Stiffness forms have zero row sums; mass forms are positive definite.
struct SymmetricForm {
  SparseMatrix matrix;
  bool diagonal = false;

  int dimension() const { return static_cast<int>(matrix.rows()); }
  double quadratic(const Eigen::VectorXd& x) const { return x.dot(matrix * x); }
  double trace() const { return matrix.diagonal().sum(); }
};

enum class MassKind { Lumped, Consistent };

// Piecewise linear cotangent Dirichlet form. Takes no density: the Dirichlet energy is conformally invariant in 2D.
SymmetricForm assembleStiffness(const SphereMesh& mesh);

// Lumped: diag(max(rho_i, eps) * A_i), A_i the barycentric vertex area.
// Consistent: triangle-averaged density times the P1 consistent mass.
SymmetricForm assembleMass(const SphereMesh& mesh, const Density& density, MassKind kind = MassKind::Lumped);

// Barycentric (one third of each incident flat triangle) vertex areas.
std::vector<double> vertexAreas(const SphereMesh& mesh);

// sum_i rho_i A_i.
double area(const SphereMesh& mesh, const Density& density);

// Pencil restricted to antipodally even (sign = +1) or odd (sign = -1) vertex functions,
// in the basis (e_i + sign e_sigma(i)) / sqrt(2) over antipodal representatives.
SparseMatrix antipodalSectorBasis(const SphereMesh& mesh, int sign);
SymmetricForm restrictToSector(const SymmetricForm& form, const SparseMatrix& basis);

// MatrixMarket coordinate export (symmetric, lower triangle).
void writeMatrixMarket(const SymmetricForm& form, std::ostream& out);

} // namespace speclab
