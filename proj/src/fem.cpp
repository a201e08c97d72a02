#include "speclab/fem.h"

#include "speclab/errors.h"

#include <cmath>
#include <numeric>
#include <ostream>

namespace speclab {

double Density::mean() const {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / values.size();
}

double Density::floor() const {
  const double m = mean();
  return m > 0 ? clampFactor * m : clampFactor;
}

void Density::validate(int vertexCount) const {
  if (size() != vertexCount) {
    throw ConfigError("density has " + std::to_string(size()) + " values for " + std::to_string(vertexCount) +
                      " vertices");
  }
  for (int i = 0; i < size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0) {
      throw ConfigError("density entry " + std::to_string(i) + " is negative or not finite");
    }
  }
}

SymmetricForm assembleStiffness(const SphereMesh& mesh) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.triangles.size() * 12);
  for (int t = 0; t < mesh.triangleCount(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    const double doubleArea = (b - a).cross(c - a).norm();
    if (0.5 * doubleArea < 1e-16) {
      throw AssemblyError("degenerate triangle " + std::to_string(t) + " (area below 1e-16)", t);
    }
    for (int k = 0; k < 3; ++k) {
      // Edge (i, j) opposite corner o: weight cot(angle at o) / 2.
      const int o = tri[k], i = tri[(k + 1) % 3], j = tri[(k + 2) % 3];
      const Vec3 u = mesh.vertices[i] - mesh.vertices[o];
      const Vec3 v = mesh.vertices[j] - mesh.vertices[o];
      const double w = 0.5 * u.dot(v) / doubleArea;
      triplets.emplace_back(i, j, -w);
      triplets.emplace_back(j, i, -w);
      triplets.emplace_back(i, i, w);
      triplets.emplace_back(j, j, w);
    }
  }
  SymmetricForm form;
  form.matrix.resize(mesh.vertexCount(), mesh.vertexCount());
  form.matrix.setFromTriplets(triplets.begin(), triplets.end());
  form.matrix.makeCompressed();
  return form;
}

std::vector<double> vertexAreas(const SphereMesh& mesh) {
  std::vector<double> areas(mesh.vertexCount(), 0.0);
  for (const auto& tri : mesh.triangles) {
    const Vec3& a = mesh.vertices[tri[0]];
    const double third =
        0.5 * (mesh.vertices[tri[1]] - a).cross(mesh.vertices[tri[2]] - a).norm() / 3.0;
    for (int k : tri) areas[k] += third;
  }
  return areas;
}

SymmetricForm assembleMass(const SphereMesh& mesh, const Density& density, MassKind kind) {
  density.validate(mesh.vertexCount());
  const double eps = density.floor();
  const int n = mesh.vertexCount();
  SymmetricForm form;
  form.matrix.resize(n, n);
  std::vector<Eigen::Triplet<double>> triplets;
  if (kind == MassKind::Lumped) {
    const auto areas = vertexAreas(mesh);
    triplets.reserve(n);
    for (int i = 0; i < n; ++i) triplets.emplace_back(i, i, std::max(density.values[i], eps) * areas[i]);
    form.diagonal = true;
  } else {
    triplets.reserve(mesh.triangles.size() * 9);
    for (const auto& tri : mesh.triangles) {
      const Vec3& a = mesh.vertices[tri[0]];
      const double ar = 0.5 * (mesh.vertices[tri[1]] - a).cross(mesh.vertices[tri[2]] - a).norm();
      double rho = 0.0;
      for (int k : tri) rho += std::max(density.values[k], eps) / 3.0;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) triplets.emplace_back(tri[r], tri[c], rho * ar / 12.0 * (r == c ? 2.0 : 1.0));
    }
  }
  form.matrix.setFromTriplets(triplets.begin(), triplets.end());
  form.matrix.makeCompressed();
  return form;
}

double area(const SphereMesh& mesh, const Density& density) {
  density.validate(mesh.vertexCount());
  const auto areas = vertexAreas(mesh);
  double sum = 0.0;
  for (int i = 0; i < mesh.vertexCount(); ++i) sum += density.values[i] * areas[i];
  return sum;
}

SparseMatrix antipodalSectorBasis(const SphereMesh& mesh, int sign) {
  if (sign != 1 && sign != -1) throw ConfigError("sector sign must be +1 or -1");
  const auto reps = mesh.antipodalRepresentatives();
  const auto& sigma = *mesh.antipodal;
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(reps.size() * 2);
  for (int c = 0; c < static_cast<int>(reps.size()); ++c) {
    triplets.emplace_back(reps[c], c, s);
    triplets.emplace_back(sigma[reps[c]], c, sign * s);
  }
  SparseMatrix basis(mesh.vertexCount(), static_cast<int>(reps.size()));
  basis.setFromTriplets(triplets.begin(), triplets.end());
  return basis;
}

SymmetricForm restrictToSector(const SymmetricForm& form, const SparseMatrix& basis) {
  SymmetricForm out;
  out.matrix = (basis.transpose() * form.matrix * basis).pruned();
  out.matrix.makeCompressed();
  out.diagonal = form.diagonal;
  return out;
}

void writeMatrixMarket(const SymmetricForm& form, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  long nnz = 0;
  for (int k = 0; k < form.matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(form.matrix, k); it; ++it)
      if (it.row() >= it.col()) ++nnz;
  out << form.matrix.rows() << ' ' << form.matrix.cols() << ' ' << nnz << '\n';
  out.precision(17);
  for (int k = 0; k < form.matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(form.matrix, k); it; ++it)
      if (it.row() >= it.col()) out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

} // namespace speclab
