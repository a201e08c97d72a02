#pragma once

#include <array>
#include <complex>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace speclab {

using Vec3 = Eigen::Vector3d;
using Complex = std::complex<double>;

/// Triangulated unit sphere. Triangles are counterclockwise seen from outside.
/// When `antipodal` is set, antipodal[i] is the index of the vertex at -vertices[i].
struct SphereMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  int level = 0;
  std::optional<std::vector<int>> antipodal;

  int vertexCount() const { return static_cast<int>(vertices.size()); }
  int triangleCount() const { return static_cast<int>(triangles.size()); }

  // Unique undirected edges (i < j), sorted.
  std::vector<std::array<int, 2>> edges() const;
  int eulerCharacteristic() const;
  // Every edge shared by exactly two triangles, with opposite orientations.
  bool isManifold() const;
  // Sum of flat triangle areas.
  double totalArea() const;

  // Representative vertex of each antipodal pair (the smaller index). Requires `antipodal`.
  std::vector<int> antipodalRepresentatives() const;
};

// Midpoint-subdivided icosahedron, projected to the unit sphere. 0 <= level <= 8.
SphereMesh icosphere(int level);

// Nearest-vertex matching of -v, then checked to be a fixed-point-free involution.
// Throws ConfigError when the mesh is not centrally symmetric.
std::vector<int> computeAntipodalMap(const std::vector<Vec3>& vertices, double tol = 1e-10);

/// Stereographic chart centred at a point c of the unit sphere, projecting from -c.
/// z = (y1 + i y2) / (1 + y3) with y = R^T x, where R is a rotation taking e3 to c.
class StereographicChart {
public:
  explicit StereographicChart(const Vec3& center);

  const Vec3& center() const { return center_; }
  const Eigen::Matrix3d& rotation() const { return rotation_; }

  Vec3 toSphere(Complex z) const;
  Complex toChart(const Vec3& x) const;
  // Round metric is conformalFactor(z) * |dz|^2.
  static double conformalFactor(Complex z);

private:
  Vec3 center_;
  Eigen::Matrix3d rotation_;
};

// Rotation with R * e3 = c (deterministic choice).
Eigen::Matrix3d rotationTo(const Vec3& c);

struct ChartGrid {
  Vec3 center;
  double radius = 0.0;
  int n = 0;
  double spacing = 0.0;
  // Row-major n x n samples on the square [-radius, radius]^2.
  std::vector<Complex> points;

  StereographicChart chart() const { return StereographicChart(center); }
};

// n x n grid of chart coordinates with spacing 2 radius / (n - 1). Requires radius > 0, n >= 3.
ChartGrid chartGrid(const Vec3& center, double radius, int n);

// OFF export: "OFF", counts line, vertex lines, "3 i j k" face lines.
void writeOff(const SphereMesh& mesh, std::ostream& out);

} // namespace speclab
