#include "speclab/mesh.h"

#include "speclab/errors.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <unordered_map>

namespace speclab {

namespace {

SphereMesh icosahedron() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  SphereMesh mesh;
  const double raw[12][3] = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
                             {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
                             {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (const auto& r : raw) mesh.vertices.push_back(Vec3(r[0], r[1], r[2]).normalized());
  mesh.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                    {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                    {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  // Orient counterclockwise as seen from outside.
  for (auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    if ((b - a).cross(c - a).dot(a + b + c) < 0) std::swap(t[1], t[2]);
  }
  return mesh;
}

SphereMesh subdivide(const SphereMesh& in) {
  SphereMesh out;
  out.vertices = in.vertices;
  out.level = in.level + 1;
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    int idx = static_cast<int>(out.vertices.size());
    out.vertices.push_back((out.vertices[a] + out.vertices[b]).normalized());
    midpoint.emplace(key, idx);
    return idx;
  };
  out.triangles.reserve(in.triangles.size() * 4);
  for (const auto& t : in.triangles) {
    int ab = mid(t[0], t[1]);
    int bc = mid(t[1], t[2]);
    int ca = mid(t[2], t[0]);
    out.triangles.push_back({t[0], ab, ca});
    out.triangles.push_back({t[1], bc, ab});
    out.triangles.push_back({t[2], ca, bc});
    out.triangles.push_back({ab, bc, ca});
  }
  return out;
}

struct CellKey {
  long x, y, z;
  bool operator==(const CellKey&) const = default;
};
struct CellHash {
  size_t operator()(const CellKey& k) const {
    return std::hash<long>()(k.x * 73856093L ^ k.y * 19349663L ^ k.z * 83492791L);
  }
};

} // namespace

std::vector<std::array<int, 2>> SphereMesh::edges() const {
  std::vector<std::array<int, 2>> result;
  result.reserve(triangles.size() * 3);
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      result.push_back({std::min(a, b), std::max(a, b)});
    }
  }
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

int SphereMesh::eulerCharacteristic() const {
  return vertexCount() - static_cast<int>(edges().size()) + triangleCount();
}

bool SphereMesh::isManifold() const {
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      if (++directed[{t[k], t[(k + 1) % 3]}] > 1) return false;
    }
  }
  for (const auto& [e, count] : directed) {
    if (!directed.count({e.second, e.first})) return false;
  }
  return true;
}

double SphereMesh::totalArea() const {
  double sum = 0.0;
  for (const auto& t : triangles) {
    sum += 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
  }
  return sum;
}

std::vector<int> SphereMesh::antipodalRepresentatives() const {
  if (!antipodal) throw ConfigError("mesh has no antipodal involution");
  std::vector<int> reps;
  reps.reserve(vertices.size() / 2);
  for (int i = 0; i < vertexCount(); ++i) {
    if (i < (*antipodal)[i]) reps.push_back(i);
  }
  return reps;
}

std::vector<int> computeAntipodalMap(const std::vector<Vec3>& vertices, double tol) {
  const double cell = 1e-3;
  auto keyOf = [&](const Vec3& v) {
    return CellKey{std::lround(std::floor(v.x() / cell)), std::lround(std::floor(v.y() / cell)),
                   std::lround(std::floor(v.z() / cell))};
  };
  std::unordered_map<CellKey, std::vector<int>, CellHash> grid;
  for (int i = 0; i < static_cast<int>(vertices.size()); ++i) grid[keyOf(vertices[i])].push_back(i);

  std::vector<int> map(vertices.size(), -1);
  for (int i = 0; i < static_cast<int>(vertices.size()); ++i) {
    const Vec3 target = -vertices[i];
    const CellKey k = keyOf(target);
    int best = -1;
    double bestDist = tol;
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy)
        for (long dz = -1; dz <= 1; ++dz) {
          auto it = grid.find({k.x + dx, k.y + dy, k.z + dz});
          if (it == grid.end()) continue;
          for (int j : it->second) {
            double d = (vertices[j] - target).norm();
            if (d <= bestDist) {
              bestDist = d;
              best = j;
            }
          }
        }
    if (best < 0) throw ConfigError("vertex " + std::to_string(i) + " has no antipodal partner");
    map[i] = best;
  }
  for (int i = 0; i < static_cast<int>(map.size()); ++i) {
    if (map[i] == i || map[map[i]] != i) throw ConfigError("antipodal matching is not a fixed-point-free involution");
  }
  return map;
}

SphereMesh icosphere(int level) {
  if (level < 0 || level > 8) throw ConfigError("icosphere level must be in [0, 8], got " + std::to_string(level));
  SphereMesh mesh = icosahedron();
  for (int l = 0; l < level; ++l) mesh = subdivide(mesh);
  mesh.antipodal = computeAntipodalMap(mesh.vertices);
  return mesh;
}

Eigen::Matrix3d rotationTo(const Vec3& c) {
  const Vec3 e3(0, 0, 1);
  const Vec3 n = c.normalized();
  const double cosAngle = e3.dot(n);
  if (cosAngle > 1.0 - 1e-15) return Eigen::Matrix3d::Identity();
  if (cosAngle < -1.0 + 1e-15) return Eigen::Vector3d(1, -1, -1).asDiagonal();
  const Vec3 axis = e3.cross(n).normalized();
  return Eigen::AngleAxisd(std::acos(std::clamp(cosAngle, -1.0, 1.0)), axis).toRotationMatrix();
}

StereographicChart::StereographicChart(const Vec3& center) : center_(center.normalized()), rotation_(rotationTo(center)) {}

Vec3 StereographicChart::toSphere(Complex z) const {
  const double r2 = std::norm(z);
  const Vec3 y(2 * z.real() / (1 + r2), 2 * z.imag() / (1 + r2), (1 - r2) / (1 + r2));
  return rotation_ * y;
}

Complex StereographicChart::toChart(const Vec3& x) const {
  const Vec3 y = rotation_.transpose() * x;
  return Complex(y.x(), y.y()) / (1.0 + y.z());
}

double StereographicChart::conformalFactor(Complex z) {
  const double s = 1.0 + std::norm(z);
  return 4.0 / (s * s);
}

ChartGrid chartGrid(const Vec3& center, double radius, int n) {
  if (!(radius > 0) || !std::isfinite(radius)) throw ConfigError("chart radius must be positive and finite");
  if (n < 3) throw ConfigError("chart grid needs n >= 3");
  if (std::abs(center.norm() - 1.0) > 1e-12) throw ConfigError("chart center must be a unit vector");
  ChartGrid grid;
  grid.center = center;
  grid.radius = radius;
  grid.n = n;
  grid.spacing = 2.0 * radius / (n - 1);
  grid.points.reserve(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // Symmetric index arithmetic keeps the middle sample exactly at 0 for odd n.
      double x = (2 * j - (n - 1)) * radius / (n - 1);
      double y = ((n - 1) - 2 * i) * radius / (n - 1);
      grid.points.emplace_back(x, y);
    }
  }
  return grid;
}

void writeOff(const SphereMesh& mesh, std::ostream& out) {
  out << "OFF\n" << mesh.vertexCount() << ' ' << mesh.triangleCount() << " 0\n";
  out.precision(17);
  for (const auto& v : mesh.vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

} // namespace speclab
