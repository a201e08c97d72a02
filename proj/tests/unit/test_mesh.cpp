#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "speclab/errors.h"
#include "speclab/mesh.h"

using namespace speclab;

TEST_CASE("mesh: icosphere counts") {
  const SphereMesh m0 = icosphere(0);
  CHECK(m0.vertexCount() == 12);
  CHECK(m0.triangleCount() == 20);
  for (int level = 0; level <= 4; ++level) {
    const SphereMesh m = icosphere(level);
    CHECK(m.vertexCount() == 10 * (1 << (2 * level)) + 2);
    CHECK(m.eulerCharacteristic() == 2);
    CHECK(m.isManifold());
    CHECK(static_cast<int>(m.edges().size()) == 3 * m.triangleCount() / 2);
  }
  CHECK(icosphere(3).vertexCount() == 642);
}

TEST_CASE("mesh: vertices are unit and triangles face outward") {
  const SphereMesh m = icosphere(3);
  for (const Vec3& v : m.vertices) CHECK(std::abs(v.norm() - 1.0) < 1e-14);
  for (const auto& t : m.triangles) {
    const Vec3 n = (m.vertices[t[1]] - m.vertices[t[0]]).cross(m.vertices[t[2]] - m.vertices[t[0]]);
    CHECK(n.dot(m.vertices[t[0]] + m.vertices[t[1]] + m.vertices[t[2]]) > 0.0);
  }
}

TEST_CASE("mesh: antipodal involution") {
  const SphereMesh m = icosphere(2);
  REQUIRE(m.antipodal.has_value());
  const auto& a = *m.antipodal;
  std::set<std::array<int, 3>> sorted;
  for (auto t : m.triangles) {
    std::sort(t.begin(), t.end());
    sorted.insert(t);
  }
  for (int i = 0; i < m.vertexCount(); ++i) {
    CHECK(a[i] != i);
    CHECK(a[a[i]] == i);
    CHECK((m.vertices[a[i]] + m.vertices[i]).norm() < 1e-14);
  }
  for (const auto& t : m.triangles) {
    std::array<int, 3> image{a[t[0]], a[t[1]], a[t[2]]};
    // Reversed orientation: the image triangle listed in reverse order is a mesh triangle up to rotation.
    const Vec3 n = (m.vertices[image[1]] - m.vertices[image[0]]).cross(m.vertices[image[2]] - m.vertices[image[0]]);
    CHECK(n.dot(m.vertices[image[0]]) < 0.0);
    std::sort(image.begin(), image.end());
    CHECK(sorted.contains(image));
  }
  CHECK(static_cast<int>(m.antipodalRepresentatives().size()) == m.vertexCount() / 2);
}

TEST_CASE("mesh: area converges to 4 pi") {
  double previous = 0.0;
  for (int level = 0; level <= 4; ++level) {
    const double area = icosphere(level).totalArea();
    CHECK(area > previous);
    CHECK(area < 4.0 * std::numbers::pi);
    previous = area;
  }
  CHECK(std::abs(previous - 4.0 * std::numbers::pi) / (4.0 * std::numbers::pi) < 5e-3);
}

TEST_CASE("mesh: invalid levels and asymmetric point sets") {
  CHECK_THROWS_AS(icosphere(-1), ConfigError);
  CHECK_THROWS_AS(icosphere(9), ConfigError);
  std::vector<Vec3> lopsided{Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitY()};
  CHECK_THROWS_AS(computeAntipodalMap(lopsided), ConfigError);
}

TEST_CASE("mesh: chart grid") {
  const ChartGrid g = chartGrid(Vec3::UnitZ(), 1.0, 3);
  CHECK(g.points.size() == 9);
  CHECK(std::abs(g.points[4]) == doctest::Approx(0.0));
  CHECK(g.spacing == doctest::Approx(1.0));
  CHECK((g.chart().toSphere(0.0) - Vec3::UnitZ()).norm() < 1e-15);
  CHECK(chartGrid(Vec3::UnitX(), 0.3, 7).spacing == doctest::Approx(0.1));
  CHECK_THROWS_AS(chartGrid(Vec3::UnitZ(), 0.0, 3), ConfigError);
  CHECK_THROWS_AS(chartGrid(Vec3::UnitZ(), 1.0, 2), ConfigError);
}

TEST_CASE("mesh: stereographic chart round trip and conformal factor") {
  const Vec3 c = Vec3(1.0, 2.0, -0.5).normalized();
  const StereographicChart chart(c);
  CHECK((chart.toSphere(0.0) - c).norm() < 1e-14);
  for (Complex z : {Complex(0.3, -0.2), Complex(-1.5, 0.7), Complex(0.0, 2.0)}) {
    const Vec3 x = chart.toSphere(z);
    CHECK(std::abs(x.norm() - 1.0) < 1e-14);
    CHECK(std::abs(chart.toChart(x) - z) < 1e-12);
    // |dx/dz|^2 from a centred difference matches the conformal factor.
    const double h = 1e-6;
    const Vec3 dx = (chart.toSphere(z + h) - chart.toSphere(z - h)) / (2 * h);
    CHECK(dx.squaredNorm() == doctest::Approx(StereographicChart::conformalFactor(z)).epsilon(1e-6));
  }
}

TEST_CASE("mesh: OFF export") {
  std::ostringstream out;
  writeOff(icosphere(0), out);
  std::istringstream in(out.str());
  std::string header;
  int v, f, e;
  in >> header >> v >> f >> e;
  CHECK(header == "OFF");
  CHECK(v == 12);
  CHECK(f == 20);
}
