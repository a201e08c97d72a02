#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "speclab/errors.h"
#include "speclab/fem.h"
#include "speclab/maps.h"
#include "speclab/mesh.h"

using namespace speclab;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Vec3> randomPoints(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  std::vector<Vec3> out;
  for (int i = 0; i < count; ++i) out.push_back(Vec3(n(rng), n(rng), n(rng)).normalized());
  return out;
}

// Energy of a holomorphic f in the plane: int 4 |f'|^2 / (1 + |f|^2)^2 dx dy, with r = t / (1 - t).
template <class F, class DF>
double planeEnergy(F f, DF df, int radial = 4000, int angular = 256) {
  double sum = 0.0;
  for (int i = 0; i < radial; ++i) {
    const double t = (i + 0.5) / radial;
    const double r = t / (1.0 - t), drdt = 1.0 / ((1.0 - t) * (1.0 - t));
    for (int j = 0; j < angular; ++j) {
      const Complex z = std::polar(r, 2.0 * kPi * (j + 0.5) / angular);
      const double w = 1.0 + std::norm(f(z));
      sum += 4.0 * std::norm(df(z)) / (w * w) * r * drdt;
    }
  }
  return sum * (1.0 / radial) * (2.0 * kPi / angular);
}

double eigenResidual(const HarmonicMap& map, const SphereMesh& mesh) {
  const SymmetricForm K = assembleStiffness(mesh);
  const SymmetricForm M = assembleMass(mesh, energyDensity(map, mesh));
  double worst = 0.0;
  for (int c = 0; c < map.components(); ++c) {
    Eigen::VectorXd f(mesh.vertexCount());
    for (int i = 0; i < mesh.vertexCount(); ++i) f(i) = map.value(mesh.vertices[i])(c);
    const Eigen::VectorXd rhs = 2.0 * (M.matrix * f);
    if (rhs.norm() == 0.0) continue;
    worst = std::max(worst, (K.matrix * f - rhs).norm() / rhs.norm());
  }
  return worst;
}

} // namespace

TEST_CASE("maps: veronese unit norm") {
  for (int m = 1; m <= 4; ++m) {
    const HarmonicMap map(veronese(m));
    CHECK(map.components() == 2 * m + 1);
    for (const Vec3& x : randomPoints(100, 11 + m)) {
      CHECK(std::abs(map.value(x).norm() - 1.0) < 1e-12);
      CHECK(map.energyDensity(x) == doctest::Approx(m * (m + 1) / 2.0).epsilon(1e-12));
      const MapSample s = map.sample(x);
      CHECK((s.jacobian * s.value).cwiseAbs().maxCoeff() < 1e-10);
    }
    for (const Polynomial3& f : veronese(m).components) {
      CHECK(f.isHomogeneous(m));
      double lap = 0.0;
      const Polynomial3 l = f.laplacian();
      for (const auto& [e, c] : l.terms()) lap = std::max(lap, std::abs(c));
      CHECK(lap < 1e-12);
    }
    CHECK(map.isEven() == (m % 2 == 0));
  }
  // Degree one components span the coordinate functions.
  for (const Polynomial3& f : veronese(1).components) CHECK(f.degree() == 1);
  CHECK_THROWS_AS(veronese(0), ConfigError);
  CHECK_THROWS_AS(veronese(5), ConfigError);
}

TEST_CASE("maps: holomorphic energy density") {
  const SphereMesh mesh = icosphere(3);
  const HarmonicMap id = parseMap("rational:z");
  for (const Vec3& x : mesh.vertices) CHECK(id.energyDensity(x) == doctest::Approx(1.0).epsilon(1e-12));
  for (const Vec3& x : randomPoints(50, 3)) CHECK(std::abs(parseMap("rational:z^3-2z/(0.5z^2+1i)").value(x).norm() - 1.0) < 1e-12);
}

TEST_CASE("maps: degree from energy") {
  // Plane quadrature oracle for holomorphic maps.
  const double e2 = planeEnergy([](Complex z) { return z * z; }, [](Complex z) { return 2.0 * z; });
  const double e3 = planeEnergy([](Complex z) { return z * z * z; }, [](Complex z) { return 3.0 * z * z; });
  CHECK(e2 / (4 * kPi) == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(e3 / (4 * kPi) == doctest::Approx(3.0).epsilon(1e-3));

  const SphereMesh mesh = icosphere(4);
  CHECK(std::abs(energy(parseMap("rational:z^2"), mesh) - e2) / e2 < 0.01);
  CHECK(degree(parseMap("rational:z^3"), mesh) == 3);
  CHECK(degree(HarmonicMap(veronese(2)), mesh) == 3);
  CHECK(degree(HarmonicMap(veronese(3)), mesh) == 6);
  CHECK(degree(HarmonicMap(veronese(4)), mesh) == 10);

  // A non-harmonic map with fractional energy is rejected.
  PolynomialMap bad = veronese(1);
  bad.components[0] = bad.components[0] * 1.2;
  CHECK_THROWS_AS(degree(HarmonicMap(bad), mesh), ConfigError);
}

TEST_CASE("maps: harmonicity residual") {
  const auto points = randomPoints(200, 9);
  for (int m = 1; m <= 4; ++m) CHECK(harmonicityResidual(HarmonicMap(veronese(m)), points) < 1e-10);
  CHECK(harmonicityResidual(parseMap("rational:z^3/(z-2)"), points) == 0.0);
  PolynomialMap perturbed = veronese(2);
  perturbed.components[0] = perturbed.components[0] + Polynomial3::monomial(1, 0, 0, 0.5);
  CHECK(harmonicityResidual(HarmonicMap(perturbed), points) > 0.1);
}

TEST_CASE("maps: components are eigenfunctions of the energy metric") {
  const SphereMesh mesh = icosphere(4);
  CHECK(eigenResidual(HarmonicMap(veronese(2)), mesh) < 0.02);
  CHECK(eigenResidual(parseMap("rational:z^2"), mesh) < 0.05);
}

TEST_CASE("maps: descriptor grammar") {
  CHECK(parseMap("veronese:3").components() == 7);
  const HarmonicMap r = parseMap("rational:(1+2i)z^2 - 0.5z + 3/z+1");
  REQUIRE(r.isRational());
  CHECK(r.rational().degree() == 2);
  CHECK(r.rational().p[2] == Complex(1.0, 2.0));
  CHECK(r.rational().p[1] == Complex(-0.5, 0.0));
  const HarmonicMap padded = parseMap("pad:veronese:1:4");
  CHECK(padded.components() == 5);
  CHECK_FALSE(padded.linearlyFull());
  CHECK(parseComplexPolynomial("2.5i*z") == std::vector<Complex>{0.0, Complex(0.0, 2.5)});
  for (const char* bad : {"veronese:", "veronese:x", "rational:z^2/z", "rational:", "torus:1", "pad:veronese:1:x",
                          "pad:veronese:1:2", "rational:z^2+", "rational:0"}) {
    CHECK_THROWS_AS(parseMap(bad), ConfigError);
  }
}

TEST_CASE("maps: mobius postcomposition") {
  const RationalMap f = parseMap("rational:z^2").rational();
  const RationalMap same = mobiusPostcompose(f, 1.0, 0.0, 0.0, 1.0);
  const RationalMap dilated = mobiusPostcompose(f, 2.0, 0.0, 0.0, 1.0);
  CHECK(dilated.degree() == 2);
  CHECK(mobiusPostcompose(f, 1.0, 2.0, Complex(0.0, 1.0), 3.0).degree() == 2);
  for (const Vec3& x : randomPoints(20, 4)) {
    CHECK((HarmonicMap(same).value(x) - HarmonicMap(f).value(x)).norm() < 1e-12);
  }
  CHECK_THROWS_AS(mobiusPostcompose(f, 1.0, 2.0, 2.0, 4.0), ConfigError);
}

TEST_CASE("maps: padding") {
  const SphereMesh mesh = icosphere(3);
  const HarmonicMap phi(veronese(1));
  const HarmonicMap padded = embedInLargerSphere(phi, 4);
  CHECK(padded.components() == 5);
  CHECK(padded.targetDimension() == 4);
  CHECK_FALSE(padded.linearlyFull());
  for (const Vec3& x : mesh.vertices) {
    const Eigen::VectorXd v = padded.value(x);
    CHECK(v(3) == 0.0);
    CHECK(v(4) == 0.0);
  }
  CHECK(energy(padded, mesh) == doctest::Approx(energy(phi, mesh)));
  CHECK(degree(padded, mesh) == degree(phi, mesh));
  CHECK_THROWS_AS(embedInLargerSphere(phi, 2), ConfigError);
}
