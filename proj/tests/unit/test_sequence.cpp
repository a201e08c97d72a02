#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "speclab/errors.h"
#include "speclab/index.h"
#include "speclab/maps.h"
#include "speclab/mesh.h"
#include "speclab/sequence.h"

using namespace speclab;

namespace {

double row(const std::vector<IdentityResidual>& rows, const std::string& name) {
  for (const auto& r : rows)
    if (r.identity == name) return r.maxResidual;
  FAIL("missing row " << name);
  return 0.0;
}

bool allConverged(const std::vector<IdentityResidual>& rows) {
  for (const auto& r : rows)
    if (!r.converged) return false;
  return true;
}

ChartGrid gridFor(const HarmonicMap& map, double radius = 0.15, int n = 7) {
  return chartGrid(chooseChartCenter(map), radius, n);
}

std::vector<Vec3> randomPoints(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  std::vector<Vec3> out;
  for (int i = 0; i < count; ++i) out.push_back(Vec3(n(rng), n(rng), n(rng)).normalized());
  return out;
}

} // namespace

TEST_CASE("sequence: veronese identities") {
  for (int m = 1; m <= 3; ++m) {
    const HarmonicMap map(veronese(m));
    const HarmonicSequence seq = buildSequence(map, gridFor(map));
    CHECK(seq.termination == m);
    const auto rows = verifyIdentities(seq);
    CHECK(rows.size() == 6);
    CHECK(allConverged(rows));
    for (const auto& r : rows)
      if (r.identity != "termination") CHECK(r.maxResidual < 1e-8);
  }
}

TEST_CASE("sequence: rational identities") {
  for (const char* d : {"rational:z^2", "rational:(z^3 - 0.5z)/(0.2z^2 + 1)", "pad:veronese:1:4"}) {
    const HarmonicMap map = parseMap(d);
    const auto rows = verifyIdentities(buildSequence(map, gridFor(map)));
    CHECK_MESSAGE(allConverged(rows), d);
  }
}

TEST_CASE("sequence: finite difference identities") {
  const HarmonicMap map = parseMap("rational:z^2");
  SequenceOptions fd;
  fd.mode = DerivativeMode::FiniteDifference;
  fd.step = 1e-3;
  const HarmonicSequence seq = buildSequence(map, gridFor(map), fd);
  const auto rows = verifyIdentities(seq);
  for (const auto& r : rows) CHECK_MESSAGE(r.maxResidual < 1e-5, r.identity);
  CHECK(seq.termination == 1);
}

TEST_CASE("sequence: gamma zero against finite differences") {
  // gamma_0 = |Phi_z|^2 = (|Phi_x|^2 + |Phi_y|^2) / 4 with centred differences in the chart.
  for (const char* d : {"veronese:2", "rational:z^2+z"}) {
    const HarmonicMap map = parseMap(d);
    const ChartGrid grid = gridFor(map);
    const StereographicChart chart = grid.chart();
    const double h = 1e-4;
    auto at = [&](Complex z) { return map.value(chart.toSphere(z)); };
    const Eigen::VectorXd px = (at(h) - at(-h)) / (2 * h);
    const Eigen::VectorXd py = (at(Complex(0, h)) - at(Complex(0, -h))) / (2 * h);
    const double oracle = 0.25 * (px.squaredNorm() + py.squaredNorm());
    const HarmonicSequence seq = buildSequence(map, chartGrid(grid.center, 0.1, 3));
    const double gamma0 = seq.samples[4].gamma[0].value().real();
    CHECK(std::abs(gamma0 - oracle) / oracle < 1e-6);
  }
}

TEST_CASE("sequence: perturbed section fails the dbar relation") {
  const HarmonicMap map(veronese(2));
  HarmonicSequence seq = buildSequence(map, gridFor(map));
  for (LocalSequence& s : seq.samples) {
    for (Jet& c : s.f[1]) c = c + c * Jet::wVariable(0.0, c.order()) * 0.5;
  }
  CHECK(row(verifyIdentities(seq), "dbar_relation") > 1e-2);
}

TEST_CASE("sequence: singular samples are named") {
  // z^2 branches at z = 0, the north pole of the standard chart.
  const HarmonicMap map = parseMap("rational:z^2");
  try {
    (void)buildSequence(map, chartGrid(Vec3::UnitZ(), 0.1, 3));
    FAIL("expected SingularPointError");
  } catch (const SingularPointError& e) {
    CHECK(std::string(e.what()).find("sample") != std::string::npos);
  }
}

TEST_CASE("sequence: conjugate field laws") {
  for (const char* d : {"veronese:2", "rational:z^2"}) {
    const HarmonicMap map = parseMap(d);
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const FieldJet v = projectedPolynomialField(map, randomPolynomialField(map.components(), 2, seed));
      const FieldJet vs = conjugateFieldFunction(map, v);
      const FieldJet vss = conjugateFieldFunction(map, vs);
      for (const Vec3& x : randomPoints(10, seed)) {
        const Eigen::VectorXd a = pointFieldFromJet(v)(x), b = pointFieldFromJet(vss)(x), c = pointFieldFromJet(vs)(x);
        CHECK((a + b).norm() < 1e-9 * std::max(1.0, a.norm()));
        CHECK(std::abs(c.dot(map.value(x))) < 1e-10);
      }
      const double q = continuumEnergyForm(map, v), qs = continuumEnergyForm(map, vs);
      CHECK(std::abs(q - qs) < 1e-6 * std::abs(q));
      CHECK(continuumNormSquared(v) == doctest::Approx(continuumNormSquared(vs)).epsilon(1e-6));
    }
  }
}

TEST_CASE("sequence: pointwise decomposition reconstructs tangent fields") {
  const HarmonicMap map(veronese(2));
  const auto points = randomPoints(25, 8);
  const PointField v = pointFieldFromJet(projectedPolynomialField(map, randomPolynomialField(5, 2, 3)));
  std::vector<Eigen::VectorXd> field;
  for (const Vec3& x : points) field.push_back(v(x));
  const ConjugateDecomposition dec = conjugateField(map, points, field);
  for (std::size_t k = 0; k < points.size(); ++k) {
    CHECK((2.0 * dec.plus[k].real() - field[k]).norm() < 1e-10);
    CHECK(std::abs(dec.conjugate[k].dot(map.value(points[k]))) < 1e-10);
  }
  const std::vector<Eigen::VectorXd> zero(points.size(), Eigen::VectorXd::Zero(5));
  for (const auto& p : conjugateField(map, points, zero).plus) CHECK(p.norm() == 0.0);
}

TEST_CASE("sequence: continuum energy form") {
  // A rotation field of Phi_1 has Q_E = 0; a constant-coefficient conformal field as well.
  const HarmonicMap map(veronese(1));
  const auto& c = veronese(1).components;
  const FieldJet rotation = projectedPolynomialField(map, {c[1] * -1.0, c[0], Polynomial3()});
  CHECK(std::abs(continuumEnergyForm(map, rotation)) < 1e-9);
  const FieldJet conformal = projectedPolynomialField(map, {Polynomial3::constant(1.0), Polynomial3(), Polynomial3()});
  CHECK(std::abs(continuumEnergyForm(map, conformal)) < 1e-9);
  CHECK(continuumNormSquared(conformal) > 1.0);
}

TEST_CASE("sequence: mobius fields are jacobi fields") {
  const SphereMesh mesh = icosphere(4);
  for (const char* d : {"rational:z", "rational:z^2", "rational:(z^2+0.3)/(0.5z+1)"}) {
    const HarmonicMap map = parseMap(d);
    const RationalMap& r = map.rational();
    const JacobiPencil jp = buildJacobiPencil(map, mesh);
    for (Complex a : {Complex(1.0, 0.0), Complex(0.0, 1.0)}) {
      const FieldJet field = mobiusFieldFunction(r, a, Complex(0.3, 0.1), Complex(-0.2, 0.4));
      CHECK(analyticJacobiResidual(map, field, mesh) < 1e-3);
      const auto pointwise = mobiusJacobiField(r, a, Complex(0.3, 0.1), Complex(-0.2, 0.4), mesh.vertices);
      const PointField jet = pointFieldFromJet(field);
      for (int i = 0; i < mesh.vertexCount(); i += 97) CHECK((jet(mesh.vertices[i]) - pointwise[i]).norm() < 1e-10);
      CHECK(std::abs(jacobiRayleighQuotient(jp, pointwise)) < 0.1);
    }
  }
  // The dilation of the identity map is not an isometry field, and the FEM residual shrinks under refinement.
  const HarmonicMap id = parseMap("rational:z");
  const auto residualAt = [&](int level) {
    const SphereMesh m = icosphere(level);
    return femJacobiResidual(buildJacobiPencil(id, m), mobiusJacobiField(id.rational(), 1.0, 0.0, 0.0, m.vertices));
  };
  CHECK(residualAt(4) < 0.5 * residualAt(3));
}

TEST_CASE("sequence: gamma-hat identity for mobius fields") {
  const HarmonicMap map = parseMap("rational:z^2+0.5z");
  const ChartGrid grid = gridFor(map, 0.1, 5);
  const FieldJet dilation = mobiusFieldFunction(map.rational(), 1.0, Complex(0.2, 0.0), Complex(0.0, 0.1));
  CHECK(gammaHatAnalyticResidual(map, dilation, grid) < 1e-8);
  const std::vector<double> steps{0.04, 0.02, 0.01};
  const ConvergenceStudy study = gammaHatStudy(map, pointFieldFromJet(dilation), grid, steps);
  CHECK(study.converged);
  CHECK(study.residuals.back() < 1e-2);

  // Isometry fields have vanishing gamma-hat zero.
  const HarmonicMap phi(veronese(2));
  const auto& c = veronese(2).components;
  const FieldJet rotation = projectedPolynomialField(phi, {c[2] * -1.0, Polynomial3(), c[0], Polynomial3(), Polynomial3()});
  CHECK(gammaHatZeroMax(phi, rotation, gridFor(phi)) < 1e-10);
  CHECK(gammaHatAnalyticResidual(phi, rotation, gridFor(phi)) < 1e-8);
}

TEST_CASE("sequence: gamma-hat identity negative control") {
  const HarmonicMap map = parseMap("rational:z^2+0.5z");
  const ChartGrid grid = gridFor(map, 0.1, 5);
  const FieldJet random = projectedPolynomialField(map, randomPolynomialField(3, 2, 17));
  const std::vector<double> steps{0.04, 0.02, 0.01};
  const ConvergenceStudy study = gammaHatStudy(map, pointFieldFromJet(random), grid, steps);
  CHECK_FALSE(study.converged);
  CHECK(gammaHatAnalyticResidual(map, random, grid) > 1e-2);
  CHECK_THROWS_AS(gammaHatStudy(HarmonicMap(veronese(2)), pointFieldFromJet(random), grid, steps), ConfigError);
}

TEST_CASE("sequence: residual csv") {
  std::ostringstream out;
  writeResidualCsv({{"dbar_relation", Vec3::UnitZ(), 1e-12, true}}, out);
  CHECK(out.str().rfind("identity,chart_center,max_residual,converged\n", 0) == 0);
}
