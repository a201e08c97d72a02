#include <doctest.h>

#include <cmath>
#include <functional>

#include "speclab/errors.h"
#include "speclab/fem.h"
#include "speclab/index.h"
#include "speclab/maps.h"
#include "speclab/mesh.h"
#include "speclab/sequence.h"

using namespace speclab;

namespace {

const SphereMesh& level4() {
  static const SphereMesh mesh = icosphere(4);
  return mesh;
}

// Jacobi counts of Phi_2 on S2 and on its even and odd sectors, shared by several cases.
const Rp2EnergyResult& veronese2Energy() {
  static const Rp2EnergyResult r = rp2EnergyIndex(HarmonicMap(veronese(2)), level4());
  return r;
}

std::vector<Eigen::VectorXd> sampleField(const SphereMesh& mesh, const std::function<Eigen::VectorXd(const Vec3&)>& f) {
  std::vector<Eigen::VectorXd> out;
  for (const Vec3& x : mesh.vertices) out.push_back(f(x));
  return out;
}

// Fields A Phi for the elementary generators e_a e_b^T - e_b e_a^T.
std::vector<std::vector<Eigen::VectorXd>> rotationFields(const HarmonicMap& map, const SphereMesh& mesh) {
  std::vector<std::vector<Eigen::VectorXd>> out;
  const int n = map.components();
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      out.push_back(sampleField(mesh, [&](const Vec3& x) {
        const Eigen::VectorXd phi = map.value(x);
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        v(a) = -phi(b);
        v(b) = phi(a);
        return v;
      }));
    }
  return out;
}

} // namespace

TEST_CASE("index: veronese spectral indices") {
  const int expected[3][2] = {{1, 3}, {4, 5}, {9, 7}};
  for (int m = 1; m <= 3; ++m) {
    const CountPair c = spectralIndex(HarmonicMap(veronese(m)), level4());
    CHECK(c.index == expected[m - 1][0]);
    CHECK(c.nullity == expected[m - 1][1]);
    CHECK(c.nullity >= 2 * m + 1);
    CHECK(c.stable);
  }
  const CountPair psi2 = rp2SpectralIndex(HarmonicMap(veronese(2)), level4());
  CHECK(psi2.index == 1);
  CHECK(psi2.nullity == 5);
  const CountPair psi4 = rp2SpectralIndex(HarmonicMap(veronese(4)), level4());
  CHECK(psi4.index == 6);
  CHECK(psi4.nullity == 9);
  CHECK(psi4.stable);
}

TEST_CASE("index: holomorphic spectral indices") {
  for (const char* d : {"rational:z", "rational:z^2", "rational:z^3"}) {
    const HarmonicMap map = parseMap(d);
    const int deg = degree(map, level4());
    const CountPair c = spectralIndex(map, level4());
    CHECK(c.index == 2 * deg - 1);
    CHECK(c.nullity == 3);
    CHECK(c.stable);
  }
}

TEST_CASE("index: mobius invariance of spectral counts") {
  const RationalMap f = parseMap("rational:z^2").rational();
  const RationalMap g = mobiusPostcompose(f, Complex(0.8, 0.3), Complex(0.2, -0.1), Complex(-0.3, 0.4), 1.1);
  const CountPair a = spectralIndex(HarmonicMap(f), level4());
  const CountPair b = spectralIndex(HarmonicMap(g), level4());
  CHECK(a.index == b.index);
  CHECK(a.nullity == b.nullity);
}

TEST_CASE("index: gauge independence of spectral counts") {
  // Negative and zero counts of K - W against any positive mass do not depend on the mass.
  const SphereMesh mesh = icosphere(3);
  const HarmonicMap map = parseMap("rational:z^2");
  const Density rho = energyDensity(map, mesh);
  const std::vector<double> areas = vertexAreas(mesh);
  SymmetricForm A = assembleStiffness(mesh);
  for (int i = 0; i < mesh.vertexCount(); ++i) A.matrix.coeffRef(i, i) -= 2.0 * rho.values[i] * areas[i];
  EigenOptions eo;
  eo.shift = 20.0;
  std::vector<std::pair<int, int>> counts;
  for (double c : {1.0, 5.0}) {
    Density scaled = rho;
    for (double& v : scaled.values) v *= c;
    for (const Density& d : {scaled, Density::constant(mesh.vertexCount(), c)}) {
      const SpectrumResult s = solveLowest(A, assembleMass(mesh, d), 12, eo);
      const double scale = std::abs(s.eigenvalues(s.size() - 1));
      const ThresholdCount t = countThreshold(s, 0.0, 0.05 * scale / 4.0);
      counts.emplace_back(t.below, t.at);
    }
  }
  for (const auto& c : counts) {
    CHECK(c.first == 3);
    CHECK(c.second == 3);
  }
}

TEST_CASE("index: jacobi pencil constraints") {
  const SphereMesh mesh = icosphere(2);
  const HarmonicMap map(veronese(2));
  const JacobiPencil jp = buildJacobiPencil(map, mesh);
  CHECK(jp.fiber == 4);
  CHECK(jp.stiffness.dimension() == 4 * mesh.vertexCount());
  for (int i = 0; i < mesh.vertexCount(); ++i) {
    const Eigen::MatrixXd& F = jp.frames[i];
    CHECK((F.transpose() * F - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((F.transpose() * map.value(mesh.vertices[i])).cwiseAbs().maxCoeff() < 1e-12);
  }
  const SpectrumResult s = jacobiSpectrum(jp, mesh, 12, EigenOptions{});
  for (int k = 0; k < s.size(); ++k) {
    const auto field = jp.reconstruct(s.eigenvectors.col(k));
    for (int i = 0; i < mesh.vertexCount(); ++i) CHECK(std::abs(field[i].dot(map.value(mesh.vertices[i]))) < 1e-12);
  }
  const Eigen::VectorXd v = s.eigenvectors.col(3);
  CHECK((jp.reduce(jp.reconstruct(v)) - v).norm() < 1e-12);
}

TEST_CASE("index: rotation fields are in the kernel") {
  for (const char* d : {"veronese:1", "veronese:2", "rational:z^2"}) {
    const HarmonicMap map = parseMap(d);
    const JacobiPencil jp = buildJacobiPencil(map, level4());
    const double guard = energyIndex(map, level4()).guard;
    for (const auto& field : rotationFields(map, level4())) CHECK(std::abs(jacobiRayleighQuotient(jp, field)) < guard);
  }
}

TEST_CASE("index: veronese 1 energy index") {
  // Oracle: rotations A Phi and conformal fields e - (e . Phi) Phi span a 6-dimensional space of Jacobi fields.
  const SphereMesh& mesh = level4();
  const HarmonicMap map(veronese(1));
  const JacobiPencil jp = buildJacobiPencil(map, mesh);
  auto fields = rotationFields(map, mesh);
  for (int k = 0; k < 3; ++k) {
    fields.push_back(sampleField(mesh, [&](const Vec3& x) {
      const Eigen::VectorXd phi = map.value(x);
      Eigen::VectorXd e = Eigen::VectorXd::Unit(3, k);
      return Eigen::VectorXd(e - e.dot(phi) * phi);
    }));
  }
  Eigen::MatrixXd basis(jp.stiffness.dimension(), fields.size());
  for (std::size_t k = 0; k < fields.size(); ++k) basis.col(k) = jp.reduce(fields[k]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis);
  CHECK(svd.rank() == 6);

  const CountPair e = energyIndex(map, mesh);
  for (const auto& f : fields) CHECK(std::abs(jacobiRayleighQuotient(jp, f)) < e.guard);
  CHECK(e.index == 0);
  CHECK(e.nullity == 6);
  CHECK(e.nullity >= 4 * 1 + 2 * 1 * 1);
}

TEST_CASE("index: veronese 2 energy index") {
  const CountPair& full = veronese2Energy().full;
  CHECK(full.index == 4 * 3 - 2);
  CHECK(full.nullity >= 4 * 3 + 2 * 2 * 2);
  CHECK(full.stable);
}

TEST_CASE("index: projective halving") {
  const Rp2EnergyResult& r = veronese2Energy();
  CHECK(r.even.index == 5);
  CHECK(r.indexHalves);
  CHECK(r.nullityHalves);
  CHECK(r.odd.index == r.even.index);
  CHECK(r.odd.nullity == r.even.nullity);
}

TEST_CASE("index: energy counts are even on S2") {
  CHECK(veronese2Energy().full.index % 2 == 0);
  CHECK(veronese2Energy().full.nullity % 2 == 0);
  const CountPair z = energyIndex(parseMap("rational:z"), level4());
  CHECK(z.index == 0);
  CHECK(z.nullity == 6);
}

TEST_CASE("index: padded map energy index") {
  const HarmonicMap padded = parseMap("pad:veronese:1:4");
  const CountPair inner = spectralIndex(HarmonicMap(veronese(1)), level4());
  const CountPair e = energyIndex(padded, level4());
  CHECK(e.index == (4 - 2) * inner.index + 0);
}

TEST_CASE("index: inequality verdicts on veronese reports") {
  const Rp2EnergyResult& e = veronese2Energy();
  IndexReport s2;
  s2.map = "veronese:2";
  s2.m = 2;
  s2.n = 4;
  s2.d = 3;
  s2.indS = 4;
  s2.nulS = 5;
  s2.indE = e.full.index;
  s2.nulE = e.full.nullity;
  const auto v = verifyInequalities(s2);
  CHECK(v.size() == 6);
  for (const auto& x : v) CHECK_MESSAGE(x.pass, x.name);

  IndexReport rp = s2;
  rp.surface = Surface::RP2;
  rp.indS = 1;
  rp.indE = e.even.index;
  rp.nulE = e.even.nullity;
  const auto w = verifyInequalities(rp);
  bool sawDegreeBound = false;
  for (const auto& x : w) {
    CHECK_MESSAGE(x.pass, x.name);
    if (x.name == "rp2_degree_index_bound") {
      sawDegreeBound = true;
      CHECK(x.equality);
    }
  }
  CHECK(sawDegreeBound);

  IndexReport v1;
  v1.m = 1;
  v1.n = 2;
  v1.d = 1;
  v1.indS = 1;
  v1.nulS = 3;
  v1.indE = 0;
  v1.nulE = 6;
  for (const auto& x : verifyInequalities(v1)) {
    CHECK(x.pass);
    if (x.name == "energy_index_lower_bound") {
      CHECK(x.lhs == 0.0);
      CHECK(x.rhs == 0.0);
    }
  }
}

TEST_CASE("index: fabricated report fails") {
  IndexReport r;
  r.m = 1;
  r.n = 2;
  r.d = 1;
  r.indS = 1;
  r.nulS = 3;
  r.indE = 100;
  r.nulE = 6;
  bool failed = false;
  for (const auto& x : verifyInequalities(r))
    if (x.name == "spectral_vs_energy_index") failed = !x.pass;
  CHECK(failed);
}

TEST_CASE("index: projective counts reject odd maps") {
  CHECK_THROWS_AS(rp2SpectralIndex(HarmonicMap(veronese(3)), icosphere(2)), ConfigError);
  CHECK_THROWS_AS(rp2EnergyIndex(HarmonicMap(veronese(1)), icosphere(2)), ConfigError);
  SphereMesh noInvolution = icosphere(2);
  noInvolution.antipodal.reset();
  CHECK_THROWS_AS(rp2SpectralIndex(HarmonicMap(veronese(2)), noInvolution), ConfigError);
  CHECK((parseSurface("RP2") == Surface::RP2));
  CHECK_THROWS_AS(parseSurface("torus"), ConfigError);
}

TEST_CASE("index: orthogonal frames") {
  for (const Eigen::VectorXd& phi : {Eigen::VectorXd(Eigen::Vector3d(1, 0, 0)), Eigen::VectorXd(Eigen::Vector3d(-1, 0, 0)),
                                     Eigen::VectorXd(Eigen::Vector3d(0.6, 0.0, -0.8))}) {
    const Eigen::MatrixXd F = orthogonalFrame(phi);
    CHECK(F.cols() == 2);
    CHECK((F.transpose() * F - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-14);
    CHECK((F.transpose() * phi).norm() < 1e-14);
  }
}
