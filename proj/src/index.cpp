#include "speclab/index.h"

#include "speclab/errors.h"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace speclab {

std::string toString(Surface s) { return s == Surface::S2 ? "s2" : "rp2"; }

Surface parseSurface(const std::string& text) {
  std::string t;
  for (char c : text) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t == "s2") return Surface::S2;
  if (t == "rp2") return Surface::RP2;
  throw ConfigError("unknown surface '" + text + "' (expected s2 or rp2)");
}

namespace {

std::vector<double> toVector(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void requireEven(const HarmonicMap& map, const SphereMesh& mesh) {
  if (!map.isEven()) throw ConfigError("map '" + map.descriptor() + "' is not antipodally even; it does not descend to RP2");
  if (!mesh.antipodal) throw ConfigError("mesh has no antipodal involution");
}

// Grows the window until the threshold count is decidable.
template <class Solve>
CountPair countWithRetry(Solve solve, int count, int dimension, double threshold, double guard) {
  for (;;) {
    const int c = std::min(count, std::max(1, dimension / 2 - 1));
    const SpectrumResult r = solve(c);
    const auto ev = toVector(r.eigenvalues);
    try {
      const ThresholdCount tc = countThreshold(ev, threshold, guard);
      return CountPair{tc.below, tc.at, tc.stable, guard, ev};
    } catch (const InsufficientSpectrumError&) {
      if (c >= dimension / 2 - 1) throw;
      count *= 2;
    }
  }
}

CountPair scalarIndex(const SymmetricForm& K, const SymmetricForm& M, const IndexOptions& options) {
  EigenOptions eo = options.eigen;
  eo.deflateConstant = false;
  return countWithRetry([&](int c) { return solveLowest(K, M, c, eo); }, options.spectralCount, K.dimension(), 2.0,
                        options.spectralGuard);
}

} // namespace

CountPair spectralIndex(const HarmonicMap& map, const SphereMesh& mesh, const IndexOptions& options) {
  const SymmetricForm K = assembleStiffness(mesh);
  const SymmetricForm M = assembleMass(mesh, energyDensity(map, mesh));
  return scalarIndex(K, M, options);
}

CountPair rp2SpectralIndex(const HarmonicMap& map, const SphereMesh& mesh, const IndexOptions& options) {
  requireEven(map, mesh);
  const SparseMatrix basis = antipodalSectorBasis(mesh, +1);
  const SymmetricForm K = restrictToSector(assembleStiffness(mesh), basis);
  const SymmetricForm M = restrictToSector(assembleMass(mesh, energyDensity(map, mesh)), basis);
  return scalarIndex(K, M, options);
}

Eigen::MatrixXd orthogonalFrame(const Eigen::VectorXd& phi) {
  const int k = static_cast<int>(phi.size());
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(k);
  e1(0) = 1.0;
  // Reflection exchanging e1 and +-phi; pick the sign that keeps v well away from zero.
  const double s = phi(0) > 0 ? 1.0 : -1.0;
  const Eigen::VectorXd v = s * phi - e1;
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(k, k);
  const double vv = v.squaredNorm();
  if (vv > 0) H -= 2.0 * v * v.transpose() / vv;
  return H.rightCols(k - 1);
}

std::vector<Eigen::VectorXd> JacobiPencil::reconstruct(const Eigen::VectorXd& reduced) const {
  std::vector<Eigen::VectorXd> field(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) field[i] = frames[i] * reduced.segment(i * fiber, fiber);
  return field;
}

Eigen::VectorXd JacobiPencil::reduce(const std::vector<Eigen::VectorXd>& field) const {
  Eigen::VectorXd out(frames.size() * fiber);
  for (std::size_t i = 0; i < frames.size(); ++i) out.segment(i * fiber, fiber) = frames[i].transpose() * field[i];
  return out;
}

JacobiPencil buildJacobiPencil(const HarmonicMap& map, const SphereMesh& mesh) {
  const int nv = mesh.vertexCount();
  JacobiPencil jp;
  jp.ambient = map.components();
  jp.fiber = jp.ambient - 1;
  const int f = jp.fiber;
  jp.frames.resize(nv);
  const Density rho = energyDensity(map, mesh);
  for (int i = 0; i < nv; ++i) jp.frames[i] = orthogonalFrame(map.value(mesh.vertices[i]));
  const SymmetricForm K = assembleStiffness(mesh);
  const std::vector<double> areas = vertexAreas(mesh);

  std::vector<Eigen::Triplet<double>> at, bt;
  at.reserve(static_cast<std::size_t>(K.matrix.nonZeros()) * f * f);
  for (int col = 0; col < K.matrix.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(K.matrix, col); it; ++it) {
      const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
      const Eigen::MatrixXd block = it.value() * (jp.frames[i].transpose() * jp.frames[j]);
      for (int a = 0; a < f; ++a)
        for (int b = 0; b < f; ++b) at.emplace_back(i * f + a, j * f + b, block(a, b));
    }
  }
  for (int i = 0; i < nv; ++i) {
    const double w = 2.0 * rho.values[i] * areas[i];
    for (int a = 0; a < f; ++a) {
      at.emplace_back(i * f + a, i * f + a, -w);
      bt.emplace_back(i * f + a, i * f + a, areas[i]);
    }
  }
  jp.stiffness.matrix.resize(nv * f, nv * f);
  jp.stiffness.matrix.setFromTriplets(at.begin(), at.end());
  // Symmetrize exactly: frame products are only symmetric up to rounding.
  SparseMatrix At = jp.stiffness.matrix.transpose();
  jp.stiffness.matrix = 0.5 * (jp.stiffness.matrix + At);
  jp.mass.matrix.resize(nv * f, nv * f);
  jp.mass.matrix.setFromTriplets(bt.begin(), bt.end());
  jp.mass.diagonal = true;
  return jp;
}

SparseMatrix jacobiSectorBasis(const SphereMesh& mesh, int fiber, int sign) {
  const SparseMatrix scalar = antipodalSectorBasis(mesh, sign);
  std::vector<Eigen::Triplet<double>> t;
  for (int col = 0; col < scalar.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(scalar, col); it; ++it)
      for (int a = 0; a < fiber; ++a) t.emplace_back(it.row() * fiber + a, it.col() * fiber + a, it.value());
  SparseMatrix basis(scalar.rows() * fiber, scalar.cols() * fiber);
  basis.setFromTriplets(t.begin(), t.end());
  return basis;
}

SpectrumResult jacobiSpectrum(const JacobiPencil& pencil, const SphereMesh& mesh, int count, const EigenOptions& options,
                              int sector) {
  EigenOptions eo = options;
  eo.deflateConstant = false;
  // A + shift B is positive definite once shift exceeds max |grad Phi|^2.
  double wmax = 0.0;
  for (int i = 0; i < pencil.stiffness.dimension(); ++i)
    wmax = std::max(wmax, -pencil.stiffness.matrix.coeff(i, i) / pencil.mass.matrix.coeff(i, i));
  eo.shift = std::max(eo.shift, 2.0 * std::abs(wmax) + 1.0);
  (void)mesh;
  if (sector == 0) return solveLowest(pencil.stiffness, pencil.mass, count, eo);
  const SparseMatrix basis = jacobiSectorBasis(mesh, pencil.fiber, sector);
  return solveLowest(restrictToSector(pencil.stiffness, basis), restrictToSector(pencil.mass, basis), count, eo);
}

double jacobiGuard(std::span<const double> ev, double fraction) {
  if (ev.empty()) throw InsufficientSpectrumError("empty Jacobi window");
  double top = 0.0;
  for (double l : ev) top = std::max(top, std::abs(l));
  // Magnitudes below 1e-3 of the window scale are treated as one level so that a resolved
  // and an unresolved kernel mode are not split apart.
  const double floor = 1e-3 * top;
  std::vector<double> mags;
  for (double l : ev) mags.push_back(std::max(std::abs(l), floor));
  std::sort(mags.begin(), mags.end());
  // The near-zero cluster ends at the largest multiplicative jump in |lambda|.
  std::size_t cut = 0;
  double bestRatio = 1.0;
  for (std::size_t i = 0; i + 1 < mags.size(); ++i) {
    const double ratio = mags[i + 1] / mags[i];
    if (ratio > bestRatio) {
      bestRatio = ratio;
      cut = i + 1;
    }
  }
  if (cut == 0) throw InsufficientSpectrumError("Jacobi window has no separated near-zero cluster");
  const double zeroEdge = mags[cut - 1];
  if (ev.back() <= zeroEdge) throw InsufficientSpectrumError("Jacobi window ends inside the near-zero cluster");
  return fraction * mags[cut];
}

CountPair energyIndex(const HarmonicMap& map, const SphereMesh& mesh, const IndexOptions& options, int sector) {
  if (sector != 0) requireEven(map, mesh);
  const JacobiPencil jp = buildJacobiPencil(map, mesh);
  int count = options.jacobiCount;
  const int dim = sector == 0 ? jp.stiffness.dimension() : jp.stiffness.dimension() / 2;
  for (;;) {
    const int c = std::min(count, dim / 2 - 1);
    const SpectrumResult r = jacobiSpectrum(jp, mesh, c, options.eigen, sector);
    const auto ev = toVector(r.eigenvalues);
    try {
      const double g = jacobiGuard(ev, options.jacobiGuardFraction);
      const ThresholdCount tc = countThreshold(ev, 0.0, g);
      return CountPair{tc.below, tc.at, tc.stable, g, ev};
    } catch (const InsufficientSpectrumError&) {
      if (c >= dim / 2 - 1) throw;
      count *= 2;
    }
  }
}

Rp2EnergyResult rp2EnergyIndex(const HarmonicMap& map, const SphereMesh& mesh, const IndexOptions& options) {
  requireEven(map, mesh);
  Rp2EnergyResult r;
  r.full = energyIndex(map, mesh, options, 0);
  r.even = energyIndex(map, mesh, options, +1);
  r.odd = energyIndex(map, mesh, options, -1);
  r.indexHalves = 2 * r.even.index == r.full.index;
  r.nullityHalves = 2 * r.even.nullity == r.full.nullity;
  return r;
}

} // namespace speclab

namespace speclab {

namespace {

// lhs_num / lhs_den >= rhs_num / rhs_den (or >) with positive denominators, in integers.
InequalityVerdict verdict(std::string name, std::string citation, long long ln, long long ld, long long rn, long long rd,
                          bool strict = false) {
  InequalityVerdict v;
  v.name = std::move(name);
  v.citation = std::move(citation);
  v.relation = strict ? ">" : ">=";
  v.lhs = static_cast<double>(ln) / ld;
  v.rhs = static_cast<double>(rn) / rd;
  const long long a = ln * rd, b = rn * ld;
  v.pass = strict ? a > b : a >= b;
  v.equality = a == b;
  return v;
}

} // namespace

std::vector<InequalityVerdict> verifyInequalities(const IndexReport& r) {
  std::vector<InequalityVerdict> out;
  const long long m = r.m, d = r.d, n = r.n;
  if (r.linearlyFull) {
    out.push_back(verdict("spectral_vs_energy_index", "ind_S >= ind_E / (n+1)", r.indS, 1, r.indE, n + 1));
    out.push_back(verdict("index_nullity_bound", "ind_S >= (ind_E + nul_E - m(2m+1)) / (2m+1)", r.indS, 1,
                          r.indE + r.nulE - m * (2 * m + 1), 2 * m + 1));
  }
  if (r.surface == Surface::S2) {
    if (r.linearlyFull) {
      out.push_back(verdict("energy_index_lower_bound", "ind_E >= 2(m-1) ind_S", r.indE, 1, 2 * (m - 1) * r.indS, 1));
    }
    out.push_back(verdict("spectral_index_degree_bound", "ind_S >= 2d - nul_S + 2", r.indS, 1, 2 * d - r.nulS + 2, 1));
    out.push_back(verdict("spectral_nullity_degree_bound", "d >= (nul_S^2 - 1) / 8", d, 1,
                          static_cast<long long>(r.nulS) * r.nulS - 1, 8));
    if (r.linearlyFull) {
      out.push_back(verdict("energy_nullity_lower_bound", "nul_E >= 4d + 2m^2", r.nulE, 1, 4 * d + 2 * m * m, 1));
    }
  } else {
    out.push_back(verdict("rp2_degree_index_bound", "ind_S >= (d - 1) / 2", r.indS, 1, d - 1, 2));
  }
  return out;
}

IndexReport computeIndexReport(const HarmonicMap& map, Surface surface, int meshLevel, const IndexOptions& options,
                               int jacobiMeshLevel) {
  const SphereMesh mesh = icosphere(meshLevel);
  if (jacobiMeshLevel < 0) jacobiMeshLevel = meshLevel;
  IndexReport r;
  r.map = map.descriptor();
  r.surface = surface;
  r.meshLevel = meshLevel;
  r.jacobiMeshLevel = jacobiMeshLevel;
  r.m = map.halfDimension();
  r.n = map.targetDimension();
  r.linearlyFull = map.linearlyFull();
  r.d = degree(map, mesh);
  const CountPair s = surface == Surface::S2 ? spectralIndex(map, mesh, options) : rp2SpectralIndex(map, mesh, options);
  const int sector = surface == Surface::S2 ? 0 : +1;
  const CountPair e = jacobiMeshLevel == meshLevel ? energyIndex(map, mesh, options, sector)
                                                   : energyIndex(map, icosphere(jacobiMeshLevel), options, sector);
  r.indS = s.index;
  r.nulS = s.nullity;
  r.indE = e.index;
  r.nulE = e.nullity;
  r.stable = s.stable && e.stable;
  r.spectralGuard = s.guard;
  r.jacobiGuard = e.guard;
  r.inequalities = verifyInequalities(r);
  return r;
}

} // namespace speclab
