#include "speclab/sequence.h"

#include "speclab/errors.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include <Eigen/SparseCholesky>
#include <boost/math/quadrature/gauss.hpp>

namespace speclab {

namespace {

constexpr Complex I(0.0, 1.0);

// Ambient position x(z, conj z) = R x_std(z) as jets around z0.
JetVector positionJet(const StereographicChart& chart, Complex z0, int order) {
  const Jet Z = Jet::zVariable(z0, order);
  const Jet W = Jet::wVariable(std::conj(z0), order);
  const Jet inv = (Z * W + Complex(1.0)).reciprocal();
  const JetVector xs{(Z + W) * inv, ((Z - W) * inv) * (-I), (Complex(1.0) - Z * W) * inv};
  const Eigen::Matrix3d& R = chart.rotation();
  JetVector x;
  for (int i = 0; i < 3; ++i) x.push_back(xs[0] * R(i, 0) + xs[1] * R(i, 1) + xs[2] * R(i, 2));
  return x;
}

Jet evalPolynomial(const Polynomial3& p, const JetVector& x) {
  const int order = x[0].order();
  int maxDeg = std::max(p.degree(), 0);
  std::array<std::vector<Jet>, 3> pw;
  for (int k = 0; k < 3; ++k) {
    pw[k].push_back(Jet::constant(1.0, order));
    for (int e = 1; e <= maxDeg; ++e) pw[k].push_back(pw[k].back() * x[k]);
  }
  Jet s(order);
  for (const auto& [e, c] : p.terms()) s += (pw[0][e[0]] * pw[1][e[1]] * pw[2][e[2]]) * c;
  return s;
}

Jet horner(std::span<const Complex> c, const Jet& t) {
  Jet s = Jet::constant(0.0, t.order());
  for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * t + *it;
  return s;
}

std::vector<Complex> reversedCoefficients(const std::vector<Complex>& c, int d) {
  std::vector<Complex> r(d + 1, 0.0);
  for (int k = 0; k < static_cast<int>(c.size()) && k <= d; ++k) r[d - k] = c[k];
  return r;
}

// Homogeneous (P, Q) of a rational map as jets, in the domain chart that avoids the pole of x.
std::pair<Jet, Jet> rationalPQ(const RationalMap& map, const StereographicChart& chart, Complex z0, int order) {
  const JetVector x = positionJet(chart, z0, order);
  const Vec3 x0 = chart.toSphere(z0);
  if (x0(2) >= 0) {
    const Jet zeta = (x[0] + x[1] * I) / (x[2] + Complex(1.0));
    return {horner(map.p, zeta), horner(map.q, zeta)};
  }
  const Jet xi = (x[0] - x[1] * I) / (Complex(1.0) - x[2]);
  const int d = map.degree();
  return {horner(reversedCoefficients(map.p, d), xi), horner(reversedCoefficients(map.q, d), xi)};
}

JetVector phiFromPQ(const Jet& P, const Jet& Q) {
  const Jet Pb = P.conj(), Qb = Q.conj();
  const Jet invN = (P * Pb + Q * Qb).reciprocal();
  const Jet A = P * Qb;
  const Jet twoA = A * 2.0 * invN;
  return {twoA.real(), twoA.imag(), (Q * Qb - P * Pb) * invN};
}

Eigen::VectorXcd values(const JetVector& v) {
  Eigen::VectorXcd out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) out(j) = v[j].value();
  return out;
}

double vectorNorm(const JetVector& v) { return values(v).norm(); }

// gamma_{-p} and f_{-p} of the extended sequence.
const Jet& gammaNeg(const LocalSequence& s, int p) { return p == 0 ? s.gamma.at(0) : s.gamma.at(p - 1); }

JetVector fNeg(const LocalSequence& s, int p) {
  if (p == 0) return s.f.at(0);
  const Jet inv = s.norm2.at(p).reciprocal() * ((p % 2) ? -1.0 : 1.0);
  return scaled(conjugate(s.f.at(p)), inv);
}

Jet dzLogNorm(const Jet& norm2) { return norm2.dz() / norm2; }

Jet dzdw(const Jet& j) { return j.dz().dw(); }

Jet laplaceLog(const Jet& g) {
  // dz dw ln g = (g_zw g - g_z g_w) / g^2
  return (dzdw(g) * g - g.dz() * g.dw()) / (g * g);
}

} // namespace

JetVector mapJet(const HarmonicMap& map, const StereographicChart& chart, Complex z0, int order) {
  JetVector out;
  if (map.isPolynomial()) {
    const JetVector x = positionJet(chart, z0, order);
    for (const auto& c : map.polynomial().components) out.push_back(evalPolynomial(c, x));
  } else {
    const auto [P, Q] = rationalPQ(map.rational(), chart, z0, order);
    out = phiFromPQ(P, Q);
  }
  for (int k = 0; k < map.padding(); ++k) out.push_back(Jet(out.front().order()));
  return out;
}

FieldJet mapJetFunction(const HarmonicMap& map) {
  return [map](const StereographicChart& chart, Complex z0, int order) { return mapJet(map, chart, z0, order); };
}

JetVector finiteDifferenceJet(const PointField& field, const StereographicChart& chart, Complex z0, double h,
                              bool richardson) {
  auto partials = [&](double step) {
    // samples[i + 2][j + 2] = field at z0 + step (i + i j)
    std::vector<std::vector<Eigen::VectorXd>> samples(5, std::vector<Eigen::VectorXd>(5));
    for (int i = -2; i <= 2; ++i)
      for (int j = -2; j <= 2; ++j) {
        if (std::abs(i) == 2 && std::abs(j) == 2) continue;
        samples[i + 2][j + 2] = field(chart.toSphere(z0 + Complex(i * step, j * step)));
      }
    static const double st[4][5] = {
        {0, 0, 1, 0, 0}, {0, -0.5, 0, 0.5, 0}, {0, 1, -2, 1, 0}, {-0.5, 1, 0, -1, 0.5}};
    std::vector<Eigen::VectorXd> d(16);
    const int n = static_cast<int>(samples[2][2].size());
    for (int a = 0; a <= 3; ++a)
      for (int b = 0; a + b <= 3; ++b) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < 5; ++i)
          for (int j = 0; j < 5; ++j) {
            const double w = st[a][i] * st[b][j];
            if (w != 0.0) acc += w * samples[i][j];
          }
        d[a * 4 + b] = acc / std::pow(step, a + b);
      }
    return d;
  };
  std::vector<Eigen::VectorXd> d = partials(h);
  if (richardson) {
    const std::vector<Eigen::VectorXd> half = partials(0.5 * h);
    for (std::size_t k = 0; k < d.size(); ++k)
      if (d[k].size()) d[k] = (4.0 * half[k] - d[k]) / 3.0;
  }
  const int order = 3;
  const Jet dZ = Jet::zVariable(0.0, order), dW = Jet::wVariable(0.0, order);
  const Jet X = (dZ + dW) * 0.5;
  const Jet Y = (dZ - dW) * Complex(0.0, -0.5);
  const int n = static_cast<int>(d[0].size());
  JetVector out(n, Jet(order));
  double fact[4] = {1, 1, 2, 6};
  std::vector<Jet> xp{Jet::constant(1.0, order)}, yp{Jet::constant(1.0, order)};
  for (int k = 1; k <= 3; ++k) {
    xp.push_back(xp.back() * X);
    yp.push_back(yp.back() * Y);
  }
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; a + b <= 3; ++b) {
      const Jet mono = xp[a] * yp[b];
      for (int j = 0; j < n; ++j) out[j] += mono * (d[a * 4 + b](j) / (fact[a] * fact[b]));
    }
  return out;
}

JetVector mobiusFieldJet(const RationalMap& map, Complex a, Complex b, Complex c, const StereographicChart& chart,
                         Complex z0, int order) {
  const auto [P, Q] = rationalPQ(map, chart, z0, order);
  const Jet dP = P * a + Q * b;
  const Jet dQ = P * c - Q * a;
  const Jet Pb = P.conj(), Qb = Q.conj(), dPb = dP.conj(), dQb = dQ.conj();
  const Jet N = P * Pb + Q * Qb;
  const Jet invN2 = (N * N).reciprocal();
  const Jet dN = dP * Pb + P * dPb + dQ * Qb + Q * dQb;
  const Jet A = P * Qb;
  const Jet dA = dP * Qb + P * dQb;
  const Jet d12 = (dA * N - A * dN) * 2.0 * invN2;
  const Jet d3 = ((dQ * Qb + Q * dQb - dP * Pb - P * dPb) * N - (Q * Qb - P * Pb) * dN) * invN2;
  return {d12.real(), d12.imag(), d3};
}

FieldJet mobiusFieldFunction(const RationalMap& map, Complex a, Complex b, Complex c) {
  return [=](const StereographicChart& chart, Complex z0, int order) {
    return mobiusFieldJet(map, a, b, c, chart, z0, order);
  };
}

LocalSequence localSequence(const JetVector& phi, int m, double terminationTol) {
  LocalSequence s;
  s.f.push_back(phi);
  for (int p = 0; p <= m; ++p) {
    const JetVector& fp = s.f[p];
    const Jet n2 = hermitian(fp, fp);
    if (std::abs(n2.value()) == 0.0) throw SingularPointError("section f_" + std::to_string(p) + " vanishes");
    s.norm2.push_back(n2);
    const JetVector next = subtract(dzAll(fp), scaled(fp, dzLogNorm(n2)));
    s.f.push_back(next);
    const Jet n2next = hermitian(next, next);
    s.gamma.push_back(n2next / n2);
    const double ratio = std::sqrt(std::abs(s.gamma[p].value()) / std::max(std::abs(s.gamma[0].value()), 1e-300));
    if (p > 0 && ratio < terminationTol) {
      s.termination = p;
      break;
    }
    if (p == 0 && std::sqrt(std::abs(s.gamma[0].value())) < terminationTol) {
      s.termination = 0;
      break;
    }
  }
  if (s.termination >= 0 && static_cast<int>(s.norm2.size()) == s.termination + 1) {
    // Record |f_{t+1}|^2 for completeness without dividing by it.
    s.norm2.push_back(hermitian(s.f.back(), s.f.back()));
  }
  return s;
}

HarmonicSequence buildSequence(const HarmonicMap& map, const ChartGrid& grid, const SequenceOptions& options) {
  HarmonicSequence seq;
  seq.grid = grid;
  seq.m = map.halfDimension();
  seq.mode = options.mode;
  const StereographicChart chart = grid.chart();
  const PointField value = [&map](const Vec3& x) { return map.value(x); };
  for (std::size_t k = 0; k < grid.points.size(); ++k) {
    const Complex z0 = grid.points[k];
    const JetVector phi = options.mode == DerivativeMode::Analytic
                              ? mapJet(map, chart, z0, options.order)
                              : finiteDifferenceJet(value, chart, z0, options.step, options.richardson);
    LocalSequence ls;
    try {
      ls = localSequence(phi, seq.m, options.terminationTol);
    } catch (const SingularPointError& e) {
      throw SingularPointError(std::string(e.what()) + " at sample " + std::to_string(k) + " (z = " +
                               std::to_string(z0.real()) + "+" + std::to_string(z0.imag()) + "i)");
    }
    if (ls.termination >= 0 && ls.termination < seq.m) {
      throw SingularPointError("sequence degenerates at p = " + std::to_string(ls.termination) + " at sample " +
                               std::to_string(k) + "; move or shrink the chart");
    }
    if (k == 0) seq.termination = ls.termination;
    else if (seq.termination != ls.termination) seq.termination = -1;
    seq.samples.push_back(std::move(ls));
  }
  return seq;
}

std::vector<IdentityResidual> verifyIdentities(const HarmonicSequence& seq) {
  const int m = seq.m;
  double dbar = 0.0, logNorm = 0.0, toda = 0.0, herm = 0.0, iso = 0.0, term = 0.0;
  for (const LocalSequence& s : seq.samples) {
    const int top = std::min<int>(m, static_cast<int>(s.gamma.size()) - 1);
    auto g = [&](int p) -> Jet {
      if (p < 0) return s.gamma.at(-p - 1);
      return s.gamma.at(p);
    };
    for (int p = 1; p <= top; ++p) {
      const JetVector r = add(dwAll(s.f[p]), scaled(s.f[p - 1], g(p - 1)));
      const double scale = std::max(1.0, std::abs(g(p - 1).value()) * vectorNorm(s.f[p - 1]));
      dbar = std::max(dbar, vectorNorm(r) / scale);
    }
    for (int p = 0; p <= top; ++p) {
      const Jet r = laplaceLog(s.norm2[p]) - (g(p) - g(p - 1));
      logNorm = std::max(logNorm, std::abs(r.value()) / std::max(1.0, std::abs(g(0).value())));
    }
    for (int p = 0; p + 1 <= top; ++p) {
      const Jet r = laplaceLog(g(p)) - (g(p + 1) - g(p) * 2.0 + g(p - 1));
      toda = std::max(toda, std::abs(r.value()) / std::max(1.0, std::abs(g(0).value())));
    }
    for (int p = 0; p <= top; ++p)
      for (int q = 0; q <= top; ++q) {
        const double np = vectorNorm(s.f[p]), nq = vectorNorm(s.f[q]);
        if (p != q) herm = std::max(herm, std::abs(hermitian(s.f[p], s.f[q]).value()) / (np * nq));
        if (p >= 1 && q >= 1) iso = std::max(iso, std::abs(bilinear(s.f[p], s.f[q]).value()) / (np * nq));
      }
    if (static_cast<int>(s.gamma.size()) > m)
      term = std::max(term, std::sqrt(std::abs(s.gamma[m].value()) / std::abs(s.gamma[0].value())));
  }
  const Vec3 c = seq.grid.center;
  const double tol = seq.mode == DerivativeMode::Analytic ? 1e-8 : 1e-5;
  std::vector<IdentityResidual> rows{
      {"dbar_relation", c, dbar, dbar < tol},
      {"log_norm_laplacian", c, logNorm, logNorm < tol},
      {"log_gamma_toda", c, toda, toda < tol},
      {"hermitian_orthogonality", c, herm, herm < tol},
      {"bilinear_isotropy", c, iso, iso < tol},
      {"termination", c, term, seq.termination == m},
  };
  return rows;
}

void writeResidualCsv(const std::vector<IdentityResidual>& rows, std::ostream& out) {
  out << "identity,chart_center,max_residual,converged\n";
  out.precision(10);
  for (const auto& r : rows) {
    out << r.identity << ",\"(" << r.chartCenter(0) << ' ' << r.chartCenter(1) << ' ' << r.chartCenter(2) << ")\","
        << r.maxResidual << ',' << (r.converged ? "true" : "false") << '\n';
  }
}

Vec3 chooseChartCenter(const HarmonicMap& map, int probeLevel) {
  const SphereMesh probe = icosphere(probeLevel);
  const int m = map.halfDimension();
  Vec3 best = probe.vertices.front();
  double bestScore = -1.0;
  for (const Vec3& v : probe.vertices) {
    const StereographicChart chart(v);
    double score;
    try {
      const LocalSequence s = localSequence(mapJet(map, chart, 0.0, m + 2), m, 0.0);
      score = std::numeric_limits<double>::infinity();
      for (int p = 0; p < m && p < static_cast<int>(s.gamma.size()); ++p)
        score = std::min(score, std::abs(s.gamma[p].value()));
    } catch (const SingularPointError&) {
      score = 0.0;
    }
    if (score > bestScore) {
      bestScore = score;
      best = v;
    }
  }
  return best;
}

JetVector conjugateJet(const LocalSequence& s, const JetVector& field, int m) {
  JetVector plus;
  for (int p = 1; p <= m; ++p) {
    const Jet coeff = hermitian(field, s.f[p]) / s.norm2[p];
    const JetVector term = scaled(s.f[p], coeff);
    plus = plus.empty() ? term : add(plus, term);
  }
  JetVector out;
  for (const auto& j : plus) out.push_back(j.imag() * 2.0);
  return out;
}

ConjugateDecomposition conjugateField(const HarmonicMap& map, std::span<const Vec3> points,
                                      const std::vector<Eigen::VectorXd>& field) {
  if (field.size() != points.size()) throw ConfigError("conjugate field: point and field counts differ");
  const int m = map.halfDimension();
  ConjugateDecomposition out;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const StereographicChart chart(points[k]);
    const LocalSequence s = localSequence(mapJet(map, chart, 0.0, m + 1), m, 0.0);
    Eigen::VectorXcd plus = Eigen::VectorXcd::Zero(field[k].size());
    const Eigen::VectorXcd v = field[k].cast<Complex>();
    for (int p = 1; p <= m; ++p) {
      const Eigen::VectorXcd fp = values(s.f[p]);
      const double n2 = fp.squaredNorm();
      if (n2 < 1e-24) throw SingularPointError("span of f_1..f_m degenerates at point " + std::to_string(k));
      plus += (fp.dot(v) / n2) * fp; // Eigen's dot conjugates the first argument: <v, f_p> = sum v conj(f_p)
    }
    out.plus.push_back(plus);
    out.conjugate.push_back(2.0 * plus.imag());
  }
  return out;
}

FieldJet conjugateFieldFunction(const HarmonicMap& map, FieldJet field) {
  return [map, field](const StereographicChart& chart, Complex z0, int order) {
    const int m = map.halfDimension();
    const LocalSequence s = localSequence(mapJet(map, chart, z0, order + m), m, 0.0);
    return conjugateJet(s, field(chart, z0, order), m);
  };
}

FieldJet projectedPolynomialField(const HarmonicMap& map, std::vector<Polynomial3> components) {
  if (static_cast<int>(components.size()) != map.components())
    throw ConfigError("polynomial field needs one component per map component");
  return [map, components](const StereographicChart& chart, Complex z0, int order) {
    const JetVector x = positionJet(chart, z0, order);
    JetVector P;
    for (const auto& c : components) P.push_back(evalPolynomial(c, x));
    const JetVector phi = mapJet(map, chart, z0, order);
    return subtract(P, scaled(phi, bilinear(P, phi)));
  };
}

std::vector<Polynomial3> randomPolynomialField(int components, int maxDegree, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Polynomial3> out(components);
  for (auto& p : out)
    for (int a = 0; a <= maxDegree; ++a)
      for (int b = 0; a + b <= maxDegree; ++b)
        for (int c = 0; a + b + c <= maxDegree; ++c) p += Polynomial3::monomial(a, b, c, normal(rng));
  return out;
}

namespace {

template <class F>
double sphereQuadrature(F integrand, int phiSamples) {
  using boost::math::quadrature::gauss;
  auto ring = [&](double t) {
    const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
    double acc = 0.0;
    for (int k = 0; k < phiSamples; ++k) {
      const double ph = 2.0 * std::numbers::pi * (k + 0.5) / phiSamples;
      acc += integrand(Vec3(s * std::cos(ph), s * std::sin(ph), t));
    }
    return acc * 2.0 * std::numbers::pi / phiSamples;
  };
  return gauss<double, 60>::integrate(ring, -1.0, 1.0);
}

} // namespace

double continuumEnergyForm(const HarmonicMap& map, const FieldJet& field, int phiSamples) {
  return sphereQuadrature(
      [&](const Vec3& x) {
        const StereographicChart chart(x);
        const JetVector v = field(chart, 0.0, 1);
        const JetVector phi = mapJet(map, chart, 0.0, 1);
        double gradV = 0.0, gradPhi = 0.0, v2 = 0.0;
        for (const auto& j : v) {
          gradV += std::norm(j.coefficient(1, 0));
          v2 += std::norm(j.value());
        }
        for (const auto& j : phi) gradPhi += std::norm(j.coefficient(1, 0));
        return gradV - gradPhi * v2;
      },
      phiSamples);
}

double continuumNormSquared(const FieldJet& field, int phiSamples) {
  return sphereQuadrature(
      [&](const Vec3& x) {
        const JetVector v = field(StereographicChart(x), 0.0, 0);
        double v2 = 0.0;
        for (const auto& j : v) v2 += std::norm(j.value());
        return v2;
      },
      phiSamples);
}

double analyticJacobiResidual(const HarmonicMap& map, const FieldJet& field, const SphereMesh& mesh) {
  const std::vector<double> areas = vertexAreas(mesh);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < mesh.vertexCount(); ++i) {
    const StereographicChart chart(mesh.vertices[i]);
    const JetVector v = field(chart, 0.0, 2);
    const JetVector phi = mapJet(map, chart, 0.0, 2);
    const int n = static_cast<int>(v.size());
    double grad2 = 0.0;
    for (const auto& j : phi) grad2 += std::norm(j.coefficient(1, 0));
    Eigen::VectorXd jv(n), v0(n), ph(n);
    for (int k = 0; k < n; ++k) {
      v0(k) = v[k].value().real();
      ph(k) = phi[k].value().real();
      jv(k) = -v[k].coefficient(1, 1).real() - grad2 * v0(k);
    }
    jv -= jv.dot(ph) * ph;
    num += areas[i] * jv.squaredNorm();
    den += areas[i] * v0.squaredNorm();
  }
  return den > 0 ? std::sqrt(num / den) : 0.0;
}

namespace {

double pencilShift(const JacobiPencil& pencil) {
  double wmax = 0.0;
  for (int i = 0; i < pencil.stiffness.dimension(); ++i)
    wmax = std::max(wmax, -pencil.stiffness.matrix.coeff(i, i) / pencil.mass.matrix.coeff(i, i));
  return 2.0 * std::abs(wmax) + 1.0;
}

} // namespace

double femJacobiResidual(const JacobiPencil& pencil, const std::vector<Eigen::VectorXd>& field) {
  const Eigen::VectorXd v = pencil.reduce(field);
  const Eigen::VectorXd av = pencil.stiffness.matrix * v;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  double shift = pencilShift(pencil);
  for (int attempt = 0;; ++attempt) {
    ldlt.compute(SparseMatrix(pencil.stiffness.matrix + shift * pencil.mass.matrix));
    if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0).all()) break;
    if (attempt > 8) throw SolverError("factorization of the shifted Jacobi form failed", {});
    shift = shift * 10.0 + 1.0;
  }
  const double den = v.dot(pencil.mass.matrix * v);
  return den > 0 ? std::sqrt(av.dot(ldlt.solve(av)) / den) : 0.0;
}

double jacobiRayleighQuotient(const JacobiPencil& pencil, const std::vector<Eigen::VectorXd>& field) {
  const Eigen::VectorXd v = pencil.reduce(field);
  return v.dot(pencil.stiffness.matrix * v) / v.dot(pencil.mass.matrix * v);
}

GammaHatChain gammaHatChain(const LocalSequence& s, const JetVector& field, int depth) {
  GammaHatChain chain;
  const JetVector& f0 = s.f.at(0);
  const Jet gh0 = -bilinear(f0, dwAll(dzAll(field)));
  // gammaHat[p] = gamma-hat_{-p}; index 0 and 1 coincide by definition.
  chain.gammaHat.push_back(gh0);
  chain.fields.push_back(field);
  for (int p = 0; p < depth; ++p) {
    Jet next = gh0;
    if (p >= 1) {
      next = dzdw(chain.gammaHat[p] / gammaNeg(s, p)) + chain.gammaHat[p] * 2.0 - chain.gammaHat[p - 1];
    }
    chain.gammaHat.push_back(next);
    const JetVector fn = fNeg(s, p + 1);
    const JetVector vnext = scaled(add(dwAll(chain.fields[p]), scaled(fn, next)), -gammaNeg(s, p + 1).reciprocal());
    chain.fields.push_back(vnext);
  }
  for (int p = 1; p <= depth; ++p) {
    Jet sum = chain.gammaHat[1] / gammaNeg(s, 1);
    for (int k = 2; k <= p; ++k) sum += chain.gammaHat[k] / gammaNeg(s, k);
    const JetVector fp = fNeg(s, p);
    const Jet dlog = p == 0 ? dzLogNorm(s.norm2[0]) : -dzLogNorm(s.norm2[p]);
    JetVector r = subtract(dzAll(chain.fields[p]), chain.fields[p - 1]);
    r = subtract(r, scaled(chain.fields[p], dlog));
    r = add(r, scaled(fp, sum.dz()));
    chain.dzResidual.push_back(vectorNorm(r));
  }
  return chain;
}

double gammaHatAnalyticResidual(const HarmonicMap& map, const FieldJet& field, const ChartGrid& grid) {
  const int m = map.halfDimension();
  const int order = 2 * m + 4;
  const StereographicChart chart = grid.chart();
  double worst = 0.0;
  for (Complex z0 : grid.points) {
    const LocalSequence s = localSequence(mapJet(map, chart, z0, order + m + 2), m, 0.0);
    const GammaHatChain c = gammaHatChain(s, field(chart, z0, order), m);
    for (double r : c.dzResidual) worst = std::max(worst, r);
  }
  return worst;
}

double gammaHatZeroMax(const HarmonicMap& map, const FieldJet& field, const ChartGrid& grid) {
  const StereographicChart chart = grid.chart();
  double worst = 0.0;
  for (Complex z0 : grid.points) {
    const JetVector phi = mapJet(map, chart, z0, 2);
    worst = std::max(worst, std::abs(bilinear(phi, dwAll(dzAll(field(chart, z0, 2)))).value()));
  }
  return worst;
}

ConvergenceStudy gammaHatStudy(const HarmonicMap& map, const PointField& field, const ChartGrid& grid,
                               std::span<const double> steps) {
  if (map.halfDimension() != 1) throw ConfigError("finite-difference gamma-hat chain is limited to m = 1");
  const StereographicChart chart = grid.chart();
  const PointField value = [&map](const Vec3& x) { return map.value(x); };
  ConvergenceStudy study;
  for (double h : steps) {
    double worst = 0.0;
    for (Complex z0 : grid.points) {
      const LocalSequence s = localSequence(finiteDifferenceJet(value, chart, z0, h, false), 1, 0.0);
      const GammaHatChain c = gammaHatChain(s, finiteDifferenceJet(field, chart, z0, h, false), 1);
      worst = std::max(worst, c.dzResidual.at(0));
    }
    study.steps.push_back(h);
    study.residuals.push_back(worst);
  }
  study.converged = true;
  for (std::size_t k = 1; k < study.residuals.size(); ++k) {
    const bool tiny = study.residuals[k] < 1e-10;
    if (!tiny && !(study.residuals[k] <= 0.5 * study.residuals[k - 1])) study.converged = false;
  }
  return study;
}

PointField pointFieldFromJet(const FieldJet& field) {
  return [field](const Vec3& x) {
    const JetVector v = field(StereographicChart(x), 0.0, 0);
    Eigen::VectorXd out(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) out(j) = v[j].value().real();
    return out;
  };
}

} // namespace speclab
