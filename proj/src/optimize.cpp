#include "speclab/optimize.h"

#include "speclab/errors.h"
#include "speclab/polynomial.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <functional>
#include <random>

namespace speclab {

namespace {

constexpr double kPi = std::numbers::pi;

void validateSpec(const BubbleSpec& s) {
  if (!(s.scale > 0) || !std::isfinite(s.scale)) throw ConfigError("bubble scale must be positive");
  if (!(s.targetArea > 0) || !std::isfinite(s.targetArea)) throw ConfigError("bubble target area must be positive");
  if (std::abs(s.center.norm() - 1.0) > 1e-9) throw ConfigError("bubble centre must be a unit vector");
}

} // namespace

double bubbleProfile(const BubbleSpec& spec, const Vec3& x) {
  // With t = c.x one has |z|^2 = (1-t)/(1+t), which turns the ratio into a bounded expression.
  const double t = std::clamp(spec.center.dot(x), -1.0, 1.0);
  const double e2 = spec.scale * spec.scale;
  const double den = e2 * (1.0 + t) + (1.0 - t);
  return spec.targetArea / kPi * e2 / (den * den);
}

std::vector<double> bubbleAreas(const SphereMesh& mesh, const std::vector<BubbleSpec>& specs) {
  const std::vector<double> a = vertexAreas(mesh);
  std::vector<double> out;
  for (const BubbleSpec& s : specs) {
    double total = 0.0;
    for (int i = 0; i < mesh.vertexCount(); ++i) total += bubbleProfile(s, mesh.vertices[i]) * a[i];
    out.push_back(total);
  }
  return out;
}

Density bubbleDensity(const SphereMesh& mesh, const Density& base, const std::vector<BubbleSpec>& specs,
                      double areaTolerance) {
  base.validate(mesh.vertexCount());
  double maxScale = 0.0;
  for (const auto& s : specs) {
    validateSpec(s);
    maxScale = std::max(maxScale, s.scale);
  }
  for (std::size_t i = 0; i < specs.size(); ++i)
    for (std::size_t j = i + 1; j < specs.size(); ++j)
      if ((specs[i].center - specs[j].center).norm() <= 4.0 * maxScale)
        throw ConfigError("bubble charts overlap: centres " + std::to_string(i) + " and " + std::to_string(j) +
                          " are closer than 4 * max scale");
  Density out = base;
  for (const auto& s : specs)
    for (int i = 0; i < mesh.vertexCount(); ++i) out.values[i] += bubbleProfile(s, mesh.vertices[i]);
  const std::vector<double> areas = bubbleAreas(mesh, specs);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const double rel = std::abs(areas[i] - specs[i].targetArea) / specs[i].targetArea;
    if (rel > areaTolerance)
      throw ConfigError("bubble " + std::to_string(i) + " is under-resolved: discrete area off by " +
                        std::to_string(100.0 * rel) + "%; refine the mesh or increase the scale");
  }
  return out;
}

namespace {

struct SectorForms {
  SymmetricForm K, M;
  SparseMatrix basis; // empty for S2
  double coverArea = 0.0;
  double surfaceArea = 0.0;
};

SectorForms sectorForms(const SphereMesh& mesh, const Density& density, Surface surface) {
  SectorForms f;
  f.K = assembleStiffness(mesh);
  f.M = assembleMass(mesh, density);
  f.coverArea = f.M.trace();
  f.surfaceArea = f.coverArea;
  if (surface == Surface::RP2) {
    if (!mesh.antipodal) throw ConfigError("RP2 computations need an antipodally symmetric mesh");
    f.basis = antipodalSectorBasis(mesh, +1);
    f.K = restrictToSector(f.K, f.basis);
    f.M = restrictToSector(f.M, f.basis);
    f.surfaceArea = 0.5 * f.coverArea;
  }
  return f;
}

// Full-mesh vectors of the requested eigenpairs, M-orthonormal over the cover.
Eigen::MatrixXd coverVectors(const SectorForms& f, const Eigen::MatrixXd& v) {
  return f.basis.size() ? Eigen::MatrixXd(f.basis * v) : v;
}

} // namespace

LambdaBar lambdaBar(const SphereMesh& mesh, const Density& density, int k, Surface surface,
                    const EigenOptions& options) {
  if (k < 1) throw ConfigError("lambda-bar needs k >= 1");
  const SectorForms f = sectorForms(mesh, density, surface);
  if (k + 1 >= f.K.dimension()) throw ConfigError("mesh too coarse for lambda_" + std::to_string(k));
  LambdaBar out;
  out.spectrum = solveLowest(f.K, f.M, std::min(k + 4, f.K.dimension() / 2 - 1), options);
  out.lambda = out.spectrum.eigenvalues(k);
  out.area = f.surfaceArea;
  out.value = out.lambda * out.area;
  return out;
}

SphereMesh adaptedMesh(int level, Surface surface, double epsilon, double slope) {
  if (!(epsilon > 0 && epsilon < 1)) throw ConfigError("adapted mesh needs 0 < epsilon < 1");
  if (!(slope >= 1)) throw ConfigError("adapted mesh slope must be >= 1");
  SphereMesh mesh = icosphere(level);
  const double L = -std::log(epsilon);
  // Breakpoints (t', t) of the monotone profile for t' >= its left end; identity slope outside the band.
  std::function<double(double)> h;
  if (surface == Surface::S2) {
    // Bubble cap t < -L, band [-L, 0], base t > 0.
    const double a = 0.5 * L / slope;
    h = [=](double t) {
      if (t <= -a) return t + a - L;
      if (t >= a) return t - a;
      return -L + (t + a) * (L / (2.0 * a));
    };
  } else {
    // Odd profile: base |t| <= b unchanged, bands [b, L] stretched, bubble caps beyond.
    const double b = 0.0;
    const double a = b + (L - b) / slope;
    h = [=](double t) {
      const double s = t < 0 ? -1.0 : 1.0;
      const double u = std::abs(t);
      double v;
      if (u <= b) v = u;
      else if (u <= a) v = b + (u - b) * (L - b) / (a - b);
      else v = u - a + L;
      return s * v;
    };
  }
  for (Vec3& x : mesh.vertices) {
    const double r = std::hypot(x(0), x(1));
    if (r < 1e-15) continue;
    // |z| = r / (1 + x3) in the chart at +z.
    const double t = std::log(r / (1.0 + x(2)));
    const double z = std::exp(h(t));
    const double z2 = z * z;
    const double x3 = (1.0 - z2) / (1.0 + z2);
    const double rn = 2.0 * z / (1.0 + z2);
    x = Vec3(x(0) / r * rn, x(1) / r * rn, x3);
  }
  return mesh;
}

std::vector<BubbleSpec> familyBubbles(Surface surface, int k, double epsilon, const FamilyOptions& options) {
  if (k < 2) throw ConfigError("degenerating families need k >= 2");
  // Round base rho = 1: cover area 4 pi.
  std::vector<BubbleSpec> specs;
  const int count = k - 1;
  const double theta = options.bubbleSeparation;
  auto centre = [&](int j) -> Vec3 {
    if (j == 0) return Vec3::UnitZ();
    const double phi = 2.0 * kPi * (j - 1) / std::max(1, count - 1);
    return Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
  };
  if (surface == Surface::S2) {
    for (int j = 0; j < count; ++j) specs.push_back({centre(j), 4.0 * kPi, epsilon});
  } else {
    // Projective base of area 3u = 2 pi, so each projective bubble has area 2u = 4 pi / 3 on both sheets.
    const double bubble = 4.0 * kPi / 3.0;
    for (int j = 0; j < count; ++j) {
      specs.push_back({centre(j), bubble, epsilon});
      specs.push_back({-centre(j), bubble, epsilon});
    }
  }
  return specs;
}

Density familyDensity(const SphereMesh& mesh, Surface surface, int k, double epsilon, const FamilyOptions& options) {
  return bubbleDensity(mesh, Density::constant(mesh.vertexCount(), 1.0), familyBubbles(surface, k, epsilon, options));
}

std::vector<FamilyPoint> limitFamily(Surface surface, int k, const std::vector<double>& epsilons,
                                     const FamilyOptions& options) {
  if (k < 2) throw ConfigError("a degenerating family needs k >= 2, got " + std::to_string(k));
  for (std::size_t i = 1; i < epsilons.size(); ++i)
    if (!(epsilons[i] < epsilons[i - 1])) throw ConfigError("epsilon list must be strictly decreasing");
  std::vector<FamilyPoint> out;
  for (double e : epsilons) {
    const SphereMesh mesh = options.adaptive && k == 2 ? adaptedMesh(options.meshLevel, surface, e, options.slope)
                                                       : icosphere(options.meshLevel);
    const Density rho = familyDensity(mesh, surface, k, e, options);
    out.push_back({e, lambdaBar(mesh, rho, k, surface, options.eigen).value});
  }
  return out;
}

} // namespace speclab

namespace speclab {

namespace {

struct Evaluation {
  Eigen::VectorXd logDensity; // renormalized to unit surface area
  double lambda = 0.0;
  double value = 0.0;
  double coverArea = 0.0;
  double surfaceArea = 0.0;
  Eigen::VectorXd coverMass; // rho_i A_i
  Eigen::MatrixXd cluster;   // cover eigenvectors of the cluster containing lambda_k
};

Density densityFrom(const Eigen::VectorXd& logDensity) {
  Density d;
  d.values.resize(logDensity.size());
  for (Eigen::Index i = 0; i < logDensity.size(); ++i) d.values[i] = std::exp(logDensity(i));
  return d;
}

Evaluation evaluate(const SphereMesh& mesh, Eigen::VectorXd logDensity, int k, Surface surface, double clusterTol,
                    const EigenOptions& options) {
  const std::vector<double> a = vertexAreas(mesh);
  double cover = 0.0;
  for (int i = 0; i < mesh.vertexCount(); ++i) cover += std::exp(logDensity(i)) * a[i];
  const double surfaceArea = surface == Surface::RP2 ? 0.5 * cover : cover;
  logDensity.array() -= std::log(surfaceArea);

  const SectorForms f = sectorForms(mesh, densityFrom(logDensity), surface);
  const int count = std::min(k + 6, f.K.dimension() / 2 - 1);
  const SpectrumResult spec = solveLowest(f.K, f.M, count, options);
  Evaluation e;
  e.logDensity = std::move(logDensity);
  e.lambda = spec.eigenvalues(k);
  e.coverArea = f.coverArea;
  e.surfaceArea = f.surfaceArea;
  e.value = e.lambda * e.surfaceArea;
  e.coverMass.resize(mesh.vertexCount());
  for (int i = 0; i < mesh.vertexCount(); ++i) e.coverMass(i) = std::exp(e.logDensity(i)) * a[i];
  int lo = k, hi = k;
  while (lo > 1 && spec.eigenvalues(lo - 1) >= e.lambda * (1.0 - clusterTol)) --lo;
  while (hi + 1 < spec.size() && spec.eigenvalues(hi + 1) <= e.lambda * (1.0 + clusterTol)) ++hi;
  e.cluster = coverVectors(f, spec.eigenvectors.middleCols(lo, hi - lo + 1));
  return e;
}

// Per-vertex derivative density of lambda-bar for the mixed eigenvector U X U^T:
// d lambda-bar = sum_i c_i ds_i G_i with G_i = lambda (A_surf / A_cover) (1 - A_cover u_i^T X u_i).
Eigen::VectorXd gradientDensity(const Evaluation& e, const Eigen::MatrixXd& X) {
  const double f = e.surfaceArea / e.coverArea;
  const Eigen::MatrixXd UX = e.cluster * X;
  const Eigen::VectorXd q = (UX.array() * e.cluster.array()).rowwise().sum();
  return e.lambda * f * (1.0 - e.coverArea * q.array()).matrix();
}

double weightedDot(const Eigen::VectorXd& c, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return (c.array() * x.array() * y.array()).sum();
}

// Minimum-norm element of the convex hull of cluster gradients, by Frank-Wolfe over trace-one PSD matrices.
Eigen::VectorXd ascentDirection(const Evaluation& e, int iterations) {
  const int r = static_cast<int>(e.cluster.cols());
  Eigen::MatrixXd X = Eigen::MatrixXd::Identity(r, r) / r;
  Eigen::VectorXd G = gradientDensity(e, X);
  if (r == 1) return G;
  const double f = e.surfaceArea / e.coverArea;
  for (int it = 0; it < iterations; ++it) {
    // d/dX of 0.5 |G|_c^2 is -lambda f A_cover sum_i c_i G_i u_i u_i^T.
    const Eigen::VectorXd w = e.coverMass.array() * G.array();
    const Eigen::MatrixXd grad = -e.lambda * f * e.coverArea * (e.cluster.transpose() * w.asDiagonal() * e.cluster);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(grad);
    const Eigen::VectorXd v = es.eigenvectors().col(0);
    const Eigen::MatrixXd S = v * v.transpose();
    const Eigen::VectorXd D = gradientDensity(e, S) - G;
    const double dd = weightedDot(e.coverMass, D, D);
    if (dd <= 0) break;
    const double gamma = std::clamp(-weightedDot(e.coverMass, G, D) / dd, 0.0, 1.0);
    if (gamma <= 1e-12) break;
    X += gamma * (S - X);
    G += gamma * D;
  }
  return G;
}

AscentState toState(const Evaluation& e, int iteration, double step, int failures) {
  AscentState s;
  s.logDensity = e.logDensity;
  s.iteration = iteration;
  s.lambda = e.lambda;
  s.area = e.surfaceArea;
  s.lambdaBar = e.value;
  s.step = step;
  s.clusterSize = static_cast<int>(e.cluster.cols());
  s.lineSearchFailures = failures;
  return s;
}

} // namespace

AscentResult ascend(const SphereMesh& mesh, Surface surface, int k, const AscentState& start, int steps,
                    const AscentOptions& options) {
  if (k < 1) throw ConfigError("ascent needs k >= 1");
  if (start.logDensity.size() != mesh.vertexCount()) throw ConfigError("initial log-density has the wrong size");
  if (!start.logDensity.allFinite()) throw ConfigError("initial log-density must be finite");
  AscentResult result;
  double tol = options.clusterTol;
  Evaluation cur = evaluate(mesh, start.logDensity, k, surface, tol, options.eigen);
  double step = options.initialStep;
  int failures = 0;
  result.trajectory.push_back(toState(cur, 0, step, failures));
  for (int it = 1; it <= steps; ++it) {
    // A vanishing direction or a failed line search over a wide cluster only means the cluster was too wide.
    bool accepted = false;
    while (!accepted) {
      const Eigen::VectorXd g = ascentDirection(cur, options.frankWolfeIterations);
      const double gnorm = std::sqrt(weightedDot(cur.coverMass, g, g));
      if (gnorm >= options.stationarityTol * cur.value) {
        const Eigen::VectorXd dir = g / g.cwiseAbs().maxCoeff();
        double trialStep = step;
        for (int h = 0; h <= options.maxHalvings && !accepted; ++h, trialStep *= 0.5) {
          Evaluation trial = evaluate(mesh, cur.logDensity + trialStep * dir, k, surface, tol, options.eigen);
          if (trial.value > cur.value) {
            cur = std::move(trial);
            step = trialStep;
            accepted = true;
          }
        }
      }
      if (accepted || tol <= options.minClusterTol) break;
      tol = std::max(0.25 * tol, options.minClusterTol);
      cur = evaluate(mesh, cur.logDensity, k, surface, tol, options.eigen);
    }
    if (!accepted) {
      ++failures;
      result.trajectory.push_back(toState(cur, it, step, failures));
      result.stalled = true;
      break;
    }
    result.trajectory.push_back(toState(cur, it, step, failures));
    step = std::min(step * options.growth, 4.0 * options.initialStep);
    // Let the cluster widen again slowly once progress resumes.
    tol = std::min(options.clusterTol, 2.0 * tol);
  }
  result.best = *std::max_element(result.trajectory.begin(), result.trajectory.end(),
                                  [](const AscentState& a, const AscentState& b) { return a.lambdaBar < b.lambdaBar; });
  return result;
}

AscentState randomStart(const SphereMesh& mesh, Surface surface, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Polynomial3 field;
  for (int l = 1; l <= 4; ++l) {
    if (surface == Surface::RP2 && l % 2 != 0) continue;
    for (const Polynomial3& y : sphericalHarmonicBasis(l)) field += y * normal(rng);
  }
  AscentState s;
  s.logDensity.resize(mesh.vertexCount());
  for (int i = 0; i < mesh.vertexCount(); ++i) s.logDensity(i) = field(mesh.vertices[i]);
  const double peak = s.logDensity.cwiseAbs().maxCoeff();
  if (peak > 0) s.logDensity *= amplitude / peak;
  return s;
}

double lambdaBarDerivative(const SphereMesh& mesh, const Eigen::VectorXd& logDensity, int k, Surface surface,
                           const Eigen::VectorXd& direction, const EigenOptions& options) {
  const Evaluation e = evaluate(mesh, logDensity, k, surface, 0.0, options);
  if (e.cluster.cols() != 1) throw ConfigError("lambda_k is not simple; the derivative is only directional");
  const Eigen::VectorXd G = gradientDensity(e, Eigen::MatrixXd::Identity(1, 1));
  return weightedDot(e.coverMass, G, direction);
}

GradientCheck gradientCheck(const SphereMesh& mesh, const Eigen::VectorXd& logDensity, int k, Surface surface,
                            const Eigen::VectorXd& direction, double h, const EigenOptions& options) {
  GradientCheck c;
  c.analytic = lambdaBarDerivative(mesh, logDensity, k, surface, direction, options);
  const double up = evaluate(mesh, logDensity + h * direction, k, surface, 0.0, options).value;
  const double down = evaluate(mesh, logDensity - h * direction, k, surface, 0.0, options).value;
  c.finiteDifference = (up - down) / (2.0 * h);
  c.relativeError = std::abs(c.analytic - c.finiteDifference) / std::max(std::abs(c.finiteDifference), 1e-12);
  return c;
}

void writeTrajectoryCsv(const std::vector<AscentState>& trajectory, std::ostream& out) {
  out << "iter,lambda_k,area,lambda_bar,step\n";
  out.precision(12);
  for (const auto& s : trajectory)
    out << s.iteration << ',' << s.lambda << ',' << s.area << ',' << s.lambdaBar << ',' << s.step << '\n';
}

void writeFamilyCsv(const std::vector<FamilyPoint>& family, std::ostream& out) {
  out << "epsilon,lambda_bar\n";
  out.precision(12);
  for (const auto& p : family) out << p.epsilon << ',' << p.lambdaBar << '\n';
}

} // namespace speclab
