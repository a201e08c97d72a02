#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "speclab/arithmetic.h"
#include "speclab/eigensolve.h"
#include "speclab/errors.h"
#include "speclab/index.h"
#include "speclab/maps.h"
#include "speclab/mesh.h"
#include "speclab/optimize.h"
#include "speclab/report.h"
#include "speclab/sequence.h"

using namespace speclab;
using ordered_json = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kVerificationFailure = 1, kUsage = 2, kNumerical = 3 };

// Thrown by a subcommand that finished but missed an asserted value.
struct VerificationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  int meshLevel = -1; // -1: the subcommand's default
  int jacobiLevel = -1; // -1: automatic (finer for rational maps, finer again from degree 4)
  double eigenTol = 1e-8;
  int eigenCount = 16;
  double spectralGuard = 0.1;
  double jacobiGuardFraction = 0.05;
  std::uint64_t seed = 42;
  std::string surface = "s2";
  std::string out;

  void validate() const {
    if (meshLevel < -1 || meshLevel > 8) throw ConfigError("mesh-level must be in [0, 8]");
    if (!(eigenTol > 0.0)) throw ConfigError("eigen-tol must be positive");
    if (eigenCount < 1) throw ConfigError("count must be at least 1");
    if (!(spectralGuard > 0.0) || !(jacobiGuardFraction > 0.0)) throw ConfigError("guard bands must be positive");
    parseSurface(surface);
  }
  int level(int fallback) const { return meshLevel >= 0 ? meshLevel : fallback; }
  EigenOptions eigen() const {
    EigenOptions e;
    e.tol = eigenTol;
    e.seed = seed;
    return e;
  }
  IndexOptions index() const {
    IndexOptions o;
    o.eigen = eigen();
    o.spectralGuard = spectralGuard;
    o.jacobiGuardFraction = jacobiGuardFraction;
    return o;
  }
};

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream s;
  s << std::put_time(std::gmtime(&t), "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

// Output sink: the named file, or stdout when the path is empty.
class Output {
public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
  std::unique_ptr<std::ofstream> file_;
};

// CSV and Markdown carry the timestamp in a leading comment line.
void writeHeader(std::ostream& out, const std::string& command) {
  out << "# speclab " << command << " build " << buildId() << " at " << timestamp() << '\n';
}

// JSON carries it as the first member, which dump(2) puts on a line of its own.
void writeJson(std::ostream& out, const std::string& command, const nlohmann::json& payload) {
  ordered_json doc;
  doc["generated"] = "speclab " + command + " build " + buildId() + " at " + timestamp();
  doc["result"] = payload;
  out << doc.dump(2) << '\n';
}

std::string siblingPath(const std::string& path, const std::string& suffix) {
  return path.empty() ? std::string() : path + suffix;
}

Density readDensity(const std::string& path, int vertexCount) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open density file " + path);
  Density rho;
  double v;
  while (in >> v) rho.values.push_back(v);
  if (!in.eof()) throw ConfigError("density file " + path + " has a non-numeric entry");
  rho.validate(vertexCount);
  return rho;
}

int runSpectrum(const Config& cfg, const std::string& densityPath) {
  const Surface surface = parseSurface(cfg.surface);
  const SphereMesh mesh = icosphere(cfg.level(5));
  const Density rho = densityPath.empty() ? Density::constant(mesh.vertexCount(), 1.0)
                                          : readDensity(densityPath, mesh.vertexCount());
  SymmetricForm K = assembleStiffness(mesh);
  SymmetricForm M = assembleMass(mesh, rho);
  if (surface == Surface::RP2) {
    const SparseMatrix basis = antipodalSectorBasis(mesh, +1);
    K = restrictToSector(K, basis);
    M = restrictToSector(M, basis);
  }
  const SpectrumResult spectrum = solveLowest(K, M, cfg.eigenCount, cfg.eigen());
  Output out(cfg.out);
  writeHeader(out.stream(), "spectrum");
  writeSpectrumCsv(spectrum, out.stream());
  return kOk;
}

int runIndex(const Config& cfg, const std::string& descriptor) {
  const HarmonicMap map = parseMap(descriptor);
  const Surface surface = parseSurface(cfg.surface);
  const int level = cfg.level(4);
  int jacobiLevel = cfg.jacobiLevel;
  if (jacobiLevel < 0) jacobiLevel = map.isRational() ? level + (map.rational().degree() >= 4 ? 2 : 1) : level;
  const IndexReport report = computeIndexReport(map, surface, level, cfg.index(), jacobiLevel);
  Output out(cfg.out);
  writeJson(out.stream(), "index", toJson(report));
  for (const InequalityVerdict& v : report.inequalities)
    if (!v.pass) throw VerificationFailure("inequality " + v.name + " fails");
  if (!report.stable) throw VerificationFailure("counts are not stable under guard scaling");
  return kOk;
}

int runEnumerate(const Config& cfg, const std::vector<std::string>& dropped) {
  EnumerationConstraints c;
  for (const std::string& name : dropped) {
    if (name == "even-m") c.evenM = false;
    else if (name == "nu-lower") c.nuAtLeast2mPlus1 = false;
    else if (name == "degree-lower") c.degreeLowerBound = false;
    else if (name == "nu-odd") c.nuOdd = false;
    else throw ConfigError("unknown constraint '" + name + "' (even-m, nu-lower, degree-lower, nu-odd)");
  }
  const EnumerationResult result = enumerateExceptions(c);
  nlohmann::json traces = nlohmann::json::array();
  bool tracesValid = true;
  for (int k = 1; k <= 5; ++k) {
    const InductionTrace t = verifyInductionStep(k);
    tracesValid = tracesValid && t.valid();
    traces.push_back(toJson(t));
  }
  const InductionTrace tampered = verifyInductionStep(1, true);
  traces.push_back(toJson(tampered));
  nlohmann::json payload = toJson(result);
  payload["induction_traces"] = traces;
  Output out(cfg.out);
  writeJson(out.stream(), "enumerate", payload);
  if (!tracesValid || tampered.valid()) throw VerificationFailure("induction traces do not match expectations");
  const std::set<std::pair<int, int>> expected{{2, 3}, {2, 4}, {4, 10}};
  if (dropped.empty() && (result.cases != expected || result.cutoffM > analyticCutoffM()))
    throw VerificationFailure("exceptional set differs from {(2,3),(2,4),(4,10)}");
  return kOk;
}

struct MaximizeArgs {
  int k = 1;
  std::string mode = "ascend";
  int steps = 200;
  double amplitude = 1.0;
  std::vector<double> epsilons{0.1, 0.05, 0.02, 0.01, 0.005, 0.002};
  std::string summary;
};

int runMaximize(const Config& cfg, const MaximizeArgs& a) {
  if (a.k < 1) throw ConfigError("k must be at least 1");
  const Surface surface = parseSurface(cfg.surface);
  const double pi = std::numbers::pi;
  const double target = surface == Surface::S2 ? 8.0 * pi * a.k : 4.0 * pi * (2 * a.k + 1);
  ordered_json summary;
  summary["surface"] = toString(surface);
  summary["k"] = a.k;
  summary["mode"] = a.mode;
  summary["target"] = target;
  summary["target_over_pi"] = target / pi;
  bool ok = true;
  Output out(cfg.out);
  writeHeader(out.stream(), "maximize");
  if (a.mode == "ascend") {
    const SphereMesh mesh = icosphere(cfg.level(3));
    AscentOptions options;
    options.eigen = cfg.eigen();
    const AscentResult r = ascend(mesh, surface, a.k, randomStart(mesh, surface, a.amplitude, cfg.seed), a.steps, options);
    writeTrajectoryCsv(r.trajectory, out.stream());
    const double gap = std::abs(r.best.lambdaBar - target) / target;
    summary["best"] = r.best.lambdaBar;
    summary["best_over_pi"] = r.best.lambdaBar / pi;
    summary["iterations"] = r.trajectory.empty() ? 0 : r.trajectory.back().iteration;
    summary["relative_gap"] = gap;
    summary["stalled"] = r.stalled;
    // Hersch and Li-Yau fix the k = 1 maxima; higher k have no single-chart target for the ascent.
    if (a.k == 1) ok = gap < 0.02;
  } else if (a.mode == "family") {
    FamilyOptions options;
    options.eigen = cfg.eigen();
    options.meshLevel = cfg.level(options.meshLevel);
    const std::vector<FamilyPoint> family = limitFamily(surface, a.k, a.epsilons, options);
    writeFamilyCsv(family, out.stream());
    bool monotone = true, belowCeiling = true;
    for (std::size_t i = 0; i < family.size(); ++i) {
      if (i > 0 && family[i].lambdaBar < family[i - 1].lambdaBar) monotone = false;
      if (family[i].lambdaBar > target * 1.05) belowCeiling = false;
    }
    const double last = family.empty() ? 0.0 : family.back().lambdaBar;
    summary["mesh_level"] = options.meshLevel;
    summary["last"] = last;
    summary["last_over_pi"] = last / pi;
    summary["relative_gap"] = std::abs(last - target) / target;
    summary["monotone"] = monotone;
    summary["below_ceiling"] = belowCeiling;
    ok = monotone && belowCeiling && std::abs(last - target) / target < 0.05;
  } else {
    throw ConfigError("mode must be ascend or family");
  }
  summary["reached"] = ok;
  Output sum(a.summary.empty() ? siblingPath(cfg.out, ".summary.json") : a.summary);
  writeJson(sum.stream(), "maximize", summary);
  if (!ok) throw VerificationFailure("maximization did not reach the target constant");
  return kOk;
}

struct SequenceArgs {
  std::string map;
  int charts = 3;
  double radius = 0.15;
  int points = 7;
  std::string mode = "analytic";
};

int runSequenceVerify(const Config& cfg, const SequenceArgs& a) {
  const HarmonicMap map = parseMap(a.map);
  if (a.charts < 1) throw ConfigError("charts must be at least 1");
  SequenceOptions options;
  if (a.mode == "fd") options.mode = DerivativeMode::FiniteDifference;
  else if (a.mode != "analytic") throw ConfigError("mode must be analytic or fd");
  if (options.mode == DerivativeMode::FiniteDifference && map.halfDimension() != 1)
    throw ConfigError("finite-difference mode supports m = 1 maps only");

  // Chart centres: the best-conditioned vertex first, then the other coarse vertices that are not singular.
  std::vector<Vec3> centres{chooseChartCenter(map)};
  for (const Vec3& v : icosphere(1).vertices) {
    if (static_cast<int>(centres.size()) >= a.charts) break;
    if ((v - centres.front()).norm() < 1e-12) continue;
    centres.push_back(v);
  }

  std::vector<IdentityResidual> rows;
  bool ok = true;
  for (const Vec3& c : centres) {
    try {
      const auto r = verifyIdentities(buildSequence(map, chartGrid(c, a.radius, a.points), options));
      rows.insert(rows.end(), r.begin(), r.end());
    } catch (const SingularPointError& e) {
      std::cerr << "skipping chart: " << e.what() << '\n';
    }
  }

  // Conjugate-field laws for a tangential polynomial field.
  // Padded directions are normal to the image span and have no conjugate, so the field lives in the core components.
  std::vector<Polynomial3> components = randomPolynomialField(map.components(), 2, cfg.seed);
  for (int j = map.components() - map.padding(); j < map.components(); ++j) components[j] = Polynomial3();
  const FieldJet v = projectedPolynomialField(map, components);
  const FieldJet vs = conjugateFieldFunction(map, v);
  const FieldJet vss = conjugateFieldFunction(map, vs);
  double involution = 0.0;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 40; ++k) {
    const Vec3 x = Vec3(normal(rng), normal(rng), normal(rng)).normalized();
    const Eigen::VectorXd a1 = pointFieldFromJet(v)(x), a2 = pointFieldFromJet(vss)(x);
    involution = std::max(involution, (a1 + a2).norm() / std::max(1.0, a1.norm()));
  }
  const double q1 = continuumEnergyForm(map, v), q2 = continuumEnergyForm(map, vs);
  const double qrel = std::abs(q1 - q2) / std::max(1.0, std::abs(q1));
  rows.push_back({"conjugate_involution", centres.front(), involution, involution < 1e-6});
  rows.push_back({"conjugate_energy_form", centres.front(), qrel, qrel < 1e-6});

  // gamma-hat chain identity for a Jacobi field: the Moebius dilation for rational maps, a rotation field otherwise.
  const ChartGrid grid = chartGrid(centres.front(), a.radius, a.points);
  FieldJet jacobi;
  if (map.isRational()) {
    jacobi = mobiusFieldFunction(map.rational(), Complex(1.0, 0.0), 0.0, 0.0);
  } else {
    const PolynomialMap& p = map.polynomial();
    std::vector<Polynomial3> rotated(map.components());
    for (int i = 0; i < map.components(); ++i) rotated[i] = p.components[0] * 0.0;
    rotated[0] = p.components[1] * -1.0;
    rotated[1] = p.components[0];
    jacobi = projectedPolynomialField(map, rotated);
  }
  const double gh = gammaHatAnalyticResidual(map, jacobi, grid);
  rows.push_back({"gamma_hat_dz_identity", centres.front(), gh, gh < 1e-8});

  Output out(cfg.out);
  writeHeader(out.stream(), "sequence-verify");
  writeResidualCsv(rows, out.stream());
  for (const IdentityResidual& r : rows) ok = ok && r.converged;
  if (!ok) throw VerificationFailure("a sequence identity residual exceeds its tolerance");
  return kOk;
}

int runBundleCommand(const Config& cfg, const std::string& descriptor, const std::string& markdown) {
  BundleConfig bc;
  bc.meshLevel = cfg.level(bc.meshLevel);
  if (cfg.jacobiLevel >= 0) bc.rationalJacobiLevel = cfg.jacobiLevel;
  bc.index = cfg.index();
  const VerificationBundle b = runBundle(descriptor, bc);
  Output out(cfg.out);
  writeJson(out.stream(), "bundle", toJson(b));
  if (!markdown.empty()) {
    Output md(markdown);
    writeHeader(md.stream(), "bundle");
    writeMarkdown(b, md.stream());
  }
  if (b.partial) {
    for (const std::string& e : b.errors) std::cerr << e << '\n';
    throw ConfigError("bundle is partial");
  }
  if (!b.passed()) throw VerificationFailure("bundle has failing checks");
  return kOk;
}

int runTraceability(const Config& cfg, bool namesOnly) {
  Output out(cfg.out);
  if (namesOnly) {
    std::set<std::string> names;
    for (const TraceEntry& e : traceability()) names.insert(e.tests.begin(), e.tests.end());
    for (const std::string& n : names) out.stream() << n << '\n';
  } else {
    writeHeader(out.stream(), "traceability");
    writeTraceabilityMarkdown(out.stream());
  }
  if (!traceabilityComplete()) throw VerificationFailure("traceability table has unmapped claims");
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral geometry laboratory for harmonic maps of S2 and RP2 into spheres"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Flat key=value configuration file; flags override it");
  app.config_formatter(std::make_shared<CLI::ConfigINI>());

  Config cfg;
  app.add_option("--mesh-level", cfg.meshLevel,
                 "Icosphere subdivision level (defaults: spectrum 5, index 4, ascend 3, family 6, bundle 4)");
  app.add_option("--jacobi-level", cfg.jacobiLevel, "Mesh level of the Jacobi pencil (-1: automatic)")
      ->capture_default_str();
  app.add_option("--eigen-tol", cfg.eigenTol, "Eigensolver residual tolerance")->capture_default_str();
  app.add_option("--count", cfg.eigenCount, "Number of eigenpairs")->capture_default_str();
  app.add_option("--spectral-guard", cfg.spectralGuard, "Guard band around the threshold 2")->capture_default_str();
  app.add_option("--jacobi-guard-fraction", cfg.jacobiGuardFraction, "Jacobi zero guard as a fraction of the gap")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  app.add_option("--surface", cfg.surface, "s2 or rp2")->capture_default_str();
  app.add_option("--out", cfg.out, "Output path (stdout when omitted)");

  auto* spectrum = app.add_subcommand("spectrum", "Lowest Laplace eigenvalues of a conformal metric");
  std::string densityPath;
  spectrum->add_option("--density", densityPath, "Per-vertex density file (round metric when omitted)");

  auto* index = app.add_subcommand("index", "Spectral and energy indices with inequality verdicts");
  std::string indexMap;
  index->add_option("--map", indexMap, "Map descriptor")->required();

  auto* enumerate = app.add_subcommand("enumerate", "Exact exceptional set and induction traces");
  std::vector<std::string> dropped;
  enumerate->add_option("--drop-constraint", dropped, "even-m, nu-lower, degree-lower or nu-odd (repeatable)");

  auto* maximize = app.add_subcommand("maximize", "Normalized eigenvalue ascent or bubbling family");
  MaximizeArgs maxArgs;
  maximize->add_option("--k", maxArgs.k, "Eigenvalue index")->capture_default_str();
  maximize->add_option("--mode", maxArgs.mode, "ascend or family")->capture_default_str();
  maximize->add_option("--steps", maxArgs.steps, "Ascent iterations")->capture_default_str();
  maximize->add_option("--amplitude", maxArgs.amplitude, "Random start amplitude")->capture_default_str();
  maximize->add_option("--epsilons", maxArgs.epsilons, "Bubble scales, decreasing");
  maximize->add_option("--summary", maxArgs.summary, "Summary JSON path (default: <out>.summary.json or stdout)");

  auto* sequence = app.add_subcommand("sequence-verify", "Harmonic sequence and conjugate-field residual tables");
  SequenceArgs seqArgs;
  sequence->add_option("--map", seqArgs.map, "Map descriptor")->required();
  sequence->add_option("--charts", seqArgs.charts, "Number of chart centres")->capture_default_str();
  sequence->add_option("--radius", seqArgs.radius, "Chart grid half-width")->capture_default_str();
  sequence->add_option("--points", seqArgs.points, "Grid points per side")->capture_default_str();
  sequence->add_option("--mode", seqArgs.mode, "analytic or fd")->capture_default_str();

  auto* bundle = app.add_subcommand("bundle", "Full verification bundle of one map");
  std::string bundleMap, markdown;
  bundle->add_option("--map", bundleMap, "Map descriptor")->required();
  bundle->add_option("--markdown", markdown, "Also write a Markdown summary here");

  auto* trace = app.add_subcommand("traceability", "Claim-to-test table");
  bool namesOnly = false;
  trace->add_flag("--names", namesOnly, "List the referenced test names only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kUsage;
  }

  try {
    cfg.validate();
    if (*spectrum) return runSpectrum(cfg, densityPath);
    if (*index) return runIndex(cfg, indexMap);
    if (*enumerate) return runEnumerate(cfg, dropped);
    if (*maximize) return runMaximize(cfg, maxArgs);
    if (*sequence) return runSequenceVerify(cfg, seqArgs);
    if (*bundle) return runBundleCommand(cfg, bundleMap, markdown);
    if (*trace) return runTraceability(cfg, namesOnly);
  } catch (const VerificationFailure& e) {
    std::cerr << "verification failure: " << e.what() << '\n';
    return kVerificationFailure;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const InsufficientSpectrumError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const SingularPointError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const AssemblyError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
