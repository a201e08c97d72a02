#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "speclab/index.h"
#include "speclab/jet.h"
#include "speclab/maps.h"
#include "speclab/mesh.h"

namespace speclab {

enum class DerivativeMode { Analytic, FiniteDifference };

struct SequenceOptions {
  DerivativeMode mode = DerivativeMode::Analytic;
  // Jet truncation order for analytic expansions.
  int order = 8;
  // Finite-difference step in the chart coordinate, and whether to Richardson-combine h and h/2.
  double step = 1e-3;
  bool richardson = true;
  // |f_{p+1}| / |f_p| below this counts as the end of the sequence.
  double terminationTol = 1e-8;
};

// Local expansion in a chart coordinate z around z0, one jet per ambient component.
using FieldJet = std::function<JetVector(const StereographicChart& chart, Complex z0, int order)>;
// Pointwise ambient field on the unit sphere.
using PointField = std::function<Eigen::VectorXd(const Vec3& x)>;

// Jets of the real components of the map at chart coordinate z0.
JetVector mapJet(const HarmonicMap& map, const StereographicChart& chart, Complex z0, int order);
FieldJet mapJetFunction(const HarmonicMap& map);

// Order-3 jets from centred differences of the real partials in x = Re z, y = Im z.
JetVector finiteDifferenceJet(const PointField& field, const StereographicChart& chart, Complex z0, double h,
                              bool richardson);

// Jet of the Moebius deformation field d/dt of (p, q) -> exp(tX)(p, q), X = [[a, b], [c, -a]].
JetVector mobiusFieldJet(const RationalMap& map, Complex a, Complex b, Complex c, const StereographicChart& chart,
                         Complex z0, int order);
FieldJet mobiusFieldFunction(const RationalMap& map, Complex a, Complex b, Complex c);

/// Harmonic sequence f_0 .. f_{m+1} and densities gamma_0 .. gamma_m at one sample, as jets.
struct LocalSequence {
  std::vector<JetVector> f;
  std::vector<Jet> norm2;
  std::vector<Jet> gamma;
  // First p with |f_p| / |f_{p-1}| below tolerance; -1 when not reached within m + 1 steps.
  int termination = -1;
};

LocalSequence localSequence(const JetVector& phi, int m, double terminationTol = 1e-8);

struct HarmonicSequence {
  ChartGrid grid;
  int m = 0;
  int termination = -1; // uniform over samples, -1 if samples disagree
  DerivativeMode mode = DerivativeMode::Analytic;
  std::vector<LocalSequence> samples;
};

// Throws SingularPointError when a section vanishes at a sample before termination.
HarmonicSequence buildSequence(const HarmonicMap& map, const ChartGrid& grid, const SequenceOptions& options = {});

struct IdentityResidual {
  std::string identity;
  Vec3 chartCenter;
  double maxResidual = 0.0;
  bool converged = true;
  bool operator==(const IdentityResidual&) const = default;
};

// dbar_relation, log_norm_laplacian, log_gamma_toda, hermitian_orthogonality, bilinear_isotropy.
std::vector<IdentityResidual> verifyIdentities(const HarmonicSequence& sequence);
// CSV "identity,chart_center,max_residual,converged".
void writeResidualCsv(const std::vector<IdentityResidual>& rows, std::ostream& out);

// Vertex of icosphere(probeLevel) maximizing min_{p < m} gamma_p at the chart centre.
Vec3 chooseChartCenter(const HarmonicMap& map, int probeLevel = 1);

/// V = V_+ + conj(V_+) with V_+ in span{f_1..f_m}; V* = 2 Im V_+.
struct ConjugateDecomposition {
  std::vector<Eigen::VectorXcd> plus;
  std::vector<Eigen::VectorXd> conjugate;
};

// Pointwise decomposition at sphere points. V must be tangent (V . Phi = 0).
ConjugateDecomposition conjugateField(const HarmonicMap& map, std::span<const Vec3> points,
                                      const std::vector<Eigen::VectorXd>& field);
// V* as a jet from the local sequence of the map.
JetVector conjugateJet(const LocalSequence& sequence, const JetVector& field, int m);
FieldJet conjugateFieldFunction(const HarmonicMap& map, FieldJet field);

// Tangential projection of a polynomial ambient field, V = P - (P . Phi) Phi.
FieldJet projectedPolynomialField(const HarmonicMap& map, std::vector<Polynomial3> components);
// Random polynomial field of total degree <= maxDegree, deterministic in seed.
std::vector<Polynomial3> randomPolynomialField(int components, int maxDegree, std::uint64_t seed);

// Q_E(V) = int |grad V|^2 - |grad Phi|^2 |V|^2 over the round sphere by Gauss-Legendre(cos theta) x uniform(phi).
double continuumEnergyForm(const HarmonicMap& map, const FieldJet& field, int phiSamples = 96);
// Round-metric L2 norm squared of a field.
double continuumNormSquared(const FieldJet& field, int phiSamples = 96);

// Exact Jacobi operator pi_perp(Delta V - |grad Phi|^2 V) at the mesh vertices, as the relative
// lumped-L2 norm ||J V|| / ||V||.
double analyticJacobiResidual(const HarmonicMap& map, const FieldJet& field, const SphereMesh& mesh);
// Discrete residual of a vertex field in the dual norm of the shifted Jacobi form, relative to ||V||_B.
double femJacobiResidual(const JacobiPencil& pencil, const std::vector<Eigen::VectorXd>& field);
// v^T A v / v^T B v for the reduced field.
double jacobiRayleighQuotient(const JacobiPencil& pencil, const std::vector<Eigen::VectorXd>& field);

/// gamma-hat chain and the z-derivative identity for the fields V_{-p}.
struct GammaHatChain {
  std::vector<Jet> gammaHat;          // gammaHat[p] = gamma-hat_{-p}, p = 0..depth
  std::vector<JetVector> fields;      // fields[p] = V_{-p}
  std::vector<double> dzResidual;     // |identity residual| for p = 1..depth, at the expansion point
};

GammaHatChain gammaHatChain(const LocalSequence& sequence, const JetVector& field, int depth);

struct ConvergenceStudy {
  std::vector<double> steps;
  std::vector<double> residuals;
  bool converged = false;
};

// Max dzV residual over the interior of a chart grid, with the map and field expanded either analytically
// (one entry, step 0) or by finite differences at each step in `steps` (decreasing).
ConvergenceStudy gammaHatStudy(const HarmonicMap& map, const PointField& field, const ChartGrid& grid,
                               std::span<const double> steps);
double gammaHatAnalyticResidual(const HarmonicMap& map, const FieldJet& field, const ChartGrid& grid);
// max |gamma-hat_0| over the grid for an analytic field.
double gammaHatZeroMax(const HarmonicMap& map, const FieldJet& field, const ChartGrid& grid);

// Pointwise evaluation of a jet field (values at the expansion point).
PointField pointFieldFromJet(const FieldJet& field);

} // namespace speclab
