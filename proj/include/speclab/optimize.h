#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "speclab/eigensolve.h"
#include "speclab/fem.h"
#include "speclab/index.h"
#include "speclab/mesh.h"

namespace speclab {

/// Round sphere of area targetArea glued in at `center`, of chart radius `scale`.
struct BubbleSpec {
  Vec3 center = Vec3::UnitZ();
  double targetArea = 1.0;
  double scale = 0.1;
};

// Round-gauge density of one bubble at x: the chart density (A/pi) e^2 / (e^2 + |z|^2)^2 divided by the round
// conformal factor 4 / (1 + |z|^2)^2. Its exact integral over the sphere is A for every e.
double bubbleProfile(const BubbleSpec& spec, const Vec3& x);

// base + sum of bubble profiles. Throws ConfigError for invalid specs, overlapping charts, or a bubble whose
// discrete area misses its target by more than `areaTolerance` (relative).
Density bubbleDensity(const SphereMesh& mesh, const Density& base, const std::vector<BubbleSpec>& specs,
                      double areaTolerance = 0.05);

// Discrete area sum_i profile(x_i) A_i of each bubble alone.
std::vector<double> bubbleAreas(const SphereMesh& mesh, const std::vector<BubbleSpec>& specs);

struct LambdaBar {
  double lambda = 0.0; // lambda_k
  double area = 0.0;   // of the surface (half the cover for RP2)
  double value = 0.0;  // lambda * area
  SpectrumResult spectrum;
};

// lambda_k(rho g) * Area(rho g); RP2 uses the antipodally even sector of a symmetric mesh.
LambdaBar lambdaBar(const SphereMesh& mesh, const Density& density, int k, Surface surface,
                    const EigenOptions& options = {});

// Icosphere re-spaced along the z axis for bubbles of scale epsilon at +z (S2) or at +-z (RP2): with t = log|z| in the
// chart at +z, t -> h(t) is piecewise linear, keeps each bubble cap and the base region undistorted, and stretches
// the neck band by at most `slope`. The result stays antipodally symmetric for RP2.
SphereMesh adaptedMesh(int level, Surface surface, double epsilon, double slope = 3.0);

struct FamilyPoint {
  double epsilon = 0.0;
  double lambdaBar = 0.0;
};

struct FamilyOptions {
  int meshLevel = 6;
  EigenOptions eigen;
  // Bubble centres: the first along +z, the rest spread on a circle of this polar angle.
  double bubbleSeparation = 1.2;
  // Use adaptedMesh for k = 2; larger k uses the plain icosphere.
  bool adaptive = true;
  double slope = 3.0;
};

// Degenerating family: S2 gets k-1 bubbles with the same area as the round base; RP2 gets k-1 antipodal bubble
// pairs of area 2u each against a projective base of area 3u.
std::vector<FamilyPoint> limitFamily(Surface surface, int k, const std::vector<double>& epsilons,
                                     const FamilyOptions& options = {});
// Configuration of one family member (exposed for checks).
std::vector<BubbleSpec> familyBubbles(Surface surface, int k, double epsilon, const FamilyOptions& options = {});
Density familyDensity(const SphereMesh& mesh, Surface surface, int k, double epsilon,
                      const FamilyOptions& options = {});

struct AscentState {
  Eigen::VectorXd logDensity;
  int iteration = 0;
  double lambda = 0.0;
  double area = 0.0;
  double lambdaBar = 0.0;
  double step = 0.0;
  int clusterSize = 1;
  int lineSearchFailures = 0;
};

struct AscentOptions {
  EigenOptions eigen;
  double initialStep = 0.5;
  double growth = 1.5;
  int maxHalvings = 8;
  // Relative width of the eigenvalue cluster treated as one multiple eigenvalue.
  double clusterTol = 0.02;
  // The cluster tolerance shrinks down to this before the ascent is declared stalled.
  double minClusterTol = 1e-6;
  int frankWolfeIterations = 60;
  // Stop once the ascent direction norm (relative to lambda-bar) falls below this.
  double stationarityTol = 1e-4;
};

struct AscentResult {
  std::vector<AscentState> trajectory;
  AscentState best;
  bool stalled = false; // persistent line-search failure
};

AscentResult ascend(const SphereMesh& mesh, Surface surface, int k, const AscentState& start, int steps,
                    const AscentOptions& options = {});

// Smooth random log-density from low-degree harmonics; antipodally even for RP2.
AscentState randomStart(const SphereMesh& mesh, Surface surface, double amplitude, std::uint64_t seed);

// Derivative of lambda-bar_k along d(log rho) = direction, from the perturbation formula for a simple eigenvalue.
double lambdaBarDerivative(const SphereMesh& mesh, const Eigen::VectorXd& logDensity, int k, Surface surface,
                           const Eigen::VectorXd& direction, const EigenOptions& options = {});

struct GradientCheck {
  double analytic = 0.0;
  double finiteDifference = 0.0;
  double relativeError = 0.0;
};

GradientCheck gradientCheck(const SphereMesh& mesh, const Eigen::VectorXd& logDensity, int k, Surface surface,
                            const Eigen::VectorXd& direction, double h = 1e-4, const EigenOptions& options = {});

// "iter,lambda_k,area,lambda_bar,step"
void writeTrajectoryCsv(const std::vector<AscentState>& trajectory, std::ostream& out);
// "epsilon,lambda_bar"
void writeFamilyCsv(const std::vector<FamilyPoint>& family, std::ostream& out);

} // namespace speclab
