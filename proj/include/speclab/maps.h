#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "speclab/fem.h"
#include "speclab/mesh.h"
#include "speclab/polynomial.h"

namespace speclab {

/// Map S^2 -> S^{2m} whose components are polynomials restricted to the unit sphere.
struct PolynomialMap {
  int m = 0;
  std::vector<Polynomial3> components;
};

/// Holomorphic map of the Riemann sphere, z -> p(z) / q(z). Coefficients are in ascending powers.
struct RationalMap {
  std::vector<Complex> p;
  std::vector<Complex> q;

  int degree() const;
  // Homogeneous evaluation of (p, q) at a point of the domain, in the chart used for x.
  Complex evalP(Complex z) const;
  Complex evalQ(Complex z) const;
};

/// Value and 2 x (n+1) derivative in the orthonormal tangent frame (t1, t2) at x.
struct MapSample {
  Eigen::VectorXd value;
  Eigen::Matrix<double, 2, Eigen::Dynamic> jacobian;
  Vec3 t1;
  Vec3 t2;
};

class HarmonicMap {
public:
  using Core = std::variant<PolynomialMap, RationalMap>;

  HarmonicMap(PolynomialMap map, std::string descriptor = {});
  HarmonicMap(RationalMap map, std::string descriptor = {});

  const Core& core() const { return core_; }
  bool isPolynomial() const { return std::holds_alternative<PolynomialMap>(core_); }
  bool isRational() const { return std::holds_alternative<RationalMap>(core_); }
  const PolynomialMap& polynomial() const { return std::get<PolynomialMap>(core_); }
  const RationalMap& rational() const { return std::get<RationalMap>(core_); }

  const std::string& descriptor() const { return descriptor_; }
  // m of the unpadded map: the polynomial m, or 1 for a rational map.
  int halfDimension() const;
  // Number of value components (n + 1 for a map into S^n).
  int components() const { return coreComponents() + padding_; }
  int targetDimension() const { return components() - 1; }
  int padding() const { return padding_; }
  bool linearlyFull() const { return padding_ == 0; }
  // Phi(-x) = Phi(x) identically.
  bool isEven() const;

  Eigen::VectorXd value(const Vec3& x) const;
  MapSample sample(const Vec3& x) const;
  // (1/2) |grad Phi|^2 in the round metric.
  double energyDensity(const Vec3& x) const;

  HarmonicMap padded(int extra, std::string descriptor) const;

private:
  int coreComponents() const;

  Core core_;
  int padding_ = 0;
  std::string descriptor_;
};

// Real spherical harmonic basis of degree m normalized so the squares sum to one. 1 <= m <= 4.
PolynomialMap veronese(int m);

// "veronese:m", "rational:p(z)/q(z)", "pad:<inner>:<n>". Throws ConfigError on malformed input.
HarmonicMap parseMap(const std::string& descriptor);
// Complex polynomial in z, e.g. "z^3", "(1+2i)z^2 - 0.5z + 3", "2.5i*z". Ascending coefficients.
std::vector<Complex> parseComplexPolynomial(const std::string& text);
std::string formatComplexPolynomial(std::span<const Complex> coefficients);

// Throws ConfigError when degree < 1 or p, q share a root.
void validateRational(const RationalMap& map);

Density energyDensity(const HarmonicMap& map, const SphereMesh& mesh);
// Dirichlet energy integral sum_i rho_i A_i.
double energy(const HarmonicMap& map, const SphereMesh& mesh);
// round(E / 4 pi); throws ConfigError when E / 4 pi is farther than 0.1 from an integer.
int degree(const HarmonicMap& map, const SphereMesh& mesh);

// max_x |Delta Phi - |grad Phi|^2 Phi| with Delta the positive round Laplacian.
// Exact zero for rational maps (holomorphic).
double harmonicityResidual(const HarmonicMap& map, std::span<const Vec3> points);

// z -> (a f + b) / (c f + d). Throws ConfigError when ad - bc = 0.
RationalMap mobiusPostcompose(const RationalMap& map, Complex a, Complex b, Complex c, Complex d);

// Zero-padded into S^{newDimension}; newDimension must exceed the current target dimension.
HarmonicMap embedInLargerSphere(const HarmonicMap& map, int newDimension);

// Derivative of the map along the target Moebius flow exp(t X), X = [[a, b], [c, -a]], at vertex positions.
// Returns one ambient vector per point, tangent to the target at Phi(x).
std::vector<Eigen::VectorXd> mobiusJacobiField(const RationalMap& map, Complex a, Complex b, Complex c,
                                               std::span<const Vec3> points);

} // namespace speclab
