#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace speclab {

/// Real polynomial in (x, y, z), stored sparsely by exponent triple.
class Polynomial3 {
public:
  using Exponent = std::array<int, 3>;

  Polynomial3() = default;
  static Polynomial3 constant(double c);
  static Polynomial3 monomial(int a, int b, int c, double coefficient = 1.0);

  const std::map<Exponent, double>& terms() const { return terms_; }
  bool isZero() const { return terms_.empty(); }
  // Highest total degree present; -1 for the zero polynomial.
  int degree() const;
  // True when every term has total degree k.
  bool isHomogeneous(int k) const;

  double operator()(const Eigen::Vector3d& x) const;
  Eigen::Vector3d gradient(const Eigen::Vector3d& x) const;
  Eigen::Matrix3d hessian(const Eigen::Vector3d& x) const;

  Polynomial3 derivative(int axis) const;
  Polynomial3 laplacian() const;

  Polynomial3& operator+=(const Polynomial3& other);
  Polynomial3& operator*=(double s);
  friend Polynomial3 operator+(Polynomial3 a, const Polynomial3& b) { return a += b; }
  friend Polynomial3 operator-(Polynomial3 a, const Polynomial3& b) { return a += b * -1.0; }
  friend Polynomial3 operator*(Polynomial3 a, double s) { return a *= s; }
  friend Polynomial3 operator*(double s, Polynomial3 a) { return a *= s; }
  friend Polynomial3 operator*(const Polynomial3& a, const Polynomial3& b);

  // Parity under x -> -x: +1 even, -1 odd, 0 mixed (the zero polynomial counts as even).
  int parity() const;
  // Exact integral over the unit sphere.
  double sphereIntegral() const;

  std::string toString() const;

private:
  void prune(double tol = 0.0);
  std::map<Exponent, double> terms_;
};

// Integral of x^a y^b z^c over the unit sphere.
double sphereMonomialIntegral(int a, int b, int c);

// Real spherical harmonic basis of degree l as homogeneous harmonic polynomials, ordered
// m = 0, then (cos m phi, sin m phi) for m = 1..l. Each has L2(S^2) norm^2 = 4 pi / (2l + 1),
// so the squares sum to 1 on the unit sphere.
std::vector<Polynomial3> sphericalHarmonicBasis(int l);

} // namespace speclab
