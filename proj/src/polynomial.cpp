#include "speclab/polynomial.h"

#include "speclab/errors.h"

#include <cmath>
#include <numbers>
#include <sstream>

namespace speclab {

Polynomial3 Polynomial3::constant(double c) { return monomial(0, 0, 0, c); }

Polynomial3 Polynomial3::monomial(int a, int b, int c, double coefficient) {
  Polynomial3 p;
  if (coefficient != 0.0) p.terms_[{a, b, c}] = coefficient;
  return p;
}

int Polynomial3::degree() const {
  int d = -1;
  for (const auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2]);
  return d;
}

bool Polynomial3::isHomogeneous(int k) const {
  for (const auto& [e, c] : terms_)
    if (e[0] + e[1] + e[2] != k) return false;
  return true;
}

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

} // namespace

double Polynomial3::operator()(const Eigen::Vector3d& x) const {
  double s = 0.0;
  for (const auto& [e, c] : terms_) s += c * ipow(x(0), e[0]) * ipow(x(1), e[1]) * ipow(x(2), e[2]);
  return s;
}

Eigen::Vector3d Polynomial3::gradient(const Eigen::Vector3d& x) const {
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  for (const auto& [e, c] : terms_) {
    for (int k = 0; k < 3; ++k) {
      if (e[k] == 0) continue;
      double t = c * e[k];
      for (int j = 0; j < 3; ++j) t *= ipow(x(j), j == k ? e[j] - 1 : e[j]);
      g(k) += t;
    }
  }
  return g;
}

Eigen::Matrix3d Polynomial3::hessian(const Eigen::Vector3d& x) const {
  Eigen::Matrix3d h;
  for (int i = 0; i < 3; ++i) {
    const Polynomial3 di = derivative(i);
    h.row(i) = di.gradient(x).transpose();
  }
  return h;
}

Polynomial3 Polynomial3::derivative(int axis) const {
  Polynomial3 d;
  for (const auto& [e, c] : terms_) {
    if (e[axis] == 0) continue;
    Exponent f = e;
    f[axis] -= 1;
    d.terms_[f] += c * e[axis];
  }
  d.prune();
  return d;
}

Polynomial3 Polynomial3::laplacian() const {
  Polynomial3 l;
  for (int k = 0; k < 3; ++k) l += derivative(k).derivative(k);
  return l;
}

Polynomial3& Polynomial3::operator+=(const Polynomial3& other) {
  for (const auto& [e, c] : other.terms_) terms_[e] += c;
  prune();
  return *this;
}

Polynomial3& Polynomial3::operator*=(double s) {
  for (auto& [e, c] : terms_) c *= s;
  prune();
  return *this;
}

Polynomial3 operator*(const Polynomial3& a, const Polynomial3& b) {
  Polynomial3 p;
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_) p.terms_[{ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]}] += ca * cb;
  p.prune();
  return p;
}

int Polynomial3::parity() const {
  bool even = false, odd = false;
  for (const auto& [e, c] : terms_) ((e[0] + e[1] + e[2]) % 2 == 0 ? even : odd) = true;
  if (even && odd) return 0;
  return odd ? -1 : 1;
}

double Polynomial3::sphereIntegral() const {
  double s = 0.0;
  for (const auto& [e, c] : terms_) s += c * sphereMonomialIntegral(e[0], e[1], e[2]);
  return s;
}

std::string Polynomial3::toString() const {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [e, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << c;
    const char* names = "xyz";
    for (int k = 0; k < 3; ++k)
      if (e[k] > 0) os << '*' << names[k] << '^' << e[k];
  }
  if (first) os << '0';
  return os.str();
}

void Polynomial3::prune(double tol) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) <= tol) it = terms_.erase(it);
    else ++it;
  }
}

double sphereMonomialIntegral(int a, int b, int c) {
  if (a % 2 || b % 2 || c % 2) return 0.0;
  const double ga = std::lgamma(0.5 * (a + 1));
  const double gb = std::lgamma(0.5 * (b + 1));
  const double gc = std::lgamma(0.5 * (c + 1));
  const double gs = std::lgamma(0.5 * (a + b + c + 3));
  return 2.0 * std::exp(ga + gb + gc - gs);
}

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double factorialRatio(int n, int m) {
  // n! / m! for n >= m
  double r = 1.0;
  for (int i = m + 1; i <= n; ++i) r *= i;
  return r;
}

// r^(l-m) * (d/dt)^m P_l (z / r), as a polynomial in z and r^2 = x^2 + y^2 + z^2.
Polynomial3 legendreDerivativePart(int l, int m) {
  Polynomial3 r2 = Polynomial3::monomial(2, 0, 0) + Polynomial3::monomial(0, 2, 0) + Polynomial3::monomial(0, 0, 2);
  Polynomial3 out;
  for (int k = 0; 2 * k <= l - m; ++k) {
    const int j = l - 2 * k - m;
    const double coeff = std::ldexp(1.0, -l) * ((k % 2) ? -1.0 : 1.0) * binomial(l, k) * binomial(2 * l - 2 * k, l) *
                         factorialRatio(l - 2 * k, j);
    Polynomial3 term = Polynomial3::monomial(0, 0, j, coeff);
    for (int i = 0; i < k; ++i) term = term * r2;
    out += term;
  }
  return out;
}

} // namespace

std::vector<Polynomial3> sphericalHarmonicBasis(int l) {
  if (l < 0) throw ConfigError("spherical harmonic degree must be nonnegative");
  std::vector<Polynomial3> basis;
  const double target = 4.0 * std::numbers::pi / (2 * l + 1);
  auto normalized = [&](Polynomial3 p) {
    const double n2 = (p * p).sphereIntegral();
    return p * std::sqrt(target / n2);
  };
  for (int m = 0; m <= l; ++m) {
    // Real and imaginary parts of (x + i y)^m.
    Polynomial3 re, im;
    for (int j = 0; j <= m; ++j) {
      const double c = binomial(m, j);
      // i^j
      switch (j % 4) {
      case 0: re += Polynomial3::monomial(m - j, j, 0, c); break;
      case 1: im += Polynomial3::monomial(m - j, j, 0, c); break;
      case 2: re += Polynomial3::monomial(m - j, j, 0, -c); break;
      case 3: im += Polynomial3::monomial(m - j, j, 0, -c); break;
      }
    }
    const Polynomial3 radial = legendreDerivativePart(l, m);
    basis.push_back(normalized(re * radial));
    if (m > 0) basis.push_back(normalized(im * radial));
  }
  return basis;
}

} // namespace speclab
