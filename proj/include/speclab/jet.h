#pragma once

#include <complex>
#include <vector>

namespace speclab {

/// Truncated Taylor expansion of a function of (z, w) around a point, where w plays the role of conj(z).
/// Coefficient (a, b) multiplies dz^a dw^b; terms with a + b > order are dropped.
class Jet {
public:
  using Complex = std::complex<double>;

  explicit Jet(int order = 0);
  static Jet constant(Complex c, int order);
  // z0 + dz and w0 + dw.
  static Jet zVariable(Complex z0, int order);
  static Jet wVariable(Complex w0, int order);

  int order() const { return order_; }
  Complex coefficient(int a, int b) const { return (a + b <= order_) ? c_[a * (order_ + 1) + b] : Complex(0.0); }
  Complex& at(int a, int b) { return c_[a * (order_ + 1) + b]; }
  Complex value() const { return c_[0]; }
  // Partial derivative d^a/dz^a d^b/dw^b at the expansion point.
  Complex derivative(int a, int b) const;

  Jet dz() const;
  Jet dw() const;
  // The jet of conj(f(z, conj z)): coefficient (a, b) becomes conj of (b, a).
  Jet conj() const;
  Jet real() const;
  Jet imag() const;
  Jet reciprocal() const;
  Jet truncated(int order) const;
  // Largest coefficient magnitude.
  double maxAbs() const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(Complex s);
  Jet operator-() const;

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, Complex s) { return a *= s; }
  friend Jet operator*(Complex s, Jet a) { return a *= s; }
  friend Jet operator*(Jet a, double s) { return a *= Complex(s); }
  friend Jet operator*(double s, Jet a) { return a *= Complex(s); }
  friend Jet operator+(Jet a, Complex s) { a.at(0, 0) += s; return a; }
  friend Jet operator+(Complex s, Jet a) { a.at(0, 0) += s; return a; }
  friend Jet operator-(Jet a, Complex s) { a.at(0, 0) -= s; return a; }
  friend Jet operator-(Complex s, const Jet& a) { return (-a) + s; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b) { return a * b.reciprocal(); }
  friend Jet operator/(Jet a, Complex s) { return a *= (1.0 / s); }
  friend Jet operator/(Jet a, double s) { return a *= Complex(1.0 / s); }

private:
  int order_;
  std::vector<Complex> c_;
};

using JetVector = std::vector<Jet>;

// sum_j a_j conj(b_j)
Jet hermitian(const JetVector& a, const JetVector& b);
// sum_j a_j b_j
Jet bilinear(const JetVector& a, const JetVector& b);
JetVector scaled(const JetVector& v, const Jet& s);
JetVector add(const JetVector& a, const JetVector& b);
JetVector subtract(const JetVector& a, const JetVector& b);
JetVector conjugate(const JetVector& v);
JetVector dzAll(const JetVector& v);
JetVector dwAll(const JetVector& v);

} // namespace speclab
