#include "speclab/jet.h"

#include "speclab/errors.h"

#include <algorithm>
#include <cmath>

namespace speclab {

Jet::Jet(int order) : order_(order), c_((order + 1) * (order + 1), Complex(0.0)) {
  if (order < 0) throw ConfigError("jet order must be nonnegative");
}

Jet Jet::constant(Complex c, int order) {
  Jet j(order);
  j.at(0, 0) = c;
  return j;
}

Jet Jet::zVariable(Complex z0, int order) {
  Jet j = constant(z0, order);
  if (order >= 1) j.at(1, 0) = 1.0;
  return j;
}

Jet Jet::wVariable(Complex w0, int order) {
  Jet j = constant(w0, order);
  if (order >= 1) j.at(0, 1) = 1.0;
  return j;
}

Jet::Complex Jet::derivative(int a, int b) const {
  double f = 1.0;
  for (int i = 2; i <= a; ++i) f *= i;
  for (int i = 2; i <= b; ++i) f *= i;
  return f * coefficient(a, b);
}

Jet Jet::dz() const {
  Jet j(std::max(order_ - 1, 0));
  if (order_ == 0) return j;
  for (int a = 0; a + 1 <= order_; ++a)
    for (int b = 0; a + 1 + b <= order_; ++b) j.at(a, b) = static_cast<double>(a + 1) * coefficient(a + 1, b);
  return j;
}

Jet Jet::dw() const {
  Jet j(std::max(order_ - 1, 0));
  if (order_ == 0) return j;
  for (int a = 0; a <= order_; ++a)
    for (int b = 0; a + b + 1 <= order_; ++b) j.at(a, b) = static_cast<double>(b + 1) * coefficient(a, b + 1);
  return j;
}

Jet Jet::conj() const {
  Jet j(order_);
  for (int a = 0; a <= order_; ++a)
    for (int b = 0; a + b <= order_; ++b) j.at(a, b) = std::conj(coefficient(b, a));
  return j;
}

Jet Jet::real() const { return (*this + conj()) * 0.5; }
Jet Jet::imag() const { return (*this - conj()) * Complex(0.0, -0.5); }

Jet Jet::reciprocal() const {
  const Complex f0 = value();
  if (std::abs(f0) == 0.0) throw SingularPointError("jet reciprocal of a function vanishing at the expansion point");
  Jet h(order_);
  h.at(0, 0) = 1.0 / f0;
  for (int s = 1; s <= order_; ++s) {
    for (int a = 0; a <= s; ++a) {
      const int b = s - a;
      Complex acc = 0.0;
      for (int i = 0; i <= a; ++i)
        for (int j = 0; j <= b; ++j) {
          if (i == 0 && j == 0) continue;
          acc += coefficient(i, j) * h.coefficient(a - i, b - j);
        }
      h.at(a, b) = -acc / f0;
    }
  }
  return h;
}

Jet Jet::truncated(int order) const {
  Jet j(std::min(order, order_));
  for (int a = 0; a <= j.order_; ++a)
    for (int b = 0; a + b <= j.order_; ++b) j.at(a, b) = coefficient(a, b);
  return j;
}

double Jet::maxAbs() const {
  double m = 0.0;
  for (const auto& c : c_) m = std::max(m, std::abs(c));
  return m;
}

Jet& Jet::operator+=(const Jet& o) {
  if (o.order_ < order_) *this = truncated(o.order_);
  for (int a = 0; a <= order_; ++a)
    for (int b = 0; a + b <= order_; ++b) at(a, b) += o.coefficient(a, b);
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  if (o.order_ < order_) *this = truncated(o.order_);
  for (int a = 0; a <= order_; ++a)
    for (int b = 0; a + b <= order_; ++b) at(a, b) -= o.coefficient(a, b);
  return *this;
}

Jet& Jet::operator*=(Complex s) {
  for (auto& c : c_) c *= s;
  return *this;
}

Jet Jet::operator-() const {
  Jet j = *this;
  return j *= Complex(-1.0);
}

Jet operator*(const Jet& x, const Jet& y) {
  const int n = std::min(x.order_, y.order_);
  Jet r(n);
  for (int a1 = 0; a1 <= n; ++a1)
    for (int b1 = 0; a1 + b1 <= n; ++b1) {
      const Jet::Complex cx = x.coefficient(a1, b1);
      if (cx == Jet::Complex(0.0)) continue;
      for (int a2 = 0; a1 + b1 + a2 <= n; ++a2)
        for (int b2 = 0; a1 + b1 + a2 + b2 <= n; ++b2) r.at(a1 + a2, b1 + b2) += cx * y.coefficient(a2, b2);
    }
  return r;
}

Jet hermitian(const JetVector& a, const JetVector& b) {
  Jet s = a.at(0) * b.at(0).conj();
  for (std::size_t j = 1; j < a.size(); ++j) s += a[j] * b[j].conj();
  return s;
}

Jet bilinear(const JetVector& a, const JetVector& b) {
  Jet s = a.at(0) * b.at(0);
  for (std::size_t j = 1; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

JetVector scaled(const JetVector& v, const Jet& s) {
  JetVector out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(x * s);
  return out;
}

JetVector add(const JetVector& a, const JetVector& b) {
  JetVector out;
  for (std::size_t j = 0; j < a.size(); ++j) out.push_back(a[j] + b[j]);
  return out;
}

JetVector subtract(const JetVector& a, const JetVector& b) {
  JetVector out;
  for (std::size_t j = 0; j < a.size(); ++j) out.push_back(a[j] - b[j]);
  return out;
}

JetVector conjugate(const JetVector& v) {
  JetVector out;
  for (const auto& x : v) out.push_back(x.conj());
  return out;
}

JetVector dzAll(const JetVector& v) {
  JetVector out;
  for (const auto& x : v) out.push_back(x.dz());
  return out;
}

JetVector dwAll(const JetVector& v) {
  JetVector out;
  for (const auto& x : v) out.push_back(x.dw());
  return out;
}

} // namespace speclab
