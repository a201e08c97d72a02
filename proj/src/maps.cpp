#include "speclab/maps.h"

#include "speclab/errors.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace speclab {

namespace {

Complex horner(std::span<const Complex> c, Complex z) {
  Complex s = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * z + *it;
  return s;
}

Complex hornerDerivative(std::span<const Complex> c, Complex z) {
  Complex s = 0.0;
  for (int k = static_cast<int>(c.size()) - 1; k >= 1; --k) s = s * z + static_cast<double>(k) * c[k];
  return s;
}

std::vector<Complex> trimmed(std::vector<Complex> c) {
  while (!c.empty() && c.back() == Complex(0.0)) c.pop_back();
  return c;
}

// Coefficients of t^d f(1/t).
std::vector<Complex> reversed(const std::vector<Complex>& c, int d) {
  std::vector<Complex> r(d + 1, 0.0);
  for (int k = 0; k < static_cast<int>(c.size()) && k <= d; ++k) r[d - k] = c[k];
  return r;
}

/// Domain chart choice at x: zeta = (x1 + i x2)/(1 + x3) on the upper hemisphere,
/// xi = (x1 - i x2)/(1 - x3) = 1/zeta on the lower one.
struct DomainChart {
  bool lower = false;
  Complex t;
  // Orthonormal images of d/du, d/dv, and the common length scale 2 / (1 + |t|^2).
  Vec3 eu, ev;
  double scale = 1.0;
};

DomainChart domainChart(const Vec3& x) {
  DomainChart c;
  c.lower = x(2) < 0;
  c.t = c.lower ? Complex(x(0), -x(1)) / (1.0 - x(2)) : Complex(x(0), x(1)) / (1.0 + x(2));
  const double u = c.t.real(), v = c.t.imag();
  const double s = 1.0 + u * u + v * v;
  Vec3 du(2.0 / s - 4.0 * u * u / (s * s), -4.0 * u * v / (s * s), -4.0 * u / (s * s));
  Vec3 dv(-4.0 * u * v / (s * s), 2.0 / s - 4.0 * v * v / (s * s), -4.0 * v / (s * s));
  if (c.lower) {
    du(1) = -du(1);
    du(2) = -du(2);
    dv(1) = -dv(1);
    dv(2) = -dv(2);
  }
  c.scale = 2.0 / s;
  c.eu = du / c.scale;
  c.ev = dv / c.scale;
  return c;
}

struct RationalLocal {
  Complex P, Q, dP, dQ;
  DomainChart chart;
};

RationalLocal rationalLocal(const RationalMap& map, const Vec3& x) {
  RationalLocal r;
  r.chart = domainChart(x);
  if (!r.chart.lower) {
    r.P = horner(map.p, r.chart.t);
    r.Q = horner(map.q, r.chart.t);
    r.dP = hornerDerivative(map.p, r.chart.t);
    r.dQ = hornerDerivative(map.q, r.chart.t);
  } else {
    const int d = map.degree();
    const auto pr = reversed(map.p, d), qr = reversed(map.q, d);
    r.P = horner(pr, r.chart.t);
    r.Q = horner(qr, r.chart.t);
    r.dP = hornerDerivative(pr, r.chart.t);
    r.dQ = hornerDerivative(qr, r.chart.t);
  }
  return r;
}

Eigen::Vector3d rationalValue(const RationalLocal& r) {
  const double N = std::norm(r.P) + std::norm(r.Q);
  const Complex A = r.P * std::conj(r.Q);
  return Eigen::Vector3d(2.0 * A.real(), 2.0 * A.imag(), std::norm(r.Q) - std::norm(r.P)) / N;
}

// Holomorphic chart derivative d Phi / dt of each real component.
Eigen::Vector3cd rationalDz(const RationalLocal& r) {
  const double N = std::norm(r.P) + std::norm(r.Q);
  const Complex dN = r.dP * std::conj(r.P) + r.dQ * std::conj(r.Q);
  const Complex A = r.P * std::conj(r.Q);
  const Complex dplus = 2.0 * (r.dP * std::conj(r.Q) * N - A * dN) / (N * N);
  const Complex dminus = 2.0 * (std::conj(r.P) * r.dQ * N - std::conj(A) * dN) / (N * N);
  const Complex d3 = ((r.dQ * std::conj(r.Q) - r.dP * std::conj(r.P)) * N - (std::norm(r.Q) - std::norm(r.P)) * dN) / (N * N);
  return Eigen::Vector3cd(0.5 * (dplus + dminus), (dplus - dminus) / Complex(0.0, 2.0), d3);
}

// d S / d w for S(w) = (2w, 1 - |w|^2) / (1 + |w|^2).
Eigen::Vector3cd stereoDw(Complex w) {
  const double s = 1.0 + std::norm(w);
  const Complex wb = std::conj(w);
  return Eigen::Vector3cd((1.0 - wb * wb) / (s * s), Complex(0.0, -1.0) * (1.0 + wb * wb) / (s * s), -2.0 * wb / (s * s));
}

// Positive spherical Laplacian and squared gradient of f = F restricted to the unit sphere.
void sphericalDerivatives(const Polynomial3& F, const Vec3& x, double& lap, double& grad2, Vec3& grad) {
  const Vec3 g = F.gradient(x);
  const Eigen::Matrix3d H = F.hessian(x);
  const double radial = x.dot(g);
  lap = -H.trace() + x.dot(H * x) + 2.0 * radial;
  grad = g - radial * x;
  grad2 = grad.squaredNorm();
}

} // namespace

int RationalMap::degree() const {
  return std::max(static_cast<int>(trimmed(p).size()), static_cast<int>(trimmed(q).size())) - 1;
}

Complex RationalMap::evalP(Complex z) const { return horner(p, z); }
Complex RationalMap::evalQ(Complex z) const { return horner(q, z); }

HarmonicMap::HarmonicMap(PolynomialMap map, std::string descriptor)
    : core_(std::move(map)), descriptor_(std::move(descriptor)) {}

HarmonicMap::HarmonicMap(RationalMap map, std::string descriptor)
    : core_(std::move(map)), descriptor_(std::move(descriptor)) {}

int HarmonicMap::halfDimension() const { return isPolynomial() ? polynomial().m : 1; }

int HarmonicMap::coreComponents() const {
  return isPolynomial() ? static_cast<int>(polynomial().components.size()) : 3;
}

bool HarmonicMap::isEven() const {
  if (!isPolynomial()) return false;
  for (const auto& c : polynomial().components)
    if (c.parity() != 1) return false;
  return true;
}

Eigen::VectorXd HarmonicMap::value(const Vec3& x) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(components());
  if (isPolynomial()) {
    const auto& comps = polynomial().components;
    for (int j = 0; j < static_cast<int>(comps.size()); ++j) v(j) = comps[j](x);
  } else {
    v.head<3>() = rationalValue(rationalLocal(rational(), x));
  }
  return v;
}

MapSample HarmonicMap::sample(const Vec3& x) const {
  MapSample s;
  s.value = value(x);
  s.jacobian = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, components());
  if (isPolynomial()) {
    const DomainChart chart = domainChart(x);
    s.t1 = chart.eu;
    s.t2 = chart.ev;
    const auto& comps = polynomial().components;
    for (int j = 0; j < static_cast<int>(comps.size()); ++j) {
      const Vec3 g = comps[j].gradient(x);
      s.jacobian(0, j) = s.t1.dot(g);
      s.jacobian(1, j) = s.t2.dot(g);
    }
  } else {
    const RationalLocal r = rationalLocal(rational(), x);
    s.t1 = r.chart.eu;
    s.t2 = r.chart.ev;
    const Eigen::Vector3cd dz = rationalDz(r);
    for (int j = 0; j < 3; ++j) {
      s.jacobian(0, j) = 2.0 * dz(j).real() / r.chart.scale;
      s.jacobian(1, j) = -2.0 * dz(j).imag() / r.chart.scale;
    }
  }
  return s;
}

double HarmonicMap::energyDensity(const Vec3& x) const {
  if (isPolynomial()) {
    double total = 0.0;
    for (const auto& c : polynomial().components) {
      double lap, g2;
      Vec3 g;
      sphericalDerivatives(c, x, lap, g2, g);
      total += g2;
    }
    return 0.5 * total;
  }
  const RationalLocal r = rationalLocal(rational(), x);
  const double N = std::norm(r.P) + std::norm(r.Q);
  const double s = 1.0 + std::norm(r.chart.t);
  return std::norm(r.dP * r.Q - r.P * r.dQ) * s * s / (N * N);
}

HarmonicMap HarmonicMap::padded(int extra, std::string descriptor) const {
  HarmonicMap out = *this;
  out.padding_ += extra;
  out.descriptor_ = std::move(descriptor);
  return out;
}

PolynomialMap veronese(int m) {
  if (m < 1 || m > 4) throw ConfigError("veronese: m must lie in 1..4, got " + std::to_string(m));
  return PolynomialMap{m, sphericalHarmonicBasis(m)};
}

namespace {

std::string stripSpaces(const std::string& s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

class PolyParser {
public:
  explicit PolyParser(std::string text) : s_(std::move(text)) {}

  std::vector<Complex> parse() {
    if (s_.empty()) fail("empty polynomial");
    std::vector<Complex> coeffs;
    bool first = true;
    while (pos_ < s_.size()) {
      double sign = 1.0;
      if (peek() == '+' || peek() == '-') {
        sign = get() == '-' ? -1.0 : 1.0;
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      first = false;
      Complex c = 1.0;
      bool haveCoeff = false;
      if (peek() == '(') {
        get();
        c = parseComplexLiteral(')');
        if (get() != ')') fail("missing ')'");
        haveCoeff = true;
      } else if (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.' || peek() == 'i') {
        c = parseReal();
        if (peek() == 'i') {
          get();
          c = Complex(0.0, c.real());
        }
        haveCoeff = true;
      }
      int power = 0;
      if (peek() == '*') {
        if (!haveCoeff) fail("dangling '*'");
        get();
        if (peek() != 'z') fail("expected 'z' after '*'");
      }
      if (peek() == 'z') {
        get();
        power = 1;
        if (peek() == '^') {
          get();
          const double p = parseUnsigned();
          power = static_cast<int>(p);
          if (power != p || power > 64) fail("bad exponent");
        }
      } else if (!haveCoeff) {
        fail("expected a coefficient or 'z'");
      }
      if (static_cast<int>(coeffs.size()) <= power) coeffs.resize(power + 1, 0.0);
      coeffs[power] += sign * c;
    }
    return coeffs;
  }

private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("cannot parse polynomial '" + s_ + "' at " + std::to_string(pos_) + ": " + msg);
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  char get() { return pos_ < s_.size() ? s_[pos_++] : '\0'; }

  double parseUnsigned() {
    const std::size_t start = pos_;
    while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.') get();
    if ((peek() == 'e' || peek() == 'E') && pos_ > start) {
      get();
      if (peek() == '+' || peek() == '-') get();
      while (std::isdigit(static_cast<unsigned char>(peek()))) get();
    }
    if (start == pos_) fail("expected a number");
    try {
      return std::stod(s_.substr(start, pos_ - start));
    } catch (const std::exception&) {
      fail("bad number");
    }
  }

  // Real number, where a bare "i" counts as coefficient 1.
  Complex parseReal() {
    if (peek() == 'i') return 1.0;
    return parseUnsigned();
  }

  // a, bi, a+bi, a-bi, with optional leading sign, up to the terminator.
  Complex parseComplexLiteral(char terminator) {
    Complex total = 0.0;
    bool any = false;
    while (peek() != terminator && peek() != '\0') {
      double sign = 1.0;
      if (peek() == '+' || peek() == '-') sign = get() == '-' ? -1.0 : 1.0;
      else if (any) fail("expected sign inside parentheses");
      Complex v = parseReal();
      if (peek() == 'i') {
        get();
        v = Complex(0.0, v.real());
      }
      total += sign * v;
      any = true;
    }
    if (!any) fail("empty parentheses");
    return total;
  }

  std::string s_;
  std::size_t pos_ = 0;
};

} // namespace

std::vector<Complex> parseComplexPolynomial(const std::string& text) {
  std::string s = stripSpaces(text);
  // "(p(z))" groups a whole polynomial; "(a+bi)" alone is a coefficient.
  while (s.size() >= 2 && s.front() == '(' && s.back() == ')' && s.find('z') != std::string::npos) {
    int depth = 0;
    std::size_t close = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '(') ++depth;
      else if (s[i] == ')' && --depth == 0) {
        close = i;
        break;
      }
    }
    if (close != s.size() - 1 || s.substr(1, close - 1).find('z') == std::string::npos) break;
    s = s.substr(1, s.size() - 2);
  }
  return trimmed(PolyParser(s).parse());
}

std::string formatComplexPolynomial(std::span<const Complex> c) {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) {
    if (c[k] == Complex(0.0)) continue;
    if (!first) os << '+';
    first = false;
    os << '(' << c[k].real() << (c[k].imag() < 0 ? '-' : '+') << std::abs(c[k].imag()) << "i)";
    if (k >= 1) os << 'z';
    if (k >= 2) os << '^' << k;
  }
  if (first) os << '0';
  return os.str();
}

void validateRational(const RationalMap& map) {
  const auto p = trimmed(map.p), q = trimmed(map.q);
  if (q.empty()) throw ConfigError("rational map: denominator is identically zero");
  if (map.degree() < 1) throw ConfigError("rational map: degree must be at least 1");
  // Common finite root: check p at the roots of the lower-degree nonconstant polynomial.
  const auto& a = (p.size() <= q.size() && p.size() > 1) ? p : q;
  const auto& b = (&a == &p) ? q : p;
  if (a.size() > 1) {
    const int n = static_cast<int>(a.size()) - 1;
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -a[i] / a[n];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(companion);
    double scaleB = 0.0;
    for (auto c : b) scaleB = std::max(scaleB, std::abs(c));
    for (int i = 0; i < n; ++i) {
      const Complex r = eig.eigenvalues()(i);
      double mag = 0.0;
      for (int k = 0; k < static_cast<int>(b.size()); ++k) mag += std::abs(b[k]) * std::pow(std::abs(r), k);
      if (std::abs(horner(b, r)) <= 1e-9 * std::max(mag, scaleB)) {
        throw ConfigError("rational map: numerator and denominator share a root");
      }
    }
  }
  // Common root at infinity: both degrees below d cannot happen since d = max; nothing to check.
}

HarmonicMap parseMap(const std::string& descriptor) {
  const std::string s = stripSpaces(descriptor);
  if (s.rfind("veronese:", 0) == 0) {
    int m = 0;
    try {
      std::size_t used = 0;
      m = std::stoi(s.substr(9), &used);
      if (used != s.size() - 9) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("bad veronese descriptor '" + descriptor + "'");
    }
    return HarmonicMap(veronese(m), s);
  }
  if (s.rfind("rational:", 0) == 0) {
    const std::string body = s.substr(9);
    // The fraction bar is the last '/' outside parentheses.
    int depth = 0;
    std::size_t bar = std::string::npos;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i] == '(') ++depth;
      else if (body[i] == ')') --depth;
      else if (body[i] == '/' && depth == 0) bar = i;
    }
    RationalMap r;
    r.p = parseComplexPolynomial(bar == std::string::npos ? body : body.substr(0, bar));
    r.q = bar == std::string::npos ? std::vector<Complex>{1.0} : parseComplexPolynomial(body.substr(bar + 1));
    validateRational(r);
    return HarmonicMap(r, s);
  }
  if (s.rfind("pad:", 0) == 0) {
    const std::size_t colon = s.rfind(':');
    if (colon <= 4) throw ConfigError("bad pad descriptor '" + descriptor + "'");
    int n = 0;
    try {
      n = std::stoi(s.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad pad dimension in '" + descriptor + "'");
    }
    const HarmonicMap inner = parseMap(s.substr(4, colon - 4));
    return embedInLargerSphere(inner, n).padded(0, s);
  }
  throw ConfigError("unknown map descriptor '" + descriptor + "'");
}

Density energyDensity(const HarmonicMap& map, const SphereMesh& mesh) {
  Density rho;
  rho.values.resize(mesh.vertexCount());
  for (int i = 0; i < mesh.vertexCount(); ++i) rho.values[i] = map.energyDensity(mesh.vertices[i]);
  return rho;
}

double energy(const HarmonicMap& map, const SphereMesh& mesh) { return area(mesh, energyDensity(map, mesh)); }

int degree(const HarmonicMap& map, const SphereMesh& mesh) {
  const double ratio = energy(map, mesh) / (4.0 * std::numbers::pi);
  const double d = std::round(ratio);
  if (std::abs(ratio - d) > 0.1) {
    throw ConfigError("map not harmonic or mesh too coarse: E / 4 pi = " + std::to_string(ratio));
  }
  return static_cast<int>(d);
}

double harmonicityResidual(const HarmonicMap& map, std::span<const Vec3> points) {
  if (!map.isPolynomial()) return 0.0;
  const auto& comps = map.polynomial().components;
  double worst = 0.0;
  for (const Vec3& x : points) {
    const Vec3 xn = x.normalized();
    std::vector<double> lap(comps.size()), val(comps.size());
    double grad2 = 0.0;
    for (std::size_t j = 0; j < comps.size(); ++j) {
      double g2;
      Vec3 g;
      sphericalDerivatives(comps[j], xn, lap[j], g2, g);
      grad2 += g2;
      val[j] = comps[j](xn);
    }
    for (std::size_t j = 0; j < comps.size(); ++j) worst = std::max(worst, std::abs(lap[j] - grad2 * val[j]));
  }
  return worst;
}

RationalMap mobiusPostcompose(const RationalMap& map, Complex a, Complex b, Complex c, Complex d) {
  if (std::abs(a * d - b * c) < 1e-14) throw ConfigError("Moebius matrix is singular");
  const std::size_t n = std::max(map.p.size(), map.q.size());
  RationalMap out;
  out.p.assign(n, 0.0);
  out.q.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const Complex pk = k < map.p.size() ? map.p[k] : 0.0;
    const Complex qk = k < map.q.size() ? map.q[k] : 0.0;
    out.p[k] = a * pk + b * qk;
    out.q[k] = c * pk + d * qk;
  }
  out.p = trimmed(out.p);
  out.q = trimmed(out.q);
  if (out.p.empty()) out.p = {0.0};
  return out;
}

HarmonicMap embedInLargerSphere(const HarmonicMap& map, int newDimension) {
  if (newDimension <= map.targetDimension()) {
    throw ConfigError("embedding dimension " + std::to_string(newDimension) + " must exceed current " +
                      std::to_string(map.targetDimension()));
  }
  return map.padded(newDimension - map.targetDimension(),
                    "pad:" + map.descriptor() + ":" + std::to_string(newDimension));
}

std::vector<Eigen::VectorXd> mobiusJacobiField(const RationalMap& map, Complex a, Complex b, Complex c,
                                               std::span<const Vec3> points) {
  std::vector<Eigen::VectorXd> field;
  field.reserve(points.size());
  for (const Vec3& x : points) {
    const RationalLocal r = rationalLocal(map, x);
    Eigen::Vector3d v;
    if (std::abs(r.P) <= std::abs(r.Q)) {
      const Complex w = r.P / r.Q;
      const Complex dw = b + 2.0 * a * w - c * w * w;
      v = 2.0 * (stereoDw(w) * dw).real();
    } else {
      const Complex g = r.Q / r.P;
      const Complex dg = -(b * g * g + 2.0 * a * g - c);
      v = 2.0 * (stereoDw(g) * dg).real();
      v(1) = -v(1);
      v(2) = -v(2);
    }
    field.push_back(v);
  }
  return field;
}

} // namespace speclab
