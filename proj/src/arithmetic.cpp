#include "speclab/arithmetic.h"

#include "speclab/errors.h"

#include <json.hpp>

namespace speclab {

RationalBound RationalBound::from(const Rational& r) {
  // cpp_rational is kept canonical: reduced, positive denominator.
  return {boost::multiprecision::numerator(r), boost::multiprecision::denominator(r)};
}

Rational RationalBound::value() const { return Rational(numerator, denominator); }

Integer RationalBound::ceiling() const {
  Integer q = numerator / denominator; // truncates toward zero
  if (q * denominator < numerator) ++q;
  return q;
}

std::string RationalBound::toString() const {
  if (denominator == 1) return numerator.str();
  return numerator.str() + "/" + denominator.str();
}

Integer oddFloorSqrt(const Integer& x) {
  if (x < 1) throw ConfigError("odd_floor_sqrt needs x >= 1");
  Integer k = boost::multiprecision::sqrt(x);
  if (k % 2 == 0) --k;
  return k;
}

Integer indELowerBound(int m, int d) {
  if (m < 1 || 2 * d < m * (m + 1))
    throw ConfigError("ind_E bound needs d >= m(m+1)/2, got m = " + std::to_string(m) + ", d = " + std::to_string(d));
  const Integer dd = d;
  return 2 * Integer(m - 1) * (2 * dd - oddFloorSqrt(8 * dd + 1) + 2);
}

RationalBound indSLowerBound(int m, int d, int nu) {
  const Integer M = m, D = d, N = nu;
  const Integer num = (2 * D - N + 2) * (M - 1) + 2 * D - M - M * M;
  return RationalBound::from(Rational(num, 2 * M + 1));
}

namespace {

bool failureInequalities(const Integer& m, const Integer& d, const Integer& nu) {
  const bool degreeCap = (2 * m - 2) * nu + 2 * m * m + 3 - 4 * m >= (2 * m - 1) * d;
  const bool nullityDegree = 8 * d >= nu * nu - 1;
  return degreeCap && nullityDegree;
}

// Degrees satisfying both inequalities lie in [ceil((nu^2-1)/8), floor(degreeCap bound)].
std::pair<long long, long long> degreeWindow(long long m, long long nu) {
  const long long lo = std::max(1LL, (nu * nu - 1 + 7) / 8);
  const long long top = (2 * m - 2) * nu + 2 * m * m + 3 - 4 * m;
  const long long hi = top < 0 ? 0 : top / (2 * m - 1);
  return {lo, hi};
}

} // namespace

int analyticCutoffM(int maxM) {
  int best = 0;
  for (int m = 2; m <= maxM; ++m) {
    const Integer excess = Integer(m) * (m - 1) / 2 - 8;
    if (excess <= 0 || excess * excess <= 8 * m + 1) best = m;
  }
  return best;
}

bool satisfiesFailureSystem(const CaseTriple& t, const EnumerationConstraints& c) {
  if (t.m < 1 || t.d < 1 || t.nu < 1) return false;
  if (c.evenM && (t.m % 2 != 0 || t.m < 2)) return false;
  if (c.nuAtLeast2mPlus1 && t.nu < 2 * t.m + 1) return false;
  if (c.degreeLowerBound && 2 * t.d < t.m * (t.m + 1)) return false;
  if (c.nuOdd && t.nu % 2 == 0) return false;
  return failureInequalities(t.m, t.d, t.nu);
}

EnumerationResult enumerateExceptions(const EnumerationConstraints& constraints) {
  EnumerationResult result;
  result.constraints = constraints;
  EnumerationConstraints relaxed = constraints;
  relaxed.evenM = false;
  relaxed.nuAtLeast2mPlus1 = false;
  relaxed.nuOdd = false;
  relaxed.degreeLowerBound = true;
  for (int m = 1; m <= constraints.maxM; ++m) {
    // nu^2 - 1 <= 8d <= 8 (nu + m + 1) bounds nu independently of d.
    for (int nu = 1; static_cast<long long>(nu) * nu <= 8LL * (nu + m + 2) + 1; ++nu) {
      const auto [lo, hi] = degreeWindow(m, nu);
      for (long long d = lo; d <= hi; ++d) {
        const CaseTriple t{m, static_cast<int>(d), nu};
        if (satisfiesFailureSystem(t, relaxed)) result.cutoffM = std::max(result.cutoffM, m);
        if (satisfiesFailureSystem(t, constraints)) {
          result.witnesses.push_back(t);
          result.cases.emplace(t.m, t.d);
        }
      }
    }
  }
  return result;
}

namespace {

bool compare(const Rational& a, const Rational& b, const std::string& rel) {
  if (rel == "<") return a < b;
  if (rel == "<=") return a <= b;
  if (rel == ">") return a > b;
  if (rel == ">=") return a >= b;
  return a == b;
}

ProofStep step(std::string name, const Rational& lhs, std::string rel, const Rational& rhs, std::string citation) {
  ProofStep s{std::move(name), RationalBound::from(lhs), RationalBound::from(rhs), rel, std::move(citation), false};
  s.holds = compare(lhs, rhs, s.relation);
  return s;
}

} // namespace

InductionTrace verifyInductionStep(int k, bool tamperNonStrict) {
  if (k < 1) throw ConfigError("induction step needs k >= 1");
  InductionTrace tr;
  tr.k = k;
  tr.tampered = tamperNonStrict;
  const Rational K = k;

  // Chain 1: an attained Lambda_{k+1} above 4 pi (2k+3) forces d > 2k+3, i.e. d >= 2k+4 for an integer degree.
  const Rational dMin = tamperNonStrict ? 2 * K + 3 : 2 * K + 4;
  tr.steps.push_back(step("degree_from_energy", dMin, tamperNonStrict ? ">=" : ">", 2 * K + 3,
                          "4 pi (2k+3) < lambda-bar = 2 Area = 4 pi d"));
  tr.steps.push_back(step("spectral_index_upper", K + 1, ">=", K + 1, "extremal map has ind_S <= k+1"));
  const Rational lower1 = (dMin - 1) / 2;
  tr.steps.push_back(step("degree_index_bound", lower1, ">=", (2 * K + 2) / 2, "ind_S >= (d-1)/2 >= (2k+2)/2"));
  // ind_S <= k+1 and ind_S >= (d-1)/2 leave no value when k+1 < (d-1)/2.
  tr.steps.push_back(step("contradiction_strict_chain", K + 1, "<", lower1, "k+1 >= ind_S >= (d-1)/2 > k+1"));
  tr.strictChainContradiction = tr.steps.back().holds;

  // Chain 2: equality needs a degree 2k+3 map with ind_S <= k+1; d > 3 makes ind_S > (d-1)/2 strict.
  const Rational d2 = 2 * K + 3;
  tr.steps.push_back(step("equality_degree", d2, ">", 3, "d = 2(k+1)+1 > 3, so the degree-index bound is strict"));
  const Rational lower2 = (d2 - 1) / 2;
  // ind_S <= k+1 and ind_S > (d-1)/2 leave no value when k+1 <= (d-1)/2.
  tr.steps.push_back(step("contradiction_equality_chain", K + 1, "<=", lower2, "k+1 >= ind_S > (d-1)/2 = k+1"));
  tr.equalityChainContradiction = tr.steps[4].holds && tr.steps.back().holds;
  return tr;
}

CompositeLimit compositeLimit(int k, bool sphereOnly) {
  if (k < 1) throw ConfigError("composite limit needs k >= 1");
  CompositeLimit out;
  out.k = k;
  out.sphereOnly = sphereOnly;
  // With a common first nonzero eigenvalue lambda, a component of normalized eigenvalue c pi has area c pi / lambda.
  std::vector<Rational> normalized(sphereOnly ? k : k - 1, Rational(8));
  if (!sphereOnly) normalized.push_back(Rational(12));
  // k components give k zero eigenvalues, so lambda_k of the union is the common lambda (set to 1).
  const Rational lambda = 1;
  Rational area = 0;
  for (const Rational& c : normalized) area += c / lambda;
  out.coefficient = RationalBound::from(lambda * area);
  for (const Rational& c : normalized) out.areas.push_back(RationalBound::from(c / normalized.front()));
  return out;
}

VeroneseClosedForm veroneseClosedForms(int m, bool withRp2) {
  if (m < 1) throw ConfigError("Veronese closed forms need m >= 1");
  VeroneseClosedForm v;
  v.m = m;
  const Integer M = m;
  v.degree = M * (M + 1) / 2;
  v.indSSphere = M * M;
  if (withRp2) {
    if (m % 2 != 0) throw ConfigError("the projective Veronese map needs even m, got " + std::to_string(m));
    v.indSRp2 = M * (M - 1) / 2;
  }
  return v;
}

RationalBound conjecturedSpectralIndex(int d, int nu) { return RationalBound::from(Rational(2 * d) - Rational(nu - 1, 2)); }

nlohmann::json toJson(const ProofStep& s) {
  return {{"inequality_name", s.name}, {"lhs", s.lhs.toString()},     {"rhs", s.rhs.toString()},
          {"relation", s.relation},    {"source_citation", s.citation}, {"holds", s.holds}};
}

nlohmann::json toJson(const InductionTrace& tr) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : tr.steps) steps.push_back(toJson(s));
  return {{"k", tr.k},
          {"tampered", tr.tampered},
          {"steps", steps},
          {"strict_chain_contradiction", tr.strictChainContradiction},
          {"equality_chain_contradiction", tr.equalityChainContradiction},
          {"valid", tr.valid()}};
}

nlohmann::json toJson(const EnumerationResult& r) {
  nlohmann::json cases = nlohmann::json::array(), witnesses = nlohmann::json::array();
  for (const auto& [m, d] : r.cases) cases.push_back({m, d});
  for (const auto& t : r.witnesses) witnesses.push_back({{"m", t.m}, {"d", t.d}, {"nu", t.nu}});
  const auto& c = r.constraints;
  return {{"constraints",
           {{"even_m", c.evenM},
            {"nu_at_least_2m_plus_1", c.nuAtLeast2mPlus1},
            {"degree_lower_bound", c.degreeLowerBound},
            {"nu_odd", c.nuOdd},
            {"max_m", c.maxM}}},
          {"cases", cases},
          {"witnesses", witnesses},
          {"cutoff_m", r.cutoffM},
          {"analytic_cutoff_m", analyticCutoffM(c.maxM)}};
}

} // namespace speclab
