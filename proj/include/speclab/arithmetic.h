#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

namespace speclab {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Exact rational value in lowest terms with a positive denominator.
struct RationalBound {
  Integer numerator = 0;
  Integer denominator = 1;

  static RationalBound from(const Rational& r);
  Rational value() const;
  // Smallest integer >= the bound; the bound for an integer-valued quantity.
  Integer ceiling() const;
  std::string toString() const;
  bool operator==(const RationalBound&) const = default;
};

struct CaseTriple {
  int m = 0;
  int d = 0;
  int nu = 0;
  auto operator<=>(const CaseTriple&) const = default;
};

// Largest odd k with k^2 <= x. Requires x >= 1.
Integer oddFloorSqrt(const Integer& x);

// 2(m-1)(2d - [sqrt(8d+1)]_odd + 2). Throws ConfigError when d < m(m+1)/2.
Integer indELowerBound(int m, int d);

// ((2d - nu + 2)(m - 1) + 2d - m - m^2) / (2m + 1).
RationalBound indSLowerBound(int m, int d, int nu);

/// Constraint set of the case analysis. The two inequalities of the failure system are always imposed:
/// (2m-1) d <= (2m-2) nu + 2m^2 - 4m + 3 and 8d >= nu^2 - 1.
struct EnumerationConstraints {
  bool evenM = true;          // m even, hence m >= 2
  bool nuAtLeast2mPlus1 = true;
  bool degreeLowerBound = true; // d >= m(m+1)/2
  bool nuOdd = true;
  int maxM = 64;
};

struct EnumerationResult {
  EnumerationConstraints constraints;
  std::set<std::pair<int, int>> cases; // (m, d)
  std::vector<CaseTriple> witnesses;
  // Largest m admitting any triple once parity and nu >= 2m+1 are ignored; 0 if none.
  int cutoffM = 0;
};

EnumerationResult enumerateExceptions(const EnumerationConstraints& constraints = {});

// Largest m in [2, maxM] with 8 + sqrt(8m+1) >= m(m-1)/2, decided in integers. This is the coarse cutoff obtained by
// eliminating d and nu from the failure system before any case work.
int analyticCutoffM(int maxM = 64);

// Whether (m, d, nu) satisfies the failure system under the given constraints.
bool satisfiesFailureSystem(const CaseTriple& t, const EnumerationConstraints& constraints);

/// One inequality of a machine-checked chain: lhs relation rhs, evaluated exactly.
struct ProofStep {
  std::string name;
  RationalBound lhs;
  RationalBound rhs;
  std::string relation; // "<", "<=", ">", ">=", "="
  std::string citation;
  bool holds = false;
};

struct InductionTrace {
  int k = 0;
  bool tampered = false;
  std::vector<ProofStep> steps;
  // Chain 1: Lambda_{k+1} > 4 pi (2k+3) is impossible.
  bool strictChainContradiction = false;
  // Chain 2: Lambda_{k+1} = 4 pi (2k+3) is not attained.
  bool equalityChainContradiction = false;
  bool valid() const { return strictChainContradiction && equalityChainContradiction; }
};

// tamperNonStrict replaces the premise d > 2k+3 by d >= 2k+3.
InductionTrace verifyInductionStep(int k, bool tamperNonStrict = false);

/// Normalized eigenvalue of a disjoint union with a common first eigenvalue, in units of pi.
struct CompositeLimit {
  int k = 0;
  bool sphereOnly = false;
  RationalBound coefficient;           // lambda-bar / pi
  std::vector<RationalBound> areas;    // component areas relative to the first one
};

// k-1 round spheres (8 pi each) and one round projective plane (12 pi); sphereOnly uses k spheres.
CompositeLimit compositeLimit(int k, bool sphereOnly = false);

struct VeroneseClosedForm {
  int m = 0;
  Integer degree;
  Integer indSSphere;
  std::optional<Integer> indSRp2;
};

// (m(m+1)/2, m^2, m(m-1)/2). Throws ConfigError for the projective value at odd m.
VeroneseClosedForm veroneseClosedForms(int m, bool withRp2 = true);

// 2d - (nu - 1)/2, compared against measured ind_S in reports only.
RationalBound conjecturedSpectralIndex(int d, int nu);

nlohmann::json toJson(const ProofStep& step);
nlohmann::json toJson(const InductionTrace& trace);
nlohmann::json toJson(const EnumerationResult& result);

} // namespace speclab
