#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "speclab/index.h"
#include "speclab/sequence.h"

namespace speclab {

struct BundleConfig {
  int meshLevel = 4;
  // Rational maps concentrate energy near their critical points; their Jacobi pencil gets a finer mesh,
  // one level finer again from degree 4 on.
  int rationalJacobiLevel = 5;
  IndexOptions index;
  SequenceOptions sequence;
  double chartRadius = 0.15;
  int chartPoints = 7;
  bool runSequence = true;
};

/// One pass/fail line of a bundle. Report-only checks are recorded but never fail the bundle.
struct BundleCheck {
  std::string name;
  std::string citation;
  bool pass = false;
  bool reportOnly = false;
  std::string detail;
  bool operator==(const BundleCheck&) const = default;
};

struct Provenance {
  int meshLevel = 0;
  int jacobiMeshLevel = 0;
  std::uint64_t seed = 0;
  double eigenTol = 0.0;
  double spectralGuard = 0.0;
  double jacobiGuardFraction = 0.0;
  double chartRadius = 0.0;
  int chartPoints = 0;
  int jetOrder = 0;
  std::string buildId;
  bool operator==(const Provenance&) const = default;
};

struct VerificationBundle {
  std::string descriptor;
  std::vector<IndexReport> reports; // S2 first, then RP2 for even maps
  std::vector<BundleCheck> checks;
  std::vector<IdentityResidual> sequence;
  Provenance provenance;
  bool partial = false;
  std::vector<std::string> errors;

  // No stage failed and every asserted check passed.
  bool passed() const;
  const IndexReport* report(Surface surface) const;
  bool operator==(const VerificationBundle&) const = default;
};

// maps -> index (S2, plus RP2 for even maps) -> sequence -> arithmetic cross-checks.
// Stage errors are recorded in `errors` and mark the bundle partial instead of throwing.
VerificationBundle runBundle(const std::string& descriptor, const BundleConfig& config = {});

// Identifier of the source tree the library was built from.
std::string buildId();

nlohmann::json toJson(const InequalityVerdict& v);
nlohmann::json toJson(const IndexReport& r);
nlohmann::json toJson(const IdentityResidual& r);
nlohmann::json toJson(const BundleCheck& c);
nlohmann::json toJson(const Provenance& p);
nlohmann::json toJson(const VerificationBundle& b);

// Inverses of toJson. Throw ConfigError on missing or mistyped fields.
IndexReport indexReportFromJson(const nlohmann::json& j);
VerificationBundle bundleFromJson(const nlohmann::json& j);

void writeMarkdown(const VerificationBundle& bundle, std::ostream& out);

/// A mathematical claim and the test cases that exercise it.
struct TraceEntry {
  std::string claim;     // key from inScopeClaims()
  std::string statement; // the claim as a formula
  std::vector<std::string> tests;
};

const std::vector<TraceEntry>& traceability();
// Every claim the library is meant to reproduce.
const std::vector<std::string>& inScopeClaims();
// Claims with no entry or an entry without tests.
std::vector<std::string> unmappedClaims();
bool traceabilityComplete();
void writeTraceabilityMarkdown(std::ostream& out);

} // namespace speclab
