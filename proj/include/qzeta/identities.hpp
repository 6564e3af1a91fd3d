#pragma once

// Catalog of the identities among q>1 zeta values, with a numerical verifier
// that compares both sides against their rigorous error bounds.

#include <gmpxx.h>

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qzeta/qnum.hpp"

namespace qzeta {

enum class IdentityId {
  nielsen_q,
  nielsen_q_star,
  star_reduction,
  circ_star_reduction,
  diag_reduction,
  t2_31,
  t2_41,
  t2_51,
  t2_weight6,
  t3_general,
  t3_odd,
  t3_even,
  p5_general,
  p5_odd,
  p5_even,
  t4_mt,
  pf_basic,
  pf_general,
  reindex,
};

/// Which right-hand side to use.
///   as_stated           the formula exactly as stated
///   derived_consistent  the parity formulas re-derived from their own proof
///   corrected           a form that holds numerically for q > 1
enum class Variant { as_stated, derived_consistent, corrected };

enum class Verdict { pass, fail, inconclusive };

std::string_view to_string(IdentityId id);
std::string_view to_string(Variant v);
std::string_view to_string(Verdict v);
/// Throw std::invalid_argument on unknown names.
IdentityId parse_identity(std::string_view tag);
Variant parse_variant(std::string_view name);

struct ParamSpec {
  std::string name;
  long lo;  // default range used by verify_suite
  long hi;
  std::string meaning;
};

struct CatalogEntry {
  IdentityId id;
  std::string anchor;
  std::string statement;
  std::vector<ParamSpec> int_params;
  std::vector<std::string> real_params;
  std::vector<Variant> variants;
};

/// All 19 identities in a fixed order.
const std::vector<CatalogEntry>& catalog();
const CatalogEntry& catalog_entry(IdentityId id);

struct IdentityInstance {
  IdentityId id = IdentityId::nielsen_q;
  std::map<std::string, long> int_params;
  std::map<std::string, mpq_class> real_params;
  QBase base = QBase(Real(2L, 64), 64);
  PrecisionCtx ctx;
  Variant variant = Variant::as_stated;
};

/// One right-hand side compared with the left-hand side.
struct SubForm {
  std::string label;
  ValueWithError rhs;
  long double residual = 0.0L;
  long double tolerance = 0.0L;
  Verdict verdict = Verdict::inconclusive;
};

struct VerificationReport {
  IdentityInstance instance;
  ValueWithError lhs;
  ValueWithError rhs;  // the worst sub-form
  long double residual = 0.0L;
  long double tolerance = 0.0L;
  Verdict verdict = Verdict::inconclusive;
  std::vector<SubForm> forms;
  std::string reason;
  bool evaluation_error = false;  // an evaluator hit a domain error or pole
  std::chrono::duration<double> elapsed{};
};

/// pass iff residual <= tolerance, fail iff residual > 10 tolerance.
Verdict classify(long double residual, long double tolerance);

/// Throws std::invalid_argument when parameters violate the identity's
/// constraints or the variant is not offered for this identity.
VerificationReport verify(const IdentityInstance& instance);

struct SuiteRanges {
  /// Overrides for integer parameter ranges (inclusive); unspecified
  /// parameters use the catalog defaults.
  std::map<std::string, std::pair<long, long>> int_ranges;
  /// (u, v) pairs for the partial-fraction identities.
  std::vector<std::pair<mpq_class, mpq_class>> uv_points;
};

/// Cross product of ids x q_grid x admissible parameters, in that order.
/// Individual failures are reported, never thrown.
std::vector<VerificationReport> verify_suite(const std::vector<IdentityId>& ids, const std::vector<QBase>& q_grid,
                                             const SuiteRanges& ranges, const PrecisionCtx& ctx,
                                             Variant variant = Variant::as_stated);

// ---------------------------------------------------------------------------
// Parity audit

struct ParityCell {
  IdentityId id;  // t3_odd, t3_even, p5_odd or p5_even
  long s;
  long r;   // r or t
  long rp;  // r' or t'
  VerificationReport as_stated;
  VerificationReport derived;
  VerificationReport corrected;
  /// RHS(derived_consistent) - RHS(as_stated). variant_gap_matches compares it
  /// with zeta_q(r,r') + zeta_q(r',r) for t3_odd and with zero for t3_even;
  /// the circ-star cells carry no prediction.
  std::optional<long double> variant_gap;
  std::optional<long double> variant_gap_error;
  bool variant_gap_matches = false;
  /// The pre-registered expectation: |as_stated residual - (zeta_q(r,r') + zeta_q(r',r))|
  /// within tolerance, for t3_odd with r != r'.
  std::optional<long double> preregistered_expected;
  bool preregistered_matches = false;
};

struct ParityCount {
  long s;
  long enumerated;
  long claimed;
};

struct ParityAudit {
  std::vector<ParityCell> cells;
  std::vector<ParityCount> counts;
};

/// Every s in [s_min, s_max] (s_min >= 3) and every pair r <= r' with
/// r + r' = s + 1, r >= 2, for both the circ and the circ-star families.
ParityAudit audit_parity(long s_min, long s_max, const QBase& base, const PrecisionCtx& ctx);

// ---------------------------------------------------------------------------
// Partial fractions

struct PartialFractionResult {
  bool exact = false;
  mpq_class lhs_exact, rhs_exact;  // set when exact
  ValueWithError lhs, rhs;
  long double residual = 0.0L;
};

/// 1/((1-u)^r (1-uv)^s) against the right-hand side of the partial-fraction
/// expansion, in rational arithmetic. Requires u != 1, v != 1, uv != 1,
/// s >= 1, r >= 1 (DomainError otherwise).
PartialFractionResult partial_fraction_check(const mpq_class& u, const mpq_class& v, long s, long r);

/// Floating-point path, for irrational (u, v).
PartialFractionResult partial_fraction_check(const Real& u, const Real& v, long s, long r, const PrecisionCtx& ctx);

/// Exact decimal or fraction text ("0.37", "-1/3", "2.5e-1") as a rational.
mpq_class parse_rational(std::string_view text);

/// sum q^{2n}/[n]^s against zeta_q(s) + (q-1) zeta_q(s-1).
VerificationReport diag_reduction_check(long s, const QBase& base, const PrecisionCtx& ctx);

}  // namespace qzeta
