#pragma once

// Continuation of the q>1 zeta family by binomial expansion.
//
// Expanding (1 - q^-n)^-s = sum_k C(s,k) q^-nk inside each sum and summing
// the resulting geometric series gives
//
//   zeta_q(s)      = (q-1)^s sum_k C(s,k) / (q^{s+k-1} - 1)
//   zeta_q(s1,s2)  = (q-1)^{s1+s2} sum_{k1,k2} C(s1,k1) C(s2,k2)
//                      / ((q^{s1+k1-1} - 1)(q^{s1+s2+k1+k2-2} - 1))
//   circ_q(s1,s2)  = (q-1)^{s1+s2} sum_{k1,k2} C(s1,k1) C(s2,k2)
//                      / ((q^{s1+k1-1} - 1)(q^{s1+s2+k1+k2-1} - 1))
//
// with C(s,k) = s(s+1)...(s+k-1)/k!. The double sums are evaluated by
// grouping on j = k1 + k2. For k >= 1 the factor C(s,k)/(q^x - 1),
// x = s+k-1, is computed as C(s,k-1)/k * x/(q^x - 1), so the 0/0 at
// s = 1-k is resolved to C(s,k-1)/(k log q).

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qzeta/qnum.hpp"
#include "qzeta/series.hpp"

namespace qzeta {

/// Order of the iterated limit at an integer point (n1, n2).
enum class LimitOrder {
  s2_first,  // s2 -> n2, then s1 -> n1
  s1_first,  // s1 -> n1, then s2 -> n2
};

std::string_view to_string(LimitOrder o);
/// Accepts "s2_first" / "s1_first"; throws std::invalid_argument otherwise.
LimitOrder parse_limit_order(std::string_view text);

struct PoleClassification {
  bool is_pole = false;
  std::optional<CVal> offending_exponent;
  std::string family;          // which pole family matched, with its b
  bool in_stated_set = false;  // the match lies in the listed pole sets of circ_q
};

/// Largest expansion index before the evaluators give up with domain_error.
inline constexpr std::uint64_t kMaxExpansionTerms = 20'000;

ValueWithError zeta_q_expansion_single(const CVal& s, const QBase& base, const PrecisionCtx& ctx);
ValueWithError zeta2_q_expansion(const CVal& s1, const CVal& s2, const QBase& base, const PrecisionCtx& ctx);
ValueWithError circ_expansion(const CVal& s1, const CVal& s2, const QBase& base, const PrecisionCtx& ctx);

/// Classify (s1, s2) against the denominators of the expansion of `kind`
/// (SeriesKind::circ or SeriesKind::double_). A point is a pole when some
/// non-removable exponent x has |q^x - 1| below the pole threshold.
PoleClassification pole_classify(const CVal& s1, const CVal& s2, const QBase& base,
                                 const PrecisionCtx& ctx = PrecisionCtx(),
                                 SeriesKind kind = SeriesKind::circ);

/// The iterated limits of zeta_q(s1, s2) at (0, 0) in closed form:
///   s2_first: 1/((q^-1 - 1)(q^-2 - 1)) + 1/((q^-1 - 1) log q) + 1/(2 (q-1) log q)
///   s1_first: 1/((q^-1 - 1)(q^-2 - 1)) + 3/(2 (q^-1 - 1) log q) + 1/log^2 q
/// Working precision is raised by 4k bits when q - 1 ~ 2^-k.
Real zeta00_closed(const QBase& base, LimitOrder order, const PrecisionCtx& ctx);

struct LimitRow {
  int k;       // q = 1 + 2^-k
  Real q;
  Real value;  // zeta00_closed at q
  Real extrapolated;  // best Richardson estimate using rows up to this one
};

struct LimitResult {
  std::vector<LimitRow> rows;
  Real limit;
  long double error_estimate;
  Bits bits_used;
};

/// Richardson extrapolation of zeta00_closed to q = 1 from q_k = 1 + 2^-k,
/// k = 4, ..., 4 + steps. Throws std::invalid_argument for steps < 1 and
/// DomainError if the required precision exceeds the supported maximum.
LimitResult limit_q_to_1(LimitOrder order, int steps, const PrecisionCtx& ctx);

enum class AsymptoticKind { inv_xplus2, inv_log1p, inv_log1p_sq };

std::string_view to_string(AsymptoticKind k);

struct AsymptoticTerm {
  int power;
  Real coeff;
};

/// Leading term followed by the three printed corrections:
///   1/(x+2)        = 1/2 - x/4 + x^2/8 - x^3/16
///   1/log(1+x)     = 1/x + 1/2 - x/12 + x^2/24
///   1/log^2(1+x)   = 1/x^2 + 1/x + 1/12 + 0*x
std::vector<AsymptoticTerm> asymptotic_terms(AsymptoticKind which, Bits bits);

/// The leading term plus `terms` corrections (0..3) evaluated at x, |x| < 1/2.
Real asymptotic_ref(const Real& x, AsymptoticKind which, int terms);

/// zeta2_q_expansion at (n1 + d_outer, n2 + d_inner) for s2_first and at
/// (n1 + d_inner, n2 + d_outer) for s1_first. Requires
/// 0 < d_inner <= d_outer^2 and d_outer < 1e-3 (std::invalid_argument).
ValueWithError iterated_limit_probe(long n1, long n2, const QBase& base, const Real& delta_outer,
                                    const Real& delta_inner, LimitOrder order, const PrecisionCtx& ctx);

}  // namespace qzeta
