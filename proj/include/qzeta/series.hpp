#pragma once

// Direct summation of the q>1 zeta family with rigorous geometric tail bounds.
//
//   zeta_q(s)          = sum_{n>=1} q^n / [n]^s
//   zeta_q(s1,s2)      = sum_{k1>k2>=1}  q^k1 q^k2 / ([k1]^s1 [k2]^s2)
//   zeta*_q(s1,s2)     = sum_{k1>=k2>=1} q^k1 q^k2 / ([k1]^s1 [k2]^s2)
//   circ_q(s1,s2)      = sum_{n1>n2>=1}  q^n1 / ([n1]^s1 [n2]^s2)
//   circ*_q(s1,s2)     = sum_{n1>=n2>=1} q^n1 / ([n1]^s1 [n2]^s2)
//   mt_q(s_1..s_r; s') = sum_{m_i>=1} q^{m_1}...q^{m_r} q^M / ([m_1]^s_1...[m_r]^s_r [M]^s'),
//                        M = m_1 + ... + m_r
//
// Since [n]_q > 0 is real, |[n]^-s| = [n]^-Re(s); every bound below depends
// only on real parts. Each summand obeys
//   q^{wn} / [n]^sigma <= A(sigma) * q^{n (w - sigma)},
//   A(sigma) = (q-1)^sigma * max(1, (1 - 1/q)^-sigma),
// and the truncation point is the smallest one whose geometric tail is below
// abs_tol/2. The other half of abs_tol is reserved for rounding.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qzeta/qnum.hpp"

namespace qzeta {

enum class SeriesKind { single, double_, double_star, circ, circ_star, mordell_tornheim };

std::string_view to_string(SeriesKind k);

struct TruncationPlan {
  std::uint64_t outer_limit = 0;  // N (largest outer index) or L (largest total for MT)
  std::string inner_rule;
  long double tail_ratio = 0.0L;  // geometric ratio of the dominant index
  long double tail_bound = 0.0L;  // rigorous bound on the omitted terms
  bool feasible = false;
  std::string reason;             // set when !feasible
};

/// Largest outer truncation the evaluators accept before reporting domain_error.
inline constexpr std::uint64_t kMaxSingleTerms = 20'000'000;
inline constexpr std::uint64_t kMaxDoubleOuter = 2'000'000;
inline constexpr std::uint64_t kMaxConvolutionLength = 6'000;

// Truncation plans. They validate the convergence preconditions and report
// them through `feasible`/`reason`.
TruncationPlan plan_single(const CVal& s, int q_weight, int n_power, const QBase& base, const PrecisionCtx& ctx);
TruncationPlan plan_double(SeriesKind kind, const CVal& s1, const CVal& s2, const QBase& base,
                           const PrecisionCtx& ctx);
TruncationPlan plan_mt(std::span<const CVal> s_front, const CVal& s_last, const QBase& base,
                       const PrecisionCtx& ctx);

ValueWithError zeta_q(const CVal& s, const QBase& base, const PrecisionCtx& ctx);

/// sum_{n>=1} n^n_power q^{q_weight n} / [n]^s, for q_weight in {1,2} and
/// n_power in {0,1}. Requires Re(s) > q_weight.
ValueWithError weighted_zeta_q(const CVal& s, int q_weight, int n_power, const QBase& base,
                               const PrecisionCtx& ctx);

ValueWithError zeta2_q(const CVal& s1, const CVal& s2, const QBase& base, const PrecisionCtx& ctx);
ValueWithError zeta2_star_q(const CVal& s1, const CVal& s2, const QBase& base, const PrecisionCtx& ctx);
ValueWithError circ_q(const CVal& s1, const CVal& s2, const QBase& base, const PrecisionCtx& ctx);
ValueWithError circ_star_q(const CVal& s1, const CVal& s2, const QBase& base, const PrecisionCtx& ctx);

/// Mordell-Tornheim r-ple sum, 1 <= r <= 4, via repeated convolution over
/// the total M = m_1 + ... + m_r.
ValueWithError mt_q(std::span<const CVal> s_front, const CVal& s_last, const QBase& base,
                    const PrecisionCtx& ctx);

/// zeta_q(s1,s2) summed in the shifted form
///   sum_{k1,k2>0} q^{k1+k2} q^k2 / ([k1+k2]^s1 [k2]^s2)
/// over a square of indices. An independent route to zeta2_q.
ValueWithError zeta2_q_reindexed(const CVal& s1, const CVal& s2, const QBase& base, const PrecisionCtx& ctx);

/// Dispatch on kind. `args` holds (s) for single, (s1, s2) for the double
/// kinds, and (s_1, ..., s_r, s_last) for mordell_tornheim.
ValueWithError evaluate(SeriesKind kind, std::span<const CVal> args, const QBase& base, const PrecisionCtx& ctx);
TruncationPlan plan(SeriesKind kind, std::span<const CVal> args, const QBase& base, const PrecisionCtx& ctx);

/// Plain truncated sum with every index <= cutoff; no tail bound. Testing
/// oracle: terms are computed from q^k by direct powering and summed in
/// nested loops, independently of the evaluators above.
CVal naive_oracle(SeriesKind kind, std::span<const CVal> args, const QBase& base, std::uint64_t cutoff,
                  Bits bits);

}  // namespace qzeta
