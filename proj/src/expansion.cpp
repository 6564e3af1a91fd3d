#include "qzeta/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace qzeta {

std::string_view to_string(LimitOrder o) { return o == LimitOrder::s2_first ? "s2_first" : "s1_first"; }

LimitOrder parse_limit_order(std::string_view text) {
  if (text == "s2_first") return LimitOrder::s2_first;
  if (text == "s1_first") return LimitOrder::s1_first;
  throw std::invalid_argument("limit order must be s2_first or s1_first, got '" + std::string(text) + "'");
}

std::string_view to_string(AsymptoticKind k) {
  switch (k) {
    case AsymptoticKind::inv_xplus2: return "inv_xplus2";
    case AsymptoticKind::inv_log1p: return "inv_log1p";
    case AsymptoticKind::inv_log1p_sq: return "inv_log1p_sq";
  }
  return "unknown";
}

namespace {

constexpr long double kSlack = 1.0L + 1e-9L;

long double mag(const CVal& z) { return abs(z).to_long_double(); }

// log C(a, k) = log (a(a+1)...(a+k-1)/k!) for real a > 0.
long double log_rising(long double a, long double k) {
  return std::lgamma(a + k) - std::lgamma(a) - std::lgamma(k + 1);
}

std::string pole_note(const CVal& x, const char* what) {
  return std::string(what) + " at exponent " + x.re.to_string(10) + (x.im.is_zero() ? "" : " + i*" + x.im.to_string(10));
}

// Expansion building blocks at working precision, with condition numbers for
// the rounding bound and pole detection.
class Blocks {
 public:
  Blocks(const QBase& base, const PrecisionCtx& ctx)
      : ctx_(ctx), bits_(ctx.work_bits()), qb_(base.at(bits_)), base_(base) {}

  Bits bits() const { return bits_; }
  const QBase& qb() const { return qb_; }
  long double max_cond() const { return max_cond_; }
  const std::optional<ValueWithError>& failure() const { return failure_; }

  // 1/(q^x - 1)
  CVal inv(const CVal& x) {
    if (failure_) return CVal(0L, bits_);
    if (auto b = exact_pole_index(x, base_, ctx_)) {
      fail(Status::domain_error, pole_note(x, "exact pole q^x = 1"));
      return CVal(0L, bits_);
    }
    const CVal xl = x.rounded(bits_) * qb_.log_q();
    const CVal e = expm1(xl);
    const long double me = mag(e);
    if (me < ctx_.pole_threshold()) {
      fail(Status::pole_proximate, pole_note(x, "|q^x - 1| below pole threshold"));
      return CVal(0L, bits_);
    }
    note_cond(1.0L + mag(xl) * (1.0L + me) / me);
    return CVal(1L, bits_) / e;
  }

  // x/(q^x - 1), continuous at x = 0 with value 1/log q.
  CVal g(const CVal& x) {
    if (failure_) return CVal(0L, bits_);
    if (x.is_zero()) return CVal(1L / qb_.log_q());
    if (auto b = exact_pole_index(x, base_, ctx_); b && *b != 0) {
      fail(Status::domain_error, pole_note(x, "exact pole q^x = 1"));
      return CVal(0L, bits_);
    }
    const CVal xw = x.rounded(bits_);
    const CVal xl = xw * qb_.log_q();
    const CVal e = expm1(xl);
    const long double me = mag(e);
    const long double mxl = mag(xl);
    if (me < ctx_.pole_threshold() && mxl > 3.0L) {
      fail(Status::pole_proximate, pole_note(x, "|q^x - 1| below pole threshold"));
      return CVal(0L, bits_);
    }
    note_cond(2.0L + (mxl > 1.0L ? mxl * (1.0L + me) / me : 2.0L));
    return xw / e;
  }

 private:
  void fail(Status s, std::string note) {
    failure_ = ValueWithError::failure(s, std::move(note), ctx_.mantissa_bits());
  }
  void note_cond(long double c) { max_cond_ = std::max(max_cond_, c); }

  const PrecisionCtx& ctx_;
  Bits bits_;
  QBase qb_;
  const QBase& base_;
  long double max_cond_ = 1.0L;
  std::optional<ValueWithError> failure_;
};

// c[k] = C(s,k)/(q^{s+k-1} - 1), k = 0..count-1.
std::vector<CVal> first_coeffs(const CVal& s_in, std::size_t count, Blocks& blk) {
  const Bits bits = blk.bits();
  const CVal s = s_in.rounded(bits);
  std::vector<CVal> c;
  c.reserve(count);
  if (count == 0) return c;
  c.push_back(blk.inv(s - 1L));
  CVal rising(1L, bits);  // C(s, k-1)
  for (std::size_t k = 1; k < count; ++k) {
    const long kl = static_cast<long>(k);
    CVal term = rising * blk.g(s + (kl - 1));
    term = term / CVal(kl, bits);
    c.push_back(std::move(term));
    rising *= s + (kl - 1);
    rising = rising / CVal(kl, bits);
  }
  return c;
}

std::vector<CVal> rising_coeffs(const CVal& s_in, std::size_t count, Bits bits) {
  const CVal s = s_in.rounded(bits);
  std::vector<CVal> out;
  out.reserve(count);
  CVal r(1L, bits);
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(r);
    const long kl = static_cast<long>(k);
    r *= s + kl;
    r = r / CVal(kl + 1, bits);
  }
  return out;
}

// Smallest K in [lo, kMaxExpansionTerms] with f(K) <= target (f assumed to
// decrease once finite).
std::optional<std::uint64_t> smallest_k(const std::function<long double(std::uint64_t)>& f, long double target,
                                        std::uint64_t lo) {
  std::uint64_t hi = kMaxExpansionTerms;
  if (lo > hi || !(f(hi) <= target)) return std::nullopt;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (f(mid) <= target) hi = mid; else lo = mid + 1;
  }
  return hi;
}

ValueWithError finish(const CVal& scale, const CVal& sum, long double sum_major, long double weight,
                      long double tail, std::uint64_t terms, const PrecisionCtx& ctx) {
  const long double ms = mag(scale);
  const CVal v = scale * sum;
  ValueWithError out;
  out.value = v.rounded(ctx.mantissa_bits());
  const long double rounding = ctx.work_eps() * weight * ms * sum_major;
  out.abs_error_bound = (tail + rounding) * kSlack + ctx.output_eps() * mag(out.value);
  out.terms_used = terms;
  return out;
}

enum class DoubleKind { zeta2, circ };

ValueWithError double_expansion(DoubleKind kind, const CVal& s1, const CVal& s2, const QBase& base,
                                const PrecisionCtx& ctx) {
  const long double lq = base.log_q().to_long_double();
  const long double lqm1 = std::log(base.q_minus_1().to_long_double());
  const long double ln2_over_lq = std::log(2.0L) / lq;
  const long double sig1 = s1.re.to_long_double();
  const long double sig12 = sig1 + s2.re.to_long_double();
  const long double shift = kind == DoubleKind::zeta2 ? 2.0L : 1.0L;
  const long double a1 = std::max(mag(s1), 1.0L);
  const long double big_a = a1 + mag(s2);

  Blocks blk(base, ctx);
  const Bits bits = blk.bits();

  // |c1(k)| <= m1 C(a1, k) for every k; beyond k0 this holds with m1 = 1.
  const auto k0 = static_cast<std::size_t>(std::max(0.0L, std::ceil(ln2_over_lq + 1.0L - sig1)));
  long double log_m1 = 0.0L;
  {
    const std::vector<CVal> head = first_coeffs(s1, k0 + 1, blk);
    if (blk.failure()) return *blk.failure();
    for (std::size_t k = 0; k <= k0; ++k) {
      const long double m = mag(head[k]);
      if (m > 0) log_m1 = std::max(log_m1, std::log(m) - log_rising(a1, static_cast<long double>(k)));
    }
    log_m1 += 1e-9L;
  }

  // Tail over j > K: (q-1)^sig12 m1 sum C(A,j) 2 q^{-(sig12 + j - shift)}.
  auto log_tail = [&](std::uint64_t kk) {
    const long double j = static_cast<long double>(kk) + 1.0L;
    if (sig12 + j - shift < ln2_over_lq) return std::numeric_limits<long double>::infinity();
    const long double log_gamma = std::log((big_a + j) / (j + 1.0L)) - lq;
    if (!(log_gamma < 0)) return std::numeric_limits<long double>::infinity();
    return sig12 * lqm1 + log_m1 + std::log(2.0L) + log_rising(big_a, j) - (sig12 + j - shift) * lq -
           std::log(-std::expm1(log_gamma));
  };
  const auto lo = static_cast<std::uint64_t>(std::max<long double>(k0, std::ceil(2.0L * std::hypot(mag(s1), mag(s2)))));
  const auto kk = smallest_k(log_tail, std::log(ctx.abs_tol() / 2), lo);
  if (!kk) {
    return ValueWithError::failure(Status::domain_error, "expansion would need more than " +
                                                             std::to_string(kMaxExpansionTerms) + " terms",
                                   ctx.mantissa_bits());
  }
  const std::size_t n = *kk + 1;
  const std::vector<CVal> c1 = first_coeffs(s1, n, blk);
  if (blk.failure()) return *blk.failure();
  const std::vector<CVal> b2 = rising_coeffs(s2, n, bits);
  std::vector<long double> c1_abs(n), b2_abs(n);
  for (std::size_t k = 0; k < n; ++k) {
    c1_abs[k] = mag(c1[k]);
    b2_abs[k] = mag(b2[k]);
  }
  const CVal s12 = s1.rounded(bits) + s2.rounded(bits);
  CVal sum(0L, bits);
  long double major = 0.0L;
  for (std::size_t j = n; j-- > 0;) {
    const CVal d = blk.inv(s12 + (static_cast<long>(j) - static_cast<long>(shift)));
    if (blk.failure()) return *blk.failure();
    CVal conv(0L, bits);
    long double conv_abs = 0.0L;
    for (std::size_t k1 = 0; k1 <= j; ++k1) {
      conv += c1[k1] * b2[j - k1];
      conv_abs += c1_abs[k1] * b2_abs[j - k1];
    }
    sum += d * conv;
    major += mag(d) * conv_abs;
  }
  const CVal scale = exp_times(s12, log(Real(blk.qb().q_minus_1(), bits)));
  const long double nn = static_cast<long double>(n);
  const long double weight = 16.0L * (nn + 4.0L) + 16.0L * blk.max_cond() + 4.0L * mag(s12) * std::fabs(lqm1);
  return finish(scale, sum, major, weight, std::exp(log_tail(*kk)), n * (n + 1) / 2, ctx);
}

}  // namespace

ValueWithError zeta_q_expansion_single(const CVal& s, const QBase& base, const PrecisionCtx& ctx) {
  const long double lq = base.log_q().to_long_double();
  const long double lqm1 = std::log(base.q_minus_1().to_long_double());
  const long double sigma = s.re.to_long_double();
  const long double a = std::max(mag(s), 1.0L);
  const long double ln2_over_lq = std::log(2.0L) / lq;
  // Tail over k > K: (q-1)^sigma sum C(a,k) 2 q^{-(sigma + k - 1)}.
  auto log_tail = [&](std::uint64_t kk) {
    const long double k = static_cast<long double>(kk) + 1.0L;
    if (sigma + k - 1.0L < ln2_over_lq) return std::numeric_limits<long double>::infinity();
    const long double log_gamma = std::log((a + k) / (k + 1.0L)) - lq;
    if (!(log_gamma < 0)) return std::numeric_limits<long double>::infinity();
    return sigma * lqm1 + std::log(2.0L) + log_rising(a, k) - (sigma + k - 1.0L) * lq -
           std::log(-std::expm1(log_gamma));
  };
  const auto kk = smallest_k(log_tail, std::log(ctx.abs_tol() / 2), static_cast<std::uint64_t>(std::ceil(2 * mag(s))));
  if (!kk) {
    return ValueWithError::failure(Status::domain_error, "expansion would need more than " +
                                                             std::to_string(kMaxExpansionTerms) + " terms",
                                   ctx.mantissa_bits());
  }
  Blocks blk(base, ctx);
  const Bits bits = blk.bits();
  const std::size_t n = *kk + 1;
  const std::vector<CVal> c = first_coeffs(s, n, blk);
  if (blk.failure()) return *blk.failure();
  CVal sum(0L, bits);
  long double major = 0.0L;
  for (std::size_t k = n; k-- > 0;) {
    sum += c[k];
    major += mag(c[k]);
  }
  const CVal scale = exp_times(s.rounded(bits), log(Real(blk.qb().q_minus_1(), bits)));
  const long double weight =
      16.0L * (static_cast<long double>(n) + 4.0L) + 16.0L * blk.max_cond() + 4.0L * mag(s) * std::fabs(lqm1);
  return finish(scale, sum, major, weight, std::exp(log_tail(*kk)), n, ctx);
}

ValueWithError zeta2_q_expansion(const CVal& s1, const CVal& s2, const QBase& base, const PrecisionCtx& ctx) {
  return double_expansion(DoubleKind::zeta2, s1, s2, base, ctx);
}

ValueWithError circ_expansion(const CVal& s1, const CVal& s2, const QBase& base, const PrecisionCtx& ctx) {
  return double_expansion(DoubleKind::circ, s1, s2, base, ctx);
}

// ---------------------------------------------------------------------------
// Pole classification

namespace {

struct Hit {
  CVal x;
  long k;
  long b;
};

// Does x0 + k (k >= k_min) hit q^x = 1 within the threshold? Only exponents
// with b != 0 count when `nonzero_b` is set.
std::optional<Hit> family_hit(const CVal& x0, long k_min, bool nonzero_b, const QBase& base,
                              const PrecisionCtx& ctx) {
  const Bits bits = std::max(ctx.work_bits(), x0.bits());
  const Real kr = round_nearest(-x0.re.rounded(bits));
  const long k = kr.to_long();
  if (k < k_min) return std::nullopt;
  const CVal x = x0.rounded(bits) + k;
  const QBase qb = base.at(bits);
  const CVal xl = x * qb.log_q();
  const Real two_pi = ldexp(const_pi(bits), 1);
  const long b = round_nearest(x.im * qb.log_q() / two_pi).to_long();
  if (nonzero_b && b == 0) return std::nullopt;
  if (mag(expm1(xl)) >= ctx.pole_threshold() && !exact_pole_index(x, base, ctx)) return std::nullopt;
  return Hit{x, k, b};
}

}  // namespace

PoleClassification pole_classify(const CVal& s1, const CVal& s2, const QBase& base, const PrecisionCtx& ctx,
                                 SeriesKind kind) {
  if (kind != SeriesKind::circ && kind != SeriesKind::double_) {
    throw std::invalid_argument("pole_classify supports the circ and double expansions");
  }
  PoleClassification out;
  const std::string bs = ", b=";
  // s1 - 1 + k1: k1 = 0 is a plain denominator, k1 >= 1 sits inside
  // x/(q^x - 1) where x = 0 is removable.
  if (auto h = family_hit(s1 - 1L, 0, false, base, ctx); h && (h->k == 0 || h->b != 0)) {
    out.is_pole = true;
    out.offending_exponent = h->x;
    out.family = (h->k == 0 ? std::string("s1 = 1 + 2πib/log q") : "s1 = a + 2πib/log q, a<=0") + bs +
                 std::to_string(h->b);
    out.in_stated_set = true;
    return out;
  }
  const long shift = kind == SeriesKind::circ ? 1 : 2;
  const CVal s12 = s1 + s2;
  if (auto h = family_hit(s12 - shift, 0, false, base, ctx)) {
    out.is_pole = true;
    out.offending_exponent = h->x;
    const long a = round_nearest(s12.re).to_long();
    if (kind == SeriesKind::circ) {
      out.in_stated_set = a == 1 || h->b != 0;
      out.family = (a == 1 ? std::string("s1+s2 = 1 + 2πib/log q") : "s1+s2 = a + 2πib/log q, a<=0") + bs +
                   std::to_string(h->b) + (out.in_stated_set ? "" : " (outside the listed set)");
    } else {
      out.in_stated_set = false;
      out.family = "s1+s2 = a + 2πib/log q, a<=2, a=" + std::to_string(a) + bs + std::to_string(h->b);
    }
    return out;
  }
  out.family = "none";
  return out;
}

// ---------------------------------------------------------------------------
// Closed forms at (0,0) and the limit q -> 1

Real zeta00_closed(const QBase& base, LimitOrder order, const PrecisionCtx& ctx) {
  const long k = std::max(0L, -base.q_minus_1().exponent());
  const Bits bits = ctx.work_bits() + 4 * static_cast<Bits>(k) + 8;
  const QBase b = base.at(bits);
  const Real q(b.q(), bits);
  const Real h(b.q_minus_1(), bits);
  const Real& lq = b.log_q();
  // q^-1 - 1 = -h/q, q^-2 - 1 = -h(q+1)/q^2
  const Real qi1 = -(h / q);
  const Real qi2 = -(h * (q + 1L) / (q * q));
  const Real head = 1L / (qi1 * qi2);
  Real v(0L, bits);
  if (order == LimitOrder::s2_first) {
    v = head + 1L / (qi1 * lq) + 1L / (ldexp(h, 1) * lq);
  } else {
    v = head + Real(3L, bits) / (ldexp(qi1, 1) * lq) + 1L / (lq * lq);
  }
  return v.rounded(ctx.mantissa_bits());
}

LimitResult limit_q_to_1(LimitOrder order, int steps, const PrecisionCtx& ctx) {
  if (steps < 1) throw std::invalid_argument("steps must be at least 1");
  constexpr int kFirst = 4;
  const int k_last = kFirst + steps;
  const Bits bits = ctx.mantissa_bits() + 4 * static_cast<Bits>(k_last);
  if (bits > PrecisionCtx::kMaxMantissa) {
    throw DomainError("q -> 1 extrapolation with " + std::to_string(steps) +
                      " steps needs more than the maximum precision");
  }
  const PrecisionCtx wide(bits, ctx.guard_bits());
  LimitResult out{{}, Real(0L, ctx.mantissa_bits()), 0.0L, wide.work_bits()};
  std::vector<std::vector<Real>> t;  // Neville table, t[i][j]
  for (int k = kFirst; k <= k_last; ++k) {
    const Real q = Real(1L, bits + k + 2) + ldexp(Real(1L, bits + k + 2), -k);
    const Real v = zeta00_closed(QBase(q, wide.work_bits()), order, wide);
    std::vector<Real> row{v};
    if (!t.empty()) {
      const auto& prev = t.back();
      for (std::size_t j = 1; j <= prev.size(); ++j) {
        const Real denom(static_cast<long>((1UL << j) - 1), bits);
        row.push_back(row[j - 1] + (row[j - 1] - prev[j - 1]) / denom);
      }
    }
    out.rows.push_back({k, q, v.rounded(ctx.mantissa_bits()), row.back().rounded(ctx.mantissa_bits())});
    t.push_back(std::move(row));
  }
  const auto& last = t.back();
  out.limit = last.back().rounded(ctx.mantissa_bits());
  out.error_estimate = abs(last.back() - last[last.size() - 2]).to_long_double();
  return out;
}

// ---------------------------------------------------------------------------
// Asymptotic references

std::vector<AsymptoticTerm> asymptotic_terms(AsymptoticKind which, Bits bits) {
  auto frac = [bits](long p, long q) { return Real(p, bits) / q; };
  switch (which) {
    case AsymptoticKind::inv_xplus2:
      return {{0, frac(1, 2)}, {1, frac(-1, 4)}, {2, frac(1, 8)}, {3, frac(-1, 16)}};
    case AsymptoticKind::inv_log1p:
      return {{-1, frac(1, 1)}, {0, frac(1, 2)}, {1, frac(-1, 12)}, {2, frac(1, 24)}};
    case AsymptoticKind::inv_log1p_sq:
      return {{-2, frac(1, 1)}, {-1, frac(1, 1)}, {0, frac(1, 12)}, {1, frac(0, 1)}};
  }
  throw std::invalid_argument("unknown asymptotic kind");
}

Real asymptotic_ref(const Real& x, AsymptoticKind which, int terms) {
  if (terms < 0 || terms > 3) throw std::invalid_argument("terms must lie in 0..3");
  if (!(abs(x) < Real(1L, 64) / 2L)) throw std::invalid_argument("asymptotic_ref needs |x| < 1/2");
  const Bits bits = x.bits();
  Real v(0L, bits);
  const auto coeffs = asymptotic_terms(which, bits);
  for (int i = 0; i <= terms; ++i) {
    const auto& [p, c] = coeffs[static_cast<std::size_t>(i)];
    if (c.is_zero()) continue;
    v += c * pow(x, static_cast<long>(p));
  }
  return v;
}

ValueWithError iterated_limit_probe(long n1, long n2, const QBase& base, const Real& delta_outer,
                                    const Real& delta_inner, LimitOrder order, const PrecisionCtx& ctx) {
  const Real cap = Real(1L, 64) / 1000L;
  if (!(delta_outer > 0L) || !(delta_outer < cap) || !(delta_inner > 0L) || !(delta_inner < cap)) {
    throw std::invalid_argument("probe offsets must lie in (0, 1e-3)");
  }
  if (delta_inner > delta_outer * delta_outer) {
    throw std::invalid_argument("probe needs delta_inner <= delta_outer^2");
  }
  const Bits bits = std::max({ctx.work_bits(), delta_outer.bits(), delta_inner.bits()});
  const Real& d1 = order == LimitOrder::s2_first ? delta_outer : delta_inner;
  const Real& d2 = order == LimitOrder::s2_first ? delta_inner : delta_outer;
  const CVal s1(Real(n1, bits) + d1);
  const CVal s2(Real(n2, bits) + d2);
  return zeta2_q_expansion(s1, s2, base, ctx);
}

}  // namespace qzeta
