#include "qzeta/series.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>

namespace qzeta {

std::string_view to_string(SeriesKind k) {
  switch (k) {
    case SeriesKind::single: return "single";
    case SeriesKind::double_: return "double";
    case SeriesKind::double_star: return "double_star";
    case SeriesKind::circ: return "circ";
    case SeriesKind::circ_star: return "circ_star";
    case SeriesKind::mordell_tornheim: return "mordell_tornheim";
  }
  return "unknown";
}

namespace {

constexpr long double kBoundSlack = 1.0L + 1e-9L;

struct LogQ {
  long double lq;    // log q
  long double lqm1;  // log(q - 1)
};

LogQ log_q_of(const QBase& base) {
  return {base.log_q().to_long_double(), std::log(base.q_minus_1().to_long_double())};
}

long double re_of(const CVal& s) { return s.re.to_long_double(); }

// log A(sigma), with q^{wn}/[n]^sigma <= A(sigma) q^{n(w - sigma)}.
long double log_amp(long double sigma, const LogQ& g) {
  const long double log_one_minus_inv_q = g.lqm1 - g.lq;  // log(1 - 1/q) < 0
  return sigma * g.lqm1 + std::max(0.0L, -sigma * log_one_minus_inv_q);
}

long double log1m_exp(long double x) { return std::log(-std::expm1(x)); }  // log(1 - e^x), x < 0

// log of sum_{n>N} n^p rho^n, p in {0, 1}, given log rho < 0.
long double log_geom_tail(long double log_rho, std::uint64_t n, int p) {
  const long double np1 = static_cast<long double>(n) + 1.0L;
  const long double l1m = log1m_exp(log_rho);
  if (p == 0) return np1 * log_rho - l1m;
  const long double rho = std::exp(log_rho);
  return np1 * log_rho + std::log(np1 * (1.0L - rho) + rho) - 2.0L * l1m;
}

// Smallest n in [lo, hi] with f(n) <= target, assuming f decreases; the
// returned n always satisfies the inequality.
std::optional<std::uint64_t> smallest_n(const std::function<long double(std::uint64_t)>& f,
                                        long double target, std::uint64_t lo, std::uint64_t hi) {
  if (!(f(hi) <= target)) return std::nullopt;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (f(mid) <= target) hi = mid; else lo = mid + 1;
  }
  return hi;
}

TruncationPlan infeasible(std::string reason) {
  TruncationPlan p;
  p.reason = std::move(reason);
  return p;
}

// q^{wn} n^p / [n]^s for n = 1..count, with a per-term relative error
// bound expressed as a multiple of the working unit roundoff.
struct TermTable {
  std::vector<CVal> t;
  std::vector<long double> mag;
  long double weight = 0.0L;
};

TermTable power_terms(const CVal& s_in, int w, int p, std::uint64_t count, const QBase& qb, Bits bits) {
  TermTable out;
  out.t.reserve(count);
  out.mag.reserve(count);
  const CVal s = s_in.rounded(bits);
  const Real& lq = qb.log_q();
  const Real lqm1 = log(Real(qb.q_minus_1(), bits));
  const long double s_abs = abs(s).to_long_double();
  const long double lqm1_abs = std::fabs(lqm1.to_long_double());
  const bool complex = !s.im.is_zero();
  for (std::uint64_t n = 1; n <= count; ++n) {
    const Real nl = lq * static_cast<long>(n);
    const Real log_br = log(expm1(nl)) - lqm1;
    Real e = nl * static_cast<long>(w) - s.re * log_br;
    if (p == 1) e += log(Real(static_cast<long>(n), bits));
    const Real m = exp(e);
    const long double nl_d = nl.to_long_double();
    const long double e_abs = std::fabs(e.to_long_double());
    const long double lb_abs = std::fabs(log_br.to_long_double());
    const long double wgt =
        2.0L * (4.0L + e_abs + 2.0L * std::abs(w) * nl_d + 2.0L * s_abs * (5.0L + 2.0L * nl_d + lb_abs + lqm1_abs));
    out.weight = std::max(out.weight, wgt);
    out.mag.push_back(m.to_long_double());
    if (complex) {
      const Real phase = -(s.im * log_br);
      out.t.emplace_back(m * cos(phase), m * sin(phase));
    } else {
      out.t.emplace_back(m);
    }
  }
  return out;
}

ValueWithError finish(const CVal& sum, long double tail, long double rounding, std::uint64_t terms,
                      const PrecisionCtx& ctx) {
  ValueWithError out;
  out.value = sum.rounded(ctx.mantissa_bits());
  out.abs_error_bound =
      (tail + rounding) * kBoundSlack + ctx.output_eps() * abs(out.value).to_long_double();
  out.terms_used = terms;
  return out;
}

ValueWithError failure(const TruncationPlan& p, const PrecisionCtx& ctx) {
  return ValueWithError::failure(Status::domain_error, p.reason, ctx.mantissa_bits());
}

std::uint64_t binom_u64(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

bool is_star(SeriesKind k) { return k == SeriesKind::double_star || k == SeriesKind::circ_star; }
bool is_circ(SeriesKind k) { return k == SeriesKind::circ || k == SeriesKind::circ_star; }

}  // namespace

// ---------------------------------------------------------------------------
// Plans

TruncationPlan plan_single(const CVal& s, int q_weight, int n_power, const QBase& base, const PrecisionCtx& ctx) {
  if (q_weight < 1 || q_weight > 2 || n_power < 0 || n_power > 1) {
    throw std::invalid_argument("weighted series supports q_weight in {1,2} and n_power in {0,1}");
  }
  const long double sigma = re_of(s);
  if (!(sigma > q_weight)) {
    return infeasible("series diverges: need Re(s) > " + std::to_string(q_weight) + ", got " + s.re.to_string(8));
  }
  const LogQ g = log_q_of(base);
  const long double la = log_amp(sigma, g);
  const long double log_rho = (q_weight - sigma) * g.lq;
  auto f = [&](std::uint64_t n) { return la + log_geom_tail(log_rho, n, n_power); };
  const long double target = std::log(ctx.abs_tol() / 2);
  const auto n = smallest_n(f, target, 1, kMaxSingleTerms);
  if (!n) return infeasible("truncation would exceed " + std::to_string(kMaxSingleTerms) + " terms");
  TruncationPlan p;
  p.outer_limit = *n;
  p.inner_rule = "n <= N";
  p.tail_ratio = std::exp(log_rho);
  p.tail_bound = std::exp(f(*n)) * kBoundSlack;
  p.feasible = true;
  return p;
}

TruncationPlan plan_double(SeriesKind kind, const CVal& s1, const CVal& s2, const QBase& base,
                           const PrecisionCtx& ctx) {
  if (kind == SeriesKind::single || kind == SeriesKind::mordell_tornheim) {
    throw std::invalid_argument("plan_double needs a double kind");
  }
  const long double a = re_of(s1), b = re_of(s2);
  const bool circ = is_circ(kind);
  if (!(a > 1)) return infeasible("series diverges: need Re(s1) > 1, got " + s1.re.to_string(8));
  if (!circ && !(a + b > 2)) {
    return infeasible("series diverges: need Re(s1) + Re(s2) > 2, got " + std::to_string(static_cast<double>(a + b)));
  }
  if (circ && b <= 0 && !(a + b > 1)) {
    return infeasible("series diverges: need Re(s1) + Re(s2) > 1 when Re(s2) <= 0");
  }
  const LogQ g = log_q_of(base);
  const long double lab = log_amp(a, g) + log_amp(b, g);
  const long double l1 = (1 - a) * g.lq;
  const long double l2 = ((circ ? 0 : 1) - b) * g.lq;
  const long double lx = l1 + std::max(0.0L, l2);
  auto f = [&](std::uint64_t n) {
    long double best = log_geom_tail(lx, n, 1);
    if (l2 < 0) {
      const long double geo = l2 - log1m_exp(l2) + log_geom_tail(l1, n, 0);
      best = std::min(best, geo);
    }
    return lab + best;
  };
  const long double target = std::log(ctx.abs_tol() / 2);
  const auto n = smallest_n(f, target, 1, kMaxDoubleOuter);
  if (!n) return infeasible("truncation would exceed " + std::to_string(kMaxDoubleOuter) + " outer terms");
  TruncationPlan p;
  p.outer_limit = *n;
  p.inner_rule = is_star(kind) ? "k2 <= k1 <= N" : "k2 < k1 <= N";
  p.tail_ratio = std::exp(lx);
  p.tail_bound = std::exp(f(*n)) * kBoundSlack;
  p.feasible = true;
  return p;
}

TruncationPlan plan_mt(std::span<const CVal> s_front, const CVal& s_last, const QBase& base,
                       const PrecisionCtx& ctx) {
  const std::size_t r = s_front.size();
  if (r < 1 || r > 4) return infeasible("Mordell-Tornheim depth must be 1..4, got " + std::to_string(r));
  const LogQ g = log_q_of(base);
  const long double c = re_of(s_last);
  long double lk = log_amp(c, g);
  long double l_rho = -std::numeric_limits<long double>::infinity();
  for (const CVal& s : s_front) {
    const long double si = re_of(s);
    if (!(si + c > 2)) {
      return infeasible("series diverges: need Re(s_i + s_last) > 2 for every i");
    }
    lk += log_amp(si, g);
    l_rho = std::max(l_rho, (2 - si - c) * g.lq);
  }
  const long double rho = std::exp(l_rho);
  const long double rr = static_cast<long double>(r);
  // The ratio bound gamma = rho (L+1)/(L+2-r) must be below 1.
  std::uint64_t lo = r;
  if (r >= 2) {
    const long double need = (rr - 2 + rho) / -std::expm1(l_rho);
    if (need >= static_cast<long double>(kMaxConvolutionLength)) {
      return infeasible("truncation would exceed " + std::to_string(kMaxConvolutionLength) + " in the total index");
    }
    lo = std::max<std::uint64_t>(lo, static_cast<std::uint64_t>(std::floor(need)) + 1);
  }
  auto f = [&](std::uint64_t n) {
    const long double ln = static_cast<long double>(n);
    const long double lgam = l_rho + std::log((ln + 1) / (ln + 2 - rr));
    if (!(lgam < 0)) return std::numeric_limits<long double>::infinity();
    const long double lbin = std::lgamma(ln + 1) - std::lgamma(rr) - std::lgamma(ln - rr + 2);
    return lk + lbin + (ln + 1) * l_rho - log1m_exp(lgam);
  };
  const long double target = std::log(ctx.abs_tol() / 2);
  const auto n = smallest_n(f, target, lo, kMaxConvolutionLength);
  if (!n) return infeasible("truncation would exceed " + std::to_string(kMaxConvolutionLength) + " in the total index");
  TruncationPlan p;
  p.outer_limit = *n;
  p.inner_rule = "m_1 + ... + m_r <= L";
  p.tail_ratio = rho;
  p.tail_bound = std::exp(f(*n)) * kBoundSlack;
  p.feasible = true;
  return p;
}

// ---------------------------------------------------------------------------
// Evaluators

ValueWithError weighted_zeta_q(const CVal& s, int q_weight, int n_power, const QBase& base,
                               const PrecisionCtx& ctx) {
  const TruncationPlan p = plan_single(s, q_weight, n_power, base, ctx);
  if (!p.feasible) return failure(p, ctx);
  const Bits bits = ctx.work_bits();
  const QBase qb = base.at(bits);
  try {
    const TermTable tt = power_terms(s, q_weight, n_power, p.outer_limit, qb, bits);
    CVal sum(0L, bits);
    long double abs_sum = 0.0L;
    for (std::size_t i = tt.t.size(); i-- > 0;) {  // smallest terms first
      sum += tt.t[i];
      abs_sum += tt.mag[i];
    }
    const long double n = static_cast<long double>(p.outer_limit);
    const long double rounding = ctx.work_eps() * (tt.weight + n + 2) * abs_sum;
    return finish(sum, p.tail_bound, rounding, p.outer_limit, ctx);
  } catch (const DomainError& e) {
    return ValueWithError::failure(Status::domain_error, e.what(), ctx.mantissa_bits());
  }
}

ValueWithError zeta_q(const CVal& s, const QBase& base, const PrecisionCtx& ctx) {
  return weighted_zeta_q(s, 1, 0, base, ctx);
}

namespace {

ValueWithError double_sum(SeriesKind kind, const CVal& s1, const CVal& s2, const QBase& base,
                          const PrecisionCtx& ctx) {
  const TruncationPlan p = plan_double(kind, s1, s2, base, ctx);
  if (!p.feasible) return failure(p, ctx);
  const Bits bits = ctx.work_bits();
  const QBase qb = base.at(bits);
  const std::uint64_t n = p.outer_limit;
  const TermTable a = power_terms(s1, 1, 0, n, qb, bits);
  const TermTable b = power_terms(s2, is_circ(kind) ? 0 : 1, 0, n, qb, bits);
  const std::size_t shift = is_star(kind) ? 0 : 1;

  // suffix[k] = sum_{j >= k} a[j] (0-based), built backwards.
  CVal suffix(0L, bits);
  long double suffix_abs = 0.0L;
  CVal sum(0L, bits);
  long double abs_sum = 0.0L;
  for (std::size_t k2 = n; k2-- > 0;) {
    const std::size_t k1 = k2 + shift;
    if (k1 < n) {
      suffix += a.t[k1];
      suffix_abs += a.mag[k1];
    }
    if (k1 >= n) continue;
    sum += b.t[k2] * suffix;
    abs_sum += b.mag[k2] * suffix_abs;
  }
  const long double nn = static_cast<long double>(n);
  const long double rounding = ctx.work_eps() * (a.weight + b.weight + 2 * nn + 4) * abs_sum;
  const std::uint64_t lattice = shift ? n * (n - 1) / 2 : n * (n + 1) / 2;
  return finish(sum, p.tail_bound, rounding, lattice, ctx);
}

}  // namespace

ValueWithError zeta2_q(const CVal& s1, const CVal& s2, const QBase& base, const PrecisionCtx& ctx) {
  return double_sum(SeriesKind::double_, s1, s2, base, ctx);
}

ValueWithError zeta2_star_q(const CVal& s1, const CVal& s2, const QBase& base, const PrecisionCtx& ctx) {
  return double_sum(SeriesKind::double_star, s1, s2, base, ctx);
}

ValueWithError circ_q(const CVal& s1, const CVal& s2, const QBase& base, const PrecisionCtx& ctx) {
  return double_sum(SeriesKind::circ, s1, s2, base, ctx);
}

ValueWithError circ_star_q(const CVal& s1, const CVal& s2, const QBase& base, const PrecisionCtx& ctx) {
  return double_sum(SeriesKind::circ_star, s1, s2, base, ctx);
}

ValueWithError mt_q(std::span<const CVal> s_front, const CVal& s_last, const QBase& base,
                    const PrecisionCtx& ctx) {
  const TruncationPlan p = plan_mt(s_front, s_last, base, ctx);
  if (!p.feasible) return failure(p, ctx);
  const Bits bits = ctx.work_bits();
  const QBase qb = base.at(bits);
  const std::size_t len = p.outer_limit;
  const std::size_t r = s_front.size();

  // g[M-1] = sum over compositions of M into the first i parts.
  TermTable first = power_terms(s_front[0], 1, 0, len, qb, bits);
  std::vector<CVal> g = std::move(first.t);
  std::vector<long double> g_abs = std::move(first.mag);
  long double weight = first.weight;
  for (std::size_t i = 1; i < r; ++i) {
    const TermTable f = power_terms(s_front[i], 1, 0, len, qb, bits);
    weight += f.weight + static_cast<long double>(len) + 2;
    std::vector<CVal> next(len, CVal(0L, bits));
    std::vector<long double> next_abs(len, 0.0L);
    for (std::size_t total = i + 1; total <= len; ++total) {
      CVal acc(0L, bits);
      long double acc_abs = 0.0L;
      for (std::size_t m = 1; m + i <= total; ++m) {
        const std::size_t rest = total - m;
        if (g_abs[rest - 1] == 0.0L && g[rest - 1].is_zero()) continue;
        acc += g[rest - 1] * f.t[m - 1];
        acc_abs += g_abs[rest - 1] * f.mag[m - 1];
      }
      next[total - 1] = std::move(acc);
      next_abs[total - 1] = acc_abs;
    }
    g = std::move(next);
    g_abs = std::move(next_abs);
  }
  const TermTable h = power_terms(s_last, 1, 0, len, qb, bits);
  weight += h.weight + static_cast<long double>(len) + 4;
  CVal sum(0L, bits);
  long double abs_sum = 0.0L;
  for (std::size_t total = len; total-- > 0;) {
    if (total + 1 < r) continue;
    sum += g[total] * h.t[total];
    abs_sum += g_abs[total] * h.mag[total];
  }
  const long double rounding = ctx.work_eps() * weight * abs_sum;
  return finish(sum, p.tail_bound, rounding, binom_u64(len, r), ctx);
}

ValueWithError zeta2_q_reindexed(const CVal& s1, const CVal& s2, const QBase& base, const PrecisionCtx& ctx) {
  const long double a = re_of(s1), b = re_of(s2);
  if (!(a > 1) || !(a + b > 2)) {
    return ValueWithError::failure(Status::domain_error,
                                   "series diverges: need Re(s1) > 1 and Re(s1) + Re(s2) > 2", ctx.mantissa_bits());
  }
  const LogQ g = log_q_of(base);
  const long double lab = log_amp(a, g) + log_amp(b, g);
  const long double l1 = (1 - a) * g.lq;
  const long double lx = l1 + (1 - b) * g.lq;
  // Terms outside the square [1,N]^2 are bounded by
  // A B S(rho1) S(x) (rho1^N + x^N), S(y) = y/(1-y).
  auto f = [&](std::uint64_t n) {
    const long double nn = static_cast<long double>(n);
    const long double lead = std::max(nn * l1, nn * lx);
    return lab + l1 - log1m_exp(l1) + lx - log1m_exp(lx) + lead + std::log(2.0L);
  };
  constexpr std::uint64_t kMaxSide = 4'000;
  const auto n_opt = smallest_n(f, std::log(ctx.abs_tol() / 2), 1, kMaxSide);
  if (!n_opt) {
    return ValueWithError::failure(Status::domain_error, "square truncation would exceed " + std::to_string(kMaxSide),
                                   ctx.mantissa_bits());
  }
  const std::size_t n = *n_opt;
  const Bits bits = ctx.work_bits();
  const QBase qb = base.at(bits);
  const TermTable outer = power_terms(s1, 1, 0, 2 * n, qb, bits);
  const TermTable inner = power_terms(s2, 1, 0, n, qb, bits);
  CVal sum(0L, bits);
  long double abs_sum = 0.0L;
  for (std::size_t k2 = n; k2 >= 1; --k2) {
    CVal row(0L, bits);
    long double row_abs = 0.0L;
    for (std::size_t k1 = n; k1 >= 1; --k1) {
      row += outer.t[k1 + k2 - 1];
      row_abs += outer.mag[k1 + k2 - 1];
    }
    sum += inner.t[k2 - 1] * row;
    abs_sum += inner.mag[k2 - 1] * row_abs;
  }
  const long double rounding =
      ctx.work_eps() * (outer.weight + inner.weight + 2 * static_cast<long double>(n) + 4) * abs_sum;
  return finish(sum, std::exp(f(n)) * kBoundSlack, rounding, static_cast<std::uint64_t>(n) * n, ctx);
}

// ---------------------------------------------------------------------------
// Dispatch

namespace {

void check_arity(SeriesKind kind, std::size_t n) {
  const bool ok = kind == SeriesKind::single ? n == 1
                  : kind == SeriesKind::mordell_tornheim ? (n >= 2 && n <= 5)
                                                         : n == 2;
  if (!ok) {
    throw std::invalid_argument("wrong number of arguments (" + std::to_string(n) + ") for series kind " +
                                std::string(to_string(kind)));
  }
}

}  // namespace

ValueWithError evaluate(SeriesKind kind, std::span<const CVal> args, const QBase& base, const PrecisionCtx& ctx) {
  check_arity(kind, args.size());
  switch (kind) {
    case SeriesKind::single: return zeta_q(args[0], base, ctx);
    case SeriesKind::double_: return zeta2_q(args[0], args[1], base, ctx);
    case SeriesKind::double_star: return zeta2_star_q(args[0], args[1], base, ctx);
    case SeriesKind::circ: return circ_q(args[0], args[1], base, ctx);
    case SeriesKind::circ_star: return circ_star_q(args[0], args[1], base, ctx);
    case SeriesKind::mordell_tornheim: return mt_q(args.first(args.size() - 1), args.back(), base, ctx);
  }
  throw std::invalid_argument("unknown series kind");
}

TruncationPlan plan(SeriesKind kind, std::span<const CVal> args, const QBase& base, const PrecisionCtx& ctx) {
  check_arity(kind, args.size());
  switch (kind) {
    case SeriesKind::single: return plan_single(args[0], 1, 0, base, ctx);
    case SeriesKind::mordell_tornheim: return plan_mt(args.first(args.size() - 1), args.back(), base, ctx);
    default: return plan_double(kind, args[0], args[1], base, ctx);
  }
}

// ---------------------------------------------------------------------------
// Naive oracle

namespace {

struct NaiveTables {
  std::vector<Real> qk;      // q^k, index k (entry 0 unused)
  std::vector<Real> log_br;  // log [k]
};

NaiveTables naive_tables(const QBase& base, std::size_t upto, Bits bits) {
  NaiveTables t;
  const Real q(base.q(), bits);
  const Real qm1 = q - 1L;
  t.qk.emplace_back(1L, bits);
  t.log_br.emplace_back(0L, bits);
  for (std::size_t k = 1; k <= upto; ++k) {
    Real qk = pow(q, static_cast<long>(k));
    t.log_br.push_back(log((qk - 1L) / qm1));
    t.qk.push_back(std::move(qk));
  }
  return t;
}

// entry k: [k]^-s, times q^k when weighted (entry 0 unused)
std::vector<CVal> power_table(const NaiveTables& t, const CVal& s, std::size_t upto, bool weighted) {
  std::vector<CVal> out;
  out.reserve(upto + 1);
  out.emplace_back(0L, s.bits());
  for (std::size_t k = 1; k <= upto; ++k) {
    CVal v = exp_times(-s, t.log_br[k]);
    if (weighted) v *= t.qk[k];
    out.push_back(std::move(v));
  }
  return out;
}

void mt_recurse(const std::vector<std::vector<CVal>>& front, const std::vector<CVal>& last, std::size_t depth,
                std::size_t total, const CVal& prod, std::size_t cutoff, CVal& acc) {
  if (depth == front.size()) {
    acc += prod * last[total];
    return;
  }
  for (std::size_t m = 1; m <= cutoff; ++m) {
    mt_recurse(front, last, depth + 1, total + m, prod * front[depth][m], cutoff, acc);
  }
}

}  // namespace

CVal naive_oracle(SeriesKind kind, std::span<const CVal> args, const QBase& base, std::uint64_t cutoff, Bits bits) {
  check_arity(kind, args.size());
  std::vector<CVal> s;
  for (const CVal& a : args) s.push_back(a.rounded(bits));
  const std::size_t depth = kind == SeriesKind::mordell_tornheim ? s.size() - 1 : 1;
  const NaiveTables t = naive_tables(base, depth * cutoff, bits);
  CVal acc(0L, bits);
  switch (kind) {
    case SeriesKind::single: {
      const std::vector<CVal> a = power_table(t, s[0], cutoff, true);
      for (std::size_t n = 1; n <= cutoff; ++n) acc += a[n];
      break;
    }
    case SeriesKind::mordell_tornheim: {
      std::vector<std::vector<CVal>> front;
      for (std::size_t i = 0; i < depth; ++i) front.push_back(power_table(t, s[i], cutoff, true));
      const std::vector<CVal> last = power_table(t, s.back(), depth * cutoff, true);
      mt_recurse(front, last, 0, 0, CVal(1L, bits), cutoff, acc);
      break;
    }
    default: {
      const bool star = is_star(kind);
      const std::vector<CVal> a = power_table(t, s[0], cutoff, true);
      const std::vector<CVal> b = power_table(t, s[1], cutoff, !is_circ(kind));
      for (std::size_t k1 = 1; k1 <= cutoff; ++k1) {
        for (std::size_t k2 = 1; star ? k2 <= k1 : k2 < k1; ++k2) acc += a[k1] * b[k2];
      }
    }
  }
  return acc;
}

}  // namespace qzeta
