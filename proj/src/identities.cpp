#include "qzeta/identities.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>

#include "qzeta/series.hpp"

namespace qzeta {

namespace {

constexpr std::array<std::pair<IdentityId, std::string_view>, 19> kTags{{
    {IdentityId::nielsen_q, "nielsen_q"},
    {IdentityId::nielsen_q_star, "nielsen_q_star"},
    {IdentityId::star_reduction, "star_reduction"},
    {IdentityId::circ_star_reduction, "circ_star_reduction"},
    {IdentityId::diag_reduction, "diag_reduction"},
    {IdentityId::t2_31, "t2_31"},
    {IdentityId::t2_41, "t2_41"},
    {IdentityId::t2_51, "t2_51"},
    {IdentityId::t2_weight6, "t2_weight6"},
    {IdentityId::t3_general, "t3_general"},
    {IdentityId::t3_odd, "t3_odd"},
    {IdentityId::t3_even, "t3_even"},
    {IdentityId::p5_general, "p5_general"},
    {IdentityId::p5_odd, "p5_odd"},
    {IdentityId::p5_even, "p5_even"},
    {IdentityId::t4_mt, "t4_mt"},
    {IdentityId::pf_basic, "pf_basic"},
    {IdentityId::pf_general, "pf_general"},
    {IdentityId::reindex, "reindex"},
}};

}  // namespace

std::string_view to_string(IdentityId id) {
  for (const auto& [k, name] : kTags) {
    if (k == id) return name;
  }
  return "unknown";
}

IdentityId parse_identity(std::string_view tag) {
  for (const auto& [k, name] : kTags) {
    if (name == tag) return k;
  }
  throw std::invalid_argument("unknown identity '" + std::string(tag) + "'");
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::as_stated: return "as_stated";
    case Variant::derived_consistent: return "derived_consistent";
    case Variant::corrected: return "corrected";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::as_stated, Variant::derived_consistent, Variant::corrected}) {
    if (to_string(v) == name) return v;
  }
  throw std::invalid_argument("unknown variant '" + std::string(name) + "'");
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Catalog

const std::vector<CatalogEntry>& catalog() {
  using V = Variant;
  static const std::vector<CatalogEntry> entries = [] {
    const ParamSpec s2{"s", 2, 6, "first weight"};
    const ParamSpec sp2{"sp", 2, 6, "second weight"};
    const ParamSpec s_ge2{"s", 2, 5, "first weight"};
    const ParamSpec sp_ge1{"sp", 1, 4, "second weight"};
    const ParamSpec s_odd{"s", 3, 9, "weight s (odd)"};
    const ParamSpec s_even{"s", 4, 9, "weight s (even)"};
    const ParamSpec s_gen{"s", 3, 9, "weight s >= 3"};
    const ParamSpec r_pair{"r", 2, 5, "first part r >= 2; r' = s + 1 - r"};
    const ParamSpec t_pair{"r", 2, 5, "first part t >= 2; t' = s + 1 - t"};
    const std::vector<V> stated{V::as_stated};
    const std::vector<V> with_fix{V::as_stated, V::corrected};
    const std::vector<V> all{V::as_stated, V::derived_consistent, V::corrected};
    return std::vector<CatalogEntry>{
        {IdentityId::nielsen_q, "q-Nielsen reflexion formula for q > 1, first line",
         "zeta(s) zeta(s') = zeta(s,s') + zeta(s',s) + zeta(s+s') + (q-1) zeta(s+s'-1)", {s2, sp2}, {}, stated},
        {IdentityId::nielsen_q_star, "q-Nielsen reflexion formula for q > 1, star line",
         "zeta(s) zeta(s') = zeta*(s,s') + zeta*(s',s) - zeta(s+s') - (q-1) zeta(s+s'-1)", {s2, sp2}, {}, stated},
        {IdentityId::star_reduction, "star sum split into strict sum plus diagonal",
         "zeta*(s,s') = zeta(s,s') + zeta(s+s') + (q-1) zeta(s+s'-1)", {s_ge2, sp_ge1}, {}, stated},
        {IdentityId::circ_star_reduction, "circ star sum split into circ sum plus diagonal",
         "circ*(s,s') = circ(s,s') + zeta(s+s')", {s_ge2, sp_ge1}, {}, stated},
        {IdentityId::diag_reduction, "q^{2n} reduction used for the weight-four circ identity",
         "sum_n q^{2n}/[n]^s = zeta(s) + (q-1) zeta(s-1)", {{"s", 3, 6, "weight s >= 3"}}, {}, stated},
        {IdentityId::t2_31, "circ(3,1) evaluations",
         "circ(3,1) = zeta(4) - zeta(2,2) + (q-1) zeta(3) = zeta(2)^2 - 3 zeta(2,2)", {}, {}, with_fix},
        {IdentityId::t2_41, "circ(4,1) evaluations",
         "circ(4,1) = zeta(5) - zeta(2,3) - zeta(3,2) + (q-1) zeta(4) = zeta(2) zeta(3) - 2 zeta(2,3) - 2 zeta(3,2)",
         {}, {}, with_fix},
        {IdentityId::t2_51, "circ(5,1) evaluations",
         "circ(5,1) = zeta(6) - zeta(3,3) - zeta(4,2) - zeta(2,4) + (q-1) zeta(5)"
         " = zeta(3)^2 - 3 zeta(3,3) - zeta(4,2) - zeta(2,4)"
         " = zeta(2) zeta(4) - zeta(3,3) - 2 zeta(4,2) - 2 zeta(2,4)",
         {}, {}, with_fix},
        {IdentityId::t2_weight6, "weight-six relation between products and double sums",
         "zeta(3)^2 - 2 zeta(3,3) = zeta(2) zeta(4) - zeta(2,4) - zeta(4,2)", {}, {}, stated},
        {IdentityId::t3_general, "circ(s,1) for general s",
         "circ(s,1) = zeta(s+1) - sum_{i=2}^{s-1} zeta(s+1-i,i) + (q-1) zeta(s)", {s_gen}, {}, with_fix},
        {IdentityId::t3_odd, "circ(s,1) for odd s via a product zeta(r) zeta(r')",
         "circ(s,1) = zeta(r) zeta(r') - 2 zeta(r,r') - 2 zeta(r',r) - sum_{i=2}^{s-1} zeta(s+1-i,i)", {s_odd, r_pair},
         {}, all},
        {IdentityId::t3_even, "circ(s,1) for even s via a product zeta(t) zeta(t')",
         "circ(s,1) = zeta(t) zeta(t') - 2 zeta(t,t') - 2 zeta(t',t) - sum_{i=2, i!=t,t'}^{s-1} zeta(s+1-i,i)",
         {s_even, t_pair}, {}, all},
        {IdentityId::p5_general, "circ*(s,1) for general s",
         "circ*(s,1) = s zeta(s+1) - sum_{i=2}^{s-1} zeta*(s+1-i,i) + (s-1)(q-1) zeta(s)", {s_gen}, {}, with_fix},
        {IdentityId::p5_odd, "circ*(s,1) for odd s via a product zeta(r) zeta(r')",
         "circ*(s,1) = zeta(r) zeta(r') - 2 zeta*(r,r') - 2 zeta*(r',r) + (s+1) zeta(s+1) + (q-1) s zeta(s)"
         " - sum_{i=2}^{s-1} zeta*(s+1-i,i)",
         {s_odd, r_pair}, {}, all},
        {IdentityId::p5_even, "circ*(s,1) for even s via a product zeta(t) zeta(t')",
         "circ*(s,1) = zeta(t) zeta(t') - 2 zeta*(t,t') - 2 zeta*(t',t) + (s+1) zeta(s+1) + (q-1) s zeta(s)"
         " - sum_{i=2, i!=t,t'}^{s-1} zeta(s+1-i,i)",
         {s_even, t_pair}, {}, all},
        {IdentityId::t4_mt, "double sum through Mordell-Tornheim sums",
         "zeta(s,r) = zeta(s) (zeta(r) + (q-1) zeta(r-1)) - sum_{j=0}^{s-1} MT(r, j+1; s-j)",
         {{"s", 2, 3, "s >= 2"}, {"r", 3, 4, "r >= 3"}}, {}, with_fix},
        {IdentityId::pf_basic, "partial fraction in u and v",
         "1/((1-u)(1-uv)^s) = 1/((1-u)(1-v)^s) - sum_{i=0}^{s-1} v/((1-v)^{i+1} (1-uv)^{s-i})",
         {{"s", 1, 8, "s >= 1"}}, {"u", "v"}, stated},
        {IdentityId::pf_general, "partial fraction with (1-u)^r",
         "1/((1-u)^r (1-uv)^s) = 1/((1-u)^r (1-v)^s) - sum_{i=0}^{s-1} v (1-u)^{1-r}/((1-v)^{i+1} (1-uv)^{s-i})",
         {{"s", 1, 8, "s >= 1"}, {"r", 1, 8, "r >= 1"}}, {"u", "v"}, stated},
        {IdentityId::reindex, "double sum over k1 > k2 against the shifted square sum",
         "zeta(s1,s2) = sum_{k1,k2>0} q^{k1+k2} q^{k2} / ([k1+k2]^s1 [k2]^s2)",
         {{"s1", 2, 4, "s1 >= 2"}, {"s2", 1, 4, "s2 >= 1"}}, {}, stated},
    };
  }();
  return entries;
}

const CatalogEntry& catalog_entry(IdentityId id) {
  for (const CatalogEntry& e : catalog()) {
    if (e.id == id) return e;
  }
  throw std::invalid_argument("identity missing from catalog");
}

Verdict classify(long double residual, long double tolerance) {
  if (!std::isfinite(static_cast<double>(tolerance)) || std::isnan(static_cast<double>(residual))) {
    return Verdict::inconclusive;
  }
  if (residual <= tolerance) return Verdict::pass;
  if (residual > 10.0L * tolerance) return Verdict::fail;
  return Verdict::inconclusive;
}

// ---------------------------------------------------------------------------
// Evaluation with memoization

namespace {

class Evaluator {
 public:
  Evaluator(const QBase& base, const PrecisionCtx& ctx)
      : base_(base.at(ctx.work_bits())), ctx_(ctx), qm1_(base_.q_minus_1()) {}

  const Real& qm1() const { return qm1_; }
  ValueWithError zero() const { return ValueWithError::exact(CVal(0L, ctx_.mantissa_bits())); }

  const ValueWithError& z(long s) {
    return memo("z", {s}, [&] { return zeta_q(arg(s), base_, ctx_); });
  }
  const ValueWithError& z2(long a, long b) {
    return memo("z2", {a, b}, [&] { return zeta2_q(arg(a), arg(b), base_, ctx_); });
  }
  const ValueWithError& z2s(long a, long b) {
    return memo("z2s", {a, b}, [&] { return zeta2_star_q(arg(a), arg(b), base_, ctx_); });
  }
  const ValueWithError& circ(long a, long b) {
    return memo("circ", {a, b}, [&] { return circ_q(arg(a), arg(b), base_, ctx_); });
  }
  const ValueWithError& circs(long a, long b) {
    return memo("circs", {a, b}, [&] { return circ_star_q(arg(a), arg(b), base_, ctx_); });
  }
  const ValueWithError& diag(long s) {
    return memo("diag", {s}, [&] { return weighted_zeta_q(arg(s), 2, 0, base_, ctx_); });
  }
  // sum_n n q^n / [n]^s
  const ValueWithError& w(long s) {
    return memo("w", {s}, [&] { return weighted_zeta_q(arg(s), 1, 1, base_, ctx_); });
  }
  const ValueWithError& mt(long a, long b, long c) {
    return memo("mt", {a, b, c}, [&] {
      const std::array<CVal, 2> front{arg(a), arg(b)};
      return mt_q(front, arg(c), base_, ctx_);
    });
  }
  const ValueWithError& z2_square(long a, long b) {
    return memo("z2sq", {a, b}, [&] { return zeta2_q_reindexed(arg(a), arg(b), base_, ctx_); });
  }

 private:
  CVal arg(long v) const { return CVal(v, ctx_.work_bits()); }

  const ValueWithError& memo(const std::string& name, std::vector<long> key,
                             const std::function<ValueWithError()>& compute) {
    auto k = std::make_pair(name, std::move(key));
    auto it = cache_.find(k);
    if (it == cache_.end()) it = cache_.emplace(std::move(k), compute()).first;
    return it->second;
  }

  QBase base_;
  const PrecisionCtx& ctx_;
  Real qm1_;
  std::map<std::pair<std::string, std::vector<long>>, ValueWithError> cache_;
};

struct Forms {
  ValueWithError lhs;
  std::vector<std::pair<std::string, ValueWithError>> rhs;
};

long param(const IdentityInstance& in, const std::string& name) {
  auto it = in.int_params.find(name);
  if (it == in.int_params.end()) {
    throw std::invalid_argument(std::string(to_string(in.id)) + " needs integer parameter '" + name + "'");
  }
  return it->second;
}

void require(bool ok, IdentityId id, const std::string& what) {
  if (!ok) throw std::invalid_argument(std::string(to_string(id)) + ": " + what);
}

// sum_{i=2}^{s-1} zeta(s+1-i, i) (or zeta*), skipping i in `skip`.
ValueWithError stuffle_sum(Evaluator& ev, long s, bool star, const std::set<long>& skip = {}) {
  ValueWithError acc = ev.zero();
  for (long i = 2; i <= s - 1; ++i) {
    if (skip.count(i)) continue;
    acc = acc + (star ? ev.z2s(s + 1 - i, i) : ev.z2(s + 1 - i, i));
  }
  return acc;
}

// (q-1) W(s), the boundary term missing from the circ formulas.
ValueWithError circ_defect(Evaluator& ev, long s) { return ev.w(s) * ev.qm1(); }

void apply_correction(Forms& f, Evaluator& ev, long s) {
  for (auto& [label, rhs] : f.rhs) {
    rhs = rhs - circ_defect(ev, s);
    label += " - (q-1) sum n q^n/[n]^s";
  }
}

// Right-hand side of the parity formulas. `pair_excluded` removes i = r, r'
// from the stuffle sum.
ValueWithError t3_parity_rhs(Evaluator& ev, long s, long r, long rp, Variant v) {
  if (v == Variant::as_stated) {
    return ev.z(r) * ev.z(rp) - ev.z2(r, rp) * 2L - ev.z2(rp, r) * 2L - stuffle_sum(ev, s, false);
  }
  if (r == rp) return ev.z(r) * ev.z(r) - ev.z2(r, r) * 3L - stuffle_sum(ev, s, false, {r});
  return ev.z(r) * ev.z(rp) - ev.z2(r, rp) * 2L - ev.z2(rp, r) * 2L - stuffle_sum(ev, s, false, {r, rp});
}

ValueWithError t3_even_rhs(Evaluator& ev, long s, long t, long tp) {
  return ev.z(t) * ev.z(tp) - ev.z2(t, tp) * 2L - ev.z2(tp, t) * 2L - stuffle_sum(ev, s, false, {t, tp});
}

ValueWithError p5_derived_rhs(Evaluator& ev, long s, long r, long rp) {
  return ev.z2s(r, rp) + ev.z2s(rp, r) - ev.z(r) * ev.z(rp) + ev.z(s + 1) * (s - 1) +
         ev.z(s) * ev.qm1() * (s - 2) - stuffle_sum(ev, s, true);
}

ValueWithError p5_stated_head(Evaluator& ev, long s, long r, long rp) {
  return ev.z(r) * ev.z(rp) - ev.z2s(r, rp) * 2L - ev.z2s(rp, r) * 2L + ev.z(s + 1) * (s + 1) +
         ev.z(s) * ev.qm1() * s;
}

long pair_partner(const IdentityInstance& in, long s, long r) {
  const long rp = s + 1 - r;
  if (auto it = in.int_params.find("rp"); it != in.int_params.end()) {
    require(it->second == rp, in.id, "r + rp must equal s + 1");
  }
  return rp;
}

ValueWithError exact_value(const mpq_class& v, Bits bits) {
  Real r(0L, bits);
  mpfr_set_q(r.raw(), v.get_mpq_t(), MPFR_RNDN);
  ValueWithError out = ValueWithError::exact(CVal(r));
  out.abs_error_bound = std::ldexp(std::fabs(r.to_long_double()), -static_cast<int>(bits));
  return out;
}

Forms build_forms(const IdentityInstance& in, Evaluator& ev) {
  const IdentityId id = in.id;
  const Variant v = in.variant;
  Forms f;
  switch (id) {
    case IdentityId::nielsen_q:
    case IdentityId::nielsen_q_star: {
      const long s = param(in, "s"), sp = param(in, "sp");
      require(s >= 2 && sp >= 2, id, "needs s, s' >= 2");
      f.lhs = ev.z(s) * ev.z(sp);
      const ValueWithError tail = ev.z(s + sp) + ev.z(s + sp - 1) * ev.qm1();
      if (id == IdentityId::nielsen_q) {
        f.rhs.emplace_back("zeta(s,s') + zeta(s',s) + zeta(s+s') + (q-1) zeta(s+s'-1)",
                           ev.z2(s, sp) + ev.z2(sp, s) + tail);
      } else {
        f.rhs.emplace_back("zeta*(s,s') + zeta*(s',s) - zeta(s+s') - (q-1) zeta(s+s'-1)",
                           ev.z2s(s, sp) + ev.z2s(sp, s) - tail);
      }
      break;
    }
    case IdentityId::star_reduction: {
      const long s = param(in, "s"), sp = param(in, "sp");
      require(s >= 2 && sp >= 1, id, "needs s >= 2, s' >= 1");
      f.lhs = ev.z2s(s, sp);
      f.rhs.emplace_back("zeta(s,s') + zeta(s+s') + (q-1) zeta(s+s'-1)",
                         ev.z2(s, sp) + ev.z(s + sp) + ev.z(s + sp - 1) * ev.qm1());
      break;
    }
    case IdentityId::circ_star_reduction: {
      const long s = param(in, "s"), sp = param(in, "sp");
      require(s >= 2 && sp >= 1, id, "needs s >= 2, s' >= 1");
      f.lhs = ev.circs(s, sp);
      f.rhs.emplace_back("circ(s,s') + zeta(s+s')", ev.circ(s, sp) + ev.z(s + sp));
      break;
    }
    case IdentityId::diag_reduction: {
      const long s = param(in, "s");
      require(s >= 3, id, "needs s >= 3");
      f.lhs = ev.diag(s);
      f.rhs.emplace_back("zeta(s) + (q-1) zeta(s-1)", ev.z(s) + ev.z(s - 1) * ev.qm1());
      break;
    }
    case IdentityId::t2_31:
      f.lhs = ev.circ(3, 1);
      f.rhs.emplace_back("zeta(4) - zeta(2,2) + (q-1) zeta(3)", ev.z(4) - ev.z2(2, 2) + ev.z(3) * ev.qm1());
      f.rhs.emplace_back("zeta(2)^2 - 3 zeta(2,2)", ev.z(2) * ev.z(2) - ev.z2(2, 2) * 3L);
      if (v == Variant::corrected) apply_correction(f, ev, 3);
      break;
    case IdentityId::t2_41:
      f.lhs = ev.circ(4, 1);
      f.rhs.emplace_back("zeta(5) - zeta(2,3) - zeta(3,2) + (q-1) zeta(4)",
                         ev.z(5) - ev.z2(2, 3) - ev.z2(3, 2) + ev.z(4) * ev.qm1());
      f.rhs.emplace_back("zeta(2) zeta(3) - 2 zeta(2,3) - 2 zeta(3,2)",
                         ev.z(2) * ev.z(3) - ev.z2(2, 3) * 2L - ev.z2(3, 2) * 2L);
      if (v == Variant::corrected) apply_correction(f, ev, 4);
      break;
    case IdentityId::t2_51:
      f.lhs = ev.circ(5, 1);
      f.rhs.emplace_back("zeta(6) - zeta(3,3) - zeta(4,2) - zeta(2,4) + (q-1) zeta(5)",
                         ev.z(6) - ev.z2(3, 3) - ev.z2(4, 2) - ev.z2(2, 4) + ev.z(5) * ev.qm1());
      f.rhs.emplace_back("zeta(3)^2 - 3 zeta(3,3) - zeta(4,2) - zeta(2,4)",
                         ev.z(3) * ev.z(3) - ev.z2(3, 3) * 3L - ev.z2(4, 2) - ev.z2(2, 4));
      f.rhs.emplace_back("zeta(2) zeta(4) - zeta(3,3) - 2 zeta(4,2) - 2 zeta(2,4)",
                         ev.z(2) * ev.z(4) - ev.z2(3, 3) - ev.z2(4, 2) * 2L - ev.z2(2, 4) * 2L);
      if (v == Variant::corrected) apply_correction(f, ev, 5);
      break;
    case IdentityId::t2_weight6:
      f.lhs = ev.z(3) * ev.z(3) - ev.z2(3, 3) * 2L;
      f.rhs.emplace_back("zeta(2) zeta(4) - zeta(2,4) - zeta(4,2)", ev.z(2) * ev.z(4) - ev.z2(2, 4) - ev.z2(4, 2));
      break;
    case IdentityId::t3_general: {
      const long s = param(in, "s");
      require(s >= 3, id, "needs s >= 3");
      f.lhs = ev.circ(s, 1);
      f.rhs.emplace_back("zeta(s+1) - sum zeta(s+1-i,i) + (q-1) zeta(s)",
                         ev.z(s + 1) - stuffle_sum(ev, s, false) + ev.z(s) * ev.qm1());
      if (v == Variant::corrected) apply_correction(f, ev, s);
      break;
    }
    case IdentityId::t3_odd:
    case IdentityId::t3_even: {
      const long s = param(in, "s"), r = param(in, "r");
      const bool odd = id == IdentityId::t3_odd;
      require(s >= 3 && (s % 2 == 1) == odd, id, odd ? "needs odd s >= 3" : "needs even s >= 4");
      const long rp = pair_partner(in, s, r);
      require(r >= 2 && rp >= 2, id, "needs r, r' >= 2");
      f.lhs = ev.circ(s, 1);
      const Variant base_v = v == Variant::as_stated ? Variant::as_stated : Variant::derived_consistent;
      ValueWithError rhs = odd ? t3_parity_rhs(ev, s, r, rp, base_v) : t3_even_rhs(ev, s, r, rp);
      f.rhs.emplace_back(odd ? "zeta(r) zeta(r') - 2 zeta(r,r') - 2 zeta(r',r) - sum zeta(s+1-i,i)"
                             : "zeta(t) zeta(t') - 2 zeta(t,t') - 2 zeta(t',t) - sum_{i!=t,t'} zeta(s+1-i,i)",
                         std::move(rhs));
      if (odd && v != Variant::as_stated) {
        f.rhs.back().first = r == rp ? "zeta(m)^2 - 3 zeta(m,m) - sum_{i!=m} zeta(s+1-i,i)"
                                     : "zeta(r) zeta(r') - 2 zeta(r,r') - 2 zeta(r',r) - sum_{i!=r,r'} zeta(s+1-i,i)";
      }
      if (v == Variant::corrected) apply_correction(f, ev, s);
      break;
    }
    case IdentityId::p5_general: {
      const long s = param(in, "s");
      require(s >= 3, id, "needs s >= 3");
      f.lhs = ev.circs(s, 1);
      f.rhs.emplace_back("s zeta(s+1) - sum zeta*(s+1-i,i) + (s-1)(q-1) zeta(s)",
                         ev.z(s + 1) * s - stuffle_sum(ev, s, true) + ev.z(s) * ev.qm1() * (s - 1));
      if (v == Variant::corrected) apply_correction(f, ev, s);
      break;
    }
    case IdentityId::p5_odd:
    case IdentityId::p5_even: {
      const long s = param(in, "s"), r = param(in, "r");
      const bool odd = id == IdentityId::p5_odd;
      require(s >= 3 && (s % 2 == 1) == odd, id, odd ? "needs odd s >= 3" : "needs even s >= 4");
      const long rp = pair_partner(in, s, r);
      require(r >= 2 && rp >= 2, id, "needs r, r' >= 2");
      f.lhs = ev.circs(s, 1);
      if (v == Variant::as_stated) {
        ValueWithError rhs = p5_stated_head(ev, s, r, rp) -
                             (odd ? stuffle_sum(ev, s, true) : stuffle_sum(ev, s, false, {r, rp}));
        f.rhs.emplace_back(odd ? "zeta(r) zeta(r') - 2 zeta*(r,r') - 2 zeta*(r',r) + (s+1) zeta(s+1) + (q-1) s zeta(s)"
                                 " - sum zeta*(s+1-i,i)"
                               : "zeta(t) zeta(t') - 2 zeta*(t,t') - 2 zeta*(t',t) + (s+1) zeta(s+1) + (q-1) s zeta(s)"
                                 " - sum_{i!=t,t'} zeta(s+1-i,i)",
                           std::move(rhs));
      } else {
        f.rhs.emplace_back("zeta*(r,r') + zeta*(r',r) - zeta(r) zeta(r') + (s-1) zeta(s+1) + (s-2)(q-1) zeta(s)"
                           " - sum zeta*(s+1-i,i)",
                           p5_derived_rhs(ev, s, r, rp));
        if (v == Variant::corrected) apply_correction(f, ev, s);
      }
      break;
    }
    case IdentityId::t4_mt: {
      const long s = param(in, "s"), r = param(in, "r");
      require(s >= 2 && r >= 3, id, "needs s >= 2 and r >= 3");
      f.lhs = ev.z2(s, r);
      const long first = v == Variant::corrected ? r - 1 : r;
      ValueWithError mts = ev.zero();
      for (long j = 0; j <= s - 1; ++j) mts = mts + ev.mt(first, j + 1, s - j);
      f.rhs.emplace_back(v == Variant::corrected ? "zeta(s) (zeta(r) + (q-1) zeta(r-1)) - sum MT(r-1, j+1; s-j)"
                                                 : "zeta(s) (zeta(r) + (q-1) zeta(r-1)) - sum MT(r, j+1; s-j)",
                         ev.z(s) * (ev.z(r) + ev.z(r - 1) * ev.qm1()) - mts);
      break;
    }
    case IdentityId::reindex: {
      const long a = param(in, "s1"), b = param(in, "s2");
      require(a >= 2 && b >= 1, id, "needs s1 >= 2, s2 >= 1");
      f.lhs = ev.z2(a, b);
      f.rhs.emplace_back("square sum q^{k1+k2} q^{k2} / ([k1+k2]^s1 [k2]^s2)", ev.z2_square(a, b));
      break;
    }
    case IdentityId::pf_basic:
    case IdentityId::pf_general: {
      const long s = param(in, "s");
      const long r = id == IdentityId::pf_basic ? 1 : param(in, "r");
      auto u = in.real_params.find("u");
      auto w = in.real_params.find("v");
      require(u != in.real_params.end() && w != in.real_params.end(), id, "needs real parameters u and v");
      require(s >= 1 && r >= 1, id, "needs s, r >= 1");
      const PartialFractionResult pf = partial_fraction_check(u->second, w->second, s, r);
      f.lhs = exact_value(pf.lhs_exact, in.ctx.mantissa_bits());
      f.rhs.emplace_back("partial-fraction right-hand side", exact_value(pf.rhs_exact, in.ctx.mantissa_bits()));
      break;
    }
  }
  return f;
}

int severity(Verdict v) { return v == Verdict::pass ? 0 : (v == Verdict::inconclusive ? 1 : 2); }

}  // namespace

VerificationReport verify(const IdentityInstance& instance) {
  const auto start = std::chrono::steady_clock::now();
  const CatalogEntry& entry = catalog_entry(instance.id);
  if (std::find(entry.variants.begin(), entry.variants.end(), instance.variant) == entry.variants.end()) {
    throw std::invalid_argument(std::string(to_string(instance.id)) + " has no variant " +
                                std::string(to_string(instance.variant)));
  }
  VerificationReport rep;
  rep.instance = instance;
  Evaluator ev(instance.base, instance.ctx);
  Forms f;
  try {
    f = build_forms(instance, ev);
  } catch (const DomainError& e) {
    rep.verdict = Verdict::inconclusive;
    rep.reason = e.what();
    rep.evaluation_error = true;
    rep.elapsed = std::chrono::steady_clock::now() - start;
    return rep;
  }
  rep.lhs = f.lhs;
  std::optional<std::size_t> worst;
  for (auto& [label, rhs] : f.rhs) {
    SubForm sf;
    sf.label = label;
    sf.rhs = rhs;
    if (!f.lhs.ok() || !rhs.ok()) {
      sf.verdict = Verdict::inconclusive;
      sf.residual = HUGE_VALL;
      sf.tolerance = HUGE_VALL;
      const std::string why = !f.lhs.ok() ? f.lhs.note : rhs.note;
      rep.evaluation_error = true;
      if (rep.reason.empty()) rep.reason = "evaluation failed: " + why;
    } else {
      sf.residual = abs(f.lhs.value - rhs.value).to_long_double();
      sf.tolerance = f.lhs.abs_error_bound + rhs.abs_error_bound;
      sf.verdict = classify(sf.residual, sf.tolerance);
    }
    rep.forms.push_back(std::move(sf));
    const SubForm& cur = rep.forms.back();
    const std::size_t idx = rep.forms.size() - 1;
    if (!worst) {
      worst = idx;
    } else {
      const SubForm& w = rep.forms[*worst];
      const long double rc = cur.tolerance > 0 ? cur.residual / cur.tolerance : cur.residual;
      const long double rw = w.tolerance > 0 ? w.residual / w.tolerance : w.residual;
      if (severity(cur.verdict) > severity(w.verdict) || (severity(cur.verdict) == severity(w.verdict) && rc > rw)) {
        worst = idx;
      }
    }
  }
  const SubForm& w = rep.forms[*worst];
  rep.rhs = w.rhs;
  rep.residual = w.residual;
  rep.tolerance = w.tolerance;
  rep.verdict = w.verdict;
  if (rep.verdict == Verdict::inconclusive && rep.reason.empty()) {
    rep.reason = "residual between tolerance and 10x tolerance; retry at higher precision";
  }
  rep.elapsed = std::chrono::steady_clock::now() - start;
  return rep;
}

// ---------------------------------------------------------------------------
// Suites

namespace {

bool admissible(IdentityId id, const std::map<std::string, long>& p) {
  auto get = [&](const char* k) { return p.at(k); };
  switch (id) {
    case IdentityId::t3_odd:
    case IdentityId::p5_odd: {
      const long s = get("s"), r = get("r");
      return s % 2 == 1 && s >= 3 && r >= 2 && r <= s + 1 - r;
    }
    case IdentityId::t3_even:
    case IdentityId::p5_even: {
      const long s = get("s"), r = get("r");
      return s % 2 == 0 && s >= 4 && r >= 2 && r <= s + 1 - r;
    }
    default: return true;
  }
}

void enumerate(const std::vector<ParamSpec>& specs, const SuiteRanges& ranges, std::size_t i,
               std::map<std::string, long>& cur, std::vector<std::map<std::string, long>>& out) {
  if (i == specs.size()) {
    out.push_back(cur);
    return;
  }
  auto [lo, hi] = std::pair{specs[i].lo, specs[i].hi};
  if (auto it = ranges.int_ranges.find(specs[i].name); it != ranges.int_ranges.end()) {
    std::tie(lo, hi) = it->second;
  }
  for (long v = lo; v <= hi; ++v) {
    cur[specs[i].name] = v;
    enumerate(specs, ranges, i + 1, cur, out);
  }
  cur.erase(specs[i].name);
}

}  // namespace

std::vector<VerificationReport> verify_suite(const std::vector<IdentityId>& ids, const std::vector<QBase>& q_grid,
                                             const SuiteRanges& ranges, const PrecisionCtx& ctx, Variant variant) {
  if (q_grid.empty()) throw std::invalid_argument("verify_suite needs a nonempty q grid");
  std::vector<std::pair<mpq_class, mpq_class>> uv = ranges.uv_points;
  if (uv.empty()) {
    uv = {{mpq_class(0), mpq_class(1, 2)}, {mpq_class(1, 3), mpq_class(1, 2)}, {mpq_class(-2, 5), mpq_class(3, 7)}};
  }
  std::vector<VerificationReport> out;
  for (IdentityId id : ids) {
    const CatalogEntry& e = catalog_entry(id);
    const bool pf = !e.real_params.empty();
    std::vector<std::map<std::string, long>> params;
    std::map<std::string, long> cur;
    enumerate(e.int_params, ranges, 0, cur, params);
    for (const QBase& q : q_grid) {
      for (const auto& p : params) {
        if (!admissible(id, p)) continue;
        const std::size_t n_uv = pf ? uv.size() : 1;
        for (std::size_t k = 0; k < n_uv; ++k) {
          IdentityInstance in;
          in.id = id;
          in.int_params = p;
          in.base = q;
          in.ctx = ctx;
          in.variant = variant;
          if (pf) in.real_params = {{"u", uv[k].first}, {"v", uv[k].second}};
          try {
            out.push_back(verify(in));
          } catch (const std::exception& ex) {
            VerificationReport rep;
            rep.instance = in;
            rep.verdict = Verdict::inconclusive;
            rep.reason = ex.what();
            out.push_back(std::move(rep));
          }
        }
      }
      if (pf) break;  // independent of q
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parity audit

ParityAudit audit_parity(long s_min, long s_max, const QBase& base, const PrecisionCtx& ctx) {
  if (s_min < 3) throw std::invalid_argument("audit_parity needs s_min >= 3");
  ParityAudit audit;
  Evaluator ev(base, ctx);
  for (long s = s_min; s <= s_max; ++s) {
    const bool odd = s % 2 == 1;
    long pairs = 0;
    for (long r = 2; r <= s + 1 - r; ++r) {
      ++pairs;
      const long rp = s + 1 - r;
      for (IdentityId id : odd ? std::array{IdentityId::t3_odd, IdentityId::p5_odd}
                               : std::array{IdentityId::t3_even, IdentityId::p5_even}) {
        IdentityInstance in;
        in.id = id;
        in.int_params = {{"s", s}, {"r", r}, {"rp", rp}};
        in.base = base;
        in.ctx = ctx;
        ParityCell cell;
        cell.id = id;
        cell.s = s;
        cell.r = r;
        cell.rp = rp;
        in.variant = Variant::as_stated;
        cell.as_stated = verify(in);
        in.variant = Variant::derived_consistent;
        cell.derived = verify(in);
        in.variant = Variant::corrected;
        cell.corrected = verify(in);
        if (cell.as_stated.rhs.ok() && cell.derived.rhs.ok()) {
          cell.variant_gap = (cell.derived.rhs.value.re - cell.as_stated.rhs.value.re).to_long_double();
          cell.variant_gap_error = cell.derived.rhs.abs_error_bound + cell.as_stated.rhs.abs_error_bound;
        }
        const bool t3 = id == IdentityId::t3_odd || id == IdentityId::t3_even;
        if (t3 && cell.variant_gap) {
          long double predicted = 0.0L, predicted_err = 0.0L;
          if (odd) {
            const ValueWithError p = ev.z2(r, rp) + ev.z2(rp, r);
            predicted = p.value.re.to_long_double();
            predicted_err = p.abs_error_bound;
            if (r != rp && cell.as_stated.verdict != Verdict::inconclusive) {
              cell.preregistered_expected = predicted;
              cell.preregistered_matches = std::fabs(cell.as_stated.residual - predicted) <=
                                           cell.as_stated.tolerance + predicted_err;
            }
          }
          cell.variant_gap_matches =
              std::fabs(*cell.variant_gap - predicted) <= *cell.variant_gap_error + predicted_err;
        }
        audit.cells.push_back(std::move(cell));
      }
    }
    audit.counts.push_back({s, pairs, odd ? (s - 1) / 2 : (s - 2) / 2});
  }
  return audit;
}

// ---------------------------------------------------------------------------
// Partial fractions

namespace {

mpq_class pow_q(const mpq_class& x, long n) {
  mpq_class out(1);
  mpq_class b = x;
  bool inv = n < 0;
  unsigned long e = static_cast<unsigned long>(inv ? -n : n);
  while (e) {
    if (e & 1UL) out *= b;
    b *= b;
    e >>= 1;
  }
  if (inv) out = 1 / out;
  out.canonicalize();
  return out;
}

void check_pf_domain(bool u_one, bool v_one, bool uv_one, long s, long r) {
  if (u_one || v_one || uv_one) throw DomainError("partial fraction needs u != 1, v != 1 and uv != 1");
  if (s < 1 || r < 1) throw DomainError("partial fraction needs s, r >= 1");
}

}  // namespace

PartialFractionResult partial_fraction_check(const mpq_class& u, const mpq_class& v, long s, long r) {
  const mpq_class one(1);
  const mpq_class a = one - u, b = one - v, c = one - u * v;
  check_pf_domain(a == 0, b == 0, c == 0, s, r);
  PartialFractionResult out;
  out.exact = true;
  out.lhs_exact = one / (pow_q(a, r) * pow_q(c, s));
  mpq_class rhs = one / (pow_q(a, r) * pow_q(b, s));
  const mpq_class scale = v * pow_q(a, 1 - r);
  for (long i = 0; i <= s - 1; ++i) rhs -= scale / (pow_q(b, i + 1) * pow_q(c, s - i));
  rhs.canonicalize();
  out.rhs_exact = rhs;
  const mpq_class diff = abs(out.lhs_exact - out.rhs_exact);
  out.residual = static_cast<long double>(diff.get_d());
  out.lhs = exact_value(out.lhs_exact, 128);
  out.rhs = exact_value(out.rhs_exact, 128);
  return out;
}

PartialFractionResult partial_fraction_check(const Real& u_in, const Real& v_in, long s, long r,
                                             const PrecisionCtx& ctx) {
  const Bits bits = ctx.work_bits();
  const Real u(u_in, bits), v(v_in, bits);
  const Real a = 1L - u, b = 1L - v, c = 1L - u * v;
  check_pf_domain(a.is_zero(), b.is_zero(), c.is_zero(), s, r);
  const long double eps = ctx.work_eps();
  const long double ops = 4.0L * static_cast<long double>(s + r + 4);
  PartialFractionResult out;
  const Real lhs = 1L / (pow(a, r) * pow(c, s));
  Real rhs = 1L / (pow(a, r) * pow(b, s));
  long double major = std::fabs(rhs.to_long_double());
  const Real scale = v * pow(a, 1 - r);
  for (long i = 0; i <= s - 1; ++i) {
    const Real term = scale / (pow(b, i + 1) * pow(c, s - i));
    major += std::fabs(term.to_long_double());
    rhs -= term;
  }
  out.lhs = ValueWithError::exact(CVal(lhs.rounded(ctx.mantissa_bits())));
  out.lhs.abs_error_bound = eps * ops * std::fabs(lhs.to_long_double()) + ctx.output_eps() * std::fabs(lhs.to_long_double());
  out.rhs = ValueWithError::exact(CVal(rhs.rounded(ctx.mantissa_bits())));
  out.rhs.abs_error_bound = eps * (ops + static_cast<long double>(s)) * major +
                            ctx.output_eps() * std::fabs(rhs.to_long_double());
  out.residual = abs(out.lhs.value - out.rhs.value).to_long_double();
  return out;
}

mpq_class parse_rational(std::string_view text) {
  std::string t(text);
  auto bad = [&] { return std::invalid_argument("not a rational number: '" + t + "'"); };
  if (t.empty()) throw bad();
  if (t.find('/') != std::string::npos) {
    mpq_class q;
    std::string body = t[0] == '+' ? t.substr(1) : t;
    if (q.set_str(body, 10) != 0 || q.get_den() == 0) throw bad();
    q.canonicalize();
    return q;
  }
  std::size_t i = 0;
  bool neg = false;
  if (t[i] == '+' || t[i] == '-') neg = t[i++] == '-';
  std::string digits;
  long frac = 0;
  bool seen_dot = false, any = false;
  for (; i < t.size() && t[i] != 'e' && t[i] != 'E'; ++i) {
    if (t[i] == '.') {
      if (seen_dot) throw bad();
      seen_dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(t[i]))) {
      digits += t[i];
      any = true;
      if (seen_dot) ++frac;
    } else {
      throw bad();
    }
  }
  if (!any) throw bad();
  long exp10 = 0;
  if (i < t.size()) {
    const std::string e = t.substr(i + 1);
    std::size_t used = 0;
    try {
      exp10 = std::stol(e, &used);
    } catch (const std::exception&) {
      throw bad();
    }
    if (used != e.size() || std::labs(exp10) > 10000) throw bad();
  }
  mpz_class num(digits, 10);
  if (neg) num = -num;
  const long shift = exp10 - frac;
  mpz_class p10;
  mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(shift)));
  mpq_class out = shift >= 0 ? mpq_class(num * p10) : mpq_class(num, p10);
  out.canonicalize();
  return out;
}

VerificationReport diag_reduction_check(long s, const QBase& base, const PrecisionCtx& ctx) {
  IdentityInstance in;
  in.id = IdentityId::diag_reduction;
  in.int_params = {{"s", s}};
  in.base = base;
  in.ctx = ctx;
  return verify(in);
}

}  // namespace qzeta
