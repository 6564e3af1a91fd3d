#include <doctest.h>

#include <random>
#include <set>

#include "helpers.hpp"
#include "qzeta/identities.hpp"

using namespace qzeta;

namespace {

QBase qb(const char* text, Bits bits = 256) { return QBase::from_decimal(text, bits); }

IdentityInstance make(IdentityId id, std::map<std::string, long> p, const char* q, Bits bits,
                      Variant v = Variant::as_stated) {
  IdentityInstance in;
  in.id = id;
  in.int_params = std::move(p);
  in.base = qb(q);
  in.ctx = PrecisionCtx(bits);
  in.variant = v;
  return in;
}

}  // namespace

TEST_CASE("catalog lists nineteen identities with unique tags") {
  CHECK(catalog().size() == 19);
  std::set<std::string> tags;
  for (const CatalogEntry& e : catalog()) {
    tags.insert(std::string(to_string(e.id)));
    CHECK(parse_identity(to_string(e.id)) == e.id);
    CHECK(!e.anchor.empty());
    CHECK(!e.variants.empty());
    CHECK(e.variants.front() == Variant::as_stated);
  }
  CHECK(tags.size() == 19);
  CHECK_THROWS_AS(parse_identity("nope"), std::invalid_argument);
  CHECK(parse_variant("corrected") == Variant::corrected);
}

TEST_CASE("classify bands") {
  CHECK(classify(1e-30L, 1e-29L) == Verdict::pass);
  CHECK(classify(5e-29L, 1e-29L) == Verdict::inconclusive);
  CHECK(classify(2e-28L, 1e-29L) == Verdict::fail);
}

TEST_CASE("reflexion formulas and diagonal reductions pass") {
  for (const char* q : {"1.5", "2", "3"}) {
    for (long s = 2; s <= 4; ++s) {
      for (long sp = 2; sp <= 4; ++sp) {
        for (IdentityId id : {IdentityId::nielsen_q, IdentityId::nielsen_q_star}) {
          const VerificationReport r = verify(make(id, {{"s", s}, {"sp", sp}}, q, 128));
          CHECK_MESSAGE(r.verdict == Verdict::pass, to_string(id), " s=", s, " s'=", sp, " q=", q);
          CHECK(r.tolerance < 1e-30L);
        }
      }
    }
  }
  for (IdentityId id : {IdentityId::star_reduction, IdentityId::circ_star_reduction}) {
    const VerificationReport r = verify(make(id, {{"s", 2}, {"sp", 1}}, "2", 128));
    CHECK(r.verdict == Verdict::pass);
  }
  CHECK(verify(make(IdentityId::t2_weight6, {}, "2", 128)).verdict == Verdict::pass);
}

TEST_CASE("diag reduction at selected points") {
  for (auto [s, q] : std::vector<std::pair<long, const char*>>{{4, "2"}, {3, "1.5"}, {6, "3"}}) {
    const VerificationReport r = diag_reduction_check(s, qb(q), PrecisionCtx(192));
    CHECK_MESSAGE(r.verdict == Verdict::pass, "s=", s, " q=", q);
    CHECK(r.residual <= r.tolerance);
  }
  CHECK_THROWS_AS(diag_reduction_check(2, qb("2"), PrecisionCtx(128)), std::invalid_argument);
}

TEST_CASE("circ evaluations miss a boundary term; corrected forms hold") {
  for (IdentityId id : {IdentityId::t2_31, IdentityId::t2_41, IdentityId::t2_51}) {
    const VerificationReport stated = verify(make(id, {}, "2", 192));
    CHECK(stated.verdict == Verdict::fail);
    CHECK(stated.residual > 1e-3L);
    const VerificationReport fixed = verify(make(id, {}, "2", 192, Variant::corrected));
    CHECK_MESSAGE(fixed.verdict == Verdict::pass, to_string(id));
    CHECK(fixed.forms.size() == stated.forms.size());
  }
  for (long s = 3; s <= 7; ++s) {
    CHECK(verify(make(IdentityId::t3_general, {{"s", s}}, "1.5", 160)).verdict == Verdict::fail);
    CHECK(verify(make(IdentityId::t3_general, {{"s", s}}, "1.5", 160, Variant::corrected)).verdict ==
          Verdict::pass);
    CHECK(verify(make(IdentityId::p5_general, {{"s", s}}, "3", 160, Variant::corrected)).verdict ==
          Verdict::pass);
  }
}

TEST_CASE("Mordell-Tornheim decomposition holds with r-1 in the first slot") {
  for (const char* q : {"1.5", "2"}) {
    for (long s = 2; s <= 3; ++s) {
      for (long r = 3; r <= 4; ++r) {
        const auto p = std::map<std::string, long>{{"s", s}, {"r", r}};
        CHECK(verify(make(IdentityId::t4_mt, p, q, 160)).verdict == Verdict::fail);
        CHECK_MESSAGE(verify(make(IdentityId::t4_mt, p, q, 160, Variant::corrected)).verdict == Verdict::pass,
                      "s=", s, " r=", r, " q=", q);
      }
    }
  }
}

TEST_CASE("reindexed square sum matches the double sum") {
  for (const char* q : {"1.5", "2", "3"}) {
    for (long a = 2; a <= 4; ++a) {
      for (long b = 1; b <= 4; ++b) {
        CHECK(verify(make(IdentityId::reindex, {{"s1", a}, {"s2", b}}, q, 128)).verdict == Verdict::pass);
      }
    }
  }
}

TEST_CASE("variant and parameter validation") {
  CHECK_THROWS_AS(verify(make(IdentityId::nielsen_q, {{"s", 2}, {"sp", 2}}, "2", 128, Variant::corrected)),
                  std::invalid_argument);
  CHECK_THROWS_AS(verify(make(IdentityId::t3_odd, {{"s", 4}, {"r", 2}}, "2", 128)), std::invalid_argument);
  CHECK_THROWS_AS(verify(make(IdentityId::t3_odd, {{"s", 5}, {"r", 2}, {"rp", 3}}, "2", 128)),
                  std::invalid_argument);
  CHECK_THROWS_AS(verify(make(IdentityId::nielsen_q, {{"s", 2}}, "2", 128)), std::invalid_argument);
}

TEST_CASE("partial fractions: worked examples") {
  const PartialFractionResult a = partial_fraction_check(mpq_class(1, 3), mpq_class(1, 2), 2, 1);
  CHECK(a.exact);
  CHECK(a.lhs_exact == a.rhs_exact);
  CHECK(a.lhs_exact == mpq_class(54, 25));  // 1/((2/3)(5/6)^2)
  const PartialFractionResult b = partial_fraction_check(mpq_class(-2, 5), mpq_class(3, 7), 4, 3);
  CHECK(b.lhs_exact == b.rhs_exact);
  CHECK(b.residual == 0.0L);
  CHECK_THROWS_AS(partial_fraction_check(mpq_class(1), mpq_class(1, 2), 2, 1), DomainError);
  CHECK_THROWS_AS(partial_fraction_check(mpq_class(1, 2), mpq_class(1), 2, 1), DomainError);
  CHECK_THROWS_AS(partial_fraction_check(mpq_class(2), mpq_class(1, 2), 2, 1), DomainError);
}

TEST_CASE("partial fractions: 1000 random rationals are exact") {
  std::mt19937_64 rng(20261016);
  std::uniform_int_distribution<long> num(-40, 40), den(1, 40), small(1, 6);
  int checked = 0;
  while (checked < 1000) {
    const mpq_class u(num(rng), den(rng)), v(num(rng), den(rng));
    mpq_class uc = u, vc = v;
    uc.canonicalize();
    vc.canonicalize();
    if (uc == 1 || vc == 1 || uc * vc == 1) continue;
    const long s = small(rng), r = small(rng);
    const PartialFractionResult res = partial_fraction_check(uc, vc, s, r);
    REQUIRE(res.lhs_exact == res.rhs_exact);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("partial fractions: floating path agrees within its bound") {
  const PrecisionCtx ctx(128);
  const Real u = sqrt(Real(2L, 256)) / 3L, v = Real(1L, 256) / const_pi(256);
  const PartialFractionResult r = partial_fraction_check(u, v, 5, 2, ctx);
  CHECK(!r.exact);
  CHECK(r.residual <= r.lhs.abs_error_bound + r.rhs.abs_error_bound);
  CHECK(r.lhs.abs_error_bound < 1e-30L);
}

TEST_CASE("parse_rational") {
  CHECK(parse_rational("0.37") == mpq_class(37, 100));
  CHECK(parse_rational("-1/3") == mpq_class(-1, 3));
  CHECK(parse_rational("2.5e-1") == mpq_class(1, 4));
  CHECK(parse_rational("3E2") == mpq_class(300));
  CHECK(parse_rational("+4/6") == mpq_class(2, 3));
  CHECK_THROWS_AS(parse_rational("abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("1.2.3"), std::invalid_argument);
}

TEST_CASE("suite order and skipping") {
  SuiteRanges ranges;
  ranges.int_ranges["s"] = {3, 6};
  const auto reports = verify_suite({IdentityId::t3_odd, IdentityId::diag_reduction}, {qb("2"), qb("3")}, ranges,
                                    PrecisionCtx(128));
  // t3_odd: s=3 (r=2), s=5 (r=2,3) per q; diag: s=3..6 per q.
  REQUIRE(reports.size() == 2 * 3 + 2 * 4);
  CHECK(reports[0].instance.id == IdentityId::t3_odd);
  CHECK(reports[0].instance.int_params.at("s") == 3);
  CHECK(reports[2].instance.int_params.at("r") == 3);
  CHECK(reports[3].instance.base.approx() == 3.0);
  for (std::size_t i = 6; i < reports.size(); ++i) CHECK(reports[i].verdict == Verdict::pass);

  const auto pf = verify_suite({IdentityId::pf_basic}, {qb("2"), qb("3")}, {}, PrecisionCtx(128));
  CHECK(pf.size() == 8 * 3);
  for (const auto& r : pf) CHECK(r.verdict == Verdict::pass);
}

TEST_CASE("verdicts are stable when precision is doubled") {
  for (IdentityId id : {IdentityId::nielsen_q, IdentityId::t2_31, IdentityId::diag_reduction}) {
    std::map<std::string, long> p;
    if (id == IdentityId::nielsen_q) p = {{"s", 3}, {"sp", 2}};
    if (id == IdentityId::diag_reduction) p = {{"s", 4}};
    const Verdict lo = verify(make(id, p, "2", 128)).verdict;
    const Verdict hi = verify(make(id, p, "2", 256)).verdict;
    CHECK(lo == hi);
  }
}

TEST_CASE("parity audit") {
  const ParityAudit audit = audit_parity(3, 9, qb("2"), PrecisionCtx(160));
  REQUIRE(audit.counts.size() == 7);
  for (const ParityCount& c : audit.counts) CHECK(c.enumerated == c.claimed);
  bool saw_prereg = false;
  for (const ParityCell& cell : audit.cells) {
    CHECK(cell.corrected.verdict == Verdict::pass);
    CHECK(cell.as_stated.verdict == Verdict::fail);
    if (cell.id == IdentityId::t3_odd || cell.id == IdentityId::t3_even) {
      REQUIRE(cell.variant_gap.has_value());
      CHECK(cell.variant_gap_matches);
    }
    if (cell.preregistered_expected) {
      saw_prereg = true;
      // the as-stated residual also carries the missing boundary term
      CHECK_FALSE(cell.preregistered_matches);
    }
  }
  CHECK(saw_prereg);
}
