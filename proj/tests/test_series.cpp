#include <array>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "qzeta/series.hpp"

using namespace qzeta;
using test::cv;
using test::ref;

namespace {

const PrecisionCtx kCtx(128, 16);

void check_against(const ValueWithError& v, const Real& re, const Real& im = Real(0L, 256)) {
  REQUIRE(v.ok());
  CHECK(test::dist(v.value, re, im) <= v.abs_error_bound);
  CHECK(v.abs_error_bound < kCtx.abs_tol());
}

}  // namespace

TEST_CASE("single series against reference values") {
  const QBase q2 = QBase::from_decimal("2", 128);
  check_against(zeta_q(cv("2"), q2, kCtx), ref("2.744033888759488360480214891492272164311"));
  check_against(zeta_q(cv("3"), q2, kCtx), ref("2.177625645065709376776455065336240749423"));
  check_against(zeta_q(cv("3,2"), q2, kCtx), ref("1.899886193319449392169670117565007027031"),
                ref("-0.1012963483468723720108627008043325645725"));
  check_against(zeta_q(cv("3"), QBase::from_decimal("1.5", 128), kCtx),
                ref("1.690399694833420623096240364164773790695"));
  check_against(zeta_q(cv("2.5"), QBase::from_decimal("3", 128), kCtx),
                ref("3.335430669220816293227752006582706254725"));
}

TEST_CASE("double series against reference values") {
  const QBase q2 = QBase::from_decimal("2", 128);
  check_against(zeta2_q(cv("3"), cv("2"), q2, kCtx), ref("0.3694704183124637715252484017994010765317"));
  check_against(zeta2_star_q(cv("3"), cv("2"), q2, kCtx), ref("4.439499556461054207673382620256834019046"));
  check_against(circ_q(cv("3"), cv("1"), q2, kCtx), ref("0.1884372507328938187995764946501186680223"));
  check_against(circ_star_q(cv("3"), cv("1"), q2, kCtx), ref("2.241507235069734746887875208778698465903"));
  check_against(zeta2_q(cv("2"), cv("2"), QBase::from_decimal("3", 128), kCtx),
                ref("2.538986336241949273904827941115776049143"));
}

TEST_CASE("Mordell-Tornheim against reference value") {
  const QBase q2 = QBase::from_decimal("2", 128);
  const std::array<CVal, 2> front{cv("2"), cv("2")};
  check_against(mt_q(front, cv("2"), q2, kCtx), ref("2.147677174811499550422406692022256386773"));
}

TEST_CASE("evaluators agree with the naive oracle at four times the truncation") {
  const QBase q = QBase::from_decimal("1.75", 160);
  const std::vector<std::pair<SeriesKind, std::vector<CVal>>> cases = {
      {SeriesKind::single, {cv("2.5,1")}},
      {SeriesKind::double_, {cv("2.5"), cv("0.5,-1")}},
      {SeriesKind::double_star, {cv("3"), cv("1.5")}},
      {SeriesKind::circ, {cv("2"), cv("-0.5")}},
      {SeriesKind::circ_star, {cv("2.25,0.5"), cv("1")}},
      {SeriesKind::mordell_tornheim, {cv("2"), cv("1.5"), cv("2")}},
  };
  for (const auto& [kind, args] : cases) {
    CAPTURE(to_string(kind));
    const ValueWithError v = evaluate(kind, args, q, kCtx);
    REQUIRE(v.ok());
    const TruncationPlan p = plan(kind, args, q, kCtx);
    REQUIRE(p.feasible);
    CHECK(p.tail_ratio < 1.0L);
    const std::uint64_t cutoff = 4 * p.outer_limit;
    const CVal naive = naive_oracle(kind, args, q, cutoff, 256);
    CHECK(test::dist(v.value, naive) <= v.abs_error_bound);
  }
}

TEST_CASE("terms_used counts the lattice points actually summed") {
  const QBase q2 = QBase::from_decimal("2", 128);
  const std::array<CVal, 2> args{cv("3"), cv("2")};
  const TruncationPlan p = plan(SeriesKind::double_, args, q2, kCtx);
  const std::uint64_t n = p.outer_limit;
  CHECK(zeta2_q(args[0], args[1], q2, kCtx).terms_used == n * (n - 1) / 2);
  CHECK(zeta2_star_q(args[0], args[1], q2, kCtx).terms_used == n * (n + 1) / 2);
  CHECK(zeta_q(cv("3"), q2, kCtx).terms_used == plan_single(cv("3"), 1, 0, q2, kCtx).outer_limit);
}

TEST_CASE("star sums differ from strict sums by the diagonal") {
  const QBase q = QBase::from_decimal("2.5", 128);
  const CVal a = cv("3,0.5"), b = cv("1.5");
  const ValueWithError d = zeta2_star_q(a, b, q, kCtx) - zeta2_q(a, b, q, kCtx) - weighted_zeta_q(a + b, 2, 0, q, kCtx);
  CHECK(abs(d.value).to_long_double() <= d.abs_error_bound);
  const ValueWithError c = circ_star_q(a, b, q, kCtx) - circ_q(a, b, q, kCtx) - zeta_q(a + b, q, kCtx);
  CHECK(abs(c.value).to_long_double() <= c.abs_error_bound);
}

TEST_CASE("Mordell-Tornheim depth one is a single weighted series") {
  const QBase q = QBase::from_decimal("3", 128);
  const std::array<CVal, 1> front{cv("1.5")};
  const ValueWithError d = mt_q(front, cv("2"), q, kCtx) - weighted_zeta_q(cv("3.5"), 2, 0, q, kCtx);
  CHECK(abs(d.value).to_long_double() <= d.abs_error_bound);
}

TEST_CASE("reindexed double sum agrees with the nested evaluator") {
  for (const char* qs : {"1.5", "2", "4"}) {
    const QBase q = QBase::from_decimal(qs, 128);
    const ValueWithError d = zeta2_q(cv("2.5"), cv("1,1"), q, kCtx) - zeta2_q_reindexed(cv("2.5"), cv("1,1"), q, kCtx);
    CHECK(abs(d.value).to_long_double() <= d.abs_error_bound);
  }
}

TEST_CASE("weighted series with the n factor") {
  // sum n q^n / [n]^s at q = 2, s = 4 against the naive sum.
  const QBase q2 = QBase::from_decimal("2", 128);
  const ValueWithError v = weighted_zeta_q(cv("4"), 1, 1, q2, kCtx);
  REQUIRE(v.ok());
  Real acc(0L, 256);
  const Real q(2L, 256);
  for (long n = 1; n <= 400; ++n) {
    const Real qn = pow(q, n);
    acc += qn * n / pow(qn - 1L, 4L);
  }
  CHECK(test::dist(v.value, acc) <= v.abs_error_bound);
}

TEST_CASE("bounds tighten with precision") {
  const QBase q2 = QBase::from_decimal("2", 512);
  const ValueWithError lo = zeta2_q(cv("3"), cv("2"), q2, PrecisionCtx(128));
  const ValueWithError hi = zeta2_q(cv("3"), cv("2"), q2, PrecisionCtx(512));
  REQUIRE(hi.ok());
  CHECK(hi.abs_error_bound < lo.abs_error_bound * 1e-100L);
  CHECK(test::dist(lo.value, hi.value) <= lo.abs_error_bound + hi.abs_error_bound);
}

TEST_CASE("divergent arguments report domain_error") {
  const QBase q2 = QBase::from_decimal("2", 128);
  CHECK(zeta_q(cv("1"), q2, kCtx).status == Status::domain_error);
  CHECK(zeta2_q(cv("1"), cv("3"), q2, kCtx).status == Status::domain_error);
  CHECK(zeta2_q(cv("1.5"), cv("0.5"), q2, kCtx).status == Status::domain_error);
  CHECK(circ_q(cv("1.2"), cv("-0.5"), q2, kCtx).status == Status::domain_error);
  CHECK(circ_q(cv("2"), cv("-0.5"), q2, kCtx).ok());
  const std::array<CVal, 2> front{cv("1"), cv("2")};
  CHECK(mt_q(front, cv("1"), q2, kCtx).status == Status::domain_error);
  const std::array<CVal, 5> deep{cv("3"), cv("3"), cv("3"), cv("3"), cv("3")};
  CHECK(mt_q(deep, cv("3"), q2, kCtx).status == Status::domain_error);
  CHECK_THROWS_AS(evaluate(SeriesKind::double_, std::vector<CVal>{cv("3")}, q2, kCtx), std::invalid_argument);
}

TEST_CASE("terms of a convergent single series decrease geometrically") {
  const QBase q = QBase::from_decimal("1.25", 128);
  const TruncationPlan p = plan_single(cv("3"), 1, 0, q, kCtx);
  REQUIRE(p.feasible);
  CHECK(p.tail_ratio == doctest::Approx(1.0 / (1.25 * 1.25)));
  CHECK(p.tail_bound < kCtx.abs_tol() / 2);
}
