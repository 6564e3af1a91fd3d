#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

using namespace qzeta;

TEST_CASE("precision context derived quantities and limits") {
  const PrecisionCtx ctx(128, 16);
  CHECK(ctx.work_bits() == 144);
  CHECK(ctx.abs_tol() == std::ldexp(1.0L, -112));
  CHECK(ctx.pole_threshold() == std::ldexp(1.0L, -64));
  CHECK_THROWS_AS(PrecisionCtx(32, 16), std::invalid_argument);
  CHECK_THROWS_AS(PrecisionCtx(128, 8), std::invalid_argument);
  CHECK_THROWS_AS(PrecisionCtx(9000, 16), std::invalid_argument);
  CHECK(ctx.doubled().mantissa_bits() == 256);
}

TEST_CASE("q base rejects q <= 1") {
  CHECK_THROWS_AS(QBase::from_decimal("1", 128), std::invalid_argument);
  CHECK_THROWS_AS(QBase::from_decimal("0.5", 128), std::invalid_argument);
  const QBase b = QBase::from_decimal("2", 128);
  CHECK(test::dist(CVal(b.log_q()), CVal(log(Real(2L, 256)))) < 1e-37);
}

TEST_CASE("q-numbers and q-factorials") {
  const QBase b = QBase::from_decimal("2", 200);
  CHECK(test::dist(q_number(CVal(3L, 200), b), test::ref("7")) < 1e-55);
  CHECK(test::dist(q_number(CVal(0L, 200), b), test::ref("0")) == 0.0L);
  CHECK(test::dist(CVal(q_factorial(3, b)), test::ref("21")) < 1e-55);
  CHECK(q_factorial(0, b) == 1L);
  // [-1]_q = (q^-1 - 1)/(q - 1) = -1/q
  CHECK(test::dist(q_number(CVal(-1L, 200), b), test::ref("-0.5")) < 1e-55);
}

TEST_CASE("rising coefficients") {
  CHECK(test::dist(rising_coeff(CVal(2L, 128), 3), test::ref("4")) < 1e-35);
  CHECK(test::dist(rising_coeff(CVal(-2L, 128), 3), test::ref("0")) < 1e-35);
  CHECK(test::dist(rising_coeff(test::cv("0.5"), 0), test::ref("1")) == 0.0L);
}

TEST_CASE("q-shifted factorials") {
  const Real half = test::ref("0.5");
  CHECK(test::dist(q_pochhammer(CVal(half), half, std::nullopt),
                   test::ref("0.288788095086602421278899721929230780088911905")) < 1e-40);
  const CVal third = CVal(Real(1L, 256) / 3L);
  CHECK(test::dist(q_pochhammer(third, half, 5), test::ref("0.477872620884773662551440329218106995884773663")) <
        1e-40);
  CHECK_THROWS_AS(q_pochhammer(third, Real(2L, 128), std::nullopt), DomainError);
  CHECK(q_pochhammer(CVal(0L, 128), Real(2L, 128), std::nullopt) == CVal(1L, 128));
}

TEST_CASE("1/(q^x - 1) classifies poles") {
  const QBase b = QBase::from_decimal("2", 128);
  const PrecisionCtx ctx(128);
  const ValueWithError one = inv_qpow_minus_one(b, CVal(1L, 128), ctx);
  REQUIRE(one.ok());
  CHECK(test::dist(one.value, test::ref("1")) <= one.abs_error_bound);
  CHECK(one.abs_error_bound < 1e-36);

  CHECK(inv_qpow_minus_one(b, CVal(0L, 128), ctx).status == Status::domain_error);
  CHECK(inv_qpow_minus_one(b, test::cv("1e-30"), ctx).status == Status::pole_proximate);
  const Real period = ldexp(const_pi(300), 1) / log(Real(2L, 300));
  CHECK(inv_qpow_minus_one(b, CVal(Real(0L, 300), period), ctx).status == Status::domain_error);
  CHECK(exact_pole_index(CVal(Real(0L, 300), -period), b, ctx) == -1);
  CHECK(inv_qpow_minus_one(b, test::cv("-1e-10"), ctx).ok());
}

TEST_CASE("error-carrying arithmetic contains the exact result") {
  ValueWithError a = ValueWithError::exact(CVal(Real(1L, 128) / 3L));
  a.abs_error_bound = 1e-36L;
  ValueWithError b = ValueWithError::exact(CVal(Real(2L, 128) / 7L));
  b.abs_error_bound = 1e-36L;
  const Real exact = Real(2L, 256) / 21L;
  const ValueWithError p = a * b;
  CHECK(test::dist(p.value, exact) <= p.abs_error_bound);
  const ValueWithError d = a - b;
  CHECK(test::dist(d.value, Real(1L, 256) / 21L) <= d.abs_error_bound);
  ValueWithError bad = ValueWithError::failure(Status::pole_proximate, "near pole", 128);
  const ValueWithError s = a + bad;
  CHECK(s.status == Status::pole_proximate);
  CHECK(std::isinf(s.abs_error_bound));
}
