#include "qzeta/qnum.hpp"

#include <algorithm>
#include <cmath>

namespace qzeta {

PrecisionCtx::PrecisionCtx(Bits mantissa_bits, Bits guard_bits)
    : mantissa_bits_(mantissa_bits), guard_bits_(guard_bits) {
  if (mantissa_bits < kMinMantissa || mantissa_bits > kMaxMantissa) {
    throw std::invalid_argument("mantissa_bits must lie in [64, 8192], got " +
                                std::to_string(mantissa_bits));
  }
  if (guard_bits < kMinGuard || guard_bits >= mantissa_bits) {
    throw std::invalid_argument("guard_bits must be >= 16 and below mantissa_bits, got " +
                                std::to_string(guard_bits));
  }
}

long double PrecisionCtx::abs_tol() const {
  return std::ldexp(1.0L, -static_cast<int>(mantissa_bits_ - guard_bits_));
}

long double PrecisionCtx::work_eps() const {
  return std::ldexp(1.0L, 1 - static_cast<int>(work_bits()));
}

long double PrecisionCtx::output_eps() const {
  return std::ldexp(1.0L, 1 - static_cast<int>(mantissa_bits_));
}

long double PrecisionCtx::pole_threshold() const {
  return std::ldexp(1.0L, -static_cast<int>(mantissa_bits_ / 2));
}

// ---------------------------------------------------------------------------

QBase::QBase(const Real& q, Bits bits) : q_(q, std::max(bits, q.bits())) {
  if (!q_.is_finite() || !(q_ > 1L)) {
    throw std::invalid_argument("q must be a finite real > 1, got " + q.to_string(20));
  }
  q_minus_1_ = q_ - 1L;
  log_q_ = log(q_).rounded(bits);
}

QBase QBase::from_decimal(std::string_view text, Bits bits) {
  return QBase(Real::from_decimal(text, bits), bits);
}

QBase QBase::at(Bits bits) const { return QBase(q_, bits); }

std::string_view to_string(Status s) {
  switch (s) {
    case Status::converged: return "converged";
    case Status::pole_proximate: return "pole_proximate";
    case Status::domain_error: return "domain_error";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

ValueWithError ValueWithError::exact(CVal v) {
  ValueWithError out;
  out.value = std::move(v);
  return out;
}

ValueWithError ValueWithError::failure(Status status, std::string note, Bits bits) {
  ValueWithError out;
  out.value = CVal(0L, bits);
  out.abs_error_bound = HUGE_VALL;
  out.status = status;
  out.note = std::move(note);
  return out;
}

namespace {

long double mag(const CVal& z) { return abs(z).to_long_double(); }

long double eps_of(Bits bits) { return std::ldexp(1.0L, 1 - static_cast<int>(bits)); }

// Worst status wins; notes accumulate.
void merge_status(ValueWithError& out, const ValueWithError& a, const ValueWithError& b) {
  out.status = std::max(a.status, b.status);
  out.note = a.note;
  if (!b.note.empty()) out.note += (out.note.empty() ? "" : "; ") + b.note;
  out.terms_used = a.terms_used + b.terms_used;
  if (!out.ok()) out.abs_error_bound = HUGE_VALL;
}

}  // namespace

ValueWithError operator+(const ValueWithError& a, const ValueWithError& b) {
  ValueWithError out;
  out.value = a.value + b.value;
  out.abs_error_bound = a.abs_error_bound + b.abs_error_bound + 2 * eps_of(out.value.bits()) * mag(out.value);
  merge_status(out, a, b);
  return out;
}

ValueWithError operator-(const ValueWithError& a, const ValueWithError& b) {
  ValueWithError out;
  out.value = a.value - b.value;
  out.abs_error_bound = a.abs_error_bound + b.abs_error_bound + 2 * eps_of(out.value.bits()) * mag(out.value);
  merge_status(out, a, b);
  return out;
}

ValueWithError operator*(const ValueWithError& a, const ValueWithError& b) {
  ValueWithError out;
  out.value = a.value * b.value;
  const long double ma = mag(a.value), mb = mag(b.value);
  out.abs_error_bound = ma * b.abs_error_bound + mb * a.abs_error_bound +
                        a.abs_error_bound * b.abs_error_bound +
                        4 * eps_of(out.value.bits()) * mag(out.value);
  merge_status(out, a, b);
  return out;
}

ValueWithError operator*(const ValueWithError& a, const Real& c) {
  ValueWithError out = a;
  out.value *= c;
  out.abs_error_bound = abs(c).to_long_double() * a.abs_error_bound +
                        2 * eps_of(out.value.bits()) * mag(out.value);
  if (!out.ok()) out.abs_error_bound = HUGE_VALL;
  return out;
}

ValueWithError operator*(const ValueWithError& a, long c) {
  return a * Real(c, a.value.bits());
}

// ---------------------------------------------------------------------------

CVal q_number(const CVal& a, const QBase& base) {
  const Bits bits = std::max(a.bits(), base.bits());
  const QBase b = base.at(bits);
  CVal e = expm1(a.rounded(bits) * b.log_q());
  const Real qm1(b.q_minus_1(), bits);
  return {e.re / qm1, e.im / qm1};
}

CVal q_pow(const QBase& base, const CVal& s) {
  const Bits bits = std::max(s.bits(), base.bits());
  const QBase b = base.at(bits);
  CVal out = exp_times(s.rounded(bits), b.log_q());
  if (!out.is_finite()) {
    throw DomainError("q^s overflows the exponent range (Re s = " + s.re.to_string(12) + ")");
  }
  return out;
}

CVal rising_coeff(const CVal& s, std::uint64_t k) {
  const Bits bits = s.bits();
  CVal c(1L, bits);
  for (std::uint64_t j = 1; j <= k; ++j) {
    c *= s + static_cast<long>(j - 1);
    c = {c.re / static_cast<long>(j), c.im / static_cast<long>(j)};
  }
  return c;
}

Real q_factorial(std::uint64_t n, const QBase& base) {
  const Bits bits = base.bits();
  Real acc(1L, bits);
  Real qj(1L, bits);  // q^j
  const Real qm1(base.q_minus_1(), bits);
  for (std::uint64_t j = 1; j <= n; ++j) {
    qj *= base.q();
    acc *= (qj - 1L) / qm1;
  }
  return acc;
}

CVal q_pochhammer(const CVal& a, const Real& ratio, std::optional<std::uint64_t> n) {
  const Bits bits = std::max(a.bits(), ratio.bits());
  CVal acc(1L, bits);
  CVal term = a.rounded(bits);  // a ratio^m
  if (n) {
    for (std::uint64_t m = 0; m < *n; ++m) {
      acc *= CVal(1L, bits) - term;
      term *= ratio;
    }
    return acc;
  }
  if (a.is_zero()) return acc;
  if (!(abs(ratio) < 1L)) {
    throw DomainError("infinite q-shifted factorial diverges for |ratio| >= 1");
  }
  const long double cutoff = std::ldexp(1.0L, -static_cast<int>(bits) - 8);
  for (std::uint64_t m = 0; m < 100'000'000ULL; ++m) {
    acc *= CVal(1L, bits) - term;
    term *= ratio;
    if (mag(term) < cutoff) return acc;
  }
  throw DomainError("infinite q-shifted factorial did not converge");
}

std::optional<long> exact_pole_index(const CVal& x, const QBase& base, const PrecisionCtx& ctx) {
  if (!x.re.is_zero()) return std::nullopt;
  const Bits bits = std::max(x.bits(), ctx.work_bits());
  const QBase b = base.at(bits);
  const Real w = x.im * b.log_q() / ldexp(const_pi(bits), 1);
  const Real k = round_nearest(w);
  if (abs(w - k).to_long_double() < ctx.pole_threshold()) return k.to_long();
  return std::nullopt;
}

ValueWithError inv_qpow_minus_one(const QBase& base, const CVal& x, const PrecisionCtx& ctx) {
  const Bits bits = ctx.work_bits();
  if (auto b = exact_pole_index(x, base, ctx)) {
    return ValueWithError::failure(Status::domain_error,
                                   "q^x = 1 exactly (x log q = 2 pi i * " + std::to_string(*b) + ")", bits);
  }
  const QBase qb = base.at(bits);
  const CVal xl = x.rounded(bits) * qb.log_q();
  const CVal e = expm1(xl);
  const long double me = mag(e);
  if (me < ctx.pole_threshold()) {
    return ValueWithError::failure(Status::pole_proximate,
                                   "|q^x - 1| = " + Real(me, 64).to_string(4) + " below pole threshold", bits);
  }
  ValueWithError out;
  out.value = CVal(1L, bits) / e;
  // Relative error of expm1 at a perturbed argument, then of the division.
  const long double cond = 1.0L + mag(xl) * (1.0L + me) / me;
  const long double rel = 8.0L * ctx.work_eps() * cond;
  out.value = out.value.rounded(ctx.mantissa_bits());
  out.abs_error_bound = mag(out.value) * (rel + ctx.output_eps());
  out.terms_used = 1;
  return out;
}

}  // namespace qzeta
