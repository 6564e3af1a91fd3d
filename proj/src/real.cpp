#include "qzeta/real.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace qzeta {
namespace {

constexpr mpfr_rnd_t kRnd = MPFR_RNDN;

Bits widest(const Real& a, const Real& b) { return std::max(a.bits(), b.bits()); }

void check_bits(Bits bits) {
  if (bits < MPFR_PREC_MIN || bits > MPFR_PREC_MAX) {
    throw std::invalid_argument("precision out of range: " + std::to_string(bits));
  }
}

}  // namespace

Real::Real(Uninit, Bits bits) {
  check_bits(bits);
  mpfr_init2(v_, bits);
}

Real::Real(long v, Bits bits) : Real(Uninit{}, bits) { mpfr_set_si(v_, v, kRnd); }
Real::Real(double v, Bits bits) : Real(Uninit{}, bits) { mpfr_set_d(v_, v, kRnd); }
Real::Real(long double v, Bits bits) : Real(Uninit{}, bits) { mpfr_set_ld(v_, v, kRnd); }
Real::Real(const Real& other, Bits bits) : Real(Uninit{}, bits) { mpfr_set(v_, other.v_, kRnd); }

Real Real::from_decimal(std::string_view text, Bits bits) {
  Real r(Uninit{}, bits);
  std::string owned(text);
  if (owned.empty() || mpfr_set_str(r.v_, owned.c_str(), 10, kRnd) != 0 || !r.is_finite()) {
    throw std::invalid_argument("not a decimal number: '" + owned + "'");
  }
  return r;
}

Real::Real(const Real& other) : Real(Uninit{}, other.bits()) { mpfr_set(v_, other.v_, kRnd); }

Real::Real(Real&& other) noexcept {
  mpfr_init2(v_, other.bits());
  mpfr_swap(v_, other.v_);
}

Real& Real::operator=(const Real& other) {
  if (this != &other) {
    if (bits() != other.bits()) mpfr_set_prec(v_, other.bits());
    mpfr_set(v_, other.v_, kRnd);
  }
  return *this;
}

Real& Real::operator=(Real&& other) noexcept {
  mpfr_swap(v_, other.v_);
  return *this;
}

Real::~Real() { mpfr_clear(v_); }

std::string Real::to_string(int digits) const {
  if (digits < 1) digits = 1;
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.*Re", digits - 1, v_);
  std::string out(buf);
  mpfr_free_str(buf);
  return out;
}

Real Real::operator-() const {
  Real r(Uninit{}, bits());
  mpfr_neg(r.v_, v_, kRnd);
  return r;
}

Real& Real::operator+=(const Real& rhs) { mpfr_add(v_, v_, rhs.v_, kRnd); return *this; }
Real& Real::operator-=(const Real& rhs) { mpfr_sub(v_, v_, rhs.v_, kRnd); return *this; }
Real& Real::operator*=(const Real& rhs) { mpfr_mul(v_, v_, rhs.v_, kRnd); return *this; }
Real& Real::operator/=(const Real& rhs) { mpfr_div(v_, v_, rhs.v_, kRnd); return *this; }
Real& Real::operator*=(long rhs) { mpfr_mul_si(v_, v_, rhs, kRnd); return *this; }
Real& Real::operator/=(long rhs) { mpfr_div_si(v_, v_, rhs, kRnd); return *this; }

Real operator+(const Real& a, const Real& b) {
  Real r(Real::Uninit{}, widest(a, b));
  mpfr_add(r.v_, a.v_, b.v_, kRnd);
  return r;
}
Real operator-(const Real& a, const Real& b) {
  Real r(Real::Uninit{}, widest(a, b));
  mpfr_sub(r.v_, a.v_, b.v_, kRnd);
  return r;
}
Real operator*(const Real& a, const Real& b) {
  Real r(Real::Uninit{}, widest(a, b));
  mpfr_mul(r.v_, a.v_, b.v_, kRnd);
  return r;
}
Real operator/(const Real& a, const Real& b) {
  Real r(Real::Uninit{}, widest(a, b));
  mpfr_div(r.v_, a.v_, b.v_, kRnd);
  return r;
}
Real operator+(const Real& a, long b) {
  Real r(Real::Uninit{}, a.bits());
  mpfr_add_si(r.v_, a.v_, b, kRnd);
  return r;
}
Real operator-(const Real& a, long b) {
  Real r(Real::Uninit{}, a.bits());
  mpfr_sub_si(r.v_, a.v_, b, kRnd);
  return r;
}
Real operator-(long a, const Real& b) {
  Real r(Real::Uninit{}, b.bits());
  mpfr_si_sub(r.v_, a, b.v_, kRnd);
  return r;
}
Real operator*(const Real& a, long b) {
  Real r(Real::Uninit{}, a.bits());
  mpfr_mul_si(r.v_, a.v_, b, kRnd);
  return r;
}
Real operator/(const Real& a, long b) {
  Real r(Real::Uninit{}, a.bits());
  mpfr_div_si(r.v_, a.v_, b, kRnd);
  return r;
}
Real operator/(long a, const Real& b) {
  Real r(Real::Uninit{}, b.bits());
  mpfr_si_div(r.v_, a, b.v_, kRnd);
  return r;
}

std::partial_ordering operator<=>(const Real& a, const Real& b) {
  if (mpfr_unordered_p(a.v_, b.v_)) return std::partial_ordering::unordered;
  const int c = mpfr_cmp(a.v_, b.v_);
  return c < 0 ? std::partial_ordering::less
               : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
}

std::partial_ordering operator<=>(const Real& a, long b) {
  if (mpfr_nan_p(a.v_)) return std::partial_ordering::unordered;
  const int c = mpfr_cmp_si(a.v_, b);
  return c < 0 ? std::partial_ordering::less
               : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
}

#define QZETA_UNARY(name, fn)                  \
  Real name(const Real& x) {                   \
    Real r(Real::Uninit{}, x.bits());          \
    fn(r.v_, x.v_, kRnd);                      \
    return r;                                  \
  }

QZETA_UNARY(abs, mpfr_abs)
QZETA_UNARY(sqrt, mpfr_sqrt)
QZETA_UNARY(exp, mpfr_exp)
QZETA_UNARY(expm1, mpfr_expm1)
QZETA_UNARY(log, mpfr_log)
QZETA_UNARY(log1p, mpfr_log1p)
QZETA_UNARY(cos, mpfr_cos)
QZETA_UNARY(sin, mpfr_sin)

#undef QZETA_UNARY

Real pow(const Real& x, const Real& y) {
  Real r(Real::Uninit{}, widest(x, y));
  mpfr_pow(r.v_, x.v_, y.v_, kRnd);
  return r;
}

Real pow(const Real& x, long n) {
  Real r(Real::Uninit{}, x.bits());
  mpfr_pow_si(r.v_, x.v_, n, kRnd);
  return r;
}

Real ldexp(const Real& x, long e) {
  Real r(Real::Uninit{}, x.bits());
  mpfr_mul_2si(r.v_, x.v_, e, kRnd);
  return r;
}

Real round_nearest(const Real& x) {
  Real r(Real::Uninit{}, x.bits());
  mpfr_round(r.v_, x.v_);
  return r;
}

Real const_pi(Bits bits) {
  Real r(Real::Uninit{}, bits);
  mpfr_const_pi(r.v_, kRnd);
  return r;
}

Real fma_add(const Real& a, const Real& b, const Real& c) {
  Real r(Real::Uninit{}, std::max(widest(a, b), c.bits()));
  mpfr_fma(r.v_, a.v_, b.v_, c.v_, kRnd);
  return r;
}

// ---------------------------------------------------------------------------
// CVal

CVal CVal::from_text(std::string_view text, Bits bits) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) {
    return CVal(Real::from_decimal(text, bits));
  }
  return {Real::from_decimal(text.substr(0, comma), bits),
          Real::from_decimal(text.substr(comma + 1), bits)};
}

CVal& CVal::operator+=(const CVal& o) {
  re += o.re;
  if (!o.im.is_zero() || !im.is_zero()) im += o.im;
  return *this;
}

CVal& CVal::operator-=(const CVal& o) {
  re -= o.re;
  if (!o.im.is_zero() || !im.is_zero()) im -= o.im;
  return *this;
}

CVal& CVal::operator*=(const CVal& o) {
  if (o.im.is_zero()) return *this *= o.re;
  if (im.is_zero()) {
    im = re * o.im;
    re *= o.re;
    return *this;
  }
  Real r = re * o.re - im * o.im;
  Real i = re * o.im + im * o.re;
  re = std::move(r);
  im = std::move(i);
  return *this;
}

CVal& CVal::operator*=(const Real& o) {
  re *= o;
  if (!im.is_zero()) im *= o;
  return *this;
}

CVal operator/(const CVal& a, const CVal& b) {
  if (b.im.is_zero()) {
    return {a.re / b.re, a.im / b.re};
  }
  // Smith's algorithm keeps intermediate magnitudes bounded.
  if (abs(b.re) >= abs(b.im)) {
    const Real ratio = b.im / b.re;
    const Real den = b.re + b.im * ratio;
    return {(a.re + a.im * ratio) / den, (a.im - a.re * ratio) / den};
  }
  const Real ratio = b.re / b.im;
  const Real den = b.re * ratio + b.im;
  return {(a.re * ratio + a.im) / den, (a.im * ratio - a.re) / den};
}

Real abs(const CVal& z) {
  if (z.im.is_zero()) return abs(z.re);
  Real r(0L, z.bits());
  mpfr_hypot(r.raw(), z.re.raw(), z.im.raw(), MPFR_RNDN);
  return r;
}

CVal exp(const CVal& z) {
  Real m = exp(z.re);
  if (z.im.is_zero()) return {m, Real(0L, z.bits())};
  return {m * cos(z.im), m * sin(z.im)};
}

CVal expm1(const CVal& z) {
  if (z.im.is_zero()) return {expm1(z.re), Real(0L, z.bits())};
  // Re: e^a cos b - 1 = expm1(a) cos b - 2 sin^2(b/2)
  const Real c = cos(z.im);
  const Real half_sin = sin(ldexp(z.im, -1));
  const Real em1 = expm1(z.re);
  Real re = em1 * c - ldexp(half_sin * half_sin, 1);
  Real im = exp(z.re) * sin(z.im);
  return {std::move(re), std::move(im)};
}

CVal exp_times(const CVal& s, const Real& log_x) {
  if (s.im.is_zero()) return {exp(s.re * log_x), Real(0L, s.bits())};
  const Real m = exp(s.re * log_x);
  const Real phase = s.im * log_x;
  return {m * cos(phase), m * sin(phase)};
}

}  // namespace qzeta
