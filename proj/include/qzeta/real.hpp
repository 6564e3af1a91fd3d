#pragma once

// Arbitrary-precision real and complex scalars.
//
// Real is a thin value-semantic wrapper over an mpfr_t. Every value carries
// its own precision in bits; binary operations produce a result at the larger
// of the two operand precisions. There is no ambient default precision.

#include <mpfr.h>

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

namespace qzeta {

using Bits = unsigned;

class Real {
 public:
  static constexpr Bits kDefaultBits = 64;

  Real() : Real(0L, kDefaultBits) {}
  Real(long v, Bits bits);
  Real(int v, Bits bits) : Real(static_cast<long>(v), bits) {}
  Real(double v, Bits bits);
  Real(long double v, Bits bits);
  Real(const Real& other, Bits bits);  // re-rounds to `bits`

  /// Correctly rounded conversion from decimal text ("1.5", "-2e-3").
  /// Throws std::invalid_argument on malformed input.
  static Real from_decimal(std::string_view text, Bits bits);

  Real(const Real& other);
  Real(Real&& other) noexcept;
  Real& operator=(const Real& other);  // adopts the source precision
  Real& operator=(Real&& other) noexcept;
  ~Real();

  Bits bits() const { return static_cast<Bits>(mpfr_get_prec(v_)); }
  Real rounded(Bits bits) const { return Real(*this, bits); }

  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  bool is_integer() const { return mpfr_integer_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }
  /// Binary exponent e with value = m * 2^e, 0.5 <= |m| < 1.
  long exponent() const { return mpfr_get_exp(v_); }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  long double to_long_double() const { return mpfr_get_ld(v_, MPFR_RNDN); }
  long to_long() const { return mpfr_get_si(v_, MPFR_RNDN); }

  /// Scientific notation with `digits` significant decimal digits.
  std::string to_string(int digits) const;

  Real operator-() const;
  Real& operator+=(const Real& rhs);
  Real& operator-=(const Real& rhs);
  Real& operator*=(const Real& rhs);
  Real& operator/=(const Real& rhs);
  Real& operator*=(long rhs);
  Real& operator/=(long rhs);

  friend Real operator+(const Real& a, const Real& b);
  friend Real operator-(const Real& a, const Real& b);
  friend Real operator*(const Real& a, const Real& b);
  friend Real operator/(const Real& a, const Real& b);
  friend Real operator+(const Real& a, long b);
  friend Real operator-(const Real& a, long b);
  friend Real operator-(long a, const Real& b);
  friend Real operator*(const Real& a, long b);
  friend Real operator*(long a, const Real& b) { return b * a; }
  friend Real operator/(const Real& a, long b);
  friend Real operator/(long a, const Real& b);

  friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
  friend std::partial_ordering operator<=>(const Real& a, const Real& b);
  friend bool operator==(const Real& a, long b) { return mpfr_cmp_si(a.v_, b) == 0; }
  friend std::partial_ordering operator<=>(const Real& a, long b);

  mpfr_srcptr raw() const { return v_; }
  mpfr_ptr raw() { return v_; }

 private:
  struct Uninit {};
  Real(Uninit, Bits bits);
  mpfr_t v_;

  friend Real abs(const Real&);
  friend Real sqrt(const Real&);
  friend Real exp(const Real&);
  friend Real expm1(const Real&);
  friend Real log(const Real&);
  friend Real log1p(const Real&);
  friend Real cos(const Real&);
  friend Real sin(const Real&);
  friend Real pow(const Real&, const Real&);
  friend Real pow(const Real&, long);
  friend Real ldexp(const Real&, long);
  friend Real round_nearest(const Real&);
  friend Real const_pi(Bits);
  friend Real fma_add(const Real&, const Real&, const Real&);
};

Real abs(const Real& x);
Real sqrt(const Real& x);
Real exp(const Real& x);
Real expm1(const Real& x);
Real log(const Real& x);
Real log1p(const Real& x);
Real cos(const Real& x);
Real sin(const Real& x);
Real pow(const Real& x, const Real& y);
Real pow(const Real& x, long n);
Real ldexp(const Real& x, long e);
Real round_nearest(const Real& x);
Real const_pi(Bits bits);
/// a*b + c with a single rounding, at the widest operand precision.
Real fma_add(const Real& a, const Real& b, const Real& c);

inline Real max(const Real& a, const Real& b) { return a < b ? b : a; }
inline Real min(const Real& a, const Real& b) { return b < a ? b : a; }

/// Complex value at working precision. Components are independent Reals.
struct CVal {
  Real re;
  Real im;

  CVal() = default;
  CVal(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
  explicit CVal(Real r) : re(std::move(r)), im(0L, re.bits()) {}
  CVal(long r, Bits bits) : re(r, bits), im(0L, bits) {}

  static CVal from_text(std::string_view text, Bits bits);  // "re" or "re,im"

  Bits bits() const { return re.bits() > im.bits() ? re.bits() : im.bits(); }
  CVal rounded(Bits bits) const { return {re.rounded(bits), im.rounded(bits)}; }
  bool is_real() const { return im.is_zero(); }
  bool is_zero() const { return re.is_zero() && im.is_zero(); }
  bool is_finite() const { return re.is_finite() && im.is_finite(); }

  CVal operator-() const { return {-re, -im}; }
  CVal& operator+=(const CVal& o);
  CVal& operator-=(const CVal& o);
  CVal& operator*=(const CVal& o);
  CVal& operator*=(const Real& o);

  friend CVal operator+(CVal a, const CVal& b) { return a += b; }
  friend CVal operator-(CVal a, const CVal& b) { return a -= b; }
  friend CVal operator*(CVal a, const CVal& b) { return a *= b; }
  friend CVal operator*(CVal a, const Real& b) { return a *= b; }
  friend CVal operator*(const Real& b, CVal a) { return a *= b; }
  friend CVal operator/(const CVal& a, const CVal& b);
  friend CVal operator+(CVal a, long b) { a.re = a.re + b; return a; }
  friend CVal operator-(CVal a, long b) { a.re = a.re - b; return a; }
  friend bool operator==(const CVal& a, const CVal& b) { return a.re == b.re && a.im == b.im; }
};

Real abs(const CVal& z);
CVal exp(const CVal& z);
/// exp(z) - 1 without cancellation near z = 0.
CVal expm1(const CVal& z);
/// exp(s * log_x) for a positive real base given by its logarithm.
CVal exp_times(const CVal& s, const Real& log_x);

}  // namespace qzeta
