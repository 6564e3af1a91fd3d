#pragma once

// Precision context, the q>1 base, error-carrying values and the elementary
// q-arithmetic (q-numbers, q-factorials, q-shifted factorials).

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qzeta/real.hpp"

namespace qzeta {

/// Raised for inputs outside an operation's domain (poles, overflow,
/// divergent products). Evaluators convert it into Status::domain_error.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Working precision for one evaluation. Passed explicitly everywhere.
class PrecisionCtx {
 public:
  static constexpr Bits kMinMantissa = 64;
  static constexpr Bits kMinGuard = 16;
  static constexpr Bits kMaxMantissa = 8192;

  explicit PrecisionCtx(Bits mantissa_bits = 128, Bits guard_bits = kMinGuard);

  Bits mantissa_bits() const { return mantissa_bits_; }
  Bits guard_bits() const { return guard_bits_; }
  /// Accumulation precision.
  Bits work_bits() const { return mantissa_bits_ + guard_bits_; }
  /// 2^-(mantissa_bits - guard_bits): the target absolute accuracy.
  long double abs_tol() const;
  /// Unit roundoff at the working precision.
  long double work_eps() const;
  /// Unit roundoff of the final rounding to mantissa_bits.
  long double output_eps() const;
  /// |q^x - 1| below this is treated as a pole: 2^-(mantissa_bits/2).
  long double pole_threshold() const;

  PrecisionCtx with_mantissa(Bits mantissa_bits) const { return PrecisionCtx(mantissa_bits, guard_bits_); }
  PrecisionCtx doubled() const { return with_mantissa(2 * mantissa_bits_); }

  friend bool operator==(const PrecisionCtx&, const PrecisionCtx&) = default;

 private:
  Bits mantissa_bits_;
  Bits guard_bits_;
};

/// The deformation parameter q > 1 with its cached natural logarithm.
class QBase {
 public:
  /// Throws std::invalid_argument unless q > 1 and finite.
  QBase(const Real& q, Bits bits);
  static QBase from_decimal(std::string_view text, Bits bits);

  const Real& q() const { return q_; }
  const Real& q_minus_1() const { return q_minus_1_; }
  const Real& log_q() const { return log_q_; }
  Bits bits() const { return log_q_.bits(); }

  /// The same q with log q recomputed at `bits` (q itself is never re-rounded
  /// to fewer bits than it was given with).
  QBase at(Bits bits) const;

  double approx() const { return q_.to_double(); }

 private:
  Real q_;
  Real q_minus_1_;
  Real log_q_;
};

enum class Status { converged, pole_proximate, domain_error };

std::string_view to_string(Status s);

/// A value, a rigorous absolute error bound, the number of series terms
/// summed, and a convergence status.
struct ValueWithError {
  CVal value;
  long double abs_error_bound = 0.0L;
  std::uint64_t terms_used = 0;
  Status status = Status::converged;
  std::string note;

  bool ok() const { return status == Status::converged; }

  static ValueWithError exact(CVal v);
  static ValueWithError failure(Status status, std::string note, Bits bits);
};

// Error-propagating arithmetic on ValueWithError. Rounding of the operation
// itself is charged at the result precision.
ValueWithError operator+(const ValueWithError& a, const ValueWithError& b);
ValueWithError operator-(const ValueWithError& a, const ValueWithError& b);
ValueWithError operator*(const ValueWithError& a, const ValueWithError& b);
ValueWithError operator*(const ValueWithError& a, const Real& c);
ValueWithError operator*(const ValueWithError& a, long c);

/// [a]_q = (q^a - 1)/(q - 1).
CVal q_number(const CVal& a, const QBase& base);

/// q^s = exp(s log q). Throws DomainError if the result overflows.
CVal q_pow(const QBase& base, const CVal& s);

/// s(s+1)...(s+k-1)/k!, by C(s,k) = C(s,k-1)(s+k-1)/k.
CVal rising_coeff(const CVal& s, std::uint64_t k);

/// [1]_q [2]_q ... [n]_q; 1 for n = 0.
Real q_factorial(std::uint64_t n, const QBase& base);

/// prod_{m=0}^{n-1} (1 - a ratio^m). With n = nullopt the infinite product
/// is taken, which requires |ratio| < 1 unless a = 0 (DomainError otherwise).
/// For q > 1 the convergent infinite form is obtained with ratio = 1/q.
CVal q_pochhammer(const CVal& a, const Real& ratio, std::optional<std::uint64_t> n);

/// 1/(q^x - 1). domain_error at an exact pole (x log q in 2 pi i Z),
/// pole_proximate when |q^x - 1| is below the context's pole threshold.
ValueWithError inv_qpow_minus_one(const QBase& base, const CVal& x, const PrecisionCtx& ctx);

/// If x log q / (2 pi i) is an integer b (Re x exactly 0, Im part within the
/// pole threshold of 2 pi b / log q), returns b.
std::optional<long> exact_pole_index(const CVal& x, const QBase& base, const PrecisionCtx& ctx);

}  // namespace qzeta
