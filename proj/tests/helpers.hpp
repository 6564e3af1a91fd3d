#pragma once

#include <string>

#include "qzeta/qnum.hpp"

namespace qzeta::test {

inline Real ref(const char* text) { return Real::from_decimal(text, 256); }

inline long double dist(const CVal& a, const Real& re, const Real& im = Real(0L, 256)) {
  return abs(CVal(a.re.rounded(256) - re, a.im.rounded(256) - im)).to_long_double();
}

inline long double dist(const CVal& a, const CVal& b) { return abs(a.rounded(256) - b.rounded(256)).to_long_double(); }

inline CVal cv(const char* text) { return CVal::from_text(text, 256); }

}  // namespace qzeta::test
