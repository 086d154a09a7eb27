#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace psl {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)); -inf when both are -inf.
inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (a == kNegInf) return kNegInf;
  return a + std::log1p(std::exp(b - a));
}

/// Two-pass stable log-sum-exp in index order; -inf for empty or all -inf input.
inline double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = x > m ? x : m;
  if (m == kNegInf) return kNegInf;
  if (m == std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

/// log(1 - exp(x)) for x <= 0, via expm1 below -ln 2 and log1p above.
inline double log1m_exp(double x) {
  if (x > 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (x == 0.0) return kNegInf;
  if (x < -M_LN2) return std::log1p(-std::exp(x));
  return std::log(-std::expm1(x));
}

}  // namespace psl
