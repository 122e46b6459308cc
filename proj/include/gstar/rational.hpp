#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace gstar {

// Exact rational scalar used throughout the algebraic layer.
using Rational = boost::multiprecision::cpp_rational;

inline Rational rat(long long num, long long den = 1) {
  return Rational(num, den);
}

// (-1)^k for possibly negative k.
inline int parity_sign(long long k) {
  return (k % 2 == 0) ? 1 : -1;
}

inline double to_double(const Rational& r) {
  return r.convert_to<double>();
}

// n! as an exact rational; n must be small and non-negative.
inline Rational factorial(int n) {
  Rational f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace gstar
