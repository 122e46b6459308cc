#pragma once

#include "gstar/polydiffop.hpp"
#include "gstar/rational.hpp"

namespace testutil {

inline gstar::Rational binom(int n, int k) {
  return gstar::factorial(n) / (gstar::factorial(k) * gstar::factorial(n - k));
}

// Closed-form constant-coefficient star product on the plane for the unit
// antisymmetric bivector: coefficient k is
//   (1/(2^k k!)) sum_i (-1)^i C(k,i) d1^{k-i} d2^i  (x)  d1^i d2^{k-i}.
// Associative to every order; order one is half the standard bracket.
inline gstar::StarSeries closed_form_star(int order) {
  using namespace gstar;
  StarSeries s = StarSeries::undeformed(2, order);
  for (int k = 1; k <= order; ++k) {
    PolyDiffOp op(2, 2);
    Rational pref = Rational(1) / (factorial(k) * Rational(1LL << k));
    for (int i = 0; i <= k; ++i) {
      MultiIndex a(2, 0), b(2, 0);
      a[0] = k - i;
      a[1] = i;
      b[0] = i;
      b[1] = k - i;
      op.add_term({a, b},
                  PolyCoeff::constant(
                      2, pref * Rational(parity_sign(i)) * binom(k, i)));
    }
    s.coeff[k] = op;
  }
  return s;
}

}  // namespace testutil
