#pragma once

#include <random>
#include <vector>

#include "gstar/multivector.hpp"

namespace testutil {

using Rng = std::mt19937_64;

inline int rand_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Sparse polynomial with small integer coefficients, degree <= max_deg.
inline gstar::PolyCoeff random_poly(Rng& rng, int d, int max_deg,
                                    int terms = 2) {
  gstar::PolyCoeff p(d);
  for (int t = 0; t < terms; ++t) {
    gstar::MultiIndex e(d, 0);
    int deg = rand_int(rng, 0, max_deg);
    for (int i = 0; i < deg; ++i) e[rand_int(rng, 0, d - 1)] += 1;
    p.add_monomial(e, gstar::Rational(rand_int(rng, -3, 3)));
  }
  return p;
}

// Multivector with a few random components.
inline gstar::Multivector random_multivector(Rng& rng, int d, int k,
                                             int max_deg = 1, int terms = 2) {
  gstar::Multivector v(d, k);
  for (int t = 0; t < terms; ++t) {
    gstar::IndexTuple idx(k);
    for (int i = 0; i < k; ++i) idx[i] = rand_int(rng, 1, d);
    v.add_term(idx, random_poly(rng, d, max_deg, 1));
  }
  return v;
}

// Distinct index tuple (guaranteed nonzero wedge basis element).
inline gstar::IndexTuple random_distinct_tuple(Rng& rng, int d, int k) {
  std::vector<int> pool;
  for (int i = 1; i <= d; ++i) pool.push_back(i);
  for (int i = 0; i < k; ++i)
    std::swap(pool[i], pool[rand_int(rng, i, d - 1)]);
  return gstar::IndexTuple(pool.begin(), pool.begin() + k);
}

}  // namespace testutil
