#include <doctest.h>

#include <vector>

#include "gstar/multivector.hpp"
#include "test_util.hpp"

using namespace gstar;
using testutil::Rng;

namespace {

PolyCoeff x(int d, int i) {
  MultiIndex e(d, 0);
  e[i - 1] = 1;
  return PolyCoeff::monomial(d, e, Rational(1));
}

PolyCoeff one(int d) { return PolyCoeff::constant(d, Rational(1)); }

// Decomposable multivector described factor by factor: coefficient c_r on
// direction i_r.  The wedge of the factors c_1 d_{i_1} ^ ... ^ c_k d_{i_k}.
struct Factor {
  PolyCoeff c;
  int idx;
};

Multivector from_factors(int d, const std::vector<Factor>& fs) {
  Multivector v = Multivector::from_function(one(d));
  for (const auto& f : fs) v = wedge(v, Multivector::term(d, {f.idx}, f.c));
  return v;
}

// Bracket of two decomposables, written out from first principles: sum over
// factor pairs of the Lie bracket of the chosen vector fields wedged with the
// remaining factors, with the alternating prefactor.
Multivector schouten_factor_oracle(int d, const std::vector<Factor>& xi,
                                   const std::vector<Factor>& eta) {
  int k1 = static_cast<int>(xi.size());
  int k2 = static_cast<int>(eta.size());
  Multivector out(d, k1 + k2 - 1);
  for (int r = 1; r <= k1; ++r) {
    for (int s = 1; s <= k2; ++s) {
      int sgn = ((r + s + (k1 - 1) * (k2 - 1)) % 2 == 0) ? 1 : -1;
      PolyCoeff rest = one(d);
      IndexTuple rest_idx;
      for (int rr = 1; rr <= k1; ++rr)
        if (rr != r) {
          rest = rest * xi[rr - 1].c;
          rest_idx.push_back(xi[rr - 1].idx);
        }
      for (int ss = 1; ss <= k2; ++ss)
        if (ss != s) {
          rest = rest * eta[ss - 1].c;
          rest_idx.push_back(eta[ss - 1].idx);
        }
      const PolyCoeff& f = xi[r - 1].c;
      const PolyCoeff& g = eta[s - 1].c;
      int fi = xi[r - 1].idx;
      int gi = eta[s - 1].idx;
      // [f d_fi, g d_gi] = f (d_fi g) d_gi - g (d_gi f) d_fi.
      IndexTuple t1 = {gi};
      t1.insert(t1.end(), rest_idx.begin(), rest_idx.end());
      out.add_term(t1, Rational(sgn) * (f * g.derivative(fi) * rest));
      IndexTuple t2 = {fi};
      t2.insert(t2.end(), rest_idx.begin(), rest_idx.end());
      out.add_term(t2, Rational(-sgn) * (g * f.derivative(gi) * rest));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("tuple sorting tracks the permutation sign") {
  IndexTuple t{2, 1};
  CHECK(sort_with_sign(t) == -1);
  CHECK(t == IndexTuple{1, 2});
  IndexTuple u{3, 1, 2};
  CHECK(sort_with_sign(u) == 1);
  CHECK(u == IndexTuple{1, 2, 3});
  IndexTuple r{1, 1};
  CHECK(sort_with_sign(r) == 0);

  CHECK(permutation_sign({0, 1, 2}) == 1);
  CHECK(permutation_sign({1, 0, 2}) == -1);
  CHECK(permutation_sign({2, 0, 1}) == 1);
  CHECK(permutation_sign({1, 1}) == 0);

  Rng rng(11);
  for (int it = 0; it < 50; ++it) {
    int k = testutil::rand_int(rng, 1, 6);
    std::vector<int> sigma(k), tau(k);
    for (int i = 0; i < k; ++i) sigma[i] = tau[i] = i;
    std::shuffle(sigma.begin(), sigma.end(), rng);
    std::shuffle(tau.begin(), tau.end(), rng);
    std::vector<int> comp(k);
    for (int i = 0; i < k; ++i) comp[i] = sigma[tau[i]];
    CHECK(permutation_sign(comp) ==
          permutation_sign(sigma) * permutation_sign(tau));
  }
}

TEST_CASE("components are antisymmetric under index exchange") {
  Multivector v(2, 2);
  v.add_term({1, 2}, x(2, 1));
  CHECK(v.component({1, 2}) == x(2, 1));
  CHECK(v.component({2, 1}) == -x(2, 1));
  CHECK(v.component({1, 1}).is_zero());

  // Adding on a decreasing tuple folds back with a sign.
  Multivector w(2, 2);
  w.add_term({2, 1}, x(2, 1));
  CHECK((v + w).is_zero());
}

TEST_CASE("coframe pairing carries the 1/k! normalization") {
  Multivector wdg = Multivector::term(2, {1, 2}, one(2));
  CHECK(pair_with_coframe(wdg, {1, 2}) ==
        PolyCoeff::constant(2, Rational(1, 2)));
  CHECK(pair_with_coframe(wdg, {2, 1}) ==
        PolyCoeff::constant(2, Rational(-1, 2)));
  CHECK(pair_with_coframe(wdg, {1, 1}).is_zero());

  Multivector f = Multivector::from_function(x(2, 1));
  CHECK(pair_with_coframe(f, {}) == x(2, 1));

  Multivector vf = Multivector::term(2, {2}, x(2, 1));
  CHECK(pair_with_coframe(vf, {2}) == x(2, 1));
  CHECK(pair_with_coframe(vf, {1}).is_zero());
}

TEST_CASE("wedge product matches the shuffle expansion") {
  Rng rng(23);
  for (int it = 0; it < 100; ++it) {
    int d = testutil::rand_int(rng, 2, 4);
    int k1 = testutil::rand_int(rng, 0, 2);
    int k2 = testutil::rand_int(rng, 0, d - k1);
    Multivector a = testutil::random_multivector(rng, d, k1);
    Multivector b = testutil::random_multivector(rng, d, k2);
    Multivector w = wedge(a, b);
    if (k1 + k2 > d) {
      CHECK(w.is_zero());
      continue;
    }
    // Component on a strictly increasing tuple U: sum over splittings of U
    // into a k1-subset and its complement, signed by the unshuffle.
    IndexTuple u = testutil::random_distinct_tuple(rng, d, k1 + k2);
    sort_with_sign(u);
    PolyCoeff expect = PolyCoeff::zero(d);
    std::vector<int> pick(k1 + k2, 0);
    std::fill(pick.begin(), pick.begin() + k1, 1);
    std::sort(pick.begin(), pick.end());
    do {
      IndexTuple u1, u2;
      std::vector<int> perm;
      for (int i = 0; i < k1 + k2; ++i)
        if (pick[i]) {
          u1.push_back(u[i]);
          perm.push_back(i);
        }
      for (int i = 0; i < k1 + k2; ++i)
        if (!pick[i]) {
          u2.push_back(u[i]);
          perm.push_back(i);
        }
      expect += Rational(permutation_sign(perm)) *
                (a.component(u1) * b.component(u2));
    } while (std::next_permutation(pick.begin(), pick.end()));
    CHECK(w.component(u) == expect);
  }
}

TEST_CASE("bracket of decomposables matches the factor expansion") {
  Rng rng(37);
  int checked = 0;
  while (checked < 120) {
    int d = testutil::rand_int(rng, 2, 3);
    int k1 = testutil::rand_int(rng, 1, d);
    int k2 = testutil::rand_int(rng, 1, d);
    // Distinct directions per factor list keep the decomposable nonzero.
    IndexTuple i1 = testutil::random_distinct_tuple(rng, d, k1);
    IndexTuple i2 = testutil::random_distinct_tuple(rng, d, k2);
    std::vector<Factor> xi, eta;
    for (int i : i1) xi.push_back({testutil::random_poly(rng, d, 2, 1), i});
    for (int i : i2) eta.push_back({testutil::random_poly(rng, d, 2, 1), i});
    Multivector a = from_factors(d, xi);
    Multivector b = from_factors(d, eta);
    Multivector got = schouten_modified(a, b);
    Multivector want = schouten_factor_oracle(d, xi, eta);
    CHECK(got.dim() == want.dim());
    CHECK(got.degree() == want.degree());
    CHECK((got - want).is_zero());
    ++checked;
  }
}

TEST_CASE("bracket is bilinear") {
  Rng rng(41);
  for (int it = 0; it < 40; ++it) {
    int d = 3;
    int k1 = testutil::rand_int(rng, 0, 2);
    int k2 = testutil::rand_int(rng, 1, 2);
    Multivector a1 = testutil::random_multivector(rng, d, k1);
    Multivector a2 = testutil::random_multivector(rng, d, k1);
    Multivector b = testutil::random_multivector(rng, d, k2);
    Multivector lhs = schouten_modified(a1 + a2, b);
    Multivector rhs = schouten_modified(a1, b) + schouten_modified(a2, b);
    CHECK((lhs - rhs).is_zero());
  }
}

TEST_CASE("bracket restricts to the Lie bracket on vector fields") {
  int d = 2;
  Multivector a = Multivector::term(d, {1}, x(d, 1));        // x1 d1
  Multivector b = Multivector::term(d, {2}, x(d, 1) * x(d, 2));  // x1 x2 d2
  // [x1 d1, x1 x2 d2] = x1 x2 d2.
  Multivector want = Multivector::term(d, {2}, x(d, 1) * x(d, 2));
  CHECK((schouten_modified(a, b) - want).is_zero());
}

TEST_CASE("bracket has graded antisymmetry in the shifted degree") {
  Rng rng(53);
  for (int it = 0; it < 60; ++it) {
    int d = 3;
    int k1 = testutil::rand_int(rng, 0, 3);
    int k2 = testutil::rand_int(rng, 1, 3);
    Multivector a = testutil::random_multivector(rng, d, k1);
    Multivector b = testutil::random_multivector(rng, d, k2);
    Multivector lhs = schouten_modified(a, b);
    int sgn = (((k1 - 1) * (k2 - 1)) % 2 == 0) ? 1 : -1;
    Multivector rhs = Rational(-sgn) * schouten_modified(b, a);
    CHECK((lhs - rhs).is_zero());
  }
}

TEST_CASE("half-contraction matches the antisymmetrized component formula") {
  Rng rng(67);
  int checked = 0;
  while (checked < 100) {
    int d = testutil::rand_int(rng, 2, 3);
    int k1 = testutil::rand_int(rng, 1, d);
    int k2 = testutil::rand_int(rng, 0, d + 1 - k1);
    Multivector a = testutil::random_multivector(rng, d, k1);
    Multivector b = testutil::random_multivector(rng, d, k2);
    Multivector got = bullet(a, b);
    int k = k1 + k2 - 1;
    REQUIRE(got.degree() == k);
    IndexTuple u = testutil::random_distinct_tuple(rng, d, k);
    sort_with_sign(u);
    // Average over all orderings of u of: insert a summed direction v into
    // each slot of the first block, differentiate the second factor by v.
    PolyCoeff expect = PolyCoeff::zero(d);
    std::vector<int> pos(k);
    for (int i = 0; i < k; ++i) pos[i] = i;
    std::sort(pos.begin(), pos.end());
    do {
      int es = permutation_sign(pos);
      for (int v = 1; v <= d; ++v) {
        for (int r = 1; r <= k1; ++r) {
          IndexTuple ia;
          for (int i = 0; i < r - 1; ++i) ia.push_back(u[pos[i]]);
          ia.push_back(v);
          for (int i = r - 1; i < k1 - 1; ++i) ia.push_back(u[pos[i]]);
          IndexTuple ib;
          for (int i = k1 - 1; i < k; ++i) ib.push_back(u[pos[i]]);
          int sgn = es * ((r - 1) % 2 == 0 ? 1 : -1);
          expect += Rational(sgn) *
                    (a.component(ia) * b.component(ib).derivative(v));
        }
      }
    } while (std::next_permutation(pos.begin(), pos.end()));
    // Each canonical term is hit k1! k2! times: the inserted direction may
    // occupy any of the k1 slots, the rest in any order.
    expect = (Rational(1) / (factorial(k1) * factorial(k2))) * expect;
    CHECK(got.component(u) == expect);
    ++checked;
  }
}

TEST_CASE("half-contraction antisymmetrization recovers the bracket") {
  Rng rng(71);
  for (int it = 0; it < 60; ++it) {
    int d = 3;
    int k1 = testutil::rand_int(rng, 1, 3);
    int k2 = testutil::rand_int(rng, 1, 3);
    Multivector a = testutil::random_multivector(rng, d, k1);
    Multivector b = testutil::random_multivector(rng, d, k2);
    Multivector lhs = bullet(a, b);
    if ((k1 * k2) % 2 == 0)
      lhs += bullet(b, a);
    else
      lhs -= bullet(b, a);
    int sgn = (((k1 - 1) * k2) % 2 == 0) ? 1 : -1;
    Multivector rhs = Rational(sgn) * schouten_modified(a, b);
    CHECK((lhs - rhs).is_zero());
  }
}

TEST_CASE("tangent differential squares to zero at a flat bivector") {
  int d = 3;
  // gamma = x3 d1^d2 + x1 d2^d3 satisfies [gamma, gamma] = 0.
  Multivector gamma(d, 2);
  gamma.add_term({1, 2}, x(d, 3));
  gamma.add_term({2, 3}, x(d, 1));
  CHECK(schouten_modified(gamma, gamma).is_zero());

  Rng rng(83);
  for (int k = 0; k <= 2; ++k) {
    for (int it = 0; it < 10; ++it) {
      Multivector delta = testutil::random_multivector(rng, d, k, 2, 3);
      Multivector once = tangent_diff_q(delta, gamma);
      Multivector twice = tangent_diff_q(once, gamma);
      CHECK(twice.is_zero());
    }
  }

  // A non-flat bivector is detected.
  Multivector bad(d, 2);
  bad.add_term({1, 2}, x(d, 2));
  bad.add_term({2, 3}, PolyCoeff::constant(d, 1));
  CHECK(!schouten_modified(bad, bad).is_zero());
}

TEST_CASE("flatness residual of a constant family") {
  int d = 3;
  Multivector gamma(d, 2);
  gamma.add_term({1, 2}, x(d, 3));
  gamma.add_term({2, 3}, x(d, 1));
  HbarSeriesMV fam = HbarSeriesMV::single(gamma, 3);
  HbarSeriesMV res = maurer_cartan_residual(fam);
  for (const auto& c : res.coeff) CHECK(c.is_zero());

  Multivector bad(d, 2);
  bad.add_term({1, 2}, x(d, 2));
  bad.add_term({2, 3}, PolyCoeff::constant(d, 1));
  HbarSeriesMV fam2 = HbarSeriesMV::single(bad, 2);
  HbarSeriesMV res2 = maurer_cartan_residual(fam2);
  CHECK(res2.coeff[0].is_zero());
  CHECK(res2.coeff[1].is_zero());
  // Order two picks up -(1/2)[bad, bad] = -bullet(bad, bad).
  Multivector want = Rational(-1) * bullet(bad, bad);
  CHECK((res2.coeff[2] - want).is_zero());
}

TEST_CASE("series validation rejects mismatched dimensions") {
  HbarSeriesMV s;
  s.d = 2;
  s.order = 1;
  s.coeff.push_back(Multivector(2, 2));
  s.coeff.push_back(Multivector(3, 2));
  CHECK_THROWS(s.validate());
}
