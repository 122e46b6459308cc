#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "gstar/poly.hpp"

namespace gstar {

// Coordinate index tuple, entries in 1..d.  Canonical keys are strictly
// increasing; arbitrary tuples are resolved through antisymmetry.
using IndexTuple = std::vector<int>;

// Sorts t in place by simple transpositions; returns the sign of the sort
// permutation, or 0 if t has a repeated entry.
int sort_with_sign(IndexTuple& t);

// Sign of the permutation sigma (0-based image list); 0 if not a permutation.
int permutation_sign(const std::vector<int>& sigma);

// Antisymmetric multivector field of degree k on R^d with polynomial
// coefficients: sum over increasing tuples i1<...<ik of c_{i1..ik}
// d_{i1}^...^d_{ik}.  Degree 0 is a single polynomial.
class Multivector {
 public:
  Multivector() : d_(0), k_(0) {}
  // k may exceed d: such a field has no admissible components and is zero.
  Multivector(int d, int k) : d_(d), k_(k) {
    if (d < 0 || k < 0)
      throw std::invalid_argument("Multivector: bad (d, k)");
  }

  static Multivector zero(int d, int k) { return Multivector(d, k); }

  static Multivector from_function(const PolyCoeff& f) {
    Multivector v(f.dim(), 0);
    v.add_term({}, f);
    return v;
  }

  // Single term c * d_{t1}^...^d_{tk} for an arbitrary (unsorted) tuple.
  static Multivector term(int d, const IndexTuple& t, const PolyCoeff& c) {
    Multivector v(d, static_cast<int>(t.size()));
    v.add_term(t, c);
    return v;
  }

  int dim() const { return d_; }
  int degree() const { return k_; }
  bool is_zero() const { return comps_.empty(); }
  const std::map<IndexTuple, PolyCoeff>& components() const { return comps_; }

  // Adds c on the wedge basis element indexed by an arbitrary tuple,
  // resolving order and repeats by antisymmetry.
  void add_term(IndexTuple t, const PolyCoeff& c) {
    if (static_cast<int>(t.size()) != k_)
      throw std::invalid_argument("Multivector: tuple length mismatch");
    if (c.dim() != d_)
      throw std::invalid_argument("Multivector: coefficient dimension mismatch");
    for (int i : t)
      if (i < 1 || i > d_)
        throw std::invalid_argument("Multivector: index out of range");
    if (c.is_zero()) return;
    int s = sort_with_sign(t);
    if (s == 0) return;
    auto it = comps_.find(t);
    PolyCoeff add = (s == 1) ? c : -c;
    if (it == comps_.end()) {
      comps_.emplace(std::move(t), std::move(add));
    } else {
      it->second += add;
      if (it->second.is_zero()) comps_.erase(it);
    }
  }

  // Signed coefficient for an arbitrary tuple: component(sigma(I)) =
  // sign(sigma) * component(I), zero on repeated entries.
  PolyCoeff component(IndexTuple t) const {
    if (static_cast<int>(t.size()) != k_)
      throw std::invalid_argument("Multivector: tuple length mismatch");
    int s = sort_with_sign(t);
    if (s == 0) return PolyCoeff::zero(d_);
    auto it = comps_.find(t);
    if (it == comps_.end()) return PolyCoeff::zero(d_);
    return s == 1 ? it->second : -it->second;
  }

  Multivector& operator+=(const Multivector& o) {
    check_shape(o);
    for (const auto& [t, c] : o.comps_) add_term(t, c);
    return *this;
  }
  Multivector& operator-=(const Multivector& o) {
    check_shape(o);
    for (const auto& [t, c] : o.comps_) add_term(t, -c);
    return *this;
  }
  friend Multivector operator+(Multivector a, const Multivector& b) {
    return a += b;
  }
  friend Multivector operator-(Multivector a, const Multivector& b) {
    return a -= b;
  }
  friend Multivector operator*(const Rational& s, const Multivector& v) {
    Multivector r(v.d_, v.k_);
    if (s == 0) return r;
    for (const auto& [t, c] : v.comps_) r.comps_.emplace(t, s * c);
    return r;
  }
  friend Multivector operator-(const Multivector& v) {
    return Rational(-1) * v;
  }

  bool operator==(const Multivector& o) const {
    return d_ == o.d_ && k_ == o.k_ && comps_ == o.comps_;
  }
  bool operator!=(const Multivector& o) const { return !(*this == o); }

  std::string to_string() const;

 private:
  void check_shape(const Multivector& o) const {
    if (d_ != o.d_ || k_ != o.k_)
      throw std::invalid_argument("Multivector: shape mismatch");
  }

  int d_;
  int k_;
  std::map<IndexTuple, PolyCoeff> comps_;
};

// Pairing with the coframe element dx_{j1}^...^dx_{jk}: equals
// (1/k!) * signed component.  pair(d1^d2, (1,2)) = 1/2.
PolyCoeff pair_with_coframe(const Multivector& v, const IndexTuple& j);

// Exterior product; degree adds, capped by antisymmetry.
Multivector wedge(const Multivector& a, const Multivector& b);

// Modified Schouten bracket: the opposite of the classical Schouten bracket,
// extended bilinearly from decomposable terms.  Degree k1 + k2 - 1; on a pair
// of vector fields it is the Lie bracket.
Multivector schouten_modified(const Multivector& a, const Multivector& b);

// Half-contraction product: for decomposables, insert each factor of the
// first argument into the coefficient derivative of the second.  Requires
// degree(a) >= 1.
Multivector bullet(const Multivector& a, const Multivector& b);

// Differential on the tangent space at a solution gamma of the Maurer-Cartan
// equation: delta maps to [delta, gamma].
Multivector tangent_diff_q(const Multivector& delta, const Multivector& gamma);

// Polynomial family in the formal parameter: value coeff[0] + coeff[1] h +
// ... + coeff[N] h^N.  All coefficients share d (degrees may differ).
struct HbarSeriesMV {
  int d = 0;
  int order = 0;  // N
  std::vector<Multivector> coeff;

  static HbarSeriesMV single(const Multivector& v, int order);
  void validate() const;
};

// Residual of the Maurer-Cartan equation for the element h*gamma(h):
// coefficient n of the output is -(1/2) sum_{i+j=n-2} [gamma_i, gamma_j],
// truncated at the input order.  Zero iff h*gamma(h) is flat to that order.
HbarSeriesMV maurer_cartan_residual(const HbarSeriesMV& gamma);

}  // namespace gstar
