#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gstar/rational.hpp"

namespace gstar {

// Exponent vector of length d; entry i is the power of coordinate x^{i+1}.
using MultiIndex = std::vector<int>;

// Polynomial with exact rational coefficients in d commuting coordinates.
// Invariant: every stored coefficient is nonzero and every key has length d.
class PolyCoeff {
 public:
  PolyCoeff() : d_(0) {}
  explicit PolyCoeff(int d) : d_(d) {
    if (d < 0) throw std::invalid_argument("PolyCoeff: negative dimension");
  }

  static PolyCoeff zero(int d) { return PolyCoeff(d); }

  static PolyCoeff constant(int d, const Rational& c) {
    PolyCoeff p(d);
    p.add_monomial(MultiIndex(d, 0), c);
    return p;
  }

  static PolyCoeff monomial(int d, const MultiIndex& exps,
                            const Rational& c = Rational(1)) {
    PolyCoeff p(d);
    p.add_monomial(exps, c);
    return p;
  }

  int dim() const { return d_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<MultiIndex, Rational>& terms() const { return terms_; }

  void add_monomial(const MultiIndex& exps, const Rational& c) {
    if (static_cast<int>(exps.size()) != d_)
      throw std::invalid_argument("PolyCoeff: exponent length mismatch");
    for (int e : exps)
      if (e < 0) throw std::invalid_argument("PolyCoeff: negative exponent");
    if (c == 0) return;
    auto it = terms_.find(exps);
    if (it == terms_.end()) {
      terms_.emplace(exps, c);
    } else {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  PolyCoeff& operator+=(const PolyCoeff& o) {
    check_dim(o);
    for (const auto& [e, c] : o.terms_) add_monomial(e, c);
    return *this;
  }

  PolyCoeff& operator-=(const PolyCoeff& o) {
    check_dim(o);
    for (const auto& [e, c] : o.terms_) add_monomial(e, -c);
    return *this;
  }

  friend PolyCoeff operator+(PolyCoeff a, const PolyCoeff& b) { return a += b; }
  friend PolyCoeff operator-(PolyCoeff a, const PolyCoeff& b) { return a -= b; }

  friend PolyCoeff operator*(const PolyCoeff& a, const PolyCoeff& b) {
    a.check_dim(b);
    PolyCoeff r(a.d_);
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        MultiIndex e(a.d_);
        for (int i = 0; i < a.d_; ++i) e[i] = ea[i] + eb[i];
        r.add_monomial(e, ca * cb);
      }
    return r;
  }

  friend PolyCoeff operator*(const Rational& s, const PolyCoeff& p) {
    PolyCoeff r(p.d_);
    if (s == 0) return r;
    for (const auto& [e, c] : p.terms_) r.terms_.emplace(e, s * c);
    return r;
  }

  friend PolyCoeff operator-(const PolyCoeff& p) { return Rational(-1) * p; }

  bool operator==(const PolyCoeff& o) const {
    return d_ == o.d_ && terms_ == o.terms_;
  }
  bool operator!=(const PolyCoeff& o) const { return !(*this == o); }

  // Partial derivative with respect to coordinate i (1-based).
  PolyCoeff derivative(int i) const {
    if (i < 1 || i > d_) throw std::out_of_range("PolyCoeff: bad coordinate");
    PolyCoeff r(d_);
    for (const auto& [e, c] : terms_) {
      if (e[i - 1] == 0) continue;
      MultiIndex f = e;
      f[i - 1] -= 1;
      r.add_monomial(f, c * e[i - 1]);
    }
    return r;
  }

  // Iterated derivative D^alpha = prod_i (d/dx^i)^{alpha_i}.
  PolyCoeff derivative(const MultiIndex& alpha) const {
    if (static_cast<int>(alpha.size()) != d_)
      throw std::invalid_argument("PolyCoeff: derivative index mismatch");
    PolyCoeff r = *this;
    for (int i = 0; i < d_; ++i)
      for (int k = 0; k < alpha[i]; ++k) r = r.derivative(i + 1);
    return r;
  }

  int total_degree() const {
    int deg = -1;
    for (const auto& [e, c] : terms_) {
      int s = 0;
      for (int x : e) s += x;
      if (s > deg) deg = s;
    }
    return deg;  // -1 for the zero polynomial
  }

  // Sum of absolute values of coefficients, as a double.
  double l1_norm() const {
    double s = 0;
    for (const auto& [e, c] : terms_) s += std::abs(to_double(c));
    return s;
  }

  // Coefficients replaced by their absolute values.
  PolyCoeff abs() const {
    PolyCoeff r(d_);
    for (const auto& [e, c] : terms_) r.terms_.emplace(e, c < 0 ? -c : c);
    return r;
  }

  std::string to_string() const;

 private:
  void check_dim(const PolyCoeff& o) const {
    if (d_ != o.d_) throw std::invalid_argument("PolyCoeff: dimension mismatch");
  }

  int d_;
  std::map<MultiIndex, Rational> terms_;
};

}  // namespace gstar
