#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "gstar/poly.hpp"

namespace gstar {

// Polydifferential operator of arity m >= 0 on polynomials over R^d:
// sum of terms c(x) * (D^{a_1} f_1) ... (D^{a_m} f_m).  Arity 0 is a
// plain polynomial viewed as an element of the complex.
// Invariant: every key is a list of m multi-indices, coefficients nonzero.
class PolyDiffOp {
 public:
  PolyDiffOp() : d_(0), m_(0) {}
  PolyDiffOp(int d, int m) : d_(d), m_(m) {
    if (d < 0 || m < 0) throw std::invalid_argument("PolyDiffOp: bad shape");
  }

  static PolyDiffOp zero(int d, int m) { return PolyDiffOp(d, m); }

  // Pointwise multiplication of two arguments.
  static PolyDiffOp multiplication(int d) {
    PolyDiffOp op(d, 2);
    op.add_term({MultiIndex(d, 0), MultiIndex(d, 0)},
                PolyCoeff::constant(d, 1));
    return op;
  }

  static PolyDiffOp identity(int d) {
    PolyDiffOp op(d, 1);
    op.add_term({MultiIndex(d, 0)}, PolyCoeff::constant(d, 1));
    return op;
  }

  static PolyDiffOp from_element(const PolyCoeff& p) {
    PolyDiffOp op(p.dim(), 0);
    op.add_term({}, p);
    return op;
  }

  int dim() const { return d_; }
  int arity() const { return m_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<std::vector<MultiIndex>, PolyCoeff>& terms() const {
    return terms_;
  }

  void add_term(const std::vector<MultiIndex>& derivs, const PolyCoeff& c) {
    if (static_cast<int>(derivs.size()) != m_)
      throw std::invalid_argument("PolyDiffOp: deriv count mismatch");
    for (const auto& a : derivs)
      if (static_cast<int>(a.size()) != d_)
        throw std::invalid_argument("PolyDiffOp: deriv length mismatch");
    if (c.dim() != d_)
      throw std::invalid_argument("PolyDiffOp: coefficient dim mismatch");
    if (c.is_zero()) return;
    auto it = terms_.find(derivs);
    if (it == terms_.end()) {
      terms_.emplace(derivs, c);
    } else {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  PolyCoeff apply(const std::vector<PolyCoeff>& args) const {
    if (static_cast<int>(args.size()) != m_)
      throw std::invalid_argument("PolyDiffOp: argument count mismatch");
    for (const auto& f : args)
      if (f.dim() != d_)
        throw std::invalid_argument("PolyDiffOp: argument dim mismatch");
    PolyCoeff out(d_);
    for (const auto& [derivs, c] : terms_) {
      PolyCoeff t = c;
      for (int j = 0; j < m_ && !t.is_zero(); ++j)
        t = t * args[j].derivative(derivs[j]);
      out += t;
    }
    return out;
  }

  PolyDiffOp& operator+=(const PolyDiffOp& o) {
    check_shape(o);
    for (const auto& [dv, c] : o.terms_) add_term(dv, c);
    return *this;
  }
  PolyDiffOp& operator-=(const PolyDiffOp& o) {
    check_shape(o);
    for (const auto& [dv, c] : o.terms_) add_term(dv, -c);
    return *this;
  }
  friend PolyDiffOp operator+(PolyDiffOp a, const PolyDiffOp& b) {
    return a += b;
  }
  friend PolyDiffOp operator-(PolyDiffOp a, const PolyDiffOp& b) {
    return a -= b;
  }
  friend PolyDiffOp operator*(const Rational& s, const PolyDiffOp& op) {
    PolyDiffOp r(op.d_, op.m_);
    if (s == 0) return r;
    for (const auto& [dv, c] : op.terms_) r.terms_.emplace(dv, s * c);
    return r;
  }
  friend PolyDiffOp operator-(const PolyDiffOp& op) {
    return Rational(-1) * op;
  }

  bool operator==(const PolyDiffOp& o) const {
    return d_ == o.d_ && m_ == o.m_ && terms_ == o.terms_;
  }
  bool operator!=(const PolyDiffOp& o) const { return !(*this == o); }

  // Coefficients replaced by absolute values (for error propagation).
  PolyDiffOp abs() const {
    PolyDiffOp r(d_, m_);
    for (const auto& [dv, c] : terms_) r.terms_.emplace(dv, c.abs());
    return r;
  }

  double max_coeff_l1() const {
    double s = 0;
    for (const auto& [dv, c] : terms_) s = std::max(s, c.l1_norm());
    return s;
  }

 private:
  void check_shape(const PolyDiffOp& o) const {
    if (d_ != o.d_ || m_ != o.m_)
      throw std::invalid_argument("PolyDiffOp: shape mismatch");
  }

  int d_;
  int m_;
  std::map<std::vector<MultiIndex>, PolyCoeff> terms_;
};

// Symbolic composition: outer applied to the outputs of the inner operators,
// one inner per outer slot (Leibniz expansion, exact coefficients).  Result
// arity is the sum of the inner arities.
PolyDiffOp compose(const PolyDiffOp& outer,
                   const std::vector<PolyDiffOp>& inners);

// Insertion sum A o B = sum_i (-1)^{i (arity(B)-1)} (B into slot i of A).
PolyDiffOp insertion_product(const PolyDiffOp& a, const PolyDiffOp& b);

// [A, B] = A o B - (-1)^{(arity(A)-1)(arity(B)-1)} B o A; arity adds minus 1.
PolyDiffOp gerstenhaber_bracket(const PolyDiffOp& a, const PolyDiffOp& b);

// Differential -[m, t] with m the multiplication; squares to zero.
PolyDiffOp hochschild_d(const PolyDiffOp& t);

// Series of operators of fixed arity in the formal parameter.
struct OpSeries {
  int d = 0;
  int m = 0;
  int order = 0;
  std::vector<PolyDiffOp> coeff;

  static OpSeries zero(int d, int m, int order) {
    OpSeries s;
    s.d = d;
    s.m = m;
    s.order = order;
    s.coeff.assign(order + 1, PolyDiffOp::zero(d, m));
    return s;
  }
  void validate() const;
  OpSeries& operator+=(const OpSeries& o);
  OpSeries& operator-=(const OpSeries& o);
  friend OpSeries operator+(OpSeries a, const OpSeries& b) { return a += b; }
  friend OpSeries operator-(OpSeries a, const OpSeries& b) { return a -= b; }
  bool operator==(const OpSeries& o) const {
    return d == o.d && m == o.m && order == o.order && coeff == o.coeff;
  }
};

// Arity-2 series with coefficient 0 equal to the multiplication.
struct StarSeries {
  int d = 0;
  int order = 0;
  std::vector<PolyDiffOp> coeff;

  static StarSeries undeformed(int d, int order) {
    StarSeries s;
    s.d = d;
    s.order = order;
    s.coeff.assign(order + 1, PolyDiffOp::zero(d, 2));
    s.coeff[0] = PolyDiffOp::multiplication(d);
    return s;
  }
  void validate() const;
  PolyCoeff apply_order(int k, const PolyCoeff& f, const PolyCoeff& g) const {
    return coeff.at(k).apply({f, g});
  }
};

// Coefficient k of [t, star]: sum_{i+j=k} [t_i, star_j].  Orders must match.
OpSeries deformed_differential(const OpSeries& t, const StarSeries& star);

// Coefficient k of the cup product: sum_{i+j+l=k} star_l (t1_i x t2_j);
// arity is the sum of the two arities.
OpSeries cup(const OpSeries& t1, const OpSeries& t2, const StarSeries& star);

// Coefficient k of (f*g)*h - f*(g*h): sum_{i+j=k} of the two associations.
std::vector<PolyCoeff> associativity_defect(const StarSeries& star,
                                            const PolyCoeff& f,
                                            const PolyCoeff& g,
                                            const PolyCoeff& h);

}  // namespace gstar
