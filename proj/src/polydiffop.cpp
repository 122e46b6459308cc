#include "gstar/polydiffop.hpp"

namespace gstar {

namespace {

Rational binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  Rational r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

// Componentwise binomial: number of ways to pick sub-multi-index a from s.
Rational multi_binomial(const MultiIndex& s, const MultiIndex& a) {
  Rational r = 1;
  for (size_t i = 0; i < s.size(); ++i) r *= binomial(s[i], a[i]);
  return r;
}

// All multi-indices a with 0 <= a <= s componentwise.
void enumerate_sub(const MultiIndex& s, size_t pos, MultiIndex& cur,
                   std::vector<MultiIndex>& out) {
  if (pos == s.size()) {
    out.push_back(cur);
    return;
  }
  for (int v = 0; v <= s[pos]; ++v) {
    cur[pos] = v;
    enumerate_sub(s, pos + 1, cur, out);
  }
}

std::vector<MultiIndex> sub_indices(const MultiIndex& s) {
  std::vector<MultiIndex> out;
  MultiIndex cur(s.size(), 0);
  enumerate_sub(s, 0, cur, out);
  return out;
}

// One decomposition of s into `parts` ordered multi-indices with its
// multinomial weight.
struct Split {
  std::vector<MultiIndex> parts;
  Rational weight;
};

void enumerate_splits(const MultiIndex& s, int parts, Split cur,
                      std::vector<Split>& out) {
  if (parts == 1) {
    cur.parts.push_back(s);
    out.push_back(std::move(cur));
    return;
  }
  for (const MultiIndex& a : sub_indices(s)) {
    Split next = cur;
    next.parts.push_back(a);
    next.weight *= multi_binomial(s, a);
    MultiIndex rest(s.size());
    for (size_t i = 0; i < s.size(); ++i) rest[i] = s[i] - a[i];
    enumerate_splits(rest, parts - 1, std::move(next), out);
  }
}

std::vector<Split> splits(const MultiIndex& s, int parts) {
  std::vector<Split> out;
  if (parts == 0) {
    bool zero = true;
    for (int v : s) zero &= (v == 0);
    if (zero) out.push_back({{}, 1});
    return out;
  }
  enumerate_splits(s, parts, {{}, 1}, out);
  return out;
}

void merge_add(MultiIndex& a, const MultiIndex& b) {
  for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

}  // namespace

PolyDiffOp compose(const PolyDiffOp& outer,
                   const std::vector<PolyDiffOp>& inners) {
  if (static_cast<int>(inners.size()) != outer.arity())
    throw std::invalid_argument("compose: inner count must equal outer arity");
  const int d = outer.dim();
  int total = 0;
  for (const auto& in : inners) {
    if (in.dim() != d) throw std::invalid_argument("compose: dim mismatch");
    total += in.arity();
  }
  PolyDiffOp result(d, total);

  // Recursive product over outer slots: each slot's derivative distributes
  // over the inner coefficient and the inner's argument slots (Leibniz).
  struct State {
    PolyCoeff coeff;
    std::vector<MultiIndex> derivs;
  };
  for (const auto& [od, oc] : outer.terms()) {
    std::vector<State> states{{oc, {}}};
    for (int j = 0; j < outer.arity(); ++j) {
      const PolyDiffOp& in = inners[j];
      std::vector<State> next;
      for (const State& st : states)
        for (const auto& [idv, ic] : in.terms())
          for (const Split& sp : splits(od[j], in.arity() + 1)) {
            PolyCoeff c = st.coeff * (sp.weight * ic.derivative(sp.parts[0]));
            if (c.is_zero()) continue;
            State ns{std::move(c), st.derivs};
            for (int l = 0; l < in.arity(); ++l) {
              MultiIndex a = idv[l];
              merge_add(a, sp.parts[l + 1]);
              ns.derivs.push_back(std::move(a));
            }
            next.push_back(std::move(ns));
          }
      states = std::move(next);
    }
    for (const State& st : states) result.add_term(st.derivs, st.coeff);
  }
  return result;
}

PolyDiffOp insertion_product(const PolyDiffOp& a, const PolyDiffOp& b) {
  const int d = a.dim();
  if (b.dim() != d)
    throw std::invalid_argument("insertion_product: dim mismatch");
  int arity = a.arity() + b.arity() - 1;
  if (arity < 0)
    throw std::invalid_argument("insertion_product: negative result arity");
  PolyDiffOp r(d, arity);
  for (int i = 0; i < a.arity(); ++i) {
    std::vector<PolyDiffOp> inners(a.arity(), PolyDiffOp::identity(d));
    inners[i] = b;
    int sgn = parity_sign(static_cast<long long>(i) * (b.arity() - 1));
    r += Rational(sgn) * compose(a, inners);
  }
  return r;
}

PolyDiffOp gerstenhaber_bracket(const PolyDiffOp& a, const PolyDiffOp& b) {
  int sgn = parity_sign(static_cast<long long>(a.arity() - 1) *
                        (b.arity() - 1));
  return insertion_product(a, b) -
         Rational(sgn) * insertion_product(b, a);
}

PolyDiffOp hochschild_d(const PolyDiffOp& t) {
  return -gerstenhaber_bracket(PolyDiffOp::multiplication(t.dim()), t);
}

void OpSeries::validate() const {
  if (static_cast<int>(coeff.size()) != order + 1)
    throw std::invalid_argument("OpSeries: coefficient count mismatch");
  for (const auto& c : coeff)
    if (c.dim() != d || c.arity() != m)
      throw std::invalid_argument("OpSeries: coefficient shape mismatch");
}

OpSeries& OpSeries::operator+=(const OpSeries& o) {
  if (d != o.d || m != o.m || order != o.order)
    throw std::invalid_argument("OpSeries: shape mismatch");
  for (int k = 0; k <= order; ++k) coeff[k] += o.coeff[k];
  return *this;
}

OpSeries& OpSeries::operator-=(const OpSeries& o) {
  if (d != o.d || m != o.m || order != o.order)
    throw std::invalid_argument("OpSeries: shape mismatch");
  for (int k = 0; k <= order; ++k) coeff[k] -= o.coeff[k];
  return *this;
}

void StarSeries::validate() const {
  if (static_cast<int>(coeff.size()) != order + 1)
    throw std::invalid_argument("StarSeries: coefficient count mismatch");
  for (const auto& c : coeff)
    if (c.dim() != d || c.arity() != 2)
      throw std::invalid_argument("StarSeries: coefficient shape mismatch");
  if (coeff[0] != PolyDiffOp::multiplication(d))
    throw std::invalid_argument("StarSeries: coefficient 0 must multiply");
}

OpSeries deformed_differential(const OpSeries& t, const StarSeries& star) {
  t.validate();
  star.validate();
  if (t.d != star.d || t.order != star.order)
    throw std::invalid_argument("deformed_differential: series mismatch");
  OpSeries out = OpSeries::zero(t.d, t.m + 1, t.order);
  for (int k = 0; k <= t.order; ++k)
    for (int i = 0; i <= k; ++i)
      out.coeff[k] += gerstenhaber_bracket(t.coeff[i], star.coeff[k - i]);
  return out;
}

OpSeries cup(const OpSeries& t1, const OpSeries& t2, const StarSeries& star) {
  t1.validate();
  t2.validate();
  star.validate();
  if (t1.d != t2.d || t1.d != star.d)
    throw std::invalid_argument("cup: dimension mismatch");
  if (t1.order != t2.order || t1.order != star.order)
    throw std::invalid_argument("cup: order mismatch");
  OpSeries out = OpSeries::zero(t1.d, t1.m + t2.m, t1.order);
  for (int k = 0; k <= out.order; ++k)
    for (int l = 0; l <= k; ++l)
      for (int i = 0; i + l <= k; ++i)
        out.coeff[k] +=
            compose(star.coeff[l], {t1.coeff[i], t2.coeff[k - l - i]});
  return out;
}

std::vector<PolyCoeff> associativity_defect(const StarSeries& star,
                                            const PolyCoeff& f,
                                            const PolyCoeff& g,
                                            const PolyCoeff& h) {
  star.validate();
  std::vector<PolyCoeff> out(star.order + 1, PolyCoeff::zero(star.d));
  for (int k = 0; k <= star.order; ++k)
    for (int i = 0; i <= k; ++i) {
      int j = k - i;
      out[k] += star.coeff[i].apply({star.coeff[j].apply({f, g}), h});
      out[k] -= star.coeff[i].apply({f, star.coeff[j].apply({g, h})});
    }
  return out;
}

}  // namespace gstar
