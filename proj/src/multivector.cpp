#include "gstar/multivector.hpp"

#include <sstream>

namespace gstar {

int sort_with_sign(IndexTuple& t) {
  int sign = 1;
  const int n = static_cast<int>(t.size());
  for (int i = 1; i < n; ++i) {
    int j = i;
    while (j > 0 && t[j - 1] > t[j]) {
      std::swap(t[j - 1], t[j]);
      sign = -sign;
      --j;
    }
  }
  for (int i = 1; i < n; ++i)
    if (t[i - 1] == t[i]) return 0;
  return sign;
}

int permutation_sign(const std::vector<int>& sigma) {
  const int n = static_cast<int>(sigma.size());
  std::vector<char> seen(n, 0);
  for (int v : sigma) {
    if (v < 0 || v >= n || seen[v]) return 0;
    seen[v] = 1;
  }
  int inversions = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (sigma[i] > sigma[j]) ++inversions;
  return parity_sign(inversions);
}

std::string PolyCoeff::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << c;
    for (size_t i = 0; i < e.size(); ++i)
      if (e[i] > 0) {
        os << "*x" << (i + 1);
        if (e[i] > 1) os << "^" << e[i];
      }
  }
  return os.str();
}

std::string Multivector::to_string() const {
  if (comps_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [t, c] : comps_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << c.to_string() << ")";
    for (size_t i = 0; i < t.size(); ++i)
      os << (i == 0 ? " d" : "^d") << t[i];
  }
  return os.str();
}

PolyCoeff pair_with_coframe(const Multivector& v, const IndexTuple& j) {
  Rational inv_fact = Rational(1) / factorial(v.degree());
  return inv_fact * v.component(j);
}

Multivector wedge(const Multivector& a, const Multivector& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("wedge: dimension mismatch");
  Multivector r(a.dim(), a.degree() + b.degree());
  for (const auto& [ta, ca] : a.components())
    for (const auto& [tb, cb] : b.components()) {
      IndexTuple t = ta;
      t.insert(t.end(), tb.begin(), tb.end());
      r.add_term(t, ca * cb);
    }
  return r;
}

namespace {

// Single-term vector field c * d_idx.
struct VecField {
  PolyCoeff c;
  int idx;
};

// Lie bracket [a, b] = (a db/dx_{a.idx}) d_{b.idx} - (b da/dx_{b.idx}) d_{a.idx}.
std::vector<VecField> lie_bracket(const VecField& a, const VecField& b) {
  std::vector<VecField> out;
  PolyCoeff t1 = a.c * b.c.derivative(a.idx);
  if (!t1.is_zero()) out.push_back({t1, b.idx});
  PolyCoeff t2 = b.c * a.c.derivative(b.idx);
  if (!t2.is_zero()) out.push_back({-t2, a.idx});
  return out;
}

// Contraction of a single decomposable term (I, f) against the function g:
// sum_r (-1)^{r-1} f (dg/dx_{I_r}) on the tuple I minus its r-th entry,
// with the tail J appended.
void contract_into(Multivector& out, const IndexTuple& I, const PolyCoeff& f,
                   const PolyCoeff& g, const IndexTuple& J) {
  for (size_t r = 0; r < I.size(); ++r) {
    PolyCoeff c = f * g.derivative(I[r]);
    if (c.is_zero()) continue;
    IndexTuple t;
    t.reserve(I.size() - 1 + J.size());
    for (size_t u = 0; u < I.size(); ++u)
      if (u != r) t.push_back(I[u]);
    t.insert(t.end(), J.begin(), J.end());
    out.add_term(t, parity_sign(static_cast<long long>(r)) * c);
  }
}

}  // namespace

Multivector bullet(const Multivector& a, const Multivector& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("bullet: dimension mismatch");
  if (a.degree() < 1)
    throw std::invalid_argument("bullet: first argument must have degree >= 1");
  Multivector r(a.dim(), a.degree() + b.degree() - 1);
  for (const auto& [I, f] : a.components())
    for (const auto& [J, g] : b.components()) contract_into(r, I, f, g, J);
  return r;
}

Multivector schouten_modified(const Multivector& a, const Multivector& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("schouten_modified: dimension mismatch");
  const int d = a.dim(), k1 = a.degree(), k2 = b.degree();
  if (k1 == 0 && k2 == 0) return Multivector::zero(d, 0);
  // Function in one slot: contraction, with graded antisymmetry for [f, b].
  if (k2 == 0) return bullet(a, b);
  if (k1 == 0) return Rational(parity_sign(k2)) * bullet(b, a);

  Multivector r(d, k1 + k2 - 1);
  for (const auto& [I, f] : a.components())
    for (const auto& [J, g] : b.components()) {
      // Term as a wedge of vector fields, coefficient on the first factor.
      std::vector<VecField> xi, eta;
      for (int t = 0; t < k1; ++t)
        xi.push_back({t == 0 ? f : PolyCoeff::constant(d, 1), I[t]});
      for (int t = 0; t < k2; ++t)
        eta.push_back({t == 0 ? g : PolyCoeff::constant(d, 1), J[t]});
      for (int rr = 1; rr <= k1; ++rr)
        for (int ss = 1; ss <= k2; ++ss) {
          int sgn = parity_sign(rr + ss + (k1 - 1) * (k2 - 1));
          for (const VecField& br : lie_bracket(xi[rr - 1], eta[ss - 1])) {
            PolyCoeff c = br.c;
            IndexTuple t{br.idx};
            for (int u = 1; u <= k1; ++u)
              if (u != rr) {
                c = c * xi[u - 1].c;
                t.push_back(xi[u - 1].idx);
              }
            for (int u = 1; u <= k2; ++u)
              if (u != ss) {
                c = c * eta[u - 1].c;
                t.push_back(eta[u - 1].idx);
              }
            r.add_term(t, Rational(sgn) * c);
          }
        }
    }
  return r;
}

Multivector tangent_diff_q(const Multivector& delta, const Multivector& gamma) {
  return schouten_modified(delta, gamma);
}

HbarSeriesMV HbarSeriesMV::single(const Multivector& v, int order) {
  HbarSeriesMV s;
  s.d = v.dim();
  s.order = order;
  s.coeff.assign(order + 1, Multivector::zero(v.dim(), v.degree()));
  s.coeff[0] = v;
  return s;
}

void HbarSeriesMV::validate() const {
  if (static_cast<int>(coeff.size()) != order + 1)
    throw std::invalid_argument("HbarSeriesMV: coefficient count mismatch");
  for (const auto& c : coeff)
    if (c.dim() != d)
      throw std::invalid_argument("HbarSeriesMV: dimension mismatch");
}

HbarSeriesMV maurer_cartan_residual(const HbarSeriesMV& gamma) {
  gamma.validate();
  if (gamma.coeff.empty())
    throw std::invalid_argument("maurer_cartan_residual: empty series");
  int k = gamma.coeff[0].degree();
  for (const auto& c : gamma.coeff)
    if (c.degree() != k)
      throw std::invalid_argument("maurer_cartan_residual: mixed degrees");
  int kr = std::max(0, 2 * k - 1);
  HbarSeriesMV res;
  res.d = gamma.d;
  res.order = gamma.order;
  res.coeff.assign(gamma.order + 1, Multivector::zero(gamma.d, kr));
  for (int n = 2; n <= gamma.order; ++n)
    for (int i = 0; i <= n - 2; ++i) {
      int j = n - 2 - i;
      if (i > gamma.order || j > gamma.order) continue;
      res.coeff[n] -= Rational(1, 2) *
                      schouten_modified(gamma.coeff[i], gamma.coeff[j]);
    }
  return res;
}

}  // namespace gstar
