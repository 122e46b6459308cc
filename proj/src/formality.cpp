#include "gstar/formality.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

#include "gstar/json_io.hpp"

namespace gstar {

namespace {

// Exact conversion; weights enter the algebra as the rationals the doubles
// already are, so repeated assemblies agree bit for bit.
Rational rational_of(double v) { return Rational(v); }

// Shared taylor_u / taylor_u_error assembly.  In error mode the graph
// operators are replaced by their absolute values and weighted by the
// stored standard errors; all contributions are nonnegative.
PolyDiffOp assemble_taylor(const std::vector<Multivector>& mvs,
                           const WeightCache& cache, bool error_mode) {
  if (mvs.empty())
    throw std::invalid_argument("taylor_u: at least one argument required");
  const int n = static_cast<int>(mvs.size());
  const int d = mvs[0].dim();
  std::vector<int> profile(n);
  int sum = 0;
  for (int i = 0; i < n; ++i) {
    if (mvs[i].dim() != d)
      throw std::invalid_argument("taylor_u: dimension mismatch");
    profile[i] = mvs[i].degree();
    sum += profile[i];
  }
  const int m = sum - 2 * n + 2;
  if (m < 0) throw std::invalid_argument("taylor_u: negative arity");
  PolyDiffOp out(d, m);
  std::vector<std::string> missing;
  for (const auto& g : enumerate_graphs_profile(n, m, profile)) {
    if (chart_dim(g.n, g.m) == 0) {
      // Zero-dimensional configuration: weight exactly 1, no uncertainty.
      if (!error_mode) out += b_gamma(g, mvs);
      continue;
    }
    PolyDiffOp op = b_gamma(g, mvs);
    if (op.is_zero()) continue;  // graphs that act by zero need no weight
    auto w = cache.lookup(g);
    if (!w) {
      missing.push_back(encode(canonical_edge_order(g).first));
      continue;
    }
    const double v = error_mode ? w->stderr_ : w->value;
    if (v == 0.0) continue;
    if (error_mode) op = op.abs();
    out += rational_of(v) * op;
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    throw CacheMissError(std::move(missing));
  }
  return out;
}

std::vector<Multivector> arg_list(const Multivector& head,
                                  const Multivector& fill, int copies) {
  std::vector<Multivector> args{head};
  for (int i = 0; i < copies; ++i) args.push_back(fill);
  return args;
}

// Sign-free insertion sum: dominates |insertion_product| coefficientwise
// when the inputs have nonnegative coefficients.
PolyDiffOp abs_insertion(const PolyDiffOp& a, const PolyDiffOp& b) {
  const int d = a.dim();
  PolyDiffOp r(d, a.arity() + b.arity() - 1);
  std::vector<PolyDiffOp> inners(a.arity(), PolyDiffOp::identity(d));
  for (int i = 0; i < a.arity(); ++i) {
    inners[i] = b;
    r += compose(a, inners);
    inners[i] = PolyDiffOp::identity(d);
  }
  return r;
}

PolyDiffOp bracket_abs(const PolyDiffOp& a, const PolyDiffOp& b) {
  return abs_insertion(a, b) + abs_insertion(b, a);
}

// Coefficientwise bound on |[A', B'] - [A, B]| over all A', B' within
// eA, eB of A, B: mixed terms of the monotone sign-free bracket.
PolyDiffOp bracket_error(const PolyDiffOp& a, const PolyDiffOp& ea,
                         const PolyDiffOp& b, const PolyDiffOp& eb) {
  PolyDiffOp aa = a.abs();
  PolyDiffOp bb = b.abs();
  return bracket_abs(aa + ea, bb + eb) - bracket_abs(aa, bb);
}

double coeff_at(const PolyCoeff& p, const MultiIndex& e) {
  auto it = p.terms().find(e);
  return it == p.terms().end() ? 0.0 : to_double(it->second);
}

// All exponent vectors in d variables of total degree at most cap,
// lexicographic order.
std::vector<MultiIndex> monomials_up_to(int d, int cap) {
  std::vector<MultiIndex> out;
  MultiIndex cur(d, 0);
  std::function<void(int, int)> rec = [&](int pos, int rem) {
    if (pos == d) {
      out.push_back(cur);
      return;
    }
    for (int e = 0; e <= rem; ++e) {
      cur[pos] = e;
      rec(pos + 1, rem - e);
    }
    cur[pos] = 0;
  };
  rec(0, cap);
  return out;
}

std::vector<int> cup_profile(int k1, int k2, int copies) {
  std::vector<int> p{k1, k2};
  p.insert(p.end(), copies, 2);
  return p;
}

}  // namespace

PolyDiffOp b_gamma(const Graph& g, const std::vector<Multivector>& mvs) {
  if (static_cast<int>(mvs.size()) != g.n)
    throw std::invalid_argument("b_gamma: one multivector per aerial vertex");
  if (g.n == 0)
    throw std::invalid_argument("b_gamma: at least one aerial vertex");
  const int d = mvs[0].dim();
  for (const auto& v : mvs)
    if (v.dim() != d) throw std::invalid_argument("b_gamma: dim mismatch");
  auto problems = validate(g);
  if (!problems.empty())
    throw std::invalid_argument("b_gamma: " + problems.front());
  PolyDiffOp out(d, g.m);
  for (int k = 1; k <= g.n; ++k)
    if (g.out_degree(k) != mvs[k - 1].degree()) return out;
  const int ecount = g.edge_count();
  // Incoming edge positions per aerial vertex.
  std::vector<std::vector<int>> incoming(g.n + 1);
  for (int e = 0; e < ecount; ++e)
    if (g.edges[e].second > 0) incoming[g.edges[e].second].push_back(e);

  std::vector<int> label(ecount, 1);
  for (;;) {
    PolyCoeff prod = PolyCoeff::constant(d, 1);
    for (int k = 1; k <= g.n && !prod.is_zero(); ++k) {
      auto [b, e] = g.block_range(k);
      IndexTuple outl;
      outl.reserve(e - b);
      for (int pos = b; pos < e; ++pos) outl.push_back(label[pos]);
      PolyCoeff ck = pair_with_coframe(mvs[k - 1], outl);
      for (int pos : incoming[k]) {
        if (ck.is_zero()) break;
        ck = ck.derivative(label[pos]);
      }
      prod = prod * ck;
    }
    if (!prod.is_zero()) {
      std::vector<MultiIndex> derivs(g.m, MultiIndex(d, 0));
      for (int e = 0; e < ecount; ++e) {
        int t = g.edges[e].second;
        if (t < 0) derivs[-t - 1][label[e] - 1] += 1;
      }
      out.add_term(derivs, prod);
    }
    int pos = ecount - 1;
    while (pos >= 0 && label[pos] == d) {
      label[pos] = 1;
      --pos;
    }
    if (pos < 0) break;
    ++label[pos];
  }
  return out;
}

PolyDiffOp taylor_u(const std::vector<Multivector>& mvs,
                    const WeightCache& cache) {
  return assemble_taylor(mvs, cache, false);
}

PolyDiffOp taylor_u_error(const std::vector<Multivector>& mvs,
                          const WeightCache& cache) {
  return assemble_taylor(mvs, cache, true);
}

void ensure_taylor_weights(const std::vector<int>& degrees, WeightCache& cache,
                           long long samples, unsigned long long seed_base,
                           bool prefer_quadrature) {
  const int n = static_cast<int>(degrees.size());
  if (n == 0) return;
  int sum = 0;
  for (int s : degrees) sum += s;
  const int m = sum - 2 * n + 2;
  if (m < 0) return;
  for (const auto& g : enumerate_graphs_profile(n, m, degrees)) {
    if (chart_dim(g.n, g.m) == 0) continue;
    cache.get_or_compute(g, samples, seed_base, prefer_quadrature);
  }
}

StarSeries star_product(const Multivector& gamma, int order,
                        const WeightCache& cache) {
  if (gamma.degree() != 2)
    throw std::invalid_argument("star_product: bivector required");
  if (order < 0) throw std::invalid_argument("star_product: negative order");
  StarSeries s = StarSeries::undeformed(gamma.dim(), order);
  std::vector<Multivector> args;
  for (int k = 1; k <= order; ++k) {
    args.push_back(gamma);
    s.coeff[k] = (Rational(1) / factorial(k)) * assemble_taylor(args, cache, false);
  }
  return s;
}

OpSeries star_error(const Multivector& gamma, int order,
                    const WeightCache& cache) {
  if (gamma.degree() != 2)
    throw std::invalid_argument("star_error: bivector required");
  if (order < 0) throw std::invalid_argument("star_error: negative order");
  OpSeries s = OpSeries::zero(gamma.dim(), 2, order);
  std::vector<Multivector> args;
  for (int k = 1; k <= order; ++k) {
    args.push_back(gamma);
    s.coeff[k] = (Rational(1) / factorial(k)) * assemble_taylor(args, cache, true);
  }
  return s;
}

OpSeries u_prime(const Multivector& delta, const Multivector& gamma, int order,
                 const WeightCache& cache) {
  if (gamma.degree() != 2)
    throw std::invalid_argument("u_prime: bivector required");
  if (delta.dim() != gamma.dim())
    throw std::invalid_argument("u_prime: dimension mismatch");
  if (order < 0) throw std::invalid_argument("u_prime: negative order");
  OpSeries s = OpSeries::zero(delta.dim(), delta.degree(), order);
  for (int n = 0; n <= order; ++n)
    s.coeff[n] = (Rational(1) / factorial(n)) *
                 assemble_taylor(arg_list(delta, gamma, n), cache, false);
  return s;
}

OpSeries u_prime_error(const Multivector& delta, const Multivector& gamma,
                       int order, const WeightCache& cache) {
  if (gamma.degree() != 2)
    throw std::invalid_argument("u_prime_error: bivector required");
  if (delta.dim() != gamma.dim())
    throw std::invalid_argument("u_prime_error: dimension mismatch");
  if (order < 0) throw std::invalid_argument("u_prime_error: negative order");
  OpSeries s = OpSeries::zero(delta.dim(), delta.degree(), order);
  for (int n = 0; n <= order; ++n)
    s.coeff[n] = (Rational(1) / factorial(n)) *
                 assemble_taylor(arg_list(delta, gamma, n), cache, true);
  return s;
}

OpSeries chain_map_residual(const Multivector& delta, const Multivector& gamma,
                            int order, const WeightCache& cache) {
  const Multivector br = schouten_modified(delta, gamma);
  const StarSeries star = star_product(gamma, order, cache);
  const OpSeries up = u_prime(delta, gamma, order, cache);
  OpSeries out = OpSeries::zero(delta.dim(), delta.degree() + 1, order);
  for (int k = 0; k <= order; ++k) {
    if (k >= 1 && !br.is_zero())
      out.coeff[k] += (Rational(1) / factorial(k - 1)) *
                      assemble_taylor(arg_list(br, gamma, k - 1), cache, false);
    for (int i = 0; i <= k; ++i)
      out.coeff[k] -= gerstenhaber_bracket(up.coeff[i], star.coeff[k - i]);
  }
  return out;
}

OpSeries chain_map_error_bound(const Multivector& delta,
                               const Multivector& gamma, int order,
                               const WeightCache& cache) {
  const Multivector br = schouten_modified(delta, gamma);
  const StarSeries star = star_product(gamma, order, cache);
  const OpSeries serr = star_error(gamma, order, cache);
  const OpSeries up = u_prime(delta, gamma, order, cache);
  const OpSeries uerr = u_prime_error(delta, gamma, order, cache);
  OpSeries out = OpSeries::zero(delta.dim(), delta.degree() + 1, order);
  for (int k = 0; k <= order; ++k) {
    if (k >= 1 && !br.is_zero())
      out.coeff[k] += (Rational(1) / factorial(k - 1)) *
                      assemble_taylor(arg_list(br, gamma, k - 1), cache, true);
    for (int i = 0; i <= k; ++i)
      out.coeff[k] += bracket_error(up.coeff[i], uerr.coeff[i],
                                    star.coeff[k - i], serr.coeff[k - i]);
  }
  return out;
}

CupDiffResult cup_difference(const Multivector& alpha, const Multivector& beta,
                             const Multivector& gamma, int order,
                             WeightCache& cache, const CupDiffOptions& opt) {
  if (gamma.degree() != 2)
    throw std::invalid_argument("cup_difference: bivector required");
  const int d = gamma.dim();
  if (alpha.dim() != d || beta.dim() != d)
    throw std::invalid_argument("cup_difference: dimension mismatch");
  if (order < 0)
    throw std::invalid_argument("cup_difference: negative order");
  const int k1 = alpha.degree();
  const int k2 = beta.degree();
  const int m = k1 + k2;

  // Populate the weights the composed route reads.
  for (int n = 0; n <= order; ++n) {
    std::vector<int> degs_a{k1};
    degs_a.insert(degs_a.end(), n, 2);
    std::vector<int> degs_b{k2};
    degs_b.insert(degs_b.end(), n, 2);
    ensure_taylor_weights(degs_a, cache, opt.samples, opt.seed_base,
                          opt.prefer_quadrature);
    ensure_taylor_weights(degs_b, cache, opt.samples, opt.seed_base,
                          opt.prefer_quadrature);
    if (n >= 1)
      ensure_taylor_weights(std::vector<int>(n, 2), cache, opt.samples,
                            opt.seed_base, opt.prefer_quadrature);
  }

  const StarSeries star = star_product(gamma, order, cache);
  const OpSeries serr = star_error(gamma, order, cache);
  const OpSeries ua = u_prime(alpha, gamma, order, cache);
  const OpSeries uaerr = u_prime_error(alpha, gamma, order, cache);
  const OpSeries ub = u_prime(beta, gamma, order, cache);
  const OpSeries uberr = u_prime_error(beta, gamma, order, cache);

  CupDiffResult res;
  res.route_b = cup(ua, ub, star);
  res.route_b_err = OpSeries::zero(d, m, order);
  for (int n = 0; n <= order; ++n)
    for (int i = 0; i <= n; ++i)
      for (int j = 0; i + j <= n; ++j) {
        const int l = n - i - j;
        PolyDiffOp sa = star.coeff[l].abs();
        PolyDiffOp aa = ua.coeff[i].abs();
        PolyDiffOp bb = ub.coeff[j].abs();
        res.route_b_err.coeff[n] +=
            compose(sa + serr.coeff[l],
                    {aa + uaerr.coeff[i], bb + uberr.coeff[j]}) -
            compose(sa, {aa, bb});
      }

  res.route_a = OpSeries::zero(d, m, order);
  res.route_a_err = OpSeries::zero(d, m, order);
  res.w1_route = OpSeries::zero(d, m, order);
  res.w1_err = OpSeries::zero(d, m, order);
  for (int n = 0; n <= order; ++n) {
    std::vector<Multivector> args = arg_list(alpha, gamma, n);
    args.insert(args.begin() + 1, beta);
    const Rational inv_fact = Rational(1) / factorial(n);
    for (const auto& g :
         enumerate_graphs_profile(n + 2, m, cup_profile(k1, k2, n))) {
      PolyDiffOp op = b_gamma(g, args);
      if (op.is_zero()) continue;
      WeightEstimate w0 = compute_W0(g, cache, opt.samples, opt.seed_base,
                                     opt.prefer_quadrature);
      WeightEstimate w1 = compute_W1(g, cache, opt.samples, opt.seed_base,
                                     opt.prefer_quadrature);
      PolyDiffOp aop = op.abs();
      if (w0.value != 0.0)
        res.route_a.coeff[n] += (inv_fact * rational_of(w0.value)) * op;
      if (w0.stderr_ != 0.0)
        res.route_a_err.coeff[n] += (inv_fact * rational_of(w0.stderr_)) * aop;
      if (w1.value != 0.0)
        res.w1_route.coeff[n] += (inv_fact * rational_of(w1.value)) * op;
      if (w1.stderr_ != 0.0)
        res.w1_err.coeff[n] += (inv_fact * rational_of(w1.stderr_)) * aop;
    }
  }

  res.diff = res.route_a - res.route_b;

  // Termwise consistency of the boundary-weight route against the composed
  // route: |a - b| <= 3 (err_a + err_b) + slack per derivative pattern and
  // monomial.
  res.w1_consistent = true;
  for (int n = 0; n <= order; ++n) {
    PolyDiffOp dev = res.w1_route.coeff[n] - res.route_b.coeff[n];
    PolyDiffOp bound = res.w1_err.coeff[n] + res.route_b_err.coeff[n];
    for (const auto& [dv, poly] : bound.terms())
      for (const auto& [e, c] : poly.terms())
        res.w1_tol = std::max(res.w1_tol, 3 * to_double(c) + opt.w1_slack);
    for (const auto& [dv, poly] : dev.terms()) {
      auto bit = bound.terms().find(dv);
      for (const auto& [e, c] : poly.terms()) {
        const double dval = std::abs(to_double(c));
        double berr = 0.0;
        if (bit != bound.terms().end()) berr = coeff_at(bit->second, e);
        res.w1_max_dev = std::max(res.w1_max_dev, dval);
        if (dval > 3 * berr + opt.w1_slack) res.w1_consistent = false;
      }
    }
  }
  return res;
}

std::map<std::string, PolyDiffOp> w0_weight_classes(const Multivector& alpha,
                                                    const Multivector& beta,
                                                    const Multivector& gamma,
                                                    int n) {
  if (gamma.degree() != 2)
    throw std::invalid_argument("w0_weight_classes: bivector required");
  if (n < 0) throw std::invalid_argument("w0_weight_classes: negative order");
  const int d = gamma.dim();
  const int k1 = alpha.degree();
  const int k2 = beta.degree();
  const int m = k1 + k2;
  std::vector<Multivector> args = arg_list(alpha, gamma, n);
  args.insert(args.begin() + 1, beta);
  const Rational inv_fact = Rational(1) / factorial(n);
  std::map<std::string, PolyDiffOp> out;
  for (const auto& g :
       enumerate_graphs_profile(n + 2, m, cup_profile(k1, k2, n))) {
    auto merged = contract_12(g);
    if (!merged) continue;
    PolyDiffOp op = b_gamma(g, args);
    if (op.is_zero()) continue;
    auto [canon, sign] = canonical_edge_order(*merged);
    auto [it, inserted] = out.try_emplace(encode(canon), PolyDiffOp(d, m));
    it->second += (Rational(sign) * inv_fact) * op;
  }
  for (auto it = out.begin(); it != out.end();)
    it = it->second.is_zero() ? out.erase(it) : std::next(it);
  return out;
}

std::map<std::string, PolyDiffOp> direct_weight_classes(
    const Multivector& wedge_ab, const Multivector& gamma, int n) {
  if (gamma.degree() != 2)
    throw std::invalid_argument("direct_weight_classes: bivector required");
  if (n < 0)
    throw std::invalid_argument("direct_weight_classes: negative order");
  const int d = gamma.dim();
  const int m = wedge_ab.degree();
  std::vector<Multivector> args = arg_list(wedge_ab, gamma, n);
  std::vector<int> profile{m};
  profile.insert(profile.end(), n, 2);
  const Rational inv_fact = Rational(1) / factorial(n);
  std::map<std::string, PolyDiffOp> out;
  for (const auto& g : enumerate_graphs_profile(n + 1, m, profile)) {
    PolyDiffOp op = b_gamma(g, args);
    if (op.is_zero()) continue;
    auto [canon, sign] = canonical_edge_order(g);
    auto [it, inserted] = out.try_emplace(encode(canon), PolyDiffOp(d, m));
    it->second += (Rational(sign) * inv_fact) * op;
  }
  for (auto it = out.begin(); it != out.end();)
    it = it->second.is_zero() ? out.erase(it) : std::next(it);
  return out;
}

CupCertificate certify_coboundary(const OpSeries& diff, const StarSeries& star,
                                  const Multivector& alpha,
                                  const Multivector& beta,
                                  const Multivector& gamma,
                                  const CertifyOptions& opt,
                                  const std::string& cache_fingerprint) {
  diff.validate();
  star.validate();
  if (star.d != diff.d || star.order != diff.order)
    throw std::invalid_argument("certify: star series shape mismatch");
  const int d = diff.d;
  const int m = diff.m;
  const int order = diff.order;
  const int k1 = alpha.degree();
  const int k2 = beta.degree();
  if (k1 + k2 != m)
    throw std::invalid_argument("certify: degree sum must match arity");
  if (gamma.degree() != 2)
    throw std::invalid_argument("certify: bivector required");
  if (alpha.dim() != d || beta.dim() != d || gamma.dim() != d)
    throw std::invalid_argument("certify: dimension mismatch");

  CupCertificate cert;
  cert.order = order;
  cert.tol = opt.tol;
  cert.cache_fingerprint = cache_fingerprint;

  const Multivector br_a = schouten_modified(alpha, gamma);
  const Multivector br_b = schouten_modified(beta, gamma);

  struct AnsatzCol {
    std::string key;
    PolyDiffOp flat;  // arity m, enters the linear system
    PolyDiffOp raw;   // arity m-1, accumulates into the primitive
    bool is_primitive;
  };

  int test_degree = opt.test_degree;
  for (;;) {
    bool raise = false;
    cert.residuals.clear();
    cert.rhs_norms.clear();
    cert.bracket_coeffs.clear();
    cert.primitive = OpSeries::zero(d, m >= 1 ? m - 1 : 0, order);

    std::vector<PolyCoeff> monos;
    for (const auto& e : monomials_up_to(d, test_degree))
      monos.push_back(PolyCoeff::monomial(d, e));
    const int nmono = static_cast<int>(monos.size());

    for (int n = 0; n <= order && !raise; ++n) {
      std::vector<AnsatzCol> cols;
      if (m >= 1) {
        std::vector<Multivector> args = arg_list(alpha, gamma, n);
        args.insert(args.begin() + 1, beta);
        for (const auto& g :
             enumerate_graphs_profile(n + 2, m - 1, cup_profile(k1, k2, n))) {
          if (canonical_edge_order(g).first != g) continue;
          PolyDiffOp op = b_gamma(g, args);
          if (op.is_zero()) continue;
          cols.push_back({"P:" + encode(g),
                          gerstenhaber_bracket(op, star.coeff[0]), op, true});
        }
      }
      if (opt.general_mode && n >= 1) {
        const PolyDiffOp none(d, m >= 1 ? m - 1 : 0);
        if (!br_a.is_zero()) {
          std::vector<Multivector> args = arg_list(br_a, gamma, n - 1);
          args.insert(args.begin() + 1, beta);
          for (const auto& g : enumerate_graphs_profile(
                   n + 1, m, cup_profile(k1 + 1, k2, n - 1))) {
            if (canonical_edge_order(g).first != g) continue;
            PolyDiffOp op = b_gamma(g, args);
            if (op.is_zero()) continue;
            cols.push_back({"A:" + encode(g), op, none, false});
          }
        }
        if (!br_b.is_zero()) {
          std::vector<Multivector> args = arg_list(alpha, gamma, n - 1);
          args.insert(args.begin() + 1, br_b);
          for (const auto& g : enumerate_graphs_profile(
                   n + 1, m, cup_profile(k1, k2 + 1, n - 1))) {
            if (canonical_edge_order(g).first != g) continue;
            PolyDiffOp op = b_gamma(g, args);
            if (op.is_zero()) continue;
            cols.push_back({"B:" + encode(g), op, none, false});
          }
        }
      }

      PolyDiffOp rhs = diff.coeff[n];
      if (m >= 1)
        for (int j = 1; j <= n; ++j)
          rhs -= gerstenhaber_bracket(cert.primitive.coeff[n - j],
                                      star.coeff[j]);

      const int ncols = static_cast<int>(cols.size());
      std::vector<double> bvals;
      std::vector<std::vector<double>> colvals(ncols);
      long long ntuples = 1;
      for (int i = 0; i < m; ++i) ntuples *= nmono;
      std::vector<int> digits(m, 0);
      for (long long t = 0; t < ntuples; ++t) {
        std::vector<PolyCoeff> fargs;
        fargs.reserve(m);
        for (int i = 0; i < m; ++i) fargs.push_back(monos[digits[i]]);
        PolyCoeff rv = rhs.apply(fargs);
        std::vector<PolyCoeff> cv;
        cv.reserve(ncols);
        std::set<MultiIndex> keys;
        for (const auto& [e, c] : rv.terms()) keys.insert(e);
        for (const auto& col : cols) {
          cv.push_back(col.flat.apply(fargs));
          for (const auto& [e, c] : cv.back().terms()) keys.insert(e);
        }
        for (const auto& e : keys) {
          bvals.push_back(coeff_at(rv, e));
          for (int c = 0; c < ncols; ++c)
            colvals[c].push_back(coeff_at(cv[c], e));
        }
        int pos = m - 1;
        while (pos >= 0 && digits[pos] == nmono - 1) digits[pos--] = 0;
        if (pos < 0) break;
        ++digits[pos];
      }

      const int rows = static_cast<int>(bvals.size());
      if (ncols > 0 && rows < ncols && test_degree < opt.max_test_degree) {
        ++test_degree;
        raise = true;
        break;
      }

      Eigen::VectorXd b(rows);
      for (int r = 0; r < rows; ++r) b(r) = bvals[r];
      double resid = b.norm();
      if (ncols > 0 && rows > 0) {
        Eigen::MatrixXd A(rows, ncols);
        for (int c = 0; c < ncols; ++c)
          for (int r = 0; r < rows; ++r) A(r, c) = colvals[c][r];
        Eigen::VectorXd x =
            A.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
        resid = (A * x - b).norm();
        for (int c = 0; c < ncols; ++c) {
          if (cols[c].is_primitive) {
            if (x(c) != 0.0)
              cert.primitive.coeff[n] += rational_of(x(c)) * cols[c].raw;
          } else {
            cert.bracket_coeffs[std::to_string(n) + ":" + cols[c].key] = x(c);
          }
        }
      }
      cert.residuals.push_back(resid);
      cert.rhs_norms.push_back(b.norm());
    }
    if (!raise) break;
  }

  cert.test_degree = test_degree;
  cert.certified = !cert.residuals.empty();
  for (double r : cert.residuals)
    if (!(r <= opt.tol)) cert.certified = false;
  return cert;
}

std::string CupCertificate::to_json() const {
  nlohmann::json j;
  j["order"] = order;
  j["certified"] = certified;
  j["residuals"] = residuals;
  j["rhs_norms"] = rhs_norms;
  j["primitive"] = op_series_to_json(primitive);
  j["bracket_coeffs"] = bracket_coeffs;
  j["test_degree"] = test_degree;
  j["tol"] = tol;
  j["cache_fingerprint"] = cache_fingerprint;
  return j.dump(2);
}

double max_term_deviation(const PolyDiffOp& a, const PolyDiffOp& b) {
  if (a.dim() != b.dim() || a.arity() != b.arity())
    throw std::invalid_argument("max_term_deviation: shape mismatch");
  double mx = 0.0;
  PolyDiffOp diff = a - b;
  for (const auto& [dv, poly] : diff.terms())
    for (const auto& [e, c] : poly.terms())
      mx = std::max(mx, std::abs(to_double(c)));
  return mx;
}

std::vector<double> associativity_defect_bound(const StarSeries& star,
                                               const OpSeries& err,
                                               const PolyCoeff& f,
                                               const PolyCoeff& g,
                                               const PolyCoeff& h) {
  star.validate();
  err.validate();
  if (err.d != star.d || err.m != 2 || err.order != star.order)
    throw std::invalid_argument("defect_bound: error series shape mismatch");
  const int d = star.d;
  const PolyDiffOp id = PolyDiffOp::identity(d);
  const std::vector<PolyCoeff> args{f.abs(), g.abs(), h.abs()};
  std::vector<double> out(star.order + 1, 0.0);
  for (int n = 0; n <= star.order; ++n) {
    PolyCoeff bound(d);
    for (int i = 0; i <= n; ++i) {
      const int j = n - i;
      PolyDiffOp si = star.coeff[i].abs();
      PolyDiffOp tj = star.coeff[j].abs();
      PolyDiffOp si_hi = si + err.coeff[i];
      PolyDiffOp tj_hi = tj + err.coeff[j];
      bound += (compose(si_hi, {tj_hi, id}) - compose(si, {tj, id}))
                   .apply(args);
      bound += (compose(si_hi, {id, tj_hi}) - compose(si, {id, tj}))
                   .apply(args);
    }
    out[n] = bound.l1_norm();
  }
  return out;
}

}  // namespace gstar
