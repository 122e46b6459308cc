#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gstar/graph.hpp"
#include "gstar/multivector.hpp"
#include "gstar/polydiffop.hpp"
#include "gstar/weight.hpp"

namespace gstar {

// One assembled graph contribution.
struct BGammaTerm {
  Graph graph;
  double weight = 0.0;
  PolyDiffOp op;
};

// Thrown when an assembly needs weights absent from the cache.
class CacheMissError : public std::runtime_error {
 public:
  explicit CacheMissError(std::vector<std::string> missing)
      : std::runtime_error("weight cache incomplete"),
        missing_(std::move(missing)) {}
  const std::vector<std::string>& missing() const { return missing_; }

 private:
  std::vector<std::string> missing_;
};

// Graph operator: sum over edge labelings of the product of vertex tensors
// (paired against out-edge labels, differentiated along incoming edges)
// times the derivatives of the ground arguments.  Returns the zero operator
// when an out-degree differs from the corresponding multivector degree.
PolyDiffOp b_gamma(const Graph& g, const std::vector<Multivector>& mvs);

// n-th Taylor coefficient: sum of weight * graph operator over admissible
// graphs matching the argument degrees; arity m = sum(deg) - 2n + 2.
// Weights are read from the cache; missing entries raise CacheMissError.
PolyDiffOp taylor_u(const std::vector<Multivector>& mvs,
                    const WeightCache& cache);
// Same assembly with |operator| weighted by the stored standard errors.
PolyDiffOp taylor_u_error(const std::vector<Multivector>& mvs,
                          const WeightCache& cache);

// Populates every weight a taylor_u call with these argument degrees reads.
void ensure_taylor_weights(const std::vector<int>& degrees, WeightCache& cache,
                           long long samples, unsigned long long seed_base,
                           bool prefer_quadrature = false);

// Star product of the bivector gamma: coefficient k is (1/k!) U_k(gamma^k),
// coefficient 0 the multiplication.
StarSeries star_product(const Multivector& gamma, int order,
                        const WeightCache& cache);
OpSeries star_error(const Multivector& gamma, int order,
                    const WeightCache& cache);

// Differential of the Taylor map at gamma, applied to delta:
// coefficient n is (1/n!) U_{n+1}(delta . gamma^n); arity = degree(delta).
OpSeries u_prime(const Multivector& delta, const Multivector& gamma, int order,
                 const WeightCache& cache);
OpSeries u_prime_error(const Multivector& delta, const Multivector& gamma,
                       int order, const WeightCache& cache);

// Compatibility of the differentials: coefficient k holds the h^{k+1} part
// of  U'([delta, gamma] series) - [U'(delta), star].  Identically zero for
// exact weights; coefficient 0 vanishes by construction.
OpSeries chain_map_residual(const Multivector& delta, const Multivector& gamma,
                            int order, const WeightCache& cache);
// Per-order bound from the cached standard errors (same shape as above).
OpSeries chain_map_error_bound(const Multivector& delta,
                               const Multivector& gamma, int order,
                               const WeightCache& cache);

struct CupDiffOptions {
  long long samples = 1000000;
  unsigned long long seed_base = 20260815;
  bool prefer_quadrature = true;
  double w1_slack = 1e-9;
};

// The two routes to the cup defect and their difference.
//   route_a: merged-vertex weights against doubled graphs (image of the
//            wedge under the Taylor differential);
//   route_b: cup product of the two Taylor differentials;
//   w1_route: boundary-weight assembly of route_b, compared termwise.
struct CupDiffResult {
  OpSeries diff;
  OpSeries route_a;
  OpSeries route_b;
  OpSeries w1_route;
  OpSeries route_a_err;
  OpSeries route_b_err;
  OpSeries w1_err;
  double w1_max_dev = 0.0;
  double w1_tol = 0.0;
  bool w1_consistent = false;
};

CupDiffResult cup_difference(const Multivector& alpha, const Multivector& beta,
                             const Multivector& gamma, int order,
                             WeightCache& cache,
                             const CupDiffOptions& opt = {});

// Exact per-weight-class operators: key is the canonical encoding of the
// merged graph, value the signed sum of doubled-graph operators (order n).
std::map<std::string, PolyDiffOp> w0_weight_classes(const Multivector& alpha,
                                                    const Multivector& beta,
                                                    const Multivector& gamma,
                                                    int n);
// Same classes assembled directly from the wedge argument.
std::map<std::string, PolyDiffOp> direct_weight_classes(
    const Multivector& wedge_ab, const Multivector& gamma, int n);

struct CertifyOptions {
  int test_degree = 3;
  double tol = 1e-3;
  bool general_mode = false;
  int max_test_degree = 6;
};

struct CupCertificate {
  int order = 0;
  bool certified = false;
  std::vector<double> residuals;
  std::vector<double> rhs_norms;
  OpSeries primitive;  // arity m-1 ansatz combination, coefficient per order
  std::map<std::string, double> bracket_coeffs;  // "order:encoding" -> value
  int test_degree = 0;
  double tol = 0.0;
  std::string cache_fingerprint;
  std::string to_json() const;
};

// Order-by-order least squares expressing diff as the star-differential of
// an operator series spanned by graph operators on (alpha, beta, gamma^n),
// plus, in general mode, graph operators fed the brackets [alpha, gamma]
// and [beta, gamma].  Certification succeeds when every per-order residual
// on the monomial test space stays below tol.
CupCertificate certify_coboundary(const OpSeries& diff, const StarSeries& star,
                                  const Multivector& alpha,
                                  const Multivector& beta,
                                  const Multivector& gamma,
                                  const CertifyOptions& opt,
                                  const std::string& cache_fingerprint);

// Largest coefficient deviation between two operators of equal shape.
double max_term_deviation(const PolyDiffOp& a, const PolyDiffOp& b);

// Associativity defect bound: per-order l1 bound on |defect(f,g,h)| when
// each star coefficient is perturbed within err (componentwise, abs).
std::vector<double> associativity_defect_bound(const StarSeries& star,
                                               const OpSeries& err,
                                               const PolyCoeff& f,
                                               const PolyCoeff& g,
                                               const PolyCoeff& h);

}  // namespace gstar
