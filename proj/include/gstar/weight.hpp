#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gstar/graph.hpp"

namespace gstar {

// Configuration: aerial points in the open upper half plane, ground points
// on the real line in increasing order.
struct ConfigPoint {
  std::vector<std::complex<double>> aerial;
  std::vector<double> ground;
};

// Angle at p between the upward vertical geodesic and the geodesic toward q:
// arg((q - p) / (q - conj(p))), reduced to [0, 2*pi).
double hyperbolic_angle(std::complex<double> p, std::complex<double> q);

// Partial derivatives of the angle in the four real coordinates.
struct AngleGrad {
  double dxp, dyp, dxq, dyq;
};
AngleGrad hyperbolic_angle_grad(std::complex<double> p,
                                std::complex<double> q);

// Gauge slice used for all charts:
//   m >= 2: q_1 = 0, q_m = 1; free: all aerial points, q_2..q_{m-1};
//   m == 1: q_1 = 0, p_1 = exp(i theta); free: theta, p_2..p_n;
//   m == 0: p_1 = i; free: p_2..p_n.
// Free coordinates are listed aerial-first in the orders above.
int chart_dim(int n, int m);

// Embeds chart coordinates into a configuration.
ConfigPoint chart_point(int n, int m, const std::vector<double>& u);

// Sign of the Jacobian of (scaling, translation, chart) against the
// coordinate orientation dx_1^dy_1^...^dq_1^...^dq_m; constant per chart.
int chart_orientation(int n, int m);

// Global sign fixed once so that the first-order star term acts as
// +1/2 {f, g} on the wedge graph with increasing targets.
int orientation_pin();

struct WeightEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  long long samples = 0;
  unsigned long long seed = 0;
  long long rejected = 0;
  std::string method;  // "mc", "quadrature" or "exact"
};

struct McOptions {
  double window = 20.0;     // aerial real parts sampled on (-window, window)
  double y_min = 1e-4;      // aerial imaginary parts, log-uniform range
  double y_max = 1e2;
  double min_dist = 1e-9;   // pairwise separation below this is resampled
  int max_retries = 256;
};

// Monte Carlo weight: signed angle-form determinant over the gauge chart,
// importance-corrected for the proposal above.  Exact 0 (no sampling) when
// the edge count differs from the chart dimension; exact 1 in dimension 0.
WeightEstimate weight_mc(const Graph& g, long long samples,
                         unsigned long long seed, const McOptions& opt = {});

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  long long evals = 0;
};

// Deterministic quadrature, supported for n <= 1 and for n == 2, m <= 1
// (chart dimension at most 4).  Throws on unsupported shapes.
QuadResult weight_quadrature_full(const Graph& g, double tol = 1e-8,
                                  long long max_eval = 4000000);
double weight_quadrature(const Graph& g, double tol = 1e-8,
                         long long max_eval = 4000000);
bool quadrature_supported(const Graph& g);

// Equivariant weight store keyed by the canonical (block-sorted) encoding.
// Lookup and insertion transport values by the sort sign.
class WeightCache {
 public:
  std::optional<WeightEstimate> lookup(const Graph& g) const;
  void put(const Graph& g, const WeightEstimate& w);

  // Lookup, falling back to computation on miss: quadrature when supported
  // and preferred, otherwise Monte Carlo with seed derived from seed_base
  // and the canonical encoding.  Structural zeros and dimension-0 graphs
  // are returned exactly without touching the store.
  WeightEstimate get_or_compute(const Graph& g, long long samples,
                                unsigned long long seed_base,
                                bool prefer_quadrature = false,
                                const McOptions& opt = {});

  const std::map<std::string, WeightEstimate>& entries() const {
    return entries_;
  }
  std::string& metadata() { return metadata_; }
  const std::string& metadata() const { return metadata_; }

  // Order-independent digest of the stored entries.
  std::string fingerprint() const;

  std::string to_json() const;
  static WeightCache from_json(const std::string& text);
  // Atomic write: temp file in the target directory, then rename.
  void save(const std::string& path) const;
  static WeightCache load(const std::string& path);

 private:
  std::map<std::string, WeightEstimate> entries_;
  std::string metadata_;
};

// Weight of the graph obtained by merging vertices 1 and 2; zero when they
// are joined by an edge or the merge degenerates.
WeightEstimate compute_W0(const Graph& g, WeightCache& cache,
                          long long samples = 1000000,
                          unsigned long long seed_base = 20260815,
                          bool prefer_quadrature = false);

// Boundary weight: sum over cloud decompositions of the product of the
// three component weights, with the edge-regrouping sign.
WeightEstimate compute_W1(const Graph& g, WeightCache& cache,
                          long long samples = 1000000,
                          unsigned long long seed_base = 20260815,
                          bool prefer_quadrature = false);

// FNV-1a of a string; used to derive per-graph seeds and fingerprints.
unsigned long long fnv1a(const std::string& s);

}  // namespace gstar
