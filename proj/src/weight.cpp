#include "gstar/weight.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gstar/rational.hpp"

namespace gstar {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2 * kPi;
// Aerial coordinates past this radius are dropped by the quadrature
// transforms: the remaining tail mass is O(1/kFarCut) while the rounding
// noise of the angle-map Jacobian grows without bound.
constexpr double kFarCut = 1e6;
}  // namespace

double hyperbolic_angle(std::complex<double> p, std::complex<double> q) {
  double a = std::arg((q - p) / (q - std::conj(p)));
  if (a < 0) a += kTwoPi;
  return a;
}

AngleGrad hyperbolic_angle_grad(std::complex<double> p,
                                std::complex<double> q) {
  std::complex<double> i1 = 1.0 / (q - p);
  std::complex<double> i2 = 1.0 / (q - std::conj(p));
  AngleGrad g;
  g.dxq = (i1 - i2).imag();
  g.dyq = (i1 - i2).real();
  g.dxp = (-i1 + i2).imag();
  g.dyp = -(i1 + i2).real();
  return g;
}

int chart_dim(int n, int m) { return 2 * n + m - 2; }

ConfigPoint chart_point(int n, int m, const std::vector<double>& u) {
  if (static_cast<int>(u.size()) != chart_dim(n, m))
    throw std::invalid_argument("chart_point: coordinate count mismatch");
  ConfigPoint c;
  c.aerial.resize(n);
  c.ground.resize(m);
  if (m >= 2) {
    for (int j = 0; j < n; ++j) c.aerial[j] = {u[2 * j], u[2 * j + 1]};
    c.ground[0] = 0.0;
    for (int j = 2; j <= m - 1; ++j) c.ground[j - 1] = u[2 * n + j - 2];
    c.ground[m - 1] = 1.0;
  } else if (m == 1) {
    c.aerial[0] = {std::cos(u[0]), std::sin(u[0])};
    for (int j = 1; j < n; ++j)
      c.aerial[j] = {u[1 + 2 * (j - 1)], u[2 + 2 * (j - 1)]};
    c.ground[0] = 0.0;
  } else {
    c.aerial[0] = {0.0, 1.0};
    for (int j = 1; j < n; ++j)
      c.aerial[j] = {u[2 * (j - 1)], u[2 * (j - 1) + 1]};
  }
  return c;
}

namespace {

// Columns of the free coordinates for the aerial point j (1-based) and for
// the movable ground point j (1-based); -1 when the coordinate is fixed.
struct ChartCols {
  int n, m;
  // x,y columns of aerial j; for m==1, j==1 both map through theta (col 0).
  std::pair<int, int> aerial(int j) const {
    if (m >= 2) return {2 * (j - 1), 2 * (j - 1) + 1};
    if (m == 1) return j == 1 ? std::pair<int, int>{0, 0}
                              : std::pair<int, int>{1 + 2 * (j - 2),
                                                    2 + 2 * (j - 2)};
    return j == 1 ? std::pair<int, int>{-1, -1}
                  : std::pair<int, int>{2 * (j - 2), 2 * (j - 2) + 1};
  }
  int ground(int j) const {
    if (m >= 2 && j >= 2 && j <= m - 1) return 2 * n + j - 2;
    return -1;
  }
};

void fill_jacobian(const Graph& g, const ConfigPoint& c,
                   const std::vector<double>& u, Eigen::MatrixXd& J) {
  const int E = g.edge_count();
  const int dim = chart_dim(g.n, g.m);
  J.setZero(E, dim);
  ChartCols cols{g.n, g.m};
  const bool theta_chart = (g.m == 1);
  double st = 0, ct = 0;
  if (theta_chart) {
    st = std::sin(u[0]);
    ct = std::cos(u[0]);
  }
  auto add_aerial = [&](int row, int j, double dx, double dy) {
    auto [cx, cy] = cols.aerial(j);
    if (theta_chart && j == 1) {
      J(row, 0) += dx * (-st) + dy * ct;
      return;
    }
    if (cx >= 0) J(row, cx) += dx;
    if (cy >= 0) J(row, cy) += dy;
  };
  for (int e = 0; e < E; ++e) {
    auto [s, t] = g.edges[e];
    std::complex<double> p = c.aerial[s - 1];
    std::complex<double> q =
        t > 0 ? c.aerial[t - 1] : std::complex<double>(c.ground[-t - 1], 0.0);
    AngleGrad gr = hyperbolic_angle_grad(p, q);
    add_aerial(e, s, gr.dxp, gr.dyp);
    if (t > 0) {
      add_aerial(e, t, gr.dxq, gr.dyq);
    } else {
      int cq = cols.ground(-t);
      if (cq >= 0) J(e, cq) += gr.dxq;
    }
  }
}

// Generic reference chart coordinates, away from collisions.
std::vector<double> reference_coords(int n, int m) {
  std::vector<double> u;
  auto push_aerial = [&](int j) {
    u.push_back(0.3 + 0.7071 * (j - 1));
    u.push_back(1.1 + 0.31 * (j - 1));
  };
  if (m >= 2) {
    for (int j = 1; j <= n; ++j) push_aerial(j);
    for (int j = 2; j <= m - 1; ++j)
      u.push_back(static_cast<double>(j - 1) / (m - 1));
  } else if (m == 1) {
    u.push_back(1.0471975511965976);  // theta
    for (int j = 2; j <= n; ++j) push_aerial(j);
  } else {
    for (int j = 2; j <= n; ++j) push_aerial(j);
  }
  return u;
}

}  // namespace

int chart_orientation(int n, int m) {
  static std::map<std::pair<int, int>, int> memo;
  auto it = memo.find({n, m});
  if (it != memo.end()) return it->second;

  const int dim = chart_dim(n, m);
  const int full = 2 * n + m;
  std::vector<double> u = reference_coords(n, m);
  ConfigPoint c = chart_point(n, m, u);

  Eigen::MatrixXd M(full, 2 + dim);
  M.setZero();
  // Full coordinates: (x_1, y_1, ..., x_n, y_n, q_1, ..., q_m).
  auto xrow = [&](int j) { return 2 * (j - 1); };
  auto qrow = [&](int j) { return 2 * n + j - 1; };
  for (int j = 1; j <= n; ++j) {
    M(xrow(j), 0) = c.aerial[j - 1].real();  // scaling
    M(xrow(j) + 1, 0) = c.aerial[j - 1].imag();
    M(xrow(j), 1) = 1.0;  // translation
  }
  for (int j = 1; j <= m; ++j) {
    M(qrow(j), 0) = c.ground[j - 1];
    M(qrow(j), 1) = 1.0;
  }
  ChartCols cols{n, m};
  for (int j = 1; j <= n; ++j) {
    if (m == 1 && j == 1) {
      M(xrow(1), 2) = -std::sin(u[0]);
      M(xrow(1) + 1, 2) = std::cos(u[0]);
      continue;
    }
    auto [cx, cy] = cols.aerial(j);
    if (cx >= 0) M(xrow(j), 2 + cx) = 1.0;
    if (cy >= 0) M(xrow(j) + 1, 2 + cy) = 1.0;
  }
  for (int j = 2; j <= m - 1; ++j)
    if (cols.ground(j) >= 0) M(qrow(j), 2 + cols.ground(j)) = 1.0;

  double det = M.determinant();
  if (std::abs(det) < 1e-12)
    throw std::runtime_error("chart_orientation: degenerate reference");
  int sign = det > 0 ? 1 : -1;
  memo[{n, m}] = sign;
  return sign;
}

namespace {

double min_pairwise_distance(const ConfigPoint& c) {
  std::vector<std::complex<double>> pts = c.aerial;
  for (double q : c.ground) pts.emplace_back(q, 0.0);
  double best = 1e300;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j)
      best = std::min(best, std::abs(pts[i] - pts[j]));
  return best;
}

// Signed integrand without the global pin: orient * det / (2*pi)^E.
double raw_integrand(const Graph& g, const std::vector<double>& u,
                     Eigen::MatrixXd& J) {
  ConfigPoint c = chart_point(g.n, g.m, u);
  fill_jacobian(g, c, u, J);
  double det = J.determinant();
  return det * chart_orientation(g.n, g.m) *
         std::pow(kTwoPi, -g.edge_count());
}

double next_uniform(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * (1.0 / 9007199254740992.0);
}

// ---- Genz-Malik degree 7/5 rule with adaptive bisection, dims 2..4 ----

struct GMRegion {
  std::vector<double> center, half;
  double value = 0, error = 0;
  int split_dim = 0;
  long long id = 0;
};

struct GMCompare {
  bool operator()(const GMRegion& a, const GMRegion& b) const {
    if (a.error != b.error) return a.error < b.error;
    return a.id > b.id;  // older regions first on ties
  }
};

template <typename F>
void gm_evaluate(const F& f, GMRegion& r, long long& evals) {
  const int s = static_cast<int>(r.center.size());
  const double l2 = std::sqrt(9.0 / 70.0);
  const double l4 = std::sqrt(9.0 / 10.0);
  const double l5 = std::sqrt(9.0 / 19.0);
  const double w1 = (12824.0 - 9120.0 * s + 400.0 * s * s) / 19683.0;
  const double w2 = 980.0 / 6561.0;
  const double w3 = (1820.0 - 400.0 * s) / 19683.0;
  const double w4 = 200.0 / 19683.0;
  const double w5 = 6859.0 / 19683.0 / (1 << s);
  const double e1 = (729.0 - 950.0 * s + 50.0 * s * s) / 729.0;
  const double e2 = 245.0 / 486.0;
  const double e3 = (265.0 - 100.0 * s) / 1458.0;
  const double e4 = 25.0 / 729.0;

  std::vector<double> x(r.center);
  auto safe_f = [&](const std::vector<double>& p) {
    double v = f(p);
    ++evals;
    return std::isfinite(v) ? v : 0.0;
  };

  double fc = safe_f(x);
  double s2 = 0, s3 = 0, s4 = 0, s5 = 0;
  double sE2 = 0;
  double best_diff = -1.0;
  int best_dim = 0;
  for (int i = 0; i < s; ++i) {
    x = r.center;
    x[i] = r.center[i] + l2 * r.half[i];
    double fp2 = safe_f(x);
    x[i] = r.center[i] - l2 * r.half[i];
    double fm2 = safe_f(x);
    x[i] = r.center[i] + l4 * r.half[i];
    double fp4 = safe_f(x);
    x[i] = r.center[i] - l4 * r.half[i];
    double fm4 = safe_f(x);
    s2 += fp2 + fm2;
    s3 += fp4 + fm4;
    double diff = std::abs(fp2 + fm2 - 2 * fc -
                           (l2 * l2) / (l4 * l4) * (fp4 + fm4 - 2 * fc));
    if (diff > best_diff) {
      best_diff = diff;
      best_dim = i;
    }
  }
  sE2 = s2;
  for (int i = 0; i < s; ++i)
    for (int j = i + 1; j < s; ++j)
      for (int si = -1; si <= 1; si += 2)
        for (int sj = -1; sj <= 1; sj += 2) {
          x = r.center;
          x[i] = r.center[i] + si * l4 * r.half[i];
          x[j] = r.center[j] + sj * l4 * r.half[j];
          s4 += safe_f(x);
        }
  for (int mask = 0; mask < (1 << s); ++mask) {
    x = r.center;
    for (int i = 0; i < s; ++i)
      x[i] = r.center[i] + ((mask >> i) & 1 ? l5 : -l5) * r.half[i];
    s5 += safe_f(x);
  }
  double vol = 1.0;
  for (int i = 0; i < s; ++i) vol *= 2 * r.half[i];
  double v7 = vol * (w1 * fc + w2 * s2 + w3 * s3 + w4 * s4 + w5 * s5);
  double v5 = vol * (e1 * fc + e2 * sE2 + e3 * s3 + e4 * s4);
  r.value = v7;
  r.error = std::abs(v7 - v5);
  r.split_dim = best_dim;
}

// Leaves of a quadtree graded toward the given points: every box within its
// own size of a point is split, down to the given depth.  Integrands whose
// singular locations are known refine from this start instead of spending
// the budget rediscovering them.
std::vector<GMRegion> graded_partition(
    const std::vector<std::array<double, 2>>& pts, int depth) {
  struct Box {
    std::array<double, 2> c, h;
    int lvl;
  };
  std::vector<GMRegion> leaves;
  std::vector<Box> stack{{{0.5, 0.5}, {0.5, 0.5}, 0}};
  while (!stack.empty()) {
    Box b = stack.back();
    stack.pop_back();
    bool near = false;
    if (b.lvl < depth)
      for (const auto& p : pts) {
        double dx = std::max(0.0, std::abs(p[0] - b.c[0]) - b.h[0]);
        double dy = std::max(0.0, std::abs(p[1] - b.c[1]) - b.h[1]);
        if (std::max(dx, dy) <= b.h[0]) {
          near = true;
          break;
        }
      }
    if (!near) {
      GMRegion r;
      r.center = {b.c[0], b.c[1]};
      r.half = {b.h[0], b.h[1]};
      leaves.push_back(std::move(r));
      continue;
    }
    for (int qx = -1; qx <= 1; qx += 2)
      for (int qy = -1; qy <= 1; qy += 2)
        stack.push_back({{b.c[0] + qx * b.h[0] / 2, b.c[1] + qy * b.h[1] / 2},
                         {b.h[0] / 2, b.h[1] / 2},
                         b.lvl + 1});
  }
  return leaves;
}

template <typename F>
QuadResult gm_adaptive_seeded(const F& f, std::vector<GMRegion> seeds,
                              double tol_abs, double tol_rel,
                              long long max_eval) {
  long long evals = 0;
  long long next_id = 0;
  double total_v = 0, total_e = 0;
  std::priority_queue<GMRegion, std::vector<GMRegion>, GMCompare> heap;
  for (GMRegion& r : seeds) {
    r.id = next_id++;
    gm_evaluate(f, r, evals);
    total_v += r.value;
    total_e += r.error;
    heap.push(std::move(r));
  }
  while (total_e > std::max(tol_abs, tol_rel * std::abs(total_v)) &&
         evals < max_eval && !heap.empty()) {
    GMRegion worst = heap.top();
    heap.pop();
    total_v -= worst.value;
    total_e -= worst.error;
    int sd = worst.split_dim;
    for (int side = -1; side <= 1; side += 2) {
      GMRegion child;
      child.center = worst.center;
      child.half = worst.half;
      child.half[sd] *= 0.5;
      child.center[sd] += side * child.half[sd];
      child.id = next_id++;
      gm_evaluate(f, child, evals);
      total_v += child.value;
      total_e += child.error;
      heap.push(std::move(child));
    }
  }
  return {total_v, total_e, evals};
}

template <typename F>
QuadResult gm_adaptive(const F& f, int dim, double tol, long long max_eval) {
  GMRegion first;
  first.center.assign(dim, 0.5);
  first.half.assign(dim, 0.5);
  std::vector<GMRegion> seeds;
  seeds.push_back(std::move(first));
  return gm_adaptive_seeded(f, std::move(seeds), tol, tol, max_eval);
}

// Unit-cube transform for the supported charts.  Fills the chart vector and
// returns the transform Jacobian, or 0 outside the domain.
double cube_to_chart(int n, int m, const std::vector<double>& t,
                     std::vector<double>& u) {
  double jac = 1.0;
  int ti = 0;
  u.clear();
  auto push_xy = [&]() {
    double x = std::tan(kPi * (t[ti] - 0.5));
    jac *= kPi * (1 + x * x);
    ++ti;
    double y = t[ti] / (1 - t[ti]);
    jac *= 1.0 / ((1 - t[ti]) * (1 - t[ti]));
    ++ti;
    if (!(std::abs(x) < kFarCut) || !(y < kFarCut)) jac = 0.0;
    u.push_back(x);
    u.push_back(y);
  };
  if (m >= 2) {
    for (int j = 1; j <= n; ++j) push_xy();
    if (m == 3) {
      u.push_back(t[ti]);
      ++ti;
    } else if (m == 4) {
      double t1 = t[ti], t2 = t[ti + 1];
      u.push_back(t1 * t2);
      u.push_back(t2);
      jac *= t2;
      ti += 2;
    } else if (m > 4) {
      throw std::invalid_argument("cube_to_chart: unsupported ground count");
    }
  } else if (m == 1) {
    u.push_back(kPi * t[ti]);
    jac *= kPi;
    ++ti;
    for (int j = 2; j <= n; ++j) push_xy();
  } else {
    for (int j = 2; j <= n; ++j) push_xy();
  }
  return jac;
}

// Iterated passes for two free aerial points.  The chart integrand is only
// conditionally integrable across the product of the two half-planes (the
// collision singularities are log-divergent in absolute value), so a single
// four-dimensional adaptive pass loses the cancellation; nesting one
// two-dimensional pass per point keeps it separable.
QuadResult nested_two_aerial_once(const Graph& g, double tol,
                                  long long max_eval) {
  // A graded seed alone keeps a percent-level bias regardless of depth; the
  // adaptive refinement after it is what converges, so both passes get a
  // refinement allowance on top of their seeds.
  const bool fine = tol <= 1e-6;
  const int depth_out = fine ? 12 : 8;
  const int depth_in = fine ? 10 : 8;
  // Inner error enters the outer integrand multiplied by jac1, so the
  // absolute inner tolerance must shrink with jac1; the relative term
  // bounds the total inner contribution by tol_rel * int |field|.
  const double tol_field = fine ? 5e-7 : 6e-6;
  const double tol_rel = fine ? 3e-6 : 1e-5;
  const long long outer_refine =
      std::clamp<long long>(max_eval / 200, 1500, 30000);
  const long long inner_refine =
      std::clamp<long long>(max_eval / 400, 1000, 22000);
  long long inner_used = 0;
  Eigen::MatrixXd J;
  std::vector<double> u(4);
  // Chart positions of the two gauge-fixed ground points.
  const std::vector<std::array<double, 2>> ground_pts{{0.5, 0.0},
                                                      {0.75, 0.0}};

  // Far tails carry O(1/R) mass but catastrophic rounding; cut them off.
  auto stretch = [](double tx, double ty, double& x, double& y) {
    x = std::tan(kPi * (tx - 0.5));
    double jac = kPi * (1 + x * x);
    y = ty / (1 - ty);
    jac *= 1.0 / ((1 - ty) * (1 - ty));
    if (!(std::abs(x) < kFarCut) || !(y < kFarCut)) return 0.0;
    return jac;
  };
  auto cube_x = [](double x) { return 0.5 + std::atan(x) / kPi; };
  auto cube_y = [](double y) { return y / (1 + y); };

  auto outer_f = [&](const std::vector<double>& t1) -> double {
    double x1, y1;
    double jac1 = stretch(t1[0], t1[1], x1, y1);
    if (jac1 == 0.0) return 0.0;
    // Keep jac1 outside the inner integral so the inner tolerance matches
    // the decay of the integrand instead of the outer stretching.
    auto inner_f = [&](const std::vector<double>& t2) -> double {
      double x2, y2;
      double jac2 = stretch(t2[0], t2[1], x2, y2);
      if (jac2 == 0.0) return 0.0;
      u[0] = x1;
      u[1] = y1;
      u[2] = x2;
      u[3] = y2;
      return raw_integrand(g, u, J) * jac2;
    };
    // The inner integrand is singular where the second point meets a ground
    // point, the first point, or its mirror image.
    std::vector<std::array<double, 2>> pts = ground_pts;
    pts.push_back({cube_x(x1), cube_y(y1)});
    pts.push_back({cube_x(x1), 0.0});
    std::vector<GMRegion> seeds = graded_partition(pts, depth_in);
    long long cap = 17LL * seeds.size() + inner_refine;
    QuadResult qi = gm_adaptive_seeded(inner_f, std::move(seeds),
                                       tol_field / jac1, tol_rel, cap);
    inner_used += qi.evals;
    return qi.value * jac1;
  };

  std::vector<GMRegion> outer_seeds = graded_partition(ground_pts, depth_out);
  const long long outer_cap = 17LL * outer_seeds.size() + outer_refine;
  QuadResult qo = gm_adaptive_seeded(outer_f, std::move(outer_seeds), tol,
                                     tol, outer_cap);
  return {qo.value, qo.error, inner_used + qo.evals};
}

QuadResult nested_two_aerial(const Graph& g, double tol, long long max_eval) {
  // The cubature's own estimate is inflated by the unresolved corners, so
  // the reported error is the drift against a same-config run at a reduced
  // refinement allowance, floored by the residual-bias scale measured on
  // shapes with known values at the corresponding allowance.
  QuadResult fine = nested_two_aerial_once(g, std::min(tol, 1e-7), max_eval);
  QuadResult mid =
      nested_two_aerial_once(g, std::min(tol, 1e-7), max_eval * 2 / 5);
  const long long inner_refine =
      std::clamp<long long>(max_eval / 400, 1000, 22000);
  double floor_abs =
      std::max(1.0e-6, 6e-5 * std::pow(3000.0 / inner_refine, 2.3));
  double err = std::max(std::abs(fine.value - mid.value) / 3,
                        floor_abs + 2e-6 * std::abs(fine.value));
  return {fine.value, err, fine.evals + mid.evals};
}

QuadResult quadrature_raw(const Graph& g, double tol, long long max_eval) {
  const int dim = chart_dim(g.n, g.m);
  if (g.edge_count() != dim) return {0.0, 0.0, 0};
  if (dim == 0) return {1.0, 0.0, 0};
  if (g.n == 2 && g.m == 2) return nested_two_aerial(g, tol, max_eval);

  Eigen::MatrixXd J;
  std::vector<double> u;
  auto f = [&](const std::vector<double>& t) {
    double jac = cube_to_chart(g.n, g.m, t, u);
    if (jac == 0.0) return 0.0;
    return raw_integrand(g, u, J) * jac;
  };

  if (dim == 1) {
    gsl_set_error_handler_off();
    struct Ctx {
      decltype(f)* fn;
      long long evals;
    } ctx{&f, 0};
    gsl_function gf;
    gf.function = [](double x, void* p) {
      auto* c = static_cast<Ctx*>(p);
      ++c->evals;
      double v = (*c->fn)({x});
      return std::isfinite(v) ? v : 0.0;
    };
    gf.params = &ctx;
    gsl_integration_workspace* ws = gsl_integration_workspace_alloc(4096);
    double value = 0, abserr = 0;
    gsl_integration_qag(&gf, 0.0, 1.0, tol, tol, 4096, GSL_INTEG_GAUSS15, ws,
                        &value, &abserr);
    gsl_integration_workspace_free(ws);
    return {value, abserr, ctx.evals};
  }
  if (dim > 4)
    throw std::invalid_argument("weight_quadrature: chart dimension > 4");
  return gm_adaptive(f, dim, tol, max_eval);
}

const Graph& wedge_graph() {
  static const Graph w{1, 2, {{1, -1}, {1, -2}}};
  return w;
}

}  // namespace

int orientation_pin() {
  static int pin = 0;
  if (pin == 0) {
    QuadResult q = quadrature_raw(wedge_graph(), 1e-9, 2000000);
    if (std::abs(q.value) < 1e-6)
      throw std::runtime_error("orientation_pin: wedge weight degenerate");
    pin = q.value > 0 ? 1 : -1;
  }
  return pin;
}

bool quadrature_supported(const Graph& g) {
  if (chart_dim(g.n, g.m) != g.edge_count()) return true;  // exact zero
  if (chart_dim(g.n, g.m) == 0) return true;
  if (g.n <= 1 && g.m <= 4) return true;
  if (g.n == 2 && g.m <= 2) return true;
  return false;
}

QuadResult weight_quadrature_full(const Graph& g, double tol,
                                  long long max_eval) {
  if (!quadrature_supported(g))
    throw std::invalid_argument("weight_quadrature: unsupported shape");
  QuadResult q = quadrature_raw(g, tol, max_eval);
  int pin = (q.evals > 0) ? orientation_pin() : 1;
  const int dim = chart_dim(g.n, g.m);
  // The nested two-aerial path calibrates its own error internally.
  if (dim >= 2 && q.evals > 0 && !(g.n == 2 && g.m == 2)) {
    // Corner concentrations make the cubature's internal estimate
    // optimistic; calibrate the error against a coarser refinement level.
    QuadResult coarse = quadrature_raw(g, tol * 25, max_eval);
    double emp = std::abs(q.value - coarse.value) / 10.0;
    return {pin * q.value, std::max(q.error, emp), q.evals + coarse.evals};
  }
  return {pin * q.value, q.error, q.evals};
}

double weight_quadrature(const Graph& g, double tol, long long max_eval) {
  return weight_quadrature_full(g, tol, max_eval).value;
}

WeightEstimate weight_mc(const Graph& g, long long samples,
                         unsigned long long seed, const McOptions& opt) {
  const int dim = chart_dim(g.n, g.m);
  if (g.edge_count() != dim) return {0.0, 0.0, 0, seed, 0, "exact"};
  if (dim == 0) return {1.0, 0.0, 0, seed, 0, "exact"};
  if (samples < 2) throw std::invalid_argument("weight_mc: samples < 2");

  const double pin = orientation_pin();
  const double logy = std::log(opt.y_max / opt.y_min);
  std::mt19937_64 eng(seed);
  Eigen::MatrixXd J;
  std::vector<double> u(dim);
  long long rejected = 0;

  auto draw = [&]() -> double {  // fills u, returns proposal density
    double pdf = 1.0;
    int ui = 0;
    auto draw_xy = [&]() {
      u[ui++] = opt.window * (2 * next_uniform(eng) - 1);
      pdf *= 1.0 / (2 * opt.window);
      double y = opt.y_min * std::exp(logy * next_uniform(eng));
      u[ui++] = y;
      pdf *= 1.0 / (logy * y);
    };
    if (g.m >= 2) {
      for (int j = 0; j < g.n; ++j) draw_xy();
      int k = g.m - 2;
      if (k > 0) {
        std::vector<double> qs(k);
        for (double& q : qs) q = next_uniform(eng);
        std::sort(qs.begin(), qs.end());
        for (double q : qs) u[ui++] = q;
        pdf *= to_double(factorial(k));
      }
    } else if (g.m == 1) {
      u[ui++] = kPi * next_uniform(eng);
      pdf *= 1.0 / kPi;
      for (int j = 1; j < g.n; ++j) draw_xy();
    } else {
      for (int j = 1; j < g.n; ++j) draw_xy();
    }
    return pdf;
  };

  double mean = 0, m2 = 0;
  for (long long i = 0; i < samples; ++i) {
    double val = 0;
    for (int attempt = 0; attempt < opt.max_retries; ++attempt) {
      double pdf = draw();
      ConfigPoint c = chart_point(g.n, g.m, u);
      if (min_pairwise_distance(c) < opt.min_dist) {
        ++rejected;
        continue;
      }
      fill_jacobian(g, c, u, J);
      double det = J.determinant();
      double v = pin * chart_orientation(g.n, g.m) * det *
                 std::pow(kTwoPi, -g.edge_count()) / pdf;
      if (!std::isfinite(v)) {
        ++rejected;
        continue;
      }
      val = v;
      break;
    }
    double delta = val - mean;
    mean += delta / (i + 1);
    m2 += delta * (val - mean);
  }
  WeightEstimate w;
  w.value = mean;
  w.stderr_ = std::sqrt(m2 / samples / (samples - 1));
  w.samples = samples;
  w.seed = seed;
  w.rejected = rejected;
  w.method = "mc";
  return w;
}

unsigned long long fnv1a(const std::string& s) {
  unsigned long long h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::string convention_tag() {
  std::ostringstream os;
  os << "angle=arg((q-p)/(q-conj(p)));gauge=q1=0,qm=1|q1=0,|p1|=1|p1=i;pin="
     << orientation_pin();
  return os.str();
}

}  // namespace

std::optional<WeightEstimate> WeightCache::lookup(const Graph& g) const {
  auto [cg, sign] = canonical_edge_order(g);
  auto it = entries_.find(encode(cg));
  if (it == entries_.end()) return std::nullopt;
  WeightEstimate w = it->second;
  w.value *= sign;
  return w;
}

void WeightCache::put(const Graph& g, const WeightEstimate& w) {
  auto [cg, sign] = canonical_edge_order(g);
  WeightEstimate cw = w;
  cw.value *= sign;
  entries_[encode(cg)] = cw;
}

WeightEstimate WeightCache::get_or_compute(const Graph& g, long long samples,
                                           unsigned long long seed_base,
                                           bool prefer_quadrature,
                                           const McOptions& opt) {
  const int dim = chart_dim(g.n, g.m);
  if (g.edge_count() != dim) return {0.0, 0.0, 0, 0, 0, "exact"};
  if (dim == 0) return {1.0, 0.0, 0, 0, 0, "exact"};
  if (auto hit = lookup(g)) return *hit;
  auto [cg, sign] = canonical_edge_order(g);
  WeightEstimate cw;
  if (prefer_quadrature && quadrature_supported(cg)) {
    QuadResult q = weight_quadrature_full(cg);
    cw.value = q.value;
    cw.stderr_ = q.error;
    cw.samples = q.evals;
    cw.seed = 0;
    cw.method = "quadrature";
  } else {
    unsigned long long seed = seed_base ^ fnv1a(encode(cg));
    cw = weight_mc(cg, samples, seed, opt);
  }
  entries_[encode(cg)] = cw;
  WeightEstimate w = cw;
  w.value *= sign;
  return w;
}

std::string WeightCache::fingerprint() const {
  std::ostringstream os;
  for (const auto& [k, w] : entries_) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s=%.17g:%.17g:%lld;", k.c_str(), w.value,
                  w.stderr_, w.samples);
    os << buf;
  }
  std::ostringstream hex;
  hex << std::hex << fnv1a(os.str());
  return hex.str();
}

std::string WeightCache::to_json() const {
  nlohmann::json j;
  j["metadata"] = metadata_.empty()
                      ? std::string("convention:") + convention_tag()
                      : metadata_;
  nlohmann::json entries = nlohmann::json::object();
  for (const auto& [k, w] : entries_) {
    entries[k] = {{"value", w.value},       {"stderr", w.stderr_},
                  {"samples", w.samples},   {"seed", w.seed},
                  {"rejected", w.rejected}, {"method", w.method},
                  {"convention_tag", convention_tag()}};
  }
  j["entries"] = entries;
  return j.dump(2);
}

WeightCache WeightCache::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  WeightCache c;
  if (j.contains("metadata") && j["metadata"].is_string())
    c.metadata_ = j["metadata"].get<std::string>();
  if (j.contains("entries"))
    for (auto& [k, v] : j["entries"].items()) {
      WeightEstimate w;
      w.value = v.at("value").get<double>();
      w.stderr_ = v.at("stderr").get<double>();
      w.samples = v.value("samples", 0ll);
      w.seed = v.value("seed", 0ull);
      w.rejected = v.value("rejected", 0ll);
      w.method = v.value("method", std::string("mc"));
      c.entries_[k] = w;
    }
  return c;
}

void WeightCache::save(const std::string& path) const {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("WeightCache: cannot write " + path);
    out << to_json() << "\n";
  }
  fs::rename(tmp, target);
}

WeightCache WeightCache::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("WeightCache: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

WeightEstimate compute_W0(const Graph& g, WeightCache& cache,
                          long long samples, unsigned long long seed_base,
                          bool prefer_quadrature) {
  auto contracted = contract_12(g);
  if (!contracted) return {0.0, 0.0, 0, 0, 0, "exact"};
  return cache.get_or_compute(*contracted, samples, seed_base,
                              prefer_quadrature);
}

WeightEstimate compute_W1(const Graph& g, WeightCache& cache,
                          long long samples, unsigned long long seed_base,
                          bool prefer_quadrature) {
  WeightEstimate out;
  out.method = "assembled";
  for (const Splitting& sp : enumerate_splittings(g)) {
    if (sp.zero) continue;
    WeightEstimate w1 =
        cache.get_or_compute(sp.g1, samples, seed_base, prefer_quadrature);
    WeightEstimate w2 =
        cache.get_or_compute(sp.g2, samples, seed_base, prefer_quadrature);
    WeightEstimate w3 =
        cache.get_or_compute(sp.g3, samples, seed_base, prefer_quadrature);
    out.value += sp.sign * w1.value * w2.value * w3.value;
    double var = 0;
    var += std::pow(w1.stderr_ * w2.value * w3.value, 2);
    var += std::pow(w1.value * w2.stderr_ * w3.value, 2);
    var += std::pow(w1.value * w2.value * w3.stderr_, 2);
    out.stderr_ += std::sqrt(var);
  }
  return out;
}

}  // namespace gstar
