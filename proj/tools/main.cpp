// Command line front end: graph enumeration, weights, star products, the
// Taylor differential, cup-compatibility certificates and associativity
// checks.  Exit codes: 0 success (or certified), 1 certification failed,
// 2 argument error, 3 malformed input, 4 weight cache insufficient.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gstar/formality.hpp"
#include "gstar/graph.hpp"
#include "gstar/json_io.hpp"
#include "gstar/multivector.hpp"
#include "gstar/weight.hpp"

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kNotCertified = 1;
constexpr int kArgError = 2;
constexpr int kBadInput = 3;
constexpr int kCacheMiss = 4;

struct CmdError {
  int code;
  std::string message;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CmdError{kBadInput, "cannot open " + path};
  try {
    json j;
    in >> j;
    return j;
  } catch (const std::exception& e) {
    throw CmdError{kBadInput, path + ": " + e.what()};
  }
}

gstar::Multivector load_multivector(const std::string& path) {
  json j = read_json_file(path);
  try {
    return gstar::multivector_from_json(j);
  } catch (const std::exception& e) {
    throw CmdError{kBadInput, path + ": " + e.what()};
  }
}

gstar::WeightCache open_cache(const std::string& path) {
  if (path.empty()) return gstar::WeightCache();
  std::ifstream probe(path);
  if (!probe.good()) return gstar::WeightCache();
  try {
    return gstar::WeightCache::load(path);
  } catch (const std::exception& e) {
    throw CmdError{kBadInput, path + ": " + e.what()};
  }
}

void save_cache(const gstar::WeightCache& cache, const std::string& path) {
  if (!path.empty()) cache.save(path);
}

json weight_to_json(const gstar::WeightEstimate& w) {
  return json{{"value", w.value},       {"stderr", w.stderr_},
              {"samples", w.samples},   {"seed", w.seed},
              {"rejected", w.rejected}, {"method", w.method}};
}

struct CommonOpts {
  std::string cache_path;
  std::string format = "json";
  long long samples = 1000000;
  unsigned long long seed = 20260815;
  int order = 1;
};

int run_graphs(int n, int m, int edges, const std::string& format) {
  if (n < 0 || m < 0 || edges < 0)
    throw CmdError{kArgError, "graph shape must be non-negative"};
  std::vector<gstar::Graph> out = gstar::enumerate_graphs(n, m, edges);
  if (format == "json") {
    json arr = json::array();
    for (const auto& g : out) arr.push_back(gstar::encode(g));
    std::cout << json{{"count", out.size()}, {"graphs", arr}}.dump(2)
              << "\n";
  } else {
    for (const auto& g : out) std::cout << gstar::encode(g) << "\n";
  }
  return kOk;
}

int run_weight(const std::string& encoding, const CommonOpts& opt,
               bool quadrature) {
  auto g = gstar::parse_graph(encoding);
  if (!g) throw CmdError{kBadInput, "malformed graph encoding"};
  auto problems = gstar::validate(*g);
  if (!problems.empty()) throw CmdError{kBadInput, problems.front()};
  gstar::WeightCache cache = open_cache(opt.cache_path);
  gstar::WeightEstimate w =
      cache.get_or_compute(*g, opt.samples, opt.seed, quadrature);
  save_cache(cache, opt.cache_path);
  if (opt.format == "json") {
    json j = weight_to_json(w);
    j["graph"] = gstar::encode(*g);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << gstar::encode(*g) << "  value=" << w.value
              << "  stderr=" << w.stderr_ << "  method=" << w.method << "\n";
  }
  return kOk;
}

int run_star(const std::string& gamma_path, const CommonOpts& opt) {
  gstar::Multivector gamma = load_multivector(gamma_path);
  if (gamma.degree() != 2)
    throw CmdError{kArgError, "star requires a bivector"};
  gstar::WeightCache cache = open_cache(opt.cache_path);
  gstar::StarSeries star = gstar::star_product(gamma, opt.order, cache);
  gstar::OpSeries err = gstar::star_error(gamma, opt.order, cache);
  if (opt.format == "json") {
    std::cout << json{{"star", gstar::star_to_json(star)},
                      {"error", gstar::op_series_to_json(err)}}
                     .dump(2)
              << "\n";
  } else {
    for (int k = 0; k <= star.order; ++k)
      std::cout << "order " << k << ": " << star.coeff[k].terms().size()
                << " terms, error bound " << err.coeff[k].max_coeff_l1()
                << "\n";
  }
  return kOk;
}

int run_uprime(const std::string& delta_path, const std::string& gamma_path,
               const CommonOpts& opt) {
  gstar::Multivector delta = load_multivector(delta_path);
  gstar::Multivector gamma = load_multivector(gamma_path);
  if (gamma.degree() != 2)
    throw CmdError{kArgError, "uprime requires a bivector deformation"};
  if (delta.dim() != gamma.dim())
    throw CmdError{kArgError, "dimension mismatch between inputs"};
  gstar::WeightCache cache = open_cache(opt.cache_path);
  gstar::OpSeries s = gstar::u_prime(delta, gamma, opt.order, cache);
  gstar::OpSeries err = gstar::u_prime_error(delta, gamma, opt.order, cache);
  if (opt.format == "json") {
    std::cout << json{{"series", gstar::op_series_to_json(s)},
                      {"error", gstar::op_series_to_json(err)}}
                     .dump(2)
              << "\n";
  } else {
    for (int k = 0; k <= s.order; ++k)
      std::cout << "order " << k << ": " << s.coeff[k].terms().size()
                << " terms, error bound " << err.coeff[k].max_coeff_l1()
                << "\n";
  }
  return kOk;
}

int run_certify(const std::string& alpha_path, const std::string& beta_path,
                const std::string& gamma_path, const CommonOpts& opt,
                int test_degree, double tol, bool general,
                bool no_quadrature) {
  gstar::Multivector alpha = load_multivector(alpha_path);
  gstar::Multivector beta = load_multivector(beta_path);
  gstar::Multivector gamma = load_multivector(gamma_path);
  if (gamma.degree() != 2)
    throw CmdError{kArgError, "certify requires a bivector deformation"};
  if (alpha.dim() != gamma.dim() || beta.dim() != gamma.dim())
    throw CmdError{kArgError, "dimension mismatch between inputs"};
  if (!general) {
    if (!gstar::schouten_modified(alpha, gamma).is_zero())
      throw CmdError{kArgError,
                     "[alpha, gamma] != 0: the differential does not vanish "
                     "on alpha; rerun with --general"};
    if (!gstar::schouten_modified(beta, gamma).is_zero())
      throw CmdError{kArgError,
                     "[beta, gamma] != 0: the differential does not vanish "
                     "on beta; rerun with --general"};
  }
  gstar::WeightCache cache = open_cache(opt.cache_path);
  gstar::CupDiffOptions copt;
  copt.samples = opt.samples;
  copt.seed_base = opt.seed;
  copt.prefer_quadrature = !no_quadrature;
  gstar::CupDiffResult r =
      gstar::cup_difference(alpha, beta, gamma, opt.order, cache, copt);
  gstar::StarSeries star = gstar::star_product(gamma, opt.order, cache);
  gstar::CertifyOptions cert_opt;
  cert_opt.test_degree = test_degree;
  cert_opt.tol = tol;
  cert_opt.general_mode = general;
  if (cert_opt.max_test_degree < test_degree)
    cert_opt.max_test_degree = test_degree;
  gstar::CupCertificate cert = gstar::certify_coboundary(
      r.diff, star, alpha, beta, gamma, cert_opt, cache.fingerprint());
  save_cache(cache, opt.cache_path);
  if (opt.format == "json") {
    json j = json::parse(cert.to_json());
    j["w1_consistent"] = r.w1_consistent;
    j["w1_max_deviation"] = r.w1_max_dev;
    j["w1_tolerance"] = r.w1_tol;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << (cert.certified ? "CERTIFIED" : "NOT CERTIFIED") << "\n";
    for (size_t k = 0; k < cert.residuals.size(); ++k)
      std::cout << "order " << k << ": residual " << cert.residuals[k]
                << " (rhs norm " << cert.rhs_norms[k] << ")\n";
  }
  return cert.certified ? kOk : kNotCertified;
}

int run_verify_assoc(const std::string& gamma_path, const CommonOpts& opt,
                     int test_degree, double tol, bool no_quadrature) {
  gstar::Multivector gamma = load_multivector(gamma_path);
  if (gamma.degree() != 2)
    throw CmdError{kArgError, "verify-associativity requires a bivector"};
  const int d = gamma.dim();
  gstar::WeightCache cache = open_cache(opt.cache_path);
  for (int k = 1; k <= opt.order; ++k)
    gstar::ensure_taylor_weights(std::vector<int>(k, 2), cache, opt.samples,
                                 opt.seed, !no_quadrature);
  gstar::StarSeries star = gstar::star_product(gamma, opt.order, cache);
  gstar::OpSeries err = gstar::star_error(gamma, opt.order, cache);
  save_cache(cache, opt.cache_path);

  // All monomials of total degree <= test_degree.
  std::vector<gstar::PolyCoeff> mono;
  std::vector<int> e(d, 0);
  for (;;) {
    int tot = 0;
    for (int v : e) tot += v;
    if (tot <= test_degree)
      mono.push_back(gstar::PolyCoeff::monomial(
          d, gstar::MultiIndex(e.begin(), e.end()), gstar::Rational(1)));
    int i = 0;
    while (i < d) {
      if (++e[i] > test_degree) {
        e[i] = 0;
        ++i;
      } else {
        break;
      }
    }
    if (i == d) break;
  }

  double worst_excess = -1e300;
  double max_defect = 0.0;
  bool ok = true;
  for (const auto& f : mono)
    for (const auto& g : mono)
      for (const auto& h : mono) {
        auto defect = gstar::associativity_defect(star, f, g, h);
        auto bound = gstar::associativity_defect_bound(star, err, f, g, h);
        for (size_t k = 0; k < defect.size(); ++k) {
          double norm = defect[k].l1_norm();
          max_defect = std::max(max_defect, norm);
          double excess = norm - (3 * bound[k] + tol);
          worst_excess = std::max(worst_excess, excess);
          if (excess > 0) ok = false;
        }
      }
  if (opt.format == "json") {
    std::cout << json{{"order", opt.order},
                      {"test_degree", test_degree},
                      {"max_defect", max_defect},
                      {"worst_excess", worst_excess},
                      {"ok", ok}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << (ok ? "BOUNDED" : "EXCEEDED")
              << "  max defect = " << max_defect
              << "  worst excess = " << worst_excess << "\n";
  }
  return ok ? kOk : kNotCertified;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Graph calculus for deformation quantization: admissible graphs, "
      "configuration-space weights, star products and cup-compatibility "
      "certificates."};
  app.require_subcommand(1);

  CommonOpts opt;

  int g_n = 0, g_m = 0, g_edges = 0;
  CLI::App* graphs =
      app.add_subcommand("graphs", "Enumerate admissible labeled graphs");
  graphs->add_option("n", g_n, "Aerial vertex count")->required();
  graphs->add_option("m", g_m, "Ground vertex count")->required();
  graphs->add_option("edges", g_edges, "Edge count")->required();
  graphs->add_option("--format", opt.format, "json or text");

  std::string w_encoding;
  bool w_quadrature = false;
  CLI::App* weight =
      app.add_subcommand("weight", "Estimate the weight of one graph");
  weight->add_option("graph", w_encoding, "Graph encoding \"n m : (s->t),...\"")
      ->required();
  weight->add_option("--samples", opt.samples, "Monte Carlo sample count");
  weight->add_option("--seed", opt.seed, "Monte Carlo seed");
  weight->add_option("--cache", opt.cache_path, "Weight cache file");
  weight->add_flag("--quadrature", w_quadrature,
                   "Prefer deterministic quadrature when supported");
  weight->add_option("--format", opt.format, "json or text");

  std::string s_gamma;
  CLI::App* star = app.add_subcommand(
      "star", "Truncated star product of a bivector (reads the cache)");
  star->add_option("gamma", s_gamma, "Bivector JSON file")->required();
  star->add_option("--order", opt.order, "Truncation order");
  star->add_option("--cache", opt.cache_path, "Weight cache file");
  star->add_option("--format", opt.format, "json or text");

  std::string u_delta, u_gamma;
  CLI::App* uprime = app.add_subcommand(
      "uprime", "Taylor differential applied to a multivector");
  uprime->add_option("delta", u_delta, "Multivector JSON file")->required();
  uprime->add_option("gamma", u_gamma, "Bivector JSON file")->required();
  uprime->add_option("--order", opt.order, "Truncation order");
  uprime->add_option("--cache", opt.cache_path, "Weight cache file");
  uprime->add_option("--format", opt.format, "json or text");

  std::string c_alpha, c_beta, c_gamma;
  int c_test_degree = 3;
  double c_tol = 1e-3;
  bool c_general = false, c_no_quad = false;
  CLI::App* certify = app.add_subcommand(
      "certify",
      "Certify that the cup defect is a star-differential coboundary");
  certify->add_option("alpha", c_alpha, "Multivector JSON file")->required();
  certify->add_option("beta", c_beta, "Multivector JSON file")->required();
  certify->add_option("gamma", c_gamma, "Bivector JSON file")->required();
  certify->add_option("--order", opt.order, "Truncation order");
  certify->add_option("--samples", opt.samples, "Monte Carlo sample count");
  certify->add_option("--seed", opt.seed, "Monte Carlo seed base");
  certify->add_option("--cache", opt.cache_path, "Weight cache file");
  certify->add_option("--test-degree", c_test_degree,
                      "Monomial degree of the test space");
  certify->add_option("--tol", c_tol, "Residual tolerance");
  certify->add_flag("--general", c_general,
                    "Allow nonzero brackets [alpha,gamma], [beta,gamma]");
  certify->add_flag("--no-quadrature", c_no_quad,
                    "Force Monte Carlo for every weight");
  certify->add_option("--format", opt.format, "json or text");

  std::string v_gamma;
  int v_test_degree = 3;
  double v_tol = 1e-9;
  bool v_no_quad = false;
  CLI::App* verify = app.add_subcommand(
      "verify-associativity",
      "Bound the associativity defect of the computed star product");
  verify->add_option("gamma", v_gamma, "Bivector JSON file")->required();
  verify->add_option("--order", opt.order, "Truncation order");
  verify->add_option("--samples", opt.samples, "Monte Carlo sample count");
  verify->add_option("--seed", opt.seed, "Monte Carlo seed base");
  verify->add_option("--cache", opt.cache_path, "Weight cache file");
  verify->add_option("--test-degree", v_test_degree,
                     "Monomial degree of the test space");
  verify->add_option("--tol", v_tol, "Additive slack on the bound");
  verify->add_flag("--no-quadrature", v_no_quad,
                   "Force Monte Carlo for every weight");
  verify->add_option("--format", opt.format, "json or text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kArgError;
  }

  if (opt.format != "json" && opt.format != "text") {
    std::cerr << "error: --format must be json or text\n";
    return kArgError;
  }

  try {
    if (*graphs) return run_graphs(g_n, g_m, g_edges, opt.format);
    if (*weight) return run_weight(w_encoding, opt, w_quadrature);
    if (*star) return run_star(s_gamma, opt);
    if (*uprime) return run_uprime(u_delta, u_gamma, opt);
    if (*certify)
      return run_certify(c_alpha, c_beta, c_gamma, opt, c_test_degree, c_tol,
                         c_general, c_no_quad);
    if (*verify)
      return run_verify_assoc(v_gamma, opt, v_test_degree, v_tol, v_no_quad);
  } catch (const CmdError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const gstar::CacheMissError& e) {
    std::cerr << "error: weight cache is missing " << e.missing().size()
              << " entries:\n";
    for (const auto& k : e.missing()) std::cerr << "  " << k << "\n";
    return kCacheMiss;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kArgError;
  }
  return kArgError;
}
