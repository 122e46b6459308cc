// Python bridge: operations take and return JSON strings in the same
// schemas the CLI uses; graphs travel as their text encodings.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "gstar/formality.hpp"
#include "gstar/json_io.hpp"

namespace py = pybind11;
using namespace gstar;
using nlohmann::json;

namespace {

Multivector mv_of(const std::string& s) {
  return multivector_from_json(json::parse(s));
}

std::string mv_dump(const Multivector& v) {
  return multivector_to_json(v).dump();
}

Graph graph_of(const std::string& enc) {
  auto g = parse_graph(enc);
  if (!g) throw std::invalid_argument("bad graph encoding: " + enc);
  return *g;
}

py::dict estimate_dict(const WeightEstimate& w) {
  py::dict d;
  d["value"] = w.value;
  d["stderr"] = w.stderr_;
  d["samples"] = w.samples;
  d["seed"] = w.seed;
  d["rejected"] = w.rejected;
  d["method"] = w.method;
  return d;
}

}  // namespace

PYBIND11_MODULE(_gstar, m) {
  m.doc() = "Graph calculus for deformation quantization on R^d";

  // Graphs.
  m.def(
      "enumerate_graphs",
      [](int n, int gm, int edges) {
        std::vector<std::string> out;
        for (const Graph& g : enumerate_graphs(n, gm, edges))
          out.push_back(encode(g));
        return out;
      },
      py::arg("n"), py::arg("m"), py::arg("edges"));
  m.def("expected_edge_count", &expected_edge_count, py::arg("n"),
        py::arg("m"));
  m.def("chart_dim", &chart_dim, py::arg("n"), py::arg("m"));
  m.def(
      "validate_graph",
      [](const std::string& enc) {
        auto g = parse_graph(enc);
        return g.has_value();
      },
      py::arg("encoding"));
  m.def(
      "canonical_encoding",
      [](const std::string& enc) {
        auto [cg, s] = canonical_edge_order(graph_of(enc));
        return py::make_tuple(encode(cg), s);
      },
      py::arg("encoding"));

  // Multivector algebra on JSON payloads.
  m.def(
      "wedge",
      [](const std::string& a, const std::string& b) {
        return mv_dump(wedge(mv_of(a), mv_of(b)));
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "bullet",
      [](const std::string& a, const std::string& b) {
        return mv_dump(bullet(mv_of(a), mv_of(b)));
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "schouten",
      [](const std::string& a, const std::string& b) {
        return mv_dump(schouten_modified(mv_of(a), mv_of(b)));
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "b_gamma",
      [](const std::string& enc, const std::vector<std::string>& mvs) {
        std::vector<Multivector> args;
        for (const auto& s : mvs) args.push_back(mv_of(s));
        return op_to_json(b_gamma(graph_of(enc), args)).dump();
      },
      py::arg("encoding"), py::arg("multivectors"));

  // Weights.
  m.def(
      "weight_mc",
      [](const std::string& enc, long long samples,
         unsigned long long seed) {
        return estimate_dict(weight_mc(graph_of(enc), samples, seed));
      },
      py::arg("encoding"), py::arg("samples") = 1000000,
      py::arg("seed") = 20260815);
  m.def(
      "weight_quadrature",
      [](const std::string& enc, double tol, long long max_eval) {
        QuadResult q = weight_quadrature_full(graph_of(enc), tol, max_eval);
        py::dict d;
        d["value"] = q.value;
        d["error"] = q.error;
        d["evals"] = q.evals;
        return d;
      },
      py::arg("encoding"), py::arg("tol") = 1e-8,
      py::arg("max_eval") = 4000000);
  m.def(
      "quadrature_supported",
      [](const std::string& enc) { return quadrature_supported(graph_of(enc)); },
      py::arg("encoding"));

  py::class_<WeightCache>(m, "WeightCache")
      .def(py::init<>())
      .def("to_json", &WeightCache::to_json)
      .def_static("from_json", &WeightCache::from_json, py::arg("text"))
      .def("save", &WeightCache::save, py::arg("path"))
      .def_static("load", &WeightCache::load, py::arg("path"))
      .def("fingerprint", &WeightCache::fingerprint)
      .def("__len__",
           [](const WeightCache& c) { return c.entries().size(); })
      .def(
          "get_or_compute",
          [](WeightCache& c, const std::string& enc, long long samples,
             unsigned long long seed, bool prefer_quadrature) {
            return estimate_dict(c.get_or_compute(graph_of(enc), samples,
                                                  seed, prefer_quadrature));
          },
          py::arg("encoding"), py::arg("samples") = 1000000,
          py::arg("seed") = 20260815, py::arg("prefer_quadrature") = false)
      .def(
          "ensure_taylor_weights",
          [](WeightCache& c, const std::vector<int>& degrees,
             long long samples, unsigned long long seed,
             bool prefer_quadrature) {
            ensure_taylor_weights(degrees, c, samples, seed,
                                  prefer_quadrature);
          },
          py::arg("degrees"), py::arg("samples") = 1000000,
          py::arg("seed") = 20260815, py::arg("prefer_quadrature") = false);

  // Assembled series.
  m.def(
      "star_product",
      [](const std::string& gamma, int order, const WeightCache& cache) {
        return star_to_json(star_product(mv_of(gamma), order, cache)).dump();
      },
      py::arg("gamma"), py::arg("order"), py::arg("cache"));
  m.def(
      "star_error",
      [](const std::string& gamma, int order, const WeightCache& cache) {
        return op_series_to_json(star_error(mv_of(gamma), order, cache))
            .dump();
      },
      py::arg("gamma"), py::arg("order"), py::arg("cache"));
  m.def(
      "u_prime",
      [](const std::string& delta, const std::string& gamma, int order,
         const WeightCache& cache) {
        return op_series_to_json(
                   u_prime(mv_of(delta), mv_of(gamma), order, cache))
            .dump();
      },
      py::arg("delta"), py::arg("gamma"), py::arg("order"), py::arg("cache"));
  m.def(
      "chain_map_residual",
      [](const std::string& delta, const std::string& gamma, int order,
         const WeightCache& cache) {
        return op_series_to_json(chain_map_residual(mv_of(delta),
                                                    mv_of(gamma), order,
                                                    cache))
            .dump();
      },
      py::arg("delta"), py::arg("gamma"), py::arg("order"), py::arg("cache"));

  // Cup-compatibility certificate; mirrors the CLI certify pipeline.
  m.def(
      "certify_cup",
      [](const std::string& alpha, const std::string& beta,
         const std::string& gamma, int order, WeightCache& cache,
         long long samples, unsigned long long seed, bool prefer_quadrature,
         int test_degree, double tol, bool general) {
        Multivector a = mv_of(alpha), b = mv_of(beta), g = mv_of(gamma);
        CupDiffOptions opt;
        opt.samples = samples;
        opt.seed_base = seed;
        opt.prefer_quadrature = prefer_quadrature;
        CupDiffResult r = cup_difference(a, b, g, order, cache, opt);
        StarSeries star = star_product(g, order, cache);
        CertifyOptions copt;
        copt.test_degree = test_degree;
        copt.tol = tol;
        copt.general_mode = general;
        CupCertificate cert = certify_coboundary(r.diff, star, a, b, g, copt,
                                                 cache.fingerprint());
        json j = json::parse(cert.to_json());
        j["w1_consistent"] = r.w1_consistent;
        j["w1_max_deviation"] = r.w1_max_dev;
        j["w1_tolerance"] = r.w1_tol;
        return j.dump();
      },
      py::arg("alpha"), py::arg("beta"), py::arg("gamma"), py::arg("order"),
      py::arg("cache"), py::arg("samples") = 1000000,
      py::arg("seed") = 20260815, py::arg("prefer_quadrature") = true,
      py::arg("test_degree") = 3, py::arg("tol") = 1e-3,
      py::arg("general") = false);
}
