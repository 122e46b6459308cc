#include "gstar/json_io.hpp"

#include <stdexcept>
#include <string>

namespace gstar {

namespace {

using nlohmann::json;
using boost::multiprecision::cpp_int;

cpp_int int_from_json(const json& j) {
  if (j.is_string()) return cpp_int(j.get<std::string>());
  if (j.is_number_integer()) return cpp_int(j.get<long long>());
  throw std::invalid_argument("json: integer or string expected");
}

Rational rational_from_json(const json& num, const json& den) {
  cpp_int n = int_from_json(num);
  cpp_int d = int_from_json(den);
  if (d == 0) throw std::invalid_argument("json: zero denominator");
  return Rational(n, d);
}

}  // namespace

json poly_to_json(const PolyCoeff& p) {
  json arr = json::array();
  for (const auto& [e, c] : p.terms()) {
    json t;
    t["exps"] = e;
    t["num"] = numerator(c).str();
    t["den"] = denominator(c).str();
    arr.push_back(std::move(t));
  }
  return arr;
}

PolyCoeff poly_from_json(int d, const json& j) {
  if (!j.is_array()) throw std::invalid_argument("json: poly array expected");
  PolyCoeff p(d);
  for (const auto& t : j) {
    auto e = t.at("exps").get<MultiIndex>();
    p.add_monomial(e, rational_from_json(t.at("num"), t.at("den")));
  }
  return p;
}

json multivector_to_json(const Multivector& v) {
  json j;
  j["d"] = v.dim();
  j["k"] = v.degree();
  json comps = json::array();
  for (const auto& [t, c] : v.components()) {
    json e;
    e["indices"] = t;
    e["poly"] = poly_to_json(c);
    comps.push_back(std::move(e));
  }
  j["components"] = std::move(comps);
  return j;
}

Multivector multivector_from_json(const json& j) {
  int d = j.at("d").get<int>();
  int k = j.at("k").get<int>();
  Multivector v(d, k);
  for (const auto& e : j.at("components")) {
    auto t = e.at("indices").get<IndexTuple>();
    v.add_term(t, poly_from_json(d, e.at("poly")));
  }
  return v;
}

json op_to_json(const PolyDiffOp& op) {
  json j;
  j["d"] = op.dim();
  j["m"] = op.arity();
  json terms = json::array();
  for (const auto& [dv, c] : op.terms()) {
    json t;
    t["derivs"] = dv;
    t["poly"] = poly_to_json(c);
    terms.push_back(std::move(t));
  }
  j["terms"] = std::move(terms);
  return j;
}

PolyDiffOp op_from_json(const json& j) {
  int d = j.at("d").get<int>();
  int m = j.at("m").get<int>();
  PolyDiffOp op(d, m);
  for (const auto& t : j.at("terms")) {
    auto dv = t.at("derivs").get<std::vector<MultiIndex>>();
    op.add_term(dv, poly_from_json(d, t.at("poly")));
  }
  return op;
}

json op_series_to_json(const OpSeries& s) {
  json j;
  j["d"] = s.d;
  j["m"] = s.m;
  j["order"] = s.order;
  json arr = json::array();
  for (const auto& op : s.coeff) arr.push_back(op_to_json(op));
  j["coeff"] = std::move(arr);
  return j;
}

OpSeries op_series_from_json(const json& j) {
  OpSeries s = OpSeries::zero(j.at("d").get<int>(), j.at("m").get<int>(),
                              j.at("order").get<int>());
  const auto& arr = j.at("coeff");
  if (static_cast<int>(arr.size()) != s.order + 1)
    throw std::invalid_argument("json: series coefficient count");
  for (int i = 0; i <= s.order; ++i) s.coeff[i] = op_from_json(arr[i]);
  s.validate();
  return s;
}

json star_to_json(const StarSeries& s) {
  json j;
  j["d"] = s.d;
  j["order"] = s.order;
  json arr = json::array();
  for (const auto& op : s.coeff) arr.push_back(op_to_json(op));
  j["coeff"] = std::move(arr);
  return j;
}

StarSeries star_from_json(const json& j) {
  StarSeries s = StarSeries::undeformed(j.at("d").get<int>(),
                                        j.at("order").get<int>());
  const auto& arr = j.at("coeff");
  if (static_cast<int>(arr.size()) != s.order + 1)
    throw std::invalid_argument("json: series coefficient count");
  for (int i = 0; i <= s.order; ++i) s.coeff[i] = op_from_json(arr[i]);
  s.validate();
  return s;
}

}  // namespace gstar
