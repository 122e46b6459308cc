#pragma once

#include <json.hpp>

#include "gstar/multivector.hpp"
#include "gstar/polydiffop.hpp"

namespace gstar {

// Exact serialization: rationals are written as decimal strings; readers
// accept integers as well.

nlohmann::json poly_to_json(const PolyCoeff& p);
PolyCoeff poly_from_json(int d, const nlohmann::json& j);

// {"d", "k", "components": [{"indices": [...], "poly": [{"exps", "num",
// "den"}]}]}
nlohmann::json multivector_to_json(const Multivector& v);
Multivector multivector_from_json(const nlohmann::json& j);

// {"d", "m", "terms": [{"derivs": [[...], ...], "poly": [...]}]}
nlohmann::json op_to_json(const PolyDiffOp& op);
PolyDiffOp op_from_json(const nlohmann::json& j);

// {"d", "m", "order", "coeff": [...]}
nlohmann::json op_series_to_json(const OpSeries& s);
OpSeries op_series_from_json(const nlohmann::json& j);

// {"d", "order", "coeff": [...]}
nlohmann::json star_to_json(const StarSeries& s);
StarSeries star_from_json(const nlohmann::json& j);

}  // namespace gstar
