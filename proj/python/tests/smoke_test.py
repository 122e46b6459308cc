"""End-to-end smoke checks for the python module."""

import json
import math
import sys

import gstar


def approx(a, b, eps=1e-4):
    assert abs(a - b) < eps, f"{a} !~ {b}"


def main():
    # Graph enumeration and bookkeeping.
    wedges = gstar.enumerate_graphs(1, 2, 2)
    assert len(wedges) == 2
    assert "1 2 : (1->-1),(1->-2)" in wedges
    assert gstar.expected_edge_count(2, 2) == 4
    assert gstar.chart_dim(1, 2) == 2
    assert gstar.validate_graph("1 2 : (1->-1),(1->-2)")
    assert not gstar.validate_graph("1 2 : (3->-1)")
    enc, sign = gstar.canonical_encoding("1 2 : (1->-2),(1->-1)")
    assert enc == "1 2 : (1->-1),(1->-2)" and sign == -1

    # Weights: quadrature pins the wedge at +1/2, Monte Carlo agrees and is
    # reproducible.
    q = gstar.weight_quadrature("1 2 : (1->-1),(1->-2)")
    approx(q["value"], 0.5, 1e-4)
    w1 = gstar.weight_mc("1 2 : (1->-1),(1->-2)", samples=20000, seed=7)
    w2 = gstar.weight_mc("1 2 : (1->-1),(1->-2)", samples=20000, seed=7)
    assert w1["value"] == w2["value"] and w1["stderr"] == w2["stderr"]
    assert abs(w1["value"] - 0.5) < 5 * w1["stderr"] + 1e-3

    # Multivector algebra round trip.
    a = gstar.coordinate_field(2, 1)
    b = gstar.coordinate_field(2, 2)
    w = json.loads(gstar.wedge(a, b))
    assert w["k"] == 2 and w["components"][0]["indices"] == [1, 2]
    assert json.loads(gstar.schouten(a, b))["components"] == []

    # Graph operator of the wedge graph on the unit bivector.
    op = json.loads(
        gstar.b_gamma("1 2 : (1->-1),(1->-2)", [gstar.constant_bivector()]))
    assert op["m"] == 2 and len(op["terms"]) == 2

    # Star product through order one from a quadrature-backed cache.
    cache = gstar.WeightCache()
    cache.ensure_taylor_weights([2], samples=20000, seed=1,
                                prefer_quadrature=True)
    star = json.loads(gstar.star_product(gstar.constant_bivector(), 1, cache))
    coeff1 = star["coeff"][1]["terms"]
    vals = {
        tuple(map(tuple, t["derivs"])):
            int(t["poly"][0]["num"]) / int(t["poly"][0]["den"])
        for t in coeff1
    }
    approx(vals[((1, 0), (0, 1))], 0.5, 1e-4)
    approx(vals[((0, 1), (1, 0))], -0.5, 1e-4)
    assert len(cache) > 0

    # Cache serialization round trip.
    back = gstar.WeightCache.from_json(cache.to_json())
    assert back.fingerprint() == cache.fingerprint()

    # Cup-compatibility certificate at order zero for commuting fields.
    cert = json.loads(
        gstar.certify_cup(a, b, gstar.constant_bivector(), 0, cache,
                          samples=20000, seed=3))
    assert cert["certified"] is True
    assert cert["w1_consistent"] is True
    assert all(r < cert["tol"] for r in cert["residuals"])

    print("smoke ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
