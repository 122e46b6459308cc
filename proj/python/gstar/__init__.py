"""Graph calculus for deformation quantization on R^d.

Thin wrapper over the compiled core.  Payloads are JSON strings in the same
schemas the command line tool reads and writes; graphs travel as text
encodings like "1 2 : (1->-1),(1->-2)".
"""

try:
    from ._gstar import *  # noqa: F401,F403
    from ._gstar import WeightCache  # noqa: F401
except ImportError:  # development tree: module next to the package
    from _gstar import *  # noqa: F401,F403
    from _gstar import WeightCache  # noqa: F401

import json as _json


def multivector(d, k, components):
    """Builds a multivector JSON string.

    components: iterable of (indices, poly) with poly an iterable of
    (exps, num, den) monomials.
    """
    return _json.dumps({
        "d": d,
        "k": k,
        "components": [
            {
                "indices": list(idx),
                "poly": [
                    {"exps": list(e), "num": int(n), "den": int(dn)}
                    for (e, n, dn) in poly
                ],
            }
            for (idx, poly) in components
        ],
    })


def constant_bivector(d=2, i=1, j=2):
    """The unit wedge field d_i ^ d_j on R^d as a JSON string."""
    zero = [0] * d
    return multivector(d, 2, [((i, j), [(zero, 1, 1)])])


def coordinate_field(d, i):
    """The coordinate vector field d_i on R^d as a JSON string."""
    zero = [0] * d
    return multivector(d, 1, [((i,), [(zero, 1, 1)])])
