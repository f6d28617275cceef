"""Regenerate the golden files from the sympy oracle.

The factors below are transcribed directly into sympy; the package is not
imported.  Run from the repository root::

    python tests/make_goldens.py
"""

import json
from pathlib import Path

import sympy as sp

from oracle import X, Y, compose_oracle, dump_op

OUT = Path(__file__).parent / "goldens"


def op(**terms):
    """``op(d10=..., d00=...)`` -> coefficient dict keyed by (i, j)."""
    return {(int(k[1]), int(k[2])): sp.sympify(v) for k, v in terms.items()}


def residual(composed, reference):
    keys = set(composed) | set(reference)
    out = {}
    for J in keys:
        r = sp.cancel(sp.together(composed.get(J, 0) - reference.get(J, 0)))
        if r != 0:
            out[J] = r
    return out


def landau():
    c = sp.Function("c")(Y)
    s = X + c
    factors = [op(d10=1, d00=1 + 1 / s), op(d10=1, d00=1 - 1 / s), op(d10=1, d01=X)]
    # Dxx(Dx + x Dy) + 2Dxx + 2(x+1)Dxy + Dx + (x+1)Dy, coefficients on the left
    printed = op(d30=1, d21=X, d20=2, d11=2 * (X + 1), d10=1, d01=X + 1)
    composed = compose_oracle(*factors)
    return {"composed": dump_op(composed), "reference": dump_op(printed),
            "residual": dump_op(residual(composed, printed)),
            "prefix": dump_op(compose_oracle(*factors[:2]))}


def quartic_xx():
    f1 = sp.Function("f1")(Y)
    s = X + 2 * f1
    factors = [op(d20=1, d00=2 / s + Y), op(d20=1, d00=-2 / s + Y)]
    composed = compose_oracle(*factors)
    ref = op(d40=1)
    return {"composed": dump_op(composed), "reference": dump_op(ref),
            "residual": dump_op(residual(composed, ref))}


def quartic_xy():
    al, be = sp.symbols("alpha beta")
    s = Y + al * X + be
    factors = [op(d10=1, d00=al / s), op(d01=1, d00=1 / s), op(d11=1, d10=-1 / s, d01=-al / s)]
    composed = compose_oracle(*factors)
    ref = op(d22=1)
    return {"composed": dump_op(composed), "reference": dump_op(ref),
            "residual": dump_op(residual(composed, ref))}


def main():
    OUT.mkdir(exist_ok=True)
    for name, fn in [("landau", landau), ("quartic_xx", quartic_xx), ("quartic_xy", quartic_xy)]:
        path = OUT / f"{name}.json"
        path.write_text(json.dumps(fn(), indent=2, sort_keys=True) + "\n")
        print("wrote", path)


if __name__ == "__main__":
    main()
