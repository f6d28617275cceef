"""Independent oracles built on sympy.

Composition is computed definitionally: apply both operators to a generic
``u(x, y)`` with sympy's own differentiation and read off the coefficients of
the derivatives of ``u``.  Nothing here uses the package's Leibniz expansion.
"""

from itertools import product
from math import comb

import sympy as sp

X, Y = sp.symbols("x y")
U = sp.Function("u")(X, Y)


def d(expr, i, j):
    if i:
        expr = sp.diff(expr, X, i)
    if j:
        expr = sp.diff(expr, Y, j)
    return expr


def apply_op(op, f):
    """``op`` maps (i, j) to a sympy coefficient."""
    return sum((c * d(f, i, j) for (i, j), c in op.items()), sp.Integer(0))


def extract(expr, max_order):
    """Coefficients of ``D^J u`` in an expression linear in ``u`` and its derivatives."""
    expr = sp.expand(expr)
    out = {}
    derivs = {(i, j): d(U, i, j) for i in range(max_order + 1) for j in range(max_order + 1 - i)}
    # replace derivatives by plain symbols, highest order first
    syms = {J: sp.Symbol(f"_u{J[0]}_{J[1]}") for J in derivs}
    for J in sorted(derivs, key=lambda J: -(J[0] + J[1])):
        expr = expr.subs(derivs[J], syms[J])
    for J, s in syms.items():
        c = sp.cancel(sp.together(expr.coeff(s)))
        if c != 0:
            out[J] = c
    return out


def compose_oracle(*ops):
    f = U
    order = 0
    for op in reversed(ops):
        f = apply_op(op, f)
        order += max(i + j for i, j in op)
    return extract(f, order)


def same_operator(a, b):
    keys = set(a) | set(b)
    return all(sp.cancel(sp.together(a.get(J, 0) - b.get(J, 0))) == 0 for J in keys)


def count_ordered_splits(mults, k):
    """Ordered k-tuples of nonempty sub-multisets partitioning a multiset.

    Inclusion-exclusion over the set of boxes forced to stay empty.
    """
    total = 0
    for j in range(k + 1):
        boxes = k - j
        ways = 1
        for m in mults:
            ways *= comb(m + boxes - 1, boxes - 1) if boxes else (1 if m == 0 else 0)
        total += (-1) ** j * comb(k, j) * ways
    return total


def brute_force_splits(mults, k):
    """Enumerate the ordered splits explicitly (small inputs only)."""
    def vectors(m):
        return list(product(*[range(c + 1) for c in m]))

    out = set()

    def rec(rest, parts):
        if len(parts) == k - 1:
            if any(rest):
                out.add(tuple(parts) + (tuple(rest),))
            return
        for v in vectors(rest):
            if any(v):
                rec(tuple(a - b for a, b in zip(rest, v)), parts + [tuple(v)])

    rec(tuple(mults), [])
    return out


# -- bridge from package expressions (used only to compare against goldens) ---------

def to_sympy(e):
    """Convert a package ``Expr`` to sympy; function symbols become ``Function``s."""
    from lpdo.expr import atom_of

    def atom(k):
        a = atom_of(k)
        if a.kind == "var":
            return X if a.name == "x" else Y
        if a.kind != "func":
            raise ValueError(f"no sympy counterpart for {a!r}")
        args = [s for s, v in ((X, "x"), (Y, "y")) if v in a.deps]
        base = sp.Function(a.name)(*args) if args else sp.Symbol(a.name)
        return d(base, *a.order)

    def poly(p):
        total = sp.Integer(0)
        for m, c in p.items():
            term = sp.Rational(int(c.numerator), int(c.denominator))
            for k, n in m:
                term *= atom(k) ** n
            total += term
        return total

    return poly(e.num) / poly(e.den)


def op_to_sympy(L):
    return {J: to_sympy(c) for J, c in L.coeffs.items()}


def dump_op(op):
    """JSON-friendly form: ``"i,j" -> str(coefficient)`` in canonical sympy form."""
    return {f"{i},{j}": str(sp.factor(sp.cancel(c))) for (i, j), c in sorted(op.items())}


def load_op(data, functions=(), symbols=()):
    ns = {"x": X, "y": Y}
    ns.update({n: sp.Function(n) for n in functions})
    ns.update({n: sp.Symbol(n) for n in symbols})
    return {tuple(int(t) for t in k.split(",")): sp.sympify(v, locals=ns) for k, v in data.items()}
