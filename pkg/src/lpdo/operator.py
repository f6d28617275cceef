"""Linear partial differential operators in D_x, D_y over :class:`Expr`.

An operator is stored in expanded standard form ``sum a_J D^J`` as a map from
multi-indices ``(i, j)`` (meaning ``D_x^i D_y^j``) to nonzero coefficients.
``*`` is composition; a scalar on the left multiplies the coefficients.
"""

from __future__ import annotations

from math import comb
from typing import Dict, Iterable, Iterator, List, Mapping, Tuple

from .expr import ONE, ZERO, Expr, Scalar, as_expr, sum_exprs, sum_products

MultiIndex = Tuple[int, int]


def _index_key(J: MultiIndex):
    return (J[0] + J[1], J[0])


class LPDO:
    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs: Mapping[MultiIndex, Scalar] = ()):
        clean: Dict[MultiIndex, Expr] = {}
        for J, c in dict(coeffs).items():
            i, j = J
            if i < 0 or j < 0:
                raise ValueError(f"negative multi-index {J}")
            c = as_expr(c)
            if not c.is_zero:
                clean[(int(i), int(j))] = c
        self.coeffs = {J: clean[J] for J in sorted(clean, key=_index_key)}
        self._hash = None

    @classmethod
    def scalar(cls, c: Scalar) -> "LPDO":
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, i: int, j: int, c: Scalar = 1) -> "LPDO":
        return cls({(i, j): c})

    # -- inspection -----------------------------------------------------------
    @property
    def order(self) -> int:
        """Total order; -1 for the zero operator."""
        return max((i + j for i, j in self.coeffs), default=-1)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, J: MultiIndex) -> Expr:
        return self.coeffs.get(tuple(J), ZERO)

    def __iter__(self) -> Iterator[Tuple[MultiIndex, Expr]]:
        return iter(self.coeffs.items())

    def __len__(self) -> int:
        return len(self.coeffs)

    def atoms(self) -> set:
        out = set()
        for c in self.coeffs.values():
            out |= c.atoms()
        return out

    def map_coeffs(self, fn) -> "LPDO":
        return LPDO({J: fn(c) for J, c in self.coeffs.items()})

    # -- ring structure -----------------------------------------------------------
    def __add__(self, other) -> "LPDO":
        other = _as_lpdo(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.coeffs)
        for J, c in other.coeffs.items():
            out[J] = out.get(J, ZERO) + c
        return LPDO(out)

    __radd__ = __add__

    def __neg__(self) -> "LPDO":
        return LPDO({J: -c for J, c in self.coeffs.items()})

    def __sub__(self, other) -> "LPDO":
        other = _as_lpdo(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "LPDO":
        return (-self) + other

    def __mul__(self, other) -> "LPDO":
        other = _as_lpdo(other)
        if other is NotImplemented:
            return NotImplemented
        return compose(self, other)

    def __rmul__(self, other) -> "LPDO":
        other = _as_lpdo(other)
        if other is NotImplemented:
            return NotImplemented
        return compose(other, self)

    def __pow__(self, n: int) -> "LPDO":
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = LPDO.scalar(1)
        for _ in range(n):
            out = compose(out, self)
        return out

    def __eq__(self, other) -> bool:
        other = _as_lpdo(other)
        if other is NotImplemented:
            return False
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.coeffs.items()))
        return self._hash

    def __str__(self) -> str:
        return format_lpdo(self)

    def __repr__(self) -> str:
        return f"LPDO({format_lpdo(self)})"


def _as_lpdo(v):
    if isinstance(v, LPDO):
        return v
    try:
        return LPDO.scalar(as_expr(v))
    except TypeError:
        return NotImplemented


Dx = LPDO.monomial(1, 0)
Dy = LPDO.monomial(0, 1)


def _dmono(i: int, j: int) -> str:
    parts = []
    if i:
        parts.append("Dx" if i == 1 else f"Dx^{i}")
    if j:
        parts.append("Dy" if j == 1 else f"Dy^{j}")
    return "*".join(parts)


def index_label(J: MultiIndex) -> str:
    """``(2, 1)`` -> ``"Dx^2*Dy"``; the empty index prints as ``"1"``."""
    i, j = J
    parts = [("Dx" if i == 1 else f"Dx^{i}") if i else "", ("Dy" if j == 1 else f"Dy^{j}") if j else ""]
    return "*".join(p for p in parts if p) or "1"


def format_lpdo(L: LPDO) -> str:
    if L.is_zero:
        return "0"
    out = []
    for J in sorted(L.coeffs, key=_index_key, reverse=True):
        c = L.coeffs[J]
        neg = c.leading_sign() < 0
        if neg:
            c = -c
        d = _dmono(*J)
        if not d:
            term = str(c)
        elif c == ONE:
            term = d
        else:
            cs = str(c)
            if c.is_polynomial and len(c.num) > 1:
                cs = f"({cs})"
            term = f"{cs}*{d}"
        if not out:
            out.append("-" + term if neg else term)
        else:
            out.append(f" {'-' if neg else '+'} {term}")
    return "".join(out)


# -- operations ---------------------------------------------------------------------

def apply(L: LPDO, f: Scalar) -> Expr:
    """``L(f) = sum a_J d^J f``."""
    f = as_expr(f)
    total = ZERO
    for (i, j), a in L.coeffs.items():
        total = total + a * f.diff("x", i).diff("y", j)
    return total


def compose(A: LPDO, B: LPDO) -> LPDO:
    """``A o B`` via ``D^J o b = sum_{I <= J} C(J, I) d^{J-I}(b) D^I``."""
    A = _as_lpdo(A)
    B = _as_lpdo(B)
    out: Dict[MultiIndex, list] = {}
    for (i, j), a in A.coeffs.items():
        for (k, l), b in B.coeffs.items():
            for p in range(i + 1):
                bx = b.diff("x", i - p)
                if bx.is_zero:
                    continue
                for q in range(j + 1):
                    d = bx.diff("y", j - q)
                    if d.is_zero:
                        continue
                    out.setdefault((p + k, q + l), []).append((a, d, comb(i, p) * comb(j, q)))
    return LPDO({J: sum_products(terms) for J, terms in out.items()})


def compose_all(factors: Iterable[LPDO]) -> LPDO:
    out = LPDO.scalar(1)
    for F in factors:
        out = compose(out, F)
    return out


def adjoint(L: LPDO) -> LPDO:
    """Formal transpose ``L^t(f) = sum (-1)^|J| D^J (a_J f)``."""
    out: Dict[MultiIndex, List[Expr]] = {}
    for (i, j), a in L.coeffs.items():
        sign = -1 if (i + j) % 2 else 1
        for J, c in compose(LPDO.monomial(i, j, sign), LPDO.scalar(a)).coeffs.items():
            out.setdefault(J, []).append(c)
    return LPDO({J: sum_exprs(terms) for J, terms in out.items()})


def gauge(L: LPDO, g: Scalar) -> LPDO:
    """``g^{-1} o L o g``."""
    g = as_expr(g)
    if g.is_zero:
        raise ValueError("gauge function must be nonzero")
    return compose(LPDO.scalar(g.inverse()), compose(L, LPDO.scalar(g)))


def subtract(A: LPDO, B: LPDO) -> LPDO:
    return A - B


def equals(A: LPDO, B: LPDO) -> bool:
    return (A - B).is_zero


def symbol(L: LPDO):
    """Principal symbol as a :class:`~lpdo.symbols.SymPoly`."""
    from .symbols import SymPoly

    if L.is_zero:
        raise ValueError("the zero operator has no symbol")
    d = L.order
    return SymPoly([L[(d - k, k)] for k in range(d + 1)])


def is_hyperbolic(L: LPDO) -> bool:
    """All linear factors of the symbol are pairwise non-proportional.

    Raises :class:`~lpdo.symbols.NeedsHint` when the symbol does not split.
    """
    from .symbols import factor_symbol

    f = factor_symbol(symbol(L))
    return all(m == 1 for _, m in f.factors)
