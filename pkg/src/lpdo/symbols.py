"""Homogeneous symbol polynomials in X, Y and their linear factorizations."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import sympy

from . import poly as P
from .poly import Q
from .expr import ONE, ZERO, Expr, Scalar, as_expr

MAX_DEGREE = 4


class NeedsHint(ArithmeticError):
    """The symbol does not split into linear forms over the coefficient class.

    ``residual`` is the unsplit part; ``partial`` the linear forms found so far.
    Supply candidate forms to :func:`verify_hint` instead.
    """

    def __init__(self, residual: "SymPoly", partial: Sequence[Tuple["LinearForm", int]] = ()):
        super().__init__(f"symbol has no complete linear factorization; unsplit part {residual}")
        self.residual = residual
        self.partial = tuple(partial)


class SymPoly:
    """``sum_k c_k X^(d-k) Y^k``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Scalar]):
        self.coeffs = tuple(as_expr(c) for c in coeffs)
        if not self.coeffs or all(c.is_zero for c in self.coeffs):
            raise ValueError("a symbol polynomial must have a nonzero coefficient")

    @classmethod
    def monomial(cls, i: int, j: int, c: Scalar = 1) -> "SymPoly":
        cs = [ZERO] * (i + j + 1)
        cs[j] = as_expr(c)
        return cls(cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __mul__(self, other: "SymPoly") -> "SymPoly":
        if not isinstance(other, SymPoly):
            other = SymPoly([as_expr(other)])
        out = [ZERO] * (self.degree + other.degree + 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero:
                continue
            for j, b in enumerate(other.coeffs):
                if not b.is_zero:
                    out[i + j] = out[i + j] + a * b
        return SymPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "SymPoly":
        out = SymPoly([ONE])
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, SymPoly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def as_operator(self):
        from .operator import LPDO

        d = self.degree
        return LPDO({(d - k, k): c for k, c in enumerate(self.coeffs)})

    def __str__(self) -> str:
        d = self.degree
        terms = []
        for k, c in enumerate(self.coeffs):
            if c.is_zero:
                continue
            mono = "*".join(s for s in (_pw("X", d - k), _pw("Y", k)) if s)
            neg = c.leading_sign() < 0
            if neg:
                c = -c
            if not mono:
                t = str(c)
            elif c == ONE:
                t = mono
            else:
                cs = str(c)
                if c.is_polynomial and len(c.num) > 1:
                    cs = f"({cs})"
                t = f"{cs}*{mono}"
            if not terms:
                terms.append("-" + t if neg else t)
            else:
                terms.append(f" {'-' if neg else '+'} {t}")
        return "".join(terms)

    def __repr__(self) -> str:
        return f"SymPoly({self})"


def _pw(v: str, n: int) -> str:
    return "" if n == 0 else v if n == 1 else f"{v}^{n}"


@dataclass(frozen=True)
class LinearForm:
    """``alpha X + beta Y`` scaled so the X-coefficient (else the Y-coefficient) is 1."""

    alpha: Expr
    beta: Expr

    @classmethod
    def make(cls, alpha: Scalar, beta: Scalar) -> "LinearForm":
        alpha, beta = as_expr(alpha), as_expr(beta)
        if not alpha.is_zero:
            return cls(ONE, beta / alpha)
        if beta.is_zero:
            raise ValueError("zero linear form")
        return cls(ZERO, ONE)

    def as_sympoly(self) -> SymPoly:
        return SymPoly([self.alpha, self.beta])

    def sort_key(self):
        if self.beta.is_zero:
            return (0, "")
        if self.alpha.is_zero:
            return (1, "")
        return (2, str(self.beta))

    def name(self) -> str:
        if self.beta.is_zero:
            return "X"
        if self.alpha.is_zero:
            return "Y"
        return f"({SymPoly([self.alpha, self.beta])})"

    def __str__(self) -> str:
        return str(self.as_sympoly())


@dataclass(frozen=True)
class SymFactorization:
    factors: Tuple[Tuple[LinearForm, int], ...]
    scalar: Expr

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.factors)

    @property
    def forms(self) -> Tuple[LinearForm, ...]:
        return tuple(f for f, _ in self.factors)

    @property
    def multiplicities(self) -> Tuple[int, ...]:
        return tuple(m for _, m in self.factors)

    def expand(self) -> SymPoly:
        out = SymPoly([self.scalar])
        for f, m in self.factors:
            out = out * f.as_sympoly() ** m
        return out

    def __str__(self) -> str:
        body = "".join(_pw(f.name(), m) for f, m in self.factors)
        return body if self.scalar == ONE else f"{self.scalar}*{body}"


# -- conversion to and from sympy -------------------------------------------------

_X, _Y = sympy.symbols("X Y")


def _sym(aid: int) -> sympy.Symbol:
    return sympy.Symbol(f"a{aid}")


def _poly_to_sympy(p: P.Poly) -> sympy.Expr:
    terms = []
    for m, c in p.items():
        t = sympy.Rational(c.numerator, c.denominator)
        for k, e in m:
            t *= _sym(k) ** e
        terms.append(t)
    return sympy.Add(*terms)


def _sympy_to_expr(e: sympy.Expr) -> Expr:
    e = sympy.sympify(e)
    syms = sorted(e.free_symbols, key=lambda s: s.name)
    if not syms:
        r = sympy.Rational(e)
        return Expr.const(Q(int(r.p), int(r.q)))
    ids = [int(s.name[1:]) for s in syms]
    out: P.Poly = {}
    for exps, c in sympy.Poly(e, *syms).terms():
        m = tuple(sorted((ids[i], n) for i, n in enumerate(exps) if n))
        out[m] = Q(int(c.p), int(c.q))
    return Expr(out) if out else ZERO


def _merge(found: Iterable[Tuple[LinearForm, int]]) -> Tuple[Tuple[LinearForm, int], ...]:
    acc: Dict[LinearForm, int] = {}
    for f, m in found:
        acc[f] = acc.get(f, 0) + m
    return tuple(sorted(acc.items(), key=lambda t: t[0].sort_key()))


def factor_symbol(p: SymPoly) -> SymFactorization:
    """Split ``p`` into linear forms over the rational-function coefficient class.

    Raises :class:`NeedsHint` if some irreducible factor has degree >= 2.
    """
    if p.degree > MAX_DEGREE:
        raise ValueError(f"symbols of degree > {MAX_DEGREE} are not supported")
    den: P.Poly = {P.ONE_MONO: Q(1)}
    for c in p.coeffs:
        if not c.is_polynomial:
            _, extra = P.cancel(den, c.den)
            den = P.mul(den, extra)
    den = Expr(den)
    d = p.degree
    total = sympy.Integer(0)
    for k, c in enumerate(p.coeffs):
        if c.is_zero:
            continue
        cc = c * den
        total += _poly_to_sympy(cc.num) * _X ** (d - k) * _Y ** k
    lead, parts = sympy.factor_list(sympy.expand(total))
    scalar = _sympy_to_expr(lead) / den
    found: List[Tuple[LinearForm, int]] = []
    residual = SymPoly([ONE])
    for f, m in parts:
        m = int(m)
        fp = sympy.Poly(f, _X, _Y)
        deg = fp.total_degree()
        if deg == 0:
            scalar = scalar * _sympy_to_expr(f) ** m
        elif deg == 1:
            a = _sympy_to_expr(fp.coeff_monomial(_X))
            b = _sympy_to_expr(fp.coeff_monomial(_Y))
            form = LinearForm.make(a, b)
            scalar = scalar * (a if not a.is_zero else b) ** m
            found.append((form, m))
        else:
            coeffs = [_sympy_to_expr(fp.coeff_monomial(_X ** (deg - k) * _Y ** k)) for k in range(deg + 1)]
            residual = residual * SymPoly(coeffs) ** m
    if residual.degree:
        raise NeedsHint(SymPoly([scalar]) * residual, _merge(found))
    out = SymFactorization(_merge(found), scalar)
    assert out.expand() == p, "factorization does not reproduce the symbol"
    return out


def verify_hint(p: SymPoly, forms: Iterable[Union[LinearForm, Tuple[LinearForm, int]]]) -> SymFactorization:
    """Check caller-supplied linear forms against ``p``; return the factorization."""
    items = []
    for f in forms:
        items.append(f if isinstance(f, tuple) else (f, 1))
    items = [(LinearForm.make(f.alpha, f.beta), m) for f, m in items]
    prod = SymPoly([ONE])
    for f, m in items:
        prod = prod * f.as_sympoly() ** m
    if prod.degree != p.degree:
        raise ValueError("hint has the wrong total degree")
    k = next(i for i, c in enumerate(prod.coeffs) if not c.is_zero)
    scalar = p.coeffs[k] / prod.coeffs[k]
    if SymPoly([scalar]) * prod != p:
        raise ValueError("hint does not factor the symbol")
    return SymFactorization(_merge(items), scalar)


def _as_factorization(p) -> SymFactorization:
    return p if isinstance(p, SymFactorization) else factor_symbol(p)


def is_coprime(a, b) -> bool:
    """No common linear factor (both arguments SymPoly or SymFactorization)."""
    fa, fb = _as_factorization(a), _as_factorization(b)
    return not (set(fa.forms) & set(fb.forms))


# -- factorization types ----------------------------------------------------------

@dataclass(frozen=True)
class FactorizationType:
    """Ordered symbol parts ``(S_1)...(S_k)``.

    ``forms``/``counts`` describe each part as a multiset of linear forms when
    known; ``counts[i][j]`` is the multiplicity of ``forms[j]`` in part ``i``.
    """

    parts: Tuple[SymPoly, ...]
    forms: Tuple[LinearForm, ...] = ()
    counts: Tuple[Tuple[int, ...], ...] = ()

    @classmethod
    def from_parts(cls, parts: Sequence[SymPoly]) -> "FactorizationType":
        parts = tuple(parts)
        try:
            facs = [factor_symbol(s) for s in parts]
        except NeedsHint:
            return cls(parts)
        forms = tuple(sorted({f for fac in facs for f in fac.forms}, key=LinearForm.sort_key))
        counts = tuple(tuple(dict(fac.factors).get(f, 0) for f in forms) for fac in facs)
        return cls(parts, forms, counts)

    @property
    def k(self) -> int:
        return len(self.parts)

    def product(self) -> SymPoly:
        out = SymPoly([ONE])
        for s in self.parts:
            out = out * s
        return out

    def part_name(self, i: int) -> str:
        if not self.forms:
            return str(self.parts[i])
        used = [(f, c) for f, c in zip(self.forms, self.counts[i]) if c]
        if len(used) == 1 and used[0][1] == 1:
            return str(used[0][0])  # a lone form needs no inner parentheses
        return "".join(_pw(f.name(), c) for f, c in used)

    def __str__(self) -> str:
        return "".join(f"({self.part_name(i)})" for i in range(self.k))


def _sub_vectors(m: Tuple[int, ...]) -> List[Tuple[int, ...]]:
    vecs = [()]
    for mi in m:
        vecs = [v + (c,) for v in vecs for c in range(mi + 1)]
    vecs = [v for v in vecs if any(v)]
    vecs.sort(key=lambda v: (sum(v), tuple(-c for c in v)))
    return vecs


def _splits(m: Tuple[int, ...], k: int) -> Iterator[List[Tuple[int, ...]]]:
    if k == 1:
        if any(m):
            yield [m]
        return
    for v in _sub_vectors(m):
        rest = tuple(a - b for a, b in zip(m, v))
        if sum(rest) < k - 1:
            continue
        for tail in _splits(rest, k - 1):
            yield [v] + tail


def coprime_split(t: FactorizationType) -> Optional[int]:
    """First split point i where ``(S_1..S_i)`` and ``(S_i+1..S_k)`` are coprime, else None.

    A type with such a split admits at most one factorization, hence no
    irreducible family.
    """
    if not t.forms:
        raise ValueError("type parts are not split into linear forms")
    n = len(t.forms)
    for i in range(1, t.k):
        left = [sum(t.counts[p][j] for p in range(i)) for j in range(n)]
        right = [sum(t.counts[p][j] for p in range(i, t.k)) for j in range(n)]
        if not any(a and b for a, b in zip(left, right)):
            return i
    return None


def enumerate_types(f: SymFactorization, k: int, exclude_unique: bool = False) -> List[FactorizationType]:
    """All ordered splits of the factor multiset of ``f`` into ``k`` nonempty parts.

    With ``exclude_unique`` the types having a coprime two-block split are dropped.
    """
    total = f.degree
    if not isinstance(k, int) or k < 2 or k > total:
        raise ValueError(f"k must satisfy 2 <= k <= {total}")
    forms = f.forms
    out = []
    for split in _splits(f.multiplicities, k):
        parts = []
        for i, v in enumerate(split):
            s = SymPoly([f.scalar if i == 0 else ONE])
            for form, c in zip(forms, v):
                s = s * form.as_sympoly() ** c
            parts.append(s)
        t = FactorizationType(tuple(parts), forms, tuple(split))
        if exclude_unique and coprime_split(t) is not None:
            continue
        out.append(t)
    return out


# Irreducible fourth-order families can only have these types, up to a change
# of variables and reversal of the factor order (adjoint symmetry).
ADMISSIBLE_QUARTIC_PATTERNS = (
    ("(XY)(XY)", ((1, 1), (1, 1))),
    ("(X)(XY^2)", ((1, 0), (1, 2))),
    ("(X)(Y)(XY)", ((1, 0), (0, 1), (1, 1))),
    ("(X^2)(X^2)", ((2,), (2,))),
)


def admissible_pattern(t: FactorizationType) -> Optional[str]:
    """Name of the admissible quartic pattern matching ``t``, if any."""
    if not t.forms or sum(map(sum, t.counts)) != 4:
        return None
    n = len(t.forms)
    for name, pattern in ADMISSIBLE_QUARTIC_PATTERNS:
        if len(pattern) != t.k or len(pattern[0]) != n:
            continue
        for perm in permutations(range(n)):
            mapped = tuple(tuple(row[perm[j]] for j in range(n)) for row in pattern)
            if mapped == t.counts or mapped[::-1] == t.counts:
                return name
    return None
