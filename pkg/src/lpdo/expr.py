"""Exact scalar expressions: rational functions in independent atoms.

Atoms are the variables ``x`` and ``y``, declared function symbols (optionally
marked as parameters), and *defined symbols* that carry explicit derivative
rules, e.g. ``Q`` with ``dQ/dx = (b - a) Q``.  Every :class:`Expr` is stored in
canonical form ``num/den`` with coprime numerator and denominator and a
denominator whose leading term (graded lex over the canonical atom order) has
coefficient one.  Two expressions are therefore equal iff their stored forms
are equal, and ``is_zero`` is exact for this class.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cmp_to_key, lru_cache
from numbers import Rational
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from . import poly as P
from .poly import Q

VARIABLES = ("x", "y")
_KIND_RANK = {"var": 0, "func": 1, "def": 2, "self": 3}


class DivisionByZeroError(ZeroDivisionError):
    """Raised when inverting an expression that normalizes to zero."""


class SubstitutionError(ValueError):
    pass


@dataclass(frozen=True)
class Atom:
    """An indeterminate of the coefficient field.

    ``order`` holds the derivative orders ``(i, j)`` for derivatives of
    function symbols (and of defined symbols along variables lacking a rule).
    ``rules`` is only used by defined symbols; rule bodies refer to the symbol
    itself through the :data:`SELF` placeholder.
    """

    kind: str
    name: str
    deps: FrozenSet[str] = frozenset()
    order: Tuple[int, int] = (0, 0)
    param: bool = False
    rules: Tuple[Tuple[str, "Expr"], ...] = ()
    label: Optional[str] = field(default=None, compare=False)

    @property
    def base(self) -> "Atom":
        return replace(self, order=(0, 0)) if self.order != (0, 0) else self

    @property
    def rule_map(self) -> Dict[str, "Expr"]:
        return dict(self.rules)

    def display(self) -> str:
        i, j = self.order
        if i == j == 0:
            return self.name
        if len(self.deps) == 1:
            return self.name + "'" * (i + j)
        return f"{self.name}_{'x' * i}{'y' * j}"

    def __repr__(self) -> str:
        return f"Atom({self.kind}:{self.display()})"


# -- atom interning -------------------------------------------------------------

_lock = threading.Lock()
_ids: Dict[Atom, int] = {}
_table: List[Atom] = []
_keys: List[tuple] = []


def _intern(atom: Atom) -> int:
    aid = _ids.get(atom)
    if aid is not None:
        return aid
    with _lock:
        aid = _ids.get(atom)
        if aid is None:
            key = (_KIND_RANK[atom.kind], atom.name, atom.order, atom.param,
                   tuple(sorted(atom.deps)), tuple((v, str(r)) for v, r in atom.rules))
            aid = len(_table)
            _table.append(atom)
            _keys.append(key)
            _ids[atom] = aid
    return aid


def atom_of(aid: int) -> Atom:
    return _table[aid]


def _mono_cmp(a: P.Mono, b: P.Mono) -> int:
    da = sum(e for _, e in a)
    db = sum(e for _, e in b)
    if da != db:
        return da - db
    ka = sorted((_keys[k], e) for k, e in a)
    kb = sorted((_keys[k], e) for k, e in b)
    for (x, ex), (y, ey) in zip(ka, kb):
        if x != y:
            return 1 if x < y else -1
        if ex != ey:
            return ex - ey
    return 0


mono_key = cmp_to_key(_mono_cmp)


def _leading(p: P.Poly) -> P.Mono:
    if len(p) == 1:
        return next(iter(p))
    return max(p, key=mono_key)


# -- side conditions ------------------------------------------------------------

_side: ContextVar[Optional[List["Expr"]]] = ContextVar("lpdo_side_conditions", default=None)


class SideConditions:
    """Expressions asserted nonzero because they were inverted."""

    def __init__(self, items: Iterable["Expr"] = ()):
        self._items: List[Expr] = []
        for e in items:
            self.add(e)

    def add(self, e: "Expr") -> None:
        if e.is_constant:
            return
        c = e.monic()
        if c not in self._items:
            self._items.append(c)

    def extend(self, other: Iterable["Expr"]) -> None:
        for e in other:
            self.add(e)

    def __iter__(self) -> Iterator["Expr"]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, e) -> bool:
        return as_expr(e).monic() in self._items

    def __repr__(self) -> str:
        return "SideConditions([" + ", ".join(f"{e} != 0" for e in self._items) + "])"


@contextmanager
def collect_side_conditions(propagate: bool = True) -> Iterator[SideConditions]:
    """Record every denominator inverted inside the block.

    With ``propagate`` the records are also passed on to an enclosing collector.
    """
    bucket: List[Expr] = []
    token = _side.set(bucket)
    sc = SideConditions()
    try:
        yield sc
    finally:
        _side.reset(token)
        sc.extend(bucket)
        outer = _side.get()
        if outer is not None and propagate:
            outer.extend(bucket)


def _record(e: "Expr") -> None:
    bucket = _side.get()
    if bucket is not None:
        bucket.append(e)


# -- expressions ------------------------------------------------------------------

Scalar = Union["Expr", int, Fraction]


def _make(num: P.Poly, den: P.Poly, reduced: bool = False) -> "Expr":
    if not num:
        return ZERO
    if not reduced:
        num, den = P.cancel(num, den)
    if P.is_const(den):
        c = den[P.ONE_MONO]
        if c != 1:
            num = P.scale(num, 1 / c)
        return Expr(num, _ONE_POLY)
    lc = den[_leading(den)]
    if lc != 1:
        inv = 1 / lc
        num = P.scale(num, inv)
        den = P.scale(den, inv)
    return Expr(num, den)


_ONE_POLY: P.Poly = {P.ONE_MONO: Q(1)}


def sum_exprs(terms: Iterable[Scalar]) -> "Expr":
    """Sum many terms, adding numerators over equal denominators before reducing."""
    return _bucket_sum((t.num, t.den) for t in map(as_expr, terms))


def sum_products(terms: Iterable[Tuple["Expr", "Expr", int]]) -> "Expr":
    """``sum(a * b * n)``; the products are only reduced once per denominator."""
    return _bucket_sum((P.scale(P.mul(a.num, b.num), Q(n)), P.mul(a.den, b.den)) for a, b, n in terms)


def _bucket_sum(pairs) -> "Expr":
    buckets: Dict[frozenset, list] = {}
    for num, den in pairs:
        if not num:
            continue
        key = frozenset(den.items())
        slot = buckets.get(key)
        if slot is None:
            buckets[key] = [den, num]
        else:
            slot[1] = P.add(slot[1], num)
    total = ZERO
    for den, num in buckets.values():
        if num:
            total = total + (Expr(num) if P.is_const(den) else _make(num, den))
    return total


class Expr:
    """Immutable rational function over :class:`Atom` indeterminates."""

    __slots__ = ("num", "den", "_hash", "_diff")

    def __init__(self, num: P.Poly, den: P.Poly = _ONE_POLY):
        self.num = num
        self.den = den
        self._hash = None
        self._diff: Dict[str, Expr] = {}

    # construction -----------------------------------------------------------
    @staticmethod
    def const(c) -> "Expr":
        return Expr(P.const(c)) if c else ZERO

    @staticmethod
    def atom(a: Atom) -> "Expr":
        return Expr({((_intern(a), 1),): Q(1)})

    # inspection -------------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.num

    @property
    def is_constant(self) -> bool:
        return P.is_const(self.num) and P.is_const(self.den)

    @property
    def is_polynomial(self) -> bool:
        return self.den is _ONE_POLY or P.is_const(self.den)

    def constant_value(self) -> Optional[Fraction]:
        if self.is_constant:
            return self.num.get(P.ONE_MONO, Q(0))
        return None

    def atom_ids(self) -> set:
        return P.atoms(self.num) | P.atoms(self.den)

    def atoms(self) -> set:
        return {_table[k] for k in self.atom_ids()}

    def as_atom(self) -> Optional[Atom]:
        if self.is_polynomial and len(self.num) == 1:
            (m, c), = self.num.items()
            if c == 1 and len(m) == 1 and m[0][1] == 1:
                return _table[m[0][0]]
        return None

    def numerator(self) -> "Expr":
        return Expr(self.num)

    def denominator(self) -> "Expr":
        return Expr(self.den)

    def leading_sign(self) -> int:
        if not self.num:
            return 0
        return 1 if self.num[_leading(self.num)] > 0 else -1

    def monic(self) -> "Expr":
        """Numerator scaled so its leading coefficient is one (denominator dropped)."""
        if not self.num:
            return ZERO
        lc = self.num[_leading(self.num)]
        return Expr(P.scale(self.num, 1 / lc))

    # arithmetic ---------------------------------------------------------------
    def __add__(self, other: Scalar) -> "Expr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den == other.den:
            if P.is_const(self.den):
                s = P.add(self.num, other.num)
                return Expr(s) if s else ZERO
            return _make(P.add(self.num, other.num), self.den)
        if P.is_const(other.den):
            return _make(P.add(self.num, P.mul(other.num, self.den)), self.den, reduced=True)
        if P.is_const(self.den):
            return _make(P.add(P.mul(self.num, other.den), other.num), other.den, reduced=True)
        # Henrici: only the common part of the denominators can cancel
        g, d1, d2 = P.cofactors(self.den, other.den)
        num = P.add(P.mul(self.num, d2), P.mul(other.num, d1))
        if not num:
            return ZERO
        den = P.mul(self.den, d2)
        if not P.is_const(g):
            h, num, gq = P.cofactors(num, g)
            if not P.is_const(h):
                den = P.mul(d1, P.mul(gq, d2))
            else:
                num = P.mul(num, h)
        return _make(num, den, reduced=True)

    __radd__ = __add__

    def __neg__(self) -> "Expr":
        if not self.num:
            return self
        return Expr(P.neg(self.num), self.den)

    def __sub__(self, other: Scalar) -> "Expr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Scalar) -> "Expr":
        return (-self) + other

    def __mul__(self, other: Scalar) -> "Expr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.num or not other.num:
            return ZERO
        if P.is_const(self.den) and P.is_const(other.den):
            return Expr(P.mul(self.num, other.num))
        n1, d2 = P.cancel(self.num, other.den)
        n2, d1 = P.cancel(other.num, self.den)
        return _make(P.mul(n1, n2), P.mul(d1, d2), reduced=True)

    __rmul__ = __mul__

    def inverse(self) -> "Expr":
        if not self.num:
            raise DivisionByZeroError("division by an expression that normalizes to zero")
        if not self.is_constant:
            _record(self)
        return _make(self.den, self.num, reduced=True)

    def __truediv__(self, other: Scalar) -> "Expr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other: Scalar) -> "Expr":
        return _coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "Expr":
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return ONE
        return _make(P.power(self.num, n), P.power(self.den, n), reduced=True)

    # equality ------------------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, Expr):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, Rational)):
            return self == Expr.const(other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((frozenset(self.num.items()), frozenset(self.den.items())))
        return self._hash

    # calculus --------------------------------------------------------------------
    def diff(self, v: str, n: int = 1) -> "Expr":
        e = self
        for _ in range(n):
            e = e._diff1(v)
        return e

    def _diff1(self, v: str) -> "Expr":
        cached = self._diff.get(v)
        if cached is not None:
            return cached
        if v not in VARIABLES:
            raise ValueError(f"unknown variable {v!r}")
        dn = _poly_diff(self.num, v)
        if P.is_const(self.den):
            out = dn
        else:
            dd = _poly_diff(self.den, v)
            n, d = Expr(self.num), Expr(self.den)
            if dd.is_zero:
                out = dn * _make(_ONE_POLY, self.den, reduced=True)
            else:
                out = (dn * d - n * dd) * _make(_ONE_POLY, P.mul(self.den, self.den), reduced=True)
        self._diff[v] = out
        return out

    # printing ----------------------------------------------------------------------
    def __str__(self) -> str:
        return format_expr(self)

    def __repr__(self) -> str:
        return f"Expr({format_expr(self)})"


def _coerce(v) -> "Expr":
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, Fraction, Q)):
        return Expr.const(v)
    if isinstance(v, Rational):
        return Expr.const(Q(v))
    return NotImplemented


def as_expr(v) -> Expr:
    e = _coerce(v)
    if e is NotImplemented:
        raise TypeError(f"cannot convert {v!r} to Expr")
    return e


ZERO = Expr({})
ONE = Expr(_ONE_POLY)
SELF = Atom("self", "@")


# -- atom derivatives ----------------------------------------------------------------

def _bump(order: Tuple[int, int], v: str) -> Tuple[int, int]:
    return (order[0] + 1, order[1]) if v == "x" else (order[0], order[1] + 1)


@lru_cache(maxsize=None)
def atom_derivative(a: Atom, v: str) -> Expr:
    if a.kind == "var":
        return ONE if a.name == v else ZERO
    if a.kind == "self" or v not in a.deps:
        return ZERO
    if a.kind == "func":
        return Expr.atom(replace(a, order=_bump(a.order, v)))
    rules = a.rule_map
    if v not in rules:
        return Expr.atom(replace(a, order=_bump(a.order, v)))
    base = a.base
    out = _replace(rules[v], {_intern(SELF): Expr.atom(base)})
    i, j = a.order
    return out.diff("x", i).diff("y", j)


def _poly_diff(p: P.Poly, v: str) -> Expr:
    total = ZERO
    for aid in sorted(P.atoms(p)):
        d = atom_derivative(_table[aid], v)
        if d.is_zero:
            continue
        dp = P.partial(p, aid)
        if d.is_polynomial:
            total = total + Expr(P.mul(dp, d.num)) * (1 / d.den[P.ONE_MONO])
        else:
            total = total + Expr(dp) * d
    return total


def differentiate(e: Scalar, v: str, n: int = 1) -> Expr:
    """Total derivative of ``e`` along ``v`` (``n`` times)."""
    return as_expr(e).diff(v, n)


def partial(e: Scalar, a: Union[Atom, Expr]) -> Expr:
    """Formal derivative w.r.t. the indeterminate ``a`` (other atoms held fixed)."""
    e = as_expr(e)
    aid = _intern(_to_atom(a))
    dn = Expr(P.partial(e.num, aid))
    if P.is_const(e.den):
        return dn * (1 / e.den[P.ONE_MONO])
    dd = Expr(P.partial(e.den, aid))
    return (dn * Expr(e.den) - Expr(e.num) * dd) * _make(_ONE_POLY, P.mul(e.den, e.den), reduced=True)


# -- replacement / substitution ---------------------------------------------------------

def _eval_poly(p: P.Poly, repl: Dict[int, Expr]) -> Expr:
    total = ZERO
    for m, c in p.items():
        fixed = []
        term = Expr.const(c)
        for k, e in m:
            r = repl.get(k)
            if r is None:
                fixed.append((k, e))
            else:
                term = term * (r ** e)
        if fixed:
            term = term * Expr({tuple(fixed): Q(1)})
        total = total + term
    return total


def _replace(e: Expr, repl: Dict[int, Expr]) -> Expr:
    """Replace atoms by id, no derivative closure."""
    if not repl or not (e.atom_ids() & repl.keys()):
        return e
    num = _eval_poly(e.num, repl)
    if P.is_const(e.den):
        return num * (1 / e.den[P.ONE_MONO])
    return num / _eval_poly(e.den, repl)


def _to_atom(k) -> Atom:
    if isinstance(k, Atom):
        return k
    if isinstance(k, Expr):
        a = k.as_atom()
        if a is not None:
            return a
    raise SubstitutionError(f"{k!r} is not a single atom")


def expr_deps(e: Expr) -> FrozenSet[str]:
    out = set()
    for a in e.atoms():
        out |= a.deps if a.kind != "var" else {a.name}
    return frozenset(out)


def _mentions(a: Atom, bases: FrozenSet[Atom], seen=None) -> bool:
    """Whether a defined symbol's rules refer (transitively) to any of ``bases``."""
    if a.kind != "def":
        return False
    for _, r in a.rules:
        for b in r.atoms():
            if b.base in bases:
                return True
            if b.kind == "def" and _mentions(b, bases):
                return True
    return False


def substitute(e: Scalar, bindings: Mapping) -> Expr:
    """Simultaneously replace function/defined symbols, closing over derivatives.

    Binding ``f`` also replaces ``f'``, ``f''`` (or ``f_x``, ``f_xy``, ...) by the
    corresponding derivatives of the bound value.  A bound value may only depend
    on the variables the symbol depends on.  Binding a defined symbol requires
    the value to satisfy the symbol's derivative rules.
    """
    e = as_expr(e)
    bmap: Dict[Atom, Expr] = {}
    for k, v in bindings.items():
        a = _to_atom(k)
        if a.kind not in ("func", "def") or a.order != (0, 0):
            raise SubstitutionError(f"cannot bind {a.display()!r}")
        v = as_expr(v)
        extra = expr_deps(v) - a.deps
        if extra:
            raise SubstitutionError(
                f"dependency violation: {a.display()} depends on {sorted(a.deps)} "
                f"but the bound value depends on {sorted(extra)}")
        bmap[a] = v
    if not bmap:
        return e
    for a, v in bmap.items():
        if a.kind == "def":
            for var, rule in a.rules:
                want = _subst(_replace(rule, {_intern(SELF): v}), bmap)
                if not (v.diff(var) - want).is_zero:
                    raise SubstitutionError(
                        f"value bound to {a.display()} violates its rule d/d{var} = {rule}")
    return _subst(e, bmap)


def _subst(e: Expr, bmap: Dict[Atom, Expr]) -> Expr:
    bases = frozenset(bmap)
    repl: Dict[int, Expr] = {}
    for aid in e.atom_ids():
        a = _table[aid]
        b = a.base
        if b in bmap:
            val = bmap[b]
            i, j = a.order
            repl[aid] = val.diff("x", i).diff("y", j)
        elif _mentions(a, bases):
            rules = tuple((v, _subst(r, bmap)) for v, r in b.rules)
            repl[aid] = Expr.atom(replace(a, rules=rules))
    return _replace(e, repl)


def depends_on(e: Scalar, atoms: Iterable) -> bool:
    """True iff any of ``atoms`` (or a derivative of one) occurs in ``e``."""
    e = as_expr(e)
    bases = frozenset(_to_atom(a).base for a in atoms)
    for a in e.atoms():
        if a.base in bases or _mentions(a, bases):
            return True
    return False


# -- normal forms ------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalForm:
    numerator: Expr
    denominator: Expr

    @property
    def is_zero(self) -> bool:
        return self.numerator.is_zero


def normalize(e: Scalar) -> NormalForm:
    e = as_expr(e)
    return NormalForm(e.numerator(), e.denominator())


def is_zero(e: Scalar) -> bool:
    return as_expr(e).is_zero


# -- constructors -------------------------------------------------------------------------

def _deps(deps) -> FrozenSet[str]:
    if isinstance(deps, str):
        deps = tuple(ch for ch in deps if ch not in ", ")
    deps = frozenset(deps)
    bad = deps - set(VARIABLES)
    if bad:
        raise ValueError(f"unknown variables {sorted(bad)}")
    return deps


def var(name: str) -> Expr:
    if name not in VARIABLES:
        raise ValueError(f"unknown variable {name!r}")
    return Expr.atom(Atom("var", name, frozenset({name})))


def func(name: str, deps=("x", "y"), param: bool = False) -> Expr:
    """A function symbol depending on ``deps`` (a subset of {x, y})."""
    return Expr.atom(Atom("func", name, _deps(deps), param=param))


def param(name: str, deps=()) -> Expr:
    """A parameter symbol; with no dependencies it is an arbitrary constant."""
    return func(name, deps, param=True)


def defined(name: str, deps, rules: Union[Mapping, Callable[[Expr], Mapping], None] = None,
            label: Optional[str] = None) -> Expr:
    """A defined symbol with explicit derivative rules.

    ``rules`` maps a variable to the derivative along it.  Pass a callable to
    refer to the symbol itself, e.g. ``lambda q: {"x": k * q}``.  Variables in
    ``deps`` without a rule differentiate to fresh derivative atoms.
    """
    deps = _deps(deps)
    me = Expr.atom(SELF)
    if callable(rules):
        rules = rules(me)
    rules = {v: as_expr(r) for v, r in (rules or {}).items()}
    for v in rules:
        if v not in deps:
            raise ValueError(f"rule for {v} but {name} does not depend on {v}")
    atom = Atom("def", name, deps, rules=tuple(sorted(rules.items())), label=label)
    if "x" in rules and "y" in rules:
        s = Expr.atom(atom)
        rx = _replace(rules["x"], {_intern(SELF): s})
        ry = _replace(rules["y"], {_intern(SELF): s})
        if not (rx.diff("y") - ry.diff("x")).is_zero:
            raise ValueError(f"derivative rules of {name} do not commute")
    return Expr.atom(atom)


x = var("x")
y = var("y")


# -- printing ---------------------------------------------------------------------------

def format_rational(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _format_mono(m: P.Mono) -> List[str]:
    parts = []
    for k, e in sorted(m, key=lambda t: _keys[t[0]]):
        s = _table[k].display()
        parts.append(s if e == 1 else f"{s}^{e}")
    return parts


def format_poly(p: P.Poly) -> str:
    if not p:
        return "0"
    out = []
    for m in sorted(p, key=mono_key, reverse=True):
        c = p[m]
        sign = "-" if c < 0 else "+"
        c = abs(c)
        factors = _format_mono(m)
        if c != 1 or not factors:
            factors.insert(0, format_rational(c))
        term = "*".join(factors)
        if not out:
            out.append(term if sign == "+" else "-" + term)
        else:
            out.append(f" {sign} {term}")
    return "".join(out)


def format_expr(e: Expr) -> str:
    num = format_poly(e.num)
    if P.is_const(e.den):
        return num
    if len(e.num) > 1 or next(iter(e.num.values())).denominator != 1:
        num = f"({num})"
    den = format_poly(e.den)
    simple = len(e.den) == 1 and len(next(iter(e.den))) == 1 and next(iter(e.den))[0][1] == 1
    if not simple:
        den = f"({den})"
    return f"{num}/{den}"
