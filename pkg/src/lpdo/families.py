"""Parametric factorization families: construction, verification, linearization.

A family is an ordered list of factors whose coefficients contain parameter
symbols.  The composed operator is computed with the parameters left symbolic;
parameter independence is then a syntactic question on normalized
coefficients, cross-checked by composing at concrete parameter values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .calculus import exp_symbol, integrate
from .expr import (
    ZERO,
    Atom,
    DivisionByZeroError,
    Expr,
    Scalar,
    as_expr,
    collect_side_conditions,
    defined,
    depends_on,
    expr_deps,
    func,
    param,
    partial,
    substitute,
    var,
)
from .operator import LPDO, Dx, Dy, _index_key, compose, compose_all, index_label, symbol
from .poly import Q
from .symbols import FactorizationType

x = var("x")
y = var("y")


def _param_atoms(ops: Sequence[LPDO]) -> List[Atom]:
    """Base atoms flagged as parameters, including those hidden in rule bodies."""
    found: Dict[Atom, None] = {}
    seen = set()

    def visit(a: Atom):
        if a in seen:
            return
        seen.add(a)
        if a.param:
            found[a.base] = None
        if a.kind == "def":
            for _, r in a.rules:
                for b in r.atoms():
                    visit(b)

    for L in ops:
        for a in sorted(L.atoms(), key=lambda a: (a.name, a.order)):
            visit(a)
    return sorted(found, key=lambda a: a.name)


def _definition_atoms(ops: Sequence[LPDO]) -> List[Atom]:
    found = {a.base for L in ops for a in L.atoms() if a.kind == "def"}
    return sorted(found, key=lambda a: a.name)


@dataclass(frozen=True)
class FamilyTemplate:
    """Ordered factors ``F_1(T) ... F_k(T)`` with parameters ``T``."""

    factors: Tuple[LPDO, ...]
    params: Tuple[Expr, ...] = ()
    definitions: Tuple[Expr, ...] = ()
    side_conditions: Tuple[Expr, ...] = ()
    name: str = "family"
    display: Tuple[str, ...] = ()

    @classmethod
    def build(cls, factors: Sequence[LPDO], name: str = "family",
              display: Sequence[str] = ()) -> "FamilyTemplate":
        factors = tuple(factors)
        params = tuple(Expr.atom(a) for a in _param_atoms(factors))
        defs = tuple(Expr.atom(a) for a in _definition_atoms(factors))
        dens: Dict[Expr, None] = {}
        for F in factors:
            for _, c in F:
                if not c.is_polynomial:
                    dens[c.denominator()] = None
        return cls(factors, params, defs, tuple(dens), name, tuple(display))

    def __post_init__(self):
        if not self.factors:
            raise ValueError("a family needs at least one factor")
        for F in self.factors:
            if F.is_zero:
                raise ValueError("zero factor")
            d = F.order
            top = [c for (i, j), c in F if i + j == d]
            if any(depends_on(c, self.params) for c in top):
                raise ValueError(f"symbol of factor {F} depends on a parameter")
        present = {Expr.atom(a) for a in _param_atoms(self.factors)}
        if present != set(self.params):
            raise ValueError("params must be exactly the parameter symbols occurring in the factors")

    @property
    def k(self) -> int:
        return len(self.factors)

    def composed(self) -> LPDO:
        return compose_all(self.factors)

    def factorization_type(self) -> FactorizationType:
        return FactorizationType.from_parts([symbol(F) for F in self.factors])

    def factor_strings(self) -> List[str]:
        """Factors as constructed (when known), else in expanded form."""
        if len(self.display) == self.k:
            return list(self.display)
        return [str(F) for F in self.factors]

    def __str__(self) -> str:
        return " o ".join(f"({s})" for s in self.factor_strings())


# -- built-in families --------------------------------------------------------------

def second_order_family(a: Scalar, b: Scalar) -> FamilyTemplate:
    """One-parameter family of factorizations of ``(Dx + a) o (Dx + b)``.

    ``Q`` solves ``Q_x = (b - a) Q`` and ``W_x = Q``; both collapse to closed
    forms when the integrator can find them (``Q = 1, W = x`` for ``a = b``).
    """
    a, b = as_expr(a), as_expr(b)
    for name, c in (("a", a), ("b", b)):
        if "y" in expr_deps(c):
            raise ValueError(f"{name} = {c} depends on y; the family needs x-only coefficients")
    Q = exp_symbol("Q", b - a, "x")
    W = integrate(Q, "x")
    if W is None:
        W = defined("W", "x", {"x": Q}, label="int(Q) dx")
    f1 = param("f1", "y")
    g = Q / (W + f1)
    gs = f"{Q}/({W} + f1)" if len(Q.num) == 1 else f"({Q})/({W} + f1)"
    display = [_join(["Dx", a, ("+", gs)]), _join(["Dx", b, ("-", gs)])]
    return FamilyTemplate.build([Dx + a + g, Dx + b - g], name="second-order", display=display)


def _join(terms) -> str:
    """Render a sum of printed terms, skipping zeros and folding signs."""
    out = str(terms[0])
    for t in terms[1:]:
        if isinstance(t, tuple):
            out += f" {t[0]} {t[1]}"
        elif not t.is_zero:
            neg = t.leading_sign() < 0
            s = str(-t if neg else t)
            if len(t.num) > 1 and t.is_polynomial:
                s = f"({s})"
            out += f" {'-' if neg else '+'} {s}"
    return out


def landau_family() -> FamilyTemplate:
    c = param("c", "y")
    s = x + c
    factors = [Dx + 1 + 1 / s, Dx + 1 - 1 / s, Dx + x * Dy]
    display = ["Dx + 1 + 1/(x + c)", "Dx + 1 - 1/(x + c)", "Dx + x*Dy"]
    return FamilyTemplate.build(factors, name="landau", display=display)


def landau_operator_printed() -> LPDO:
    """The operator as printed alongside the Landau factorization.

    The leading group is read as ``Dx^3 + x Dx^2 Dy`` (coefficients on the
    left), which is the reading that matches the composed third-order part.
    """
    return (Dx ** 3 + x * Dx ** 2 * Dy + 2 * Dx ** 2 + 2 * (x + 1) * Dx * Dy
            + Dx + (x + 1) * Dy)


def quartic_xx_family() -> FamilyTemplate:
    """Transcribed fourth-order family for ``Dx^4`` (parameter ``f1(y)``)."""
    f1 = param("f1", "y")
    s = x + 2 * f1
    display = ["Dx^2 + 2/(x + 2*f1) + y", "Dx^2 - 2/(x + 2*f1) + y"]
    return FamilyTemplate.build([Dx ** 2 + 2 / s + y, Dx ** 2 - 2 / s + y], name="quartic-xx",
                                display=display)


def quartic_xy_family() -> FamilyTemplate:
    """Transcribed three-factor family for ``Dx^2 Dy^2`` (constants alpha, beta)."""
    al = param("alpha")
    be = param("beta")
    s = y + al * x + be
    factors = [Dx + al / s, Dy + 1 / s, Dx * Dy - (1 / s) * (Dx + al * Dy)]
    s = "(y + alpha*x + beta)"
    display = [f"Dx + alpha/{s}", f"Dy + 1/{s}", f"Dx*Dy - 1/{s}*(Dx + alpha*Dy)"]
    return FamilyTemplate.build(factors, name="quartic-xy", display=display)


# -- verification -------------------------------------------------------------------

@dataclass
class VerificationReport:
    composed: LPDO
    parameter_dependent: bool
    reference: Optional[LPDO] = None
    residual: Optional[LPDO] = None
    prefix_dependence: List[bool] = field(default_factory=list)
    side_conditions: List[Expr] = field(default_factory=list)
    instantiation_consistent: Optional[bool] = None

    @property
    def residual_zero(self) -> Optional[bool]:
        return None if self.residual is None else self.residual.is_zero


def _op_depends(L: LPDO, params) -> bool:
    return any(depends_on(c, params) for _, c in L)


# candidate values for parameter instantiation, tried in order
_SAMPLES = {
    frozenset(): [Q(3), Q(-7, 2), Q(11), Q(5, 3)],
    frozenset("x"): [x + 3, 2 * x * x - 5, x - 7, Q(4)],
    frozenset("y"): [y + 3, 2 * y * y - 5, y - 7, Q(4)],
    frozenset("xy"): [x + y + 3, x * y - 5, 2 * x - y + 1, Q(4)],
}


def _instantiations(params: Sequence[Expr], count: int = 2):
    """Deterministic concrete parameter assignments (distinct across rounds)."""
    rounds = []
    for r in range(4):
        binding = {}
        for n, p in enumerate(params):
            opts = _SAMPLES[p.as_atom().deps]
            binding[p] = as_expr(opts[(r + n) % len(opts)])
        rounds.append(binding)
    return rounds


def _instantiate(ops: Sequence[LPDO], binding) -> List[LPDO]:
    return [F.map_coeffs(lambda c: substitute(c, binding)) for F in ops]


def verify_family(t: FamilyTemplate, reference: Optional[LPDO] = None) -> VerificationReport:
    """Compose the factors symbolically and check parameter independence."""
    with collect_side_conditions() as sc:
        composed = t.composed()
        prefix = []
        P = t.factors[0]
        for i in range(1, t.k):
            prefix.append(_op_depends(P, t.params))
            P = compose(P, t.factors[i])
    dependent = _op_depends(composed, t.params)
    residual = composed - reference if reference is not None else None

    consistent = None
    if t.params:
        agreed = []
        for binding in _instantiations(t.params):
            try:
                # denominators met at sample values are not side conditions of the family
                with collect_side_conditions(propagate=False):
                    direct = compose_all(_instantiate(t.factors, binding))
                    via = composed.map_coeffs(lambda c: substitute(c, binding))
            except DivisionByZeroError:
                continue
            agreed.append((direct == via, direct))
            if len(agreed) == 2:
                break
        if len(agreed) == 2:
            consistent = all(ok for ok, _ in agreed)
            if not dependent:
                consistent = consistent and agreed[0][1] == agreed[1][1]
    return VerificationReport(composed, dependent, reference, residual, prefix,
                              list(sc), consistent)


def is_reducible(t: FamilyTemplate) -> Tuple[bool, Optional[int]]:
    """Whether some proper prefix product is parameter-free; witness is its length."""
    if t.k < 2:
        raise ValueError("reducibility needs at least two factors")
    P = t.factors[0]
    for i in range(1, t.k):
        if not _op_depends(P, t.params):
            return True, i
        P = compose(P, t.factors[i])
    return False, None


def regroup(t: FamilyTemplate, grouping: Sequence[Sequence[int]]) -> FamilyTemplate:
    """Compose contiguous blocks of factors; blocks use 1-based indices."""
    flat = [i for block in grouping for i in block]
    if any(not block for block in grouping) or flat != list(range(1, t.k + 1)):
        raise ValueError(f"grouping {list(map(list, grouping))} is not an ordered partition "
                         f"of 1..{t.k} into contiguous blocks")
    factors = tuple(compose_all(t.factors[i - 1] for i in block) for block in grouping)
    shown = t.factor_strings()
    display = tuple(shown[b[0] - 1] if len(b) == 1 else str(F) for b, F in zip(grouping, factors))
    # a parameter can vanish when a block's product no longer depends on it
    params = tuple(Expr.atom(a) for a in _param_atoms(factors))
    return FamilyTemplate(factors, params, t.definitions, t.side_conditions, t.name, display)


# -- linearization ------------------------------------------------------------------

def linearized_residual(bases: Sequence[LPDO], variations: Sequence[LPDO]) -> LPDO:
    """``sum_i L_1 ... F_i ... L_k``: the first-order term of ``prod (L_i + eps F_i)``."""
    if len(bases) != len(variations):
        raise ValueError("need one variation per factor")
    total = LPDO()
    for i in range(len(bases)):
        ops = list(bases)
        ops[i] = variations[i]
        total = total + compose_all(ops)
    return total


EPSILON = func("epsilon", ())


def _check_bindings(t: FamilyTemplate, b: Mapping, what: str) -> Dict[Expr, Expr]:
    out = {}
    for k, v in b.items():
        key = k if isinstance(k, Expr) else next((p for p in t.params if p.as_atom().name == k), None)
        if key is None:
            raise ValueError(f"{what}: {k!r} is not a parameter of the family")
        out[key] = as_expr(v)
    missing = [str(p) for p in t.params if p not in out]
    if missing:
        raise ValueError(f"{what}: no binding for {', '.join(missing)}")
    return out


def perturbed_factors(t: FamilyTemplate, T0: Mapping, R: Mapping) -> List[LPDO]:
    """Factors at ``T = T0 + eps R``."""
    T0 = _check_bindings(t, T0, "T0")
    R = _check_bindings(t, R, "R")
    binding = {p: T0[p] + EPSILON * R[p] for p in t.params}
    return _instantiate(t.factors, binding)


def _eps_at_zero(c: Expr) -> Expr:
    return substitute(c, {EPSILON: ZERO})


def epsilon_expand(t: FamilyTemplate, T0: Mapping, R: Mapping) -> Tuple[LPDO, LPDO]:
    """Coefficients at ``eps^0`` and ``eps^1`` of the composed perturbed family."""
    C = compose_all(perturbed_factors(t, T0, R))
    order0 = C.map_coeffs(_eps_at_zero)
    order1 = C.map_coeffs(lambda c: _eps_at_zero(partial(c, EPSILON)))
    return order0, order1


def factor_variations(t: FamilyTemplate, T0: Mapping, R: Mapping) -> Tuple[List[LPDO], List[LPDO]]:
    """``(L_i, F_i)``: factors at ``T0`` and their eps-derivatives at ``eps = 0``."""
    facs = perturbed_factors(t, T0, R)
    bases = [F.map_coeffs(_eps_at_zero) for F in facs]
    variations = [F.map_coeffs(lambda c: _eps_at_zero(partial(c, EPSILON))) for F in facs]
    return bases, variations


def _unknown_op(prefix: str, order: int, position: int) -> Tuple[LPDO, List[Expr]]:
    if order == 0:
        u = func(f"{prefix}{position}", "xy")
        return LPDO.scalar(u), [u]
    idx = sorted(((i, j) for i in range(order + 1) for j in range(order + 1 - i)),
                 key=_index_key, reverse=True)
    unknowns = [func(f"{prefix}{i}{j}", "xy") for i, j in idx]
    return LPDO(dict(zip(idx, unknowns))), unknowns


def linearized_system(L1: LPDO, L2: LPDO, ansatz_orders: Tuple[int, int],
                      prefixes: Tuple[str, str] = ("r", "a")):
    """Equations of ``F1 o L2 + L1 o F2 = 0`` for unknown-coefficient ``F1, F2``.

    Order-0 unknowns are named ``<prefix><position>`` (``r1``); higher ones
    ``<prefix><i><j>`` for the coefficient of ``Dx^i Dy^j`` (``a10``).
    """
    from .solver import CoeffSystem

    m1, m2 = ansatz_orders
    if not (0 <= m1 < L1.order and 0 <= m2 < L2.order):
        raise ValueError("ansatz orders must be below the orders of L1 and L2")
    F1, u1 = _unknown_op(prefixes[0], m1, 1)
    F2, u2 = _unknown_op(prefixes[1], m2, 2)
    res = linearized_residual([L1, L2], [F1, F2])
    keys = sorted(res.coeffs, key=_index_key)
    return CoeffSystem([res[J] for J in keys], u1 + u2, [index_label(J) for J in keys])
