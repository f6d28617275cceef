"""Exponential defined symbols and a deliberately small integrator.

The integrator only handles sums of ``c * v^n * E`` where ``c`` is constant
along ``v`` and ``E`` is a product of exponential symbols (``dE/dv = k E`` with
``k`` constant along ``v``).  Anything else returns ``None``.
"""

from __future__ import annotations

from math import factorial
from typing import Dict, Optional, Tuple

from . import poly as P
from .poly import Q
from .expr import ONE, ZERO, Atom, Expr, Scalar, as_expr, atom_derivative, atom_of, defined, expr_deps, var


def is_constant_along(e: Expr, v: str) -> bool:
    return all(atom_derivative(a, v).is_zero for a in e.atoms())


def exponential_rate(a: Atom, v: str) -> Optional[Expr]:
    """``k`` if ``d a/dv = k a`` with ``k`` constant along ``v``, else None."""
    if a.kind != "def" or a.order != (0, 0) or v not in a.rule_map:
        return None
    k = atom_derivative(a, v) / Expr.atom(a)
    return k if is_constant_along(k, v) else None


def integrate(e: Scalar, v: str) -> Optional[Expr]:
    """An antiderivative of ``e`` along ``v``, or None outside the supported class."""
    e = as_expr(e)
    if e.is_zero:
        return ZERO
    vid = next((k for k in e.atom_ids() if atom_of(k).kind == "var" and atom_of(k).name == v), None)
    rates: Dict[int, Expr] = {}
    scale = ONE
    den_mono: P.Mono = ()
    if not e.is_polynomial:
        if len(e.den) == 1:
            (den_mono, dc), = e.den.items()
            scale = Expr.const(1 / dc)
        else:
            d = Expr(e.den)
            if not is_constant_along(d, v):
                return None
            scale = d.inverse()
    for k, _ in den_mono:
        a = atom_of(k)
        if k == vid:
            return None
        if not atom_derivative(a, v).is_zero:
            r = exponential_rate(a, v)
            if r is None:
                return None
            rates[k] = r
    # group numerator terms by (power of v, exponent vector of exponential atoms)
    groups: Dict[Tuple[int, P.Mono], P.Poly] = {}
    den_exp = {k: -n for k, n in den_mono if k in rates}
    for m, c in e.num.items():
        n = 0
        expo = dict(den_exp)
        rest = []
        for k, ek in m:
            a = atom_of(k)
            if k == vid:
                n = ek
            elif atom_derivative(a, v).is_zero:
                rest.append((k, ek))
            else:
                r = rates.get(k) or exponential_rate(a, v)
                if r is None:
                    return None
                rates[k] = r
                expo[k] = expo.get(k, 0) + ek
        key = (n, tuple(sorted((k, ek) for k, ek in expo.items() if ek)))
        bucket = groups.setdefault(key, {})
        bucket[tuple(rest)] = bucket.get(tuple(rest), 0) + c
    leftover_den = Expr({tuple((k, n) for k, n in den_mono if k not in rates): Q(1)})
    vv = var(v)
    total = ZERO
    for (n, expo), coeff in groups.items():
        c = Expr({m: q for m, q in coeff.items() if q}) if any(coeff.values()) else ZERO
        if c.is_zero:
            continue
        lam = ZERO
        emono = ONE
        for k, ek in expo:
            lam = lam + rates[k] * ek
            emono = emono * Expr.atom(atom_of(k)) ** ek
        if lam.is_zero:
            piece = vv ** (n + 1) / (n + 1)
        else:
            piece = ZERO
            for j in range(n + 1):
                piece = piece + Q((-1) ** j * factorial(n), factorial(n - j)) * vv ** (n - j) / lam ** (j + 1)
        total = total + c * emono * piece
    out = total * scale / leftover_den
    if not (out.diff(v) - e).is_zero:
        return None
    return out


def exp_symbol(name: str, rate: Scalar, v: str) -> Expr:
    """``exp(int rate dv)`` as a defined symbol; ``1`` when the rate vanishes.

    The rule along the other variable is filled in when the integrator can
    integrate the rate's derivative; otherwise that derivative stays free.
    """
    rate = as_expr(rate)
    if rate.is_zero:
        return ONE
    w = "y" if v == "x" else "x"
    deps = {v} | set(expr_deps(rate))
    rules = {}
    if w in deps:
        g = integrate(rate.diff(w), v)
        if g is not None:
            if g.is_zero:
                deps.discard(w)
            else:
                rules[w] = g
    if is_constant_along(rate, v):
        rs = str(rate)
        label = f"exp(({rs})*{v})" if " " in rs or "/" in rs else f"exp({rs}*{v})"
    else:
        label = f"exp(int({rate}) d{v})"
    return defined(name, deps, lambda me: {v: rate * me, **{k: g * me for k, g in rules.items()}}, label=label)
