"""Sparse multivariate polynomials over Q keyed by interned atom ids.

A polynomial is a plain ``dict`` mapping a monomial to a nonzero rational
(``gmpy2.mpq``, several times faster than :class:`fractions.Fraction`).  A monomial is a tuple of ``(atom_id, exponent)``
pairs sorted by atom id, with every exponent positive.  The empty tuple is the
constant monomial.

General gcds and factoring are delegated to sympy.  A large polynomial against
a small one is handled by trial division with the small one's factors, which
avoids sympy's heuristic gcd on numerators with thousands of terms.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Dict, Tuple

from gmpy2 import mpq as Q
from sympy import ZZ, symbols
from sympy.polys.rings import PolyRing

Mono = Tuple[Tuple[int, int], ...]
Poly = Dict[Mono, Fraction]

ONE_MONO: Mono = ()


def const(c) -> Poly:
    c = Q(c)
    return {ONE_MONO: c} if c else {}


def mono_mul(a: Mono, b: Mono) -> Mono:
    if not a:
        return b
    if not b:
        return a
    return _mono_mul(a, b)


@lru_cache(maxsize=1 << 18)
def _mono_mul(a: Mono, b: Mono) -> Mono:
    out = []
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        ka, ea = a[i]
        kb, eb = b[j]
        if ka == kb:
            out.append((ka, ea + eb))
            i += 1
            j += 1
        elif ka < kb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def mono_div(a: Mono, b: Mono) -> Mono:
    """Exact quotient a / b; b must divide a."""
    db = dict(b)
    out = []
    for k, e in a:
        e -= db.pop(k, 0)
        if e < 0:
            raise ValueError("monomial does not divide")
        if e:
            out.append((k, e))
    if db:
        raise ValueError("monomial does not divide")
    return tuple(out)


def mono_gcd(a: Mono, b: Mono) -> Mono:
    db = dict(b)
    return tuple((k, min(e, db[k])) for k, e in a if k in db)


def add(p: Poly, q: Poly) -> Poly:
    if len(p) < len(q):
        p, q = q, p
    out = dict(p)
    for m, c in q.items():
        s = out.get(m)
        if s is None:
            out[m] = c
        else:
            s += c
            if s:
                out[m] = s
            else:
                del out[m]
    return out


def neg(p: Poly) -> Poly:
    return {m: -c for m, c in p.items()}


def sub(p: Poly, q: Poly) -> Poly:
    return add(p, neg(q))


def scale(p: Poly, c) -> Poly:
    if not c:
        return {}
    return {m: v * c for m, v in p.items()}


def mul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return {}
    if len(p) < len(q):
        p, q = q, p
    if len(q) == 1:
        (mq, cq), = q.items()
        return {mono_mul(m, mq): c * cq for m, c in p.items()}
    out: Poly = {}
    for mp, cp in p.items():
        for mq, cq in q.items():
            m = mono_mul(mp, mq)
            s = out.get(m, 0) + cp * cq
            if s:
                out[m] = s
            else:
                out.pop(m, None)
    return out


def power(p: Poly, n: int) -> Poly:
    if n < 0:
        raise ValueError("negative power of a polynomial")
    result = const(1)
    base = p
    while n:
        if n & 1:
            result = mul(result, base)
        n >>= 1
        if n:
            base = mul(base, base)
    return result


def is_const(p: Poly) -> bool:
    return not p or (len(p) == 1 and ONE_MONO in p)


def const_value(p: Poly) -> Fraction:
    return p.get(ONE_MONO, Q(0)) if len(p) <= 1 else None


def atoms(p: Poly) -> set:
    return {k for m in p for k, _ in m}


def degree_in(p: Poly, aid: int) -> int:
    return max((dict(m).get(aid, 0) for m in p), default=0)


def partial(p: Poly, aid: int) -> Poly:
    """Formal derivative with respect to the atom ``aid``."""
    out: Poly = {}
    for m, c in p.items():
        for idx, (k, e) in enumerate(m):
            if k == aid:
                nm = m[:idx] + ((k, e - 1),) + m[idx + 1:] if e > 1 else m[:idx] + m[idx + 1:]
                out[nm] = out.get(nm, 0) + c * e
                break
    return {m: c for m, c in out.items() if c}


def coefficients_in(p: Poly, aid: int) -> Dict[int, Poly]:
    """Split ``p`` as a polynomial in the atom ``aid``: exponent -> coefficient."""
    out: Dict[int, Poly] = {}
    for m, c in p.items():
        e = 0
        rest = m
        for idx, (k, ek) in enumerate(m):
            if k == aid:
                e = ek
                rest = m[:idx] + m[idx + 1:]
                break
        out.setdefault(e, {})[rest] = c
    return out


def content_monomial(p: Poly) -> Mono:
    it = iter(p)
    g = next(it)
    for m in it:
        if not g:
            break
        g = mono_gcd(g, m)
    return g


# -- gcd via sympy -------------------------------------------------------------

_GENS = []
_RINGS: Dict[tuple, PolyRing] = {}


def _ring(n: int, domain=ZZ) -> PolyRing:
    r = _RINGS.get((n, domain))
    if r is None:
        while len(_GENS) < n:
            _GENS.append(symbols(f"g{len(_GENS)}"))
        r = _RINGS[n, domain] = PolyRing(_GENS[:n], domain)
    return r


def _to_int_dense(p: Poly, index: Dict[int, int], n: int):
    den = lcm(*(c.denominator for c in p.values()))
    out = {}
    for m, c in p.items():
        exps = [0] * n
        for k, e in m:
            exps[index[k]] = e
        out[tuple(exps)] = ZZ(int(c * den))
    return out, den


def _from_dense(p, ids) -> Poly:
    out: Poly = {}
    for exps, c in p.items():
        out[tuple((ids[i], e) for i, e in enumerate(exps) if e)] = Q(int(c))
    return out


def cofactors(p: Poly, q: Poly) -> Tuple[Poly, Poly, Poly]:
    """``(g, p/g, q/g)`` with ``g`` a gcd of ``p`` and ``q`` (both nonzero)."""
    if is_const(p) or is_const(q):
        return const(1), p, q
    g = mono_gcd(content_monomial(p), content_monomial(q))
    if g:
        p = {mono_div(m, g): c for m, c in p.items()}
        q = {mono_div(m, g): c for m, c in q.items()}
    gm = {g: Q(1)}
    if is_const(p) or is_const(q) or len(p) == 1 or len(q) == 1:
        # a monomial shares only monomial factors, already removed
        return gm, p, q
    small, big = (p, q) if len(p) <= len(q) else (q, p)
    if len(big) > 12 and len(big) > 2 * len(small):
        h, cb = _trial_gcd(big, small)
        cs = exquo(small, h)
        cp, cq = (cs, cb) if small is p else (cb, cs)
        return mul(gm, h), cp, cq
    ids = sorted(atoms(p) | atoms(q))
    index = {k: i for i, k in enumerate(ids)}
    ring = _ring(len(ids))
    pd, lp = _to_int_dense(p, index, len(ids))
    qd, lq = _to_int_dense(q, index, len(ids))
    h, cp, cq = ring.from_dict(pd).cofactors(ring.from_dict(qd))
    # p = h*cp/lp, q = h*cq/lq
    return (mul(gm, _from_dense(h, ids)), scale(_from_dense(cp, ids), Q(1, lp)),
            scale(_from_dense(cq, ids), Q(1, lq)))


_FACTORS: Dict[frozenset, list] = {}


def _factors(p: Poly):
    """Irreducible factors of ``p`` with multiplicities (cached)."""
    key = frozenset(p.items())
    out = _FACTORS.get(key)
    if out is None:
        ids = sorted(atoms(p))
        index = {k: i for i, k in enumerate(ids)}
        pd, _ = _to_int_dense(p, index, len(ids))
        _, facs = _ring(len(ids)).from_dict(pd).factor_list()
        out = _FACTORS[key] = [(_from_dense(f, ids), e) for f, e in facs]
    return out


def _dense(p: Poly, index: Dict[int, int]) -> Dict[tuple, Fraction]:
    n = len(index)
    out = {}
    for m, c in p.items():
        exps = [0] * n
        for k, e in m:
            exps[index[k]] = e
        out[tuple(exps)] = c
    return out


def _sparse(p: Dict[tuple, Fraction], ids) -> Poly:
    return {tuple((ids[i], e) for i, e in enumerate(exps) if e): c for exps, c in p.items()}


def _divide(p: Dict[tuple, Fraction], f: Dict[tuple, Fraction]):
    """Exact quotient ``p / f`` of dense polynomials, or None if ``f`` does not divide ``p``.

    Lex-order division with a heap of pending monomials: once the leading
    remainder term is not divisible by the leading term of ``f`` there is a
    nonzero remainder, so we stop early.
    """
    lt = max(f)
    lc = f[lt]
    rest = [(t, c) for t, c in f.items() if t != lt]
    r = dict(p)
    heap = [tuple(-e for e in m) for m in r]
    heapq.heapify(heap)
    quo = {}
    while heap:
        m = tuple(-e for e in heapq.heappop(heap))
        c = r.pop(m, 0)
        while heap and heap[0] == tuple(-e for e in m):
            heapq.heappop(heap)
        if not c:
            continue
        qm = tuple(a - b for a, b in zip(m, lt))
        if min(qm) < 0:
            return None
        qc = c / lc
        quo[qm] = qc
        for t, ct in rest:
            mm = tuple(a + b for a, b in zip(qm, t))
            v = r.get(mm)
            if v is None:
                r[mm] = -qc * ct
                heapq.heappush(heap, tuple(-e for e in mm))
            else:
                r[mm] = v - qc * ct
    return quo


_PRIME = 2**61 - 1


def _point(k: int) -> int:
    return (7919 * (k + 3) ** 5 + 104729) % _PRIME


@lru_cache(maxsize=1 << 18)
def _mono_image(m: Mono, v: int) -> Tuple[int, int]:
    d, val = 0, 1
    for k, e in m:
        if k == v:
            d = e
        else:
            val = val * pow(_point(k), e, _PRIME) % _PRIME
    return d, val


def _image(p: Poly, v: int) -> list:
    """Univariate image of ``p`` in atom ``v`` modulo a prime, the other atoms
    evaluated at fixed pseudo-random points."""
    out: Dict[int, int] = {}
    for m, c in p.items():
        d, val = _mono_image(m, v)
        if c.denominator != 1:
            val = val * pow(c.denominator, -1, _PRIME)
        out[d] = (out.get(d, 0) + val * c.numerator) % _PRIME
    deg = max((d for d, c in out.items() if c), default=-1)
    return [out.get(d, 0) for d in range(deg + 1)]


def _urem_zero(a: list, b: list) -> bool:
    a = list(a)
    inv = pow(b[-1], -1, _PRIME)
    db = len(b) - 1
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i] * inv % _PRIME
        if c:
            for j in range(db + 1):
                a[i - db + j] = (a[i - db + j] - c * b[j]) % _PRIME
    return not any(a[:db])


def _may_divide(p: Poly, f: Poly) -> bool:
    """Cheap necessary condition for ``f | p`` via a modular univariate image."""
    v = max(atoms(f), key=lambda k: degree_in(f, k))
    fi = _image(f, v)
    if len(fi) - 1 < degree_in(f, v):
        return True  # degenerate image, no conclusion
    return _urem_zero(_image(p, v), fi)


def _trial_gcd(big: Poly, small: Poly) -> Tuple[Poly, Poly]:
    """gcd of a large and a small polynomial by trial division with the
    factors of the small one; returns ``(g, big/g)``."""
    g = const(1)
    for f, e in _factors(small):
        if not atoms(f) <= atoms(big):
            continue
        for _ in range(e):
            if not _may_divide(big, f):
                break
            ids = sorted(atoms(big))
            index = {k: i for i, k in enumerate(ids)}
            quo = _divide(_dense(big, index), _dense(f, index))
            if quo is None:
                break
            big = _sparse(quo, ids)
            g = mul(g, f)
    return g, big


def exquo(p: Poly, q: Poly) -> Poly:
    """Exact quotient ``p / q``; raises if ``q`` does not divide ``p``."""
    if is_const(q):
        return scale(p, 1 / q[ONE_MONO])
    ids = sorted(atoms(p) | atoms(q))
    index = {k: i for i, k in enumerate(ids)}
    quo = _divide(_dense(p, index), _dense(q, index))
    if quo is None:
        raise ArithmeticError("inexact polynomial division")
    return _sparse(quo, ids)


def cancel(p: Poly, q: Poly) -> Tuple[Poly, Poly]:
    """Return ``(p', q')`` with ``p/q == p'/q'`` and ``gcd(p', q') = 1``.

    No normalization of the scalar factor is attempted here.
    """
    if not p:
        return {}, const(1)
    _, cp, cq = cofactors(p, q)
    return cp, cq
