"""Elimination solver for triangular coefficient systems.

The systems come from linearized factorization problems and from direct
factorization ansatzes.  The solver only knows a few patterns (algebraic
elimination, first-order linear ODEs along one variable, and moving
unknown-free equations to the condition list); everything else is reported
back as unsolved rather than guessed at.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import poly as P
from .calculus import exp_symbol, integrate
from .expr import ONE, ZERO, Atom, Expr, _intern, as_expr, collect_side_conditions, func, param, substitute
from .operator import LPDO, _index_key, compose_all, index_label, symbol
from .symbols import FactorizationType, SymPoly, is_coprime


class NonlinearSystemError(ValueError):
    pass


class NotFactorable(ArithmeticError):
    """The operator has no factorization of the requested type."""

    def __init__(self, conditions: Sequence[Expr], unsolved: Sequence[Expr] = ()):
        self.conditions = list(conditions)
        self.unsolved = list(unsolved)
        msg = "; ".join(f"{c} = 0" for c in self.conditions) or "no solution"
        super().__init__(f"not factorable: requires {msg}")


@dataclass
class CoeffSystem:
    equations: List[Expr]
    unknowns: List[Expr]
    labels: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.equations = [as_expr(e) for e in self.equations]
        if not self.labels:
            self.labels = [f"e{i + 1}" for i in range(len(self.equations))]
        names = [u.as_atom().name for u in self.unknowns]
        if len(set(names)) != len(names):
            raise ValueError("unknown names must be distinct")

    def __len__(self) -> int:
        return len(self.equations)


@dataclass
class SolveOutcome:
    bindings: Dict[str, Expr]
    free_params: List[Expr]
    conditions: List[Expr]
    unsolved: CoeffSystem
    side_conditions: List[Expr] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    definitions: List[Expr] = field(default_factory=list)
    unknowns: List[Expr] = field(default_factory=list)

    def resolved_bindings(self) -> Dict[str, Expr]:
        """Bindings with every later-solved unknown substituted in."""
        by_name = {u.as_atom().name: u for u in self.unknowns}
        out: Dict[str, Expr] = {}
        done: Dict[Expr, Expr] = {}
        for name in reversed(list(self.bindings)):
            val = substitute(self.bindings[name], done) if done else self.bindings[name]
            out[name] = val
            done[by_name[name]] = val
        return {k: out[k] for k in self.bindings}


# -- helpers -------------------------------------------------------------------------

class _State:
    def __init__(self, system: CoeffSystem):
        self.unknowns = list(system.unknowns)
        self.bases = {u.as_atom(): n for n, u in enumerate(self.unknowns)}
        taken = set()
        for e in system.equations:
            taken |= {a.name for a in e.atoms()}
        taken |= {a.name for a in self.bases}
        self.taken = taken
        self.exp_names: set = set()
        self.counters = {"E": 0, "f": 0}

    def fresh(self, prefix: str) -> str:
        while True:
            self.counters[prefix] += 1
            name = f"{prefix}{self.counters[prefix]}"
            if name not in self.taken:
                self.taken.add(name)
                return name

    def is_unknown(self, a: Atom) -> bool:
        return a.base in self.bases

    def unknown_ids(self, e: Expr) -> List[int]:
        return sorted(k for k in P.atoms(e.num) if self.is_unknown(_atom(k)))


def _atom(k: int) -> Atom:
    from .expr import atom_of

    return atom_of(k)


def _total_degree(p: P.Poly, ids) -> int:
    ids = set(ids)
    return max((sum(e for k, e in m if k in ids) for m in p), default=0)


def _split_linear(num: P.Poly, aid: int) -> Optional[Tuple[Expr, Expr]]:
    """``num = coef * atom + rest`` with degree one in the atom, else None."""
    parts = P.coefficients_in(num, aid)
    if set(parts) - {0, 1} or 1 not in parts:
        return None
    return Expr(parts[1]), Expr(parts.get(0, {}))


def _has_function_atoms(e: Expr) -> bool:
    return any(a.kind in ("func", "def") for a in e.atoms())


def _canonical_condition(e: Expr, strip: set) -> Optional[Expr]:
    num = e.num
    if not num:
        return None
    g = P.content_monomial(num)
    g = tuple((k, n) for k, n in g if _atom(k).name in strip)
    if g:
        num = {P.mono_div(m, g): c for m, c in num.items()}
    return Expr(num).monic()


def _split_conditions(e: Expr, params: set, strip: set) -> List[Expr]:
    """Split an unknown-free equation over monomials in the free parameters."""
    groups: Dict[P.Mono, P.Poly] = {}
    for m, c in e.num.items():
        pm = tuple((k, n) for k, n in m if _atom(k).base in params)
        rest = tuple((k, n) for k, n in m if _atom(k).base not in params)
        groups.setdefault(pm, {})[rest] = c
    out = []
    for pm in sorted(groups):
        cond = _canonical_condition(Expr(groups[pm]), strip)
        if cond is not None:
            out.append(cond)
    return out


# -- the solver ----------------------------------------------------------------------

def solve_triangular(system: CoeffSystem, nontrivial: bool = True, allow_nonlinear: bool = False,
                     ode: bool = True) -> SolveOutcome:
    """Solve ``system`` by repeated elimination.

    Steps, always taking the first applicable one:

    1. an equation free of unknowns becomes a condition;
    2. an unknown occurring underived with a constant coefficient is eliminated;
    3. with ``nontrivial``, ``p * u = 0`` where ``p`` involves function symbols
       becomes the condition ``p = 0`` (a nonzero ``u`` is sought);
    4. an unknown occurring underived with a known coefficient ``p`` is
       eliminated, recording ``p != 0``;
    5. with ``ode``, ``u_v = p u + q`` is integrated with a fresh exponential
       symbol and a fresh parameter function of the other variable.
    """
    st = _State(system)
    eqs: List[Tuple[str, Expr]] = []
    with collect_side_conditions() as sc:
        for label, e in zip(system.labels, system.equations):
            if not e.is_zero:
                eqs.append((label, Expr(e.num)))
        for label, e in eqs:
            if _total_degree(e.num, st.unknown_ids(e)) > 1 and not allow_nonlinear:
                raise NonlinearSystemError(f"equation {label} is nonlinear in the unknowns: {e}")
        bindings: Dict[str, Expr] = {}
        free: List[Expr] = []
        defs: List[Expr] = []
        conditions: List[Expr] = []
        stuck: List[Tuple[str, Expr]] = []

        def add_conditions(e: Expr):
            fp = {p.as_atom() for p in free}
            for c in _split_conditions(e, fp, st.exp_names):
                if c not in conditions:
                    conditions.append(c)

        def bind(u: Expr, val: Expr):
            nonlocal eqs
            bindings[u.as_atom().name] = val
            out = []
            for label, e in eqs:
                e2 = substitute(e, {u: val})
                if not e2.is_zero:
                    out.append((label, Expr(e2.num)))
            eqs = out

        while eqs:
            # 1. unknown-free equations
            idx = next((n for n, (_, e) in enumerate(eqs) if not st.unknown_ids(e)), None)
            if idx is not None:
                add_conditions(eqs.pop(idx)[1])
                continue
            step = _pick_algebraic(eqs, st, constant_only=True)
            if step is not None:
                n, u, coef, rest = step
                eqs.pop(n)
                bind(u, -rest / coef)
                continue
            if nontrivial:
                idx = _pick_homogeneous(eqs, st)
                if idx is not None:
                    e = eqs.pop(idx)[1]
                    (aid,) = st.unknown_ids(e)
                    add_conditions(Expr(P.coefficients_in(e.num, aid)[1]))
                    continue
            step = _pick_algebraic(eqs, st, constant_only=False)
            if step is not None:
                n, u, coef, rest = step
                eqs.pop(n)
                bind(u, -rest / coef)
                continue
            if ode:
                done = False
                for n, (label, e) in enumerate(eqs):
                    sol = _try_ode(e, st)
                    if sol is None:
                        continue
                    u, val, f, E = sol
                    eqs.pop(n)
                    free.append(f)
                    if E != ONE:
                        defs.append(E)
                    bind(u, val)
                    done = True
                    break
                if done:
                    continue
            stuck = eqs
            break

    notes = []
    for label, e in stuck:
        note = _ode_note(e, st)
        if note:
            notes.append(f"{label}: {note}")
    remaining = [u for u in st.unknowns if u.as_atom().name not in bindings]
    unsolved = CoeffSystem([e for _, e in stuck], remaining, [lbl for lbl, _ in stuck])
    return SolveOutcome(bindings, free, conditions, unsolved, list(sc), notes, defs, list(st.unknowns))


def _pick_algebraic(eqs, st: _State, constant_only: bool):
    best = None
    for n, (label, e) in enumerate(eqs):
        ids = st.unknown_ids(e)
        for aid in ids:
            a = _atom(aid)
            if a.order != (0, 0):
                continue
            # the unknown must not also occur differentiated
            if any(_atom(k).base == a and k != aid for k in ids):
                continue
            split = _split_linear(e.num, aid)
            if split is None:
                continue
            coef, rest = split
            if st.unknown_ids(coef):
                continue
            if constant_only and not coef.is_constant:
                continue
            key = (len(ids), n, st.bases[a])
            if best is None or key < best[0]:
                best = (key, n, Expr.atom(a), coef, rest)
    if best is None:
        return None
    return best[1:]


def _pick_homogeneous(eqs, st: _State) -> Optional[int]:
    for n, (_, e) in enumerate(eqs):
        ids = st.unknown_ids(e)
        if len(ids) != 1 or _atom(ids[0]).order != (0, 0):
            continue
        split = _split_linear(e.num, ids[0])
        if split is None:
            continue
        coef, rest = split
        if rest.is_zero and _has_function_atoms(coef):
            return n
    return None


def _try_ode(e: Expr, st: _State):
    ids = st.unknown_ids(e)
    if len(ids) not in (1, 2):
        return None
    atoms = [_atom(k) for k in ids]
    base = atoms[0].base
    if any(a.base != base for a in atoms):
        return None
    d = [a for a in atoms if a.order != (0, 0)]
    if len(d) != 1 or d[0].order not in ((1, 0), (0, 1)):
        return None
    v = "x" if d[0].order == (1, 0) else "y"
    w = "y" if v == "x" else "x"
    split = _split_linear(e.num, _intern(d[0]))
    if split is None:
        return None
    A, rest = split
    if st.unknown_ids(A):
        return None
    B, C = ZERO, rest
    if len(ids) == 2:
        split = _split_linear(rest.num, _intern(base))
        if split is None:
            return None
        B, C = split
    if st.unknown_ids(B) or st.unknown_ids(C):
        return None
    p = -B / A
    q = -C / A
    if p.is_zero:
        E, ename = ONE, None
    else:
        ename = st.fresh("E")
        E = exp_symbol(ename, p, v)
    particular = integrate(q / E, v) if not q.is_zero else ZERO
    if particular is None:
        if ename:
            st.counters["E"] -= 1
            st.taken.discard(ename)
        return None
    if ename:
        st.exp_names.add(ename)
    f = param(st.fresh("f"), w)
    return Expr.atom(base), (f + particular) * E, f, E


def _ode_note(e: Expr, st: _State) -> Optional[str]:
    ids = st.unknown_ids(e)
    if not ids:
        return None
    atoms = [_atom(k) for k in ids]
    if any(a.base != atoms[0].base for a in atoms):
        return None
    # homogeneous: every monomial contains exactly one unknown atom
    if any(sum(n for k, n in m if k in ids) != 1 for m in e.num):
        return None
    xs = {a.order[0] for a in atoms}
    ys = {a.order[1] for a in atoms}
    if ys == {0}:
        n, other = max(xs), "y"
    elif xs == {0}:
        n, other = max(ys), "x"
    else:
        return None
    word = "function" if n == 1 else "functions"
    return (f"homogeneous linear ODE of order {n} in {atoms[0].base.name}; "
            f"its solution space is parameterized by {n} arbitrary {word} of {other}")


# -- unique factorization for coprime types --------------------------------------------

_ANSATZ_PREFIXES = "pqstuvw"


def _ansatz_factor(part: SymPoly, prefix: str) -> Tuple[LPDO, List[Expr]]:
    top = part.as_operator()
    d = part.degree
    idx = sorted(((i, j) for i in range(d) for j in range(d - i)), key=_index_key, reverse=True)
    unknowns = [func(f"{prefix}{i}{j}", "xy") for i, j in idx]
    return top + LPDO(dict(zip(idx, unknowns))), unknowns


def unique_factorization(L: LPDO, t: FactorizationType) -> List[LPDO]:
    """The factorization of ``L`` of type ``t`` with pairwise coprime parts.

    Raises :class:`NotFactorable` carrying the violated conditions.
    """
    for i in range(t.k):
        for j in range(i + 1, t.k):
            if not is_coprime(t.parts[i], t.parts[j]):
                raise ValueError(f"parts {i + 1} and {j + 1} of {t} are not coprime")
    if symbol(L) != t.product():
        raise ValueError(f"symbol of L is {symbol(L)}, type {t} multiplies to {t.product()}")
    factors, unknowns = [], []
    for n, part in enumerate(t.parts):
        F, us = _ansatz_factor(part, _ANSATZ_PREFIXES[n])
        factors.append(F)
        unknowns += us
    diff = compose_all(factors) - L
    keys = sorted(diff.coeffs, key=_index_key)
    system = CoeffSystem([diff[J] for J in keys], unknowns, [index_label(J) for J in keys])
    out = solve_triangular(system, nontrivial=False, allow_nonlinear=True, ode=False)
    if out.conditions or out.unsolved.equations:
        raise NotFactorable(out.conditions, out.unsolved.equations)
    values = out.resolved_bindings()
    binding = {u: values.get(u.as_atom().name, ZERO) for u in unknowns}
    result = [F.map_coeffs(lambda c: substitute(c, binding)) for F in factors]
    if compose_all(result) != L:
        raise AssertionError("recovered factors do not compose to L")
    return result
