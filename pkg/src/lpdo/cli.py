"""Command-line front end: run one script and print a report.

Exit codes: 0 ok, 1 parse error, 2 math error, 3 verified with a nonzero
residual, 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Dict, List, Optional

from . import families as fam
from .dsl import FamilyRef, ParseError, Script, TypeLiteral, parse, print_command
from .expr import DivisionByZeroError, Expr, SubstitutionError, _intern, _replace, SELF, collect_side_conditions
from .operator import LPDO, Dx, Dy, _index_key, adjoint, apply, compose_all, gauge, index_label, is_hyperbolic, symbol
from .solver import NonlinearSystemError, NotFactorable, solve_triangular, unique_factorization
from .symbols import NeedsHint, admissible_pattern, coprime_split, enumerate_types, factor_symbol

EXIT_OK, EXIT_PARSE, EXIT_MATH, EXIT_RESIDUAL, EXIT_INTERNAL = 0, 1, 2, 3, 4


class MathError(ArithmeticError):
    pass


def _op_payload(L: LPDO) -> Dict[str, Any]:
    keys = sorted(L.coeffs, key=_index_key, reverse=True)
    return {"operator": str(L), "order": L.order,
            "coefficients": {index_label(J): str(L[J]) for J in keys}}


def _definition_payload(e: Expr) -> Dict[str, Any]:
    a = e.as_atom()
    rules = {f"d{v}": str(_replace(r, {_intern(SELF): e})) for v, r in a.rules}
    out = {"name": a.name, "depends_on": sorted(a.deps), "rules": rules}
    if a.label:
        out["closed_form"] = a.label
    return out


def _param_payload(e: Expr) -> Dict[str, Any]:
    a = e.as_atom()
    return {"name": a.name, "depends_on": sorted(a.deps)}


class Runner:
    def __init__(self, script: Script, max_order: int = 4):
        self.script = script
        self.max_order = max_order
        self.findings: List[str] = []
        self.exit = EXIT_OK

    def check_order(self, L: LPDO):
        if L.order > self.max_order:
            raise MathError(f"operator order {L.order} exceeds --max-order={self.max_order}")

    def run(self) -> Dict[str, Any]:
        cmd = self.script.command
        handler = getattr(self, "do_" + cmd.name.replace("-", "_"))
        for a in cmd.args:
            if isinstance(a, LPDO):
                self.check_order(a)
        return handler(*cmd.args)

    # commands
    def do_compose(self, *ops):
        return _op_payload(compose_all(ops))

    def do_adjoint(self, L):
        return _op_payload(adjoint(L))

    def do_gauge(self, L, g):
        return _op_payload(gauge(L, g))

    def do_apply(self, L, f):
        return {"value": str(apply(L, f))}

    def do_symbol(self, L):
        return {"symbol": str(symbol(L)), "degree": L.order}

    def _factorization(self, L):
        f = factor_symbol(symbol(L))
        return f, {"factorization": str(f), "scalar": str(f.scalar),
                   "factors": [{"form": str(form), "multiplicity": m} for form, m in f.factors]}

    def do_factor_symbol(self, L):
        return self._factorization(L)[1]

    def do_hyperbolic(self, L):
        _, payload = self._factorization(L)
        payload["hyperbolic"] = is_hyperbolic(L)
        return payload

    def do_types(self, k, L):
        f, payload = self._factorization(L)
        types = enumerate_types(f, k)
        rows = []
        for t in types:
            split = coprime_split(t)
            rows.append({"type": str(t), "admissible": admissible_pattern(t),
                         "coprime_split": split})
        payload.update({"k": k, "count": len(rows), "types": rows,
                        "admissible": [r["type"] for r in rows if r["admissible"]]})
        return payload

    def _family(self, ref: FamilyRef):
        if ref.kind == "catalogue":
            if ref.name == "dxx":
                return fam.second_order_family(0, 0), Dx ** 2
            if ref.name == "landau":
                return fam.landau_family(), fam.landau_operator_printed()
            if ref.name == "quartic-xx":
                return fam.quartic_xx_family(), Dx ** 4
            return fam.quartic_xy_family(), Dx ** 2 * Dy ** 2
        if ref.kind == "thm41":
            a, b = ref.args
            return fam.second_order_family(a, b), (Dx + a) * (Dx + b)
        return fam.FamilyTemplate.build(self.script.op(ref.name).factors, name=ref.name), None

    def do_verify_family(self, ref, reference=None):
        t, default_ref = self._family(ref)
        if reference is None:
            reference = default_ref
        rep = fam.verify_family(t, reference)
        payload = {
            "family": str(ref),
            "factors": t.factor_strings(),
            "params": [_param_payload(p) for p in t.params],
            "definitions": [_definition_payload(d) for d in t.definitions],
            "type": str(t.factorization_type()) if t.k > 1 else None,
            "composed": _op_payload(rep.composed),
            "parameter_dependent": rep.parameter_dependent,
            "prefix_dependence": rep.prefix_dependence,
            "instantiation_consistent": rep.instantiation_consistent,
        }
        if t.k > 1:
            red, wit = fam.is_reducible(t)
            payload["reducible"] = {"reducible": red, "witness": wit}
        if reference is not None:
            payload["reference"] = str(reference)
            payload["residual"] = _op_payload(rep.residual)
            payload["residual_zero"] = rep.residual.is_zero
            if not rep.residual.is_zero:
                self.exit = EXIT_RESIDUAL
                self.findings.append("composed operator differs from the reference operator")
                for J in sorted(rep.residual.coeffs, key=_index_key, reverse=True):
                    self.findings.append(f"coefficient of {index_label(J)}: composed "
                                         f"{rep.composed[J]}, reference {reference[J]}")
        if rep.parameter_dependent:
            self.findings.append("composed operator depends on the parameters")
        if rep.instantiation_consistent is False:
            self.findings.append("concrete parameter instantiations disagree with the symbolic composition")
        return payload

    def do_reducible(self, ref):
        t, _ = self._family(ref)
        red, wit = fam.is_reducible(t)
        return {"family": str(ref), "reducible": red, "witness": wit,
                "prefix_dependence": fam.verify_family(t).prefix_dependence}

    def do_linearize(self, orders, L1, L2):
        system = fam.linearized_system(L1, L2, orders)
        out = solve_triangular(system)
        self.findings.extend(out.notes)
        return {
            "ansatz_orders": list(orders),
            "unknowns": [str(u) for u in system.unknowns],
            "equations": [{"index": lbl, "equation": str(e)}
                          for lbl, e in zip(system.labels, system.equations)],
            "bindings": {k: str(v) for k, v in out.bindings.items()},
            "resolved": {k: str(v) for k, v in out.resolved_bindings().items()},
            "free_params": [_param_payload(p) for p in out.free_params],
            "definitions": [_definition_payload(d) for d in out.definitions],
            "conditions": [str(c) for c in out.conditions],
            "unsolved": [{"index": lbl, "equation": str(e)}
                         for lbl, e in zip(out.unsolved.labels, out.unsolved.equations)],
            "notes": out.notes,
        }

    def do_factorize(self, tl: TypeLiteral, L):
        t = tl.to_type()
        try:
            factors = unique_factorization(L, t)
        except NotFactorable as e:
            self.findings.append(str(e))
            raise MathError(str(e), {"conditions": [str(c) for c in e.conditions],
                                     "unsolved": [str(u) for u in e.unsolved]})
        return {"type": str(t), "factors": [str(F) for F in factors]}


def run_script(source: str, max_order: int = 4):
    """Parse and run ``source``; returns ``(report, exit_code)``."""
    report: Dict[str, Any] = {"command": None, "result": None, "side_conditions": [], "findings": []}
    with collect_side_conditions() as sc:
        try:
            script = parse(source)
        except ParseError as e:
            report["error"] = {"kind": "parse", "message": str(e), "line": e.line, "column": e.col,
                               "token": e.token}
            return report, EXIT_PARSE
        report["command"] = print_command(script.command)
        runner = Runner(script, max_order)
        code = EXIT_OK
        try:
            report["result"] = runner.run()
            code = runner.exit
        except (MathError, NeedsHint, NotFactorable, NonlinearSystemError, DivisionByZeroError,
                SubstitutionError, ValueError, ArithmeticError) as e:
            err = {"kind": type(e).__name__, "message": str(e.args[0]) if e.args else str(e)}
            if isinstance(e, MathError) and len(e.args) > 1:
                err.update(e.args[1])
            if isinstance(e, NeedsHint):
                err["residual"] = str(e.residual)
            report["error"] = err
            code = EXIT_MATH
        except Exception as e:  # pragma: no cover - defensive
            report["error"] = {"kind": "internal", "message": f"{type(e).__name__}: {e}"}
            code = EXIT_INTERNAL
    seen = []
    for c in sc:
        s = str(c)
        if s not in seen:
            seen.append(s)
    report["side_conditions"] = [f"{s} != 0" for s in seen]
    report["findings"] = runner.findings
    return report, code


def _text(value, indent: int = 0) -> List[str]:
    pad = "  " * indent
    lines = []
    if isinstance(value, dict):
        for k, v in value.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(value, list):
        for v in value:
            if isinstance(v, (dict, list)) and v:
                sub = _text(v, indent + 1)
                lines.append(f"{pad}- {sub[0].strip()}")
                lines.extend(sub[1:])
            else:
                lines.append(f"{pad}- {_scalar(v)}")
    else:
        lines.append(pad + _scalar(value))
    return lines


def _scalar(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (dict, list)):
        return "{}" if isinstance(v, dict) else "[]"
    return str(v)


def render(report: Dict[str, Any], fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    return "\n".join(_text(report)) + "\n"


def main(argv: Optional[List[str]] = None) -> int:
    ap = argparse.ArgumentParser(prog="lpdo", description="Symbolic toolkit for operators in Dx, Dy.")
    ap.add_argument("script", nargs="?", default="-", help="script file, or - for stdin")
    ap.add_argument("-e", "--eval", dest="source", help="script text given inline")
    ap.add_argument("--format", choices=("text", "json"), default="text")
    ap.add_argument("--max-order", type=int, default=4)
    args = ap.parse_args(argv)
    if args.source is not None:
        source = args.source
    elif args.script == "-":
        source = sys.stdin.read()
    else:
        with open(args.script, encoding="utf-8") as fh:
            source = fh.read()
    report, code = run_script(source, args.max_order)
    sys.stdout.write(render(report, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
