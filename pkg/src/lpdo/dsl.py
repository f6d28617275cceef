"""A small language for declaring symbols and writing operators.

Example::

    param c(y);
    op L = (Dx + 1 + 1/(x + c)) * (Dx + 1 - 1/(x + c)) * (Dx + x*Dy);
    verify-family L

Declarations come first, then exactly one command.  Expressions mix scalars
and operators: ``*`` is composition once an operator is involved, ``/`` is
only allowed between scalars.  Values are evaluated while parsing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from .expr import SELF, Atom, Expr, _intern, _replace, defined, func, param, var
from .operator import LPDO, Dx, Dy, compose_all, symbol as _symbol
from .symbols import FactorizationType


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0, token: str = ""):
        self.line, self.col, self.token = line, col, token
        where = f"line {line}, column {col}" if line else "end of input"
        near = f" near {token!r}" if token else ""
        super().__init__(f"{where}{near}: {message}")
        self.message = message


# -- lexer --------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z][A-Za-z0-9]*)
  | (?P<suffix>_[xy]+)
  | (?P<op>[-+*/^(),;=:'\[\]])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(source: str) -> List[Token]:
    out = []
    pos, line, start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ParseError("unexpected character", line, pos - start + 1, source[pos])
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind != "ws":
            out.append(Token(kind, m.group(), line, m.start() - start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - start + 1))
    return out


# -- script values ------------------------------------------------------------------

KEYWORDS = {"param", "func", "defsym", "op"}
RESERVED = KEYWORDS | {"x", "y", "Dx", "Dy", "d"}
COMMANDS = ("compose", "adjoint", "gauge", "symbol", "factor-symbol", "hyperbolic", "types",
            "verify-family", "reducible", "linearize", "factorize", "apply")
CATALOGUE = ("dxx", "landau", "quartic-xx", "quartic-xy")


@dataclass(frozen=True)
class Decl:
    kind: str  # "param" | "func" | "defsym"
    name: str
    deps: Tuple[str, ...]
    rules: Tuple[Tuple[str, Expr], ...] = ()

    @property
    def value(self) -> Expr:
        if self.kind == "param":
            return param(self.name, self.deps)
        if self.kind == "func":
            return func(self.name, self.deps)
        return defined(self.name, self.deps, dict(self.rules))


@dataclass(frozen=True)
class OpDef:
    name: str
    factors: Tuple[LPDO, ...]

    @property
    def value(self) -> LPDO:
        return compose_all(self.factors)


@dataclass(frozen=True)
class FamilyRef:
    """A catalogue family (``landau``), ``thm41:a:b``, or a declared op."""

    kind: str  # "catalogue" | "thm41" | "op"
    name: str
    args: Tuple = ()

    def __str__(self) -> str:
        if self.kind == "thm41":
            return f"thm41:{_print_value(self.args[0])}:{_print_value(self.args[1])}"
        return self.name


@dataclass(frozen=True)
class TypeLiteral:
    parts: Tuple[LPDO, ...]

    def to_type(self) -> FactorizationType:
        return FactorizationType.from_parts([_symbol(P) for P in self.parts])

    def __str__(self) -> str:
        return "".join(f"({_symbol(P)})" for P in self.parts)


@dataclass(frozen=True)
class Command:
    name: str
    args: Tuple
    names: Tuple = ()  # declared op name per argument, when given by name


@dataclass(frozen=True)
class Script:
    decls: Tuple[Decl, ...]
    ops: Tuple[OpDef, ...]
    command: Command
    order: Tuple[Tuple[str, str], ...] = field(default=(), compare=False)

    def op(self, name: str) -> OpDef:
        return next(o for o in self.ops if o.name == name)


Value = Union[Expr, LPDO]


def _is_op(v) -> bool:
    return isinstance(v, LPDO)


# -- parser -------------------------------------------------------------------------

class Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0
        self.env: Dict[str, object] = {}
        self.decls: List[Decl] = []
        self.ops: List[OpDef] = []
        self.order: List[Tuple[str, str]] = []
        self.self_name: Optional[str] = None
        self.type_mode = False

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col, tok.text)

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind in ("op", "ident"):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if self.tok.text != text:
            self.error(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            self.error("expected an identifier")
        t = self.tok
        self.i += 1
        return t

    def integer(self) -> int:
        neg = self.accept("-")
        if self.tok.kind != "num":
            self.error("expected an integer")
        v = int(self.tok.text)
        self.i += 1
        return -v if neg else v

    # script
    def script(self) -> Script:
        while self.tok.kind == "ident" and self.tok.text in KEYWORDS:
            self.declaration()
        if self.tok.kind == "eof":
            self.error("missing command")
        cmd = self.command()
        self.accept(";")
        if self.tok.kind != "eof":
            self.error("unexpected input after the command")
        return Script(tuple(self.decls), tuple(self.ops), cmd, tuple(self.order))

    def _new_name(self) -> Token:
        t = self.ident()
        if t.text in RESERVED or t.text in COMMANDS:
            self.error(f"{t.text!r} is reserved", t)
        if t.text in self.env:
            self.error(f"{t.text!r} is already declared", t)
        return t

    def _deps(self, default) -> Tuple[str, ...]:
        if not self.accept("("):
            return default
        deps = []
        if not self.accept(")"):
            while True:
                t = self.ident()
                if t.text not in ("x", "y") or t.text in deps:
                    self.error("dependencies must be distinct variables among x, y", t)
                deps.append(t.text)
                if self.accept(")"):
                    break
                self.expect(",")
        return tuple(sorted(deps))

    def declaration(self):
        kw = self.ident().text
        if kw == "op":
            t = self._new_name()
            self.expect("=")
            factors = self.factor_list()
            od = OpDef(t.text, tuple(factors))
            self.ops.append(od)
            self.env[t.text] = od
            self.order.append(("op", t.text))
            self.expect(";")
            return
        t = self._new_name()
        if kw == "defsym":
            deps = self._deps(None)
            rules = {}
            self.self_name = t.text
            try:
                while self.tok.text in ("dx", "dy"):
                    v = self.ident().text[1]
                    if v in rules:
                        self.error(f"duplicate rule for d{v}")
                    self.expect("=")
                    start = self.tok
                    r = self.expr()
                    if _is_op(r):
                        self.error("a derivative rule must be a scalar", start)
                    rules[v] = r
            finally:
                self.self_name = None
            if deps is None:
                deps = tuple(sorted(rules))
            for v in rules:
                if v not in deps:
                    self.error(f"rule d{v} given but {t.text} does not depend on {v}", t)
            decl = Decl("defsym", t.text, deps, tuple(sorted(rules.items())))
            try:
                decl.value
            except ValueError as e:
                self.error(str(e), t)
        else:
            deps = self._deps(("x", "y") if kw == "func" else ())
            decl = Decl(kw, t.text, deps)
        self.decls.append(decl)
        self.env[t.text] = decl
        self.order.append(("decl", t.text))
        self.expect(";")

    def factor_list(self) -> List[LPDO]:
        """A top-level ``*`` chain keeps its factors; scalars merge rightwards."""
        start = self.i
        whole = self.sum()
        end = self.i
        self.i = start
        items = self._product_chain()
        if self.i != end:
            self.i = end
            items = [whole]
        out: List[LPDO] = []
        pending: Optional[Expr] = None
        for v in items:
            if _is_op(v):
                if pending is not None:
                    v = pending * v
                    pending = None
                out.append(v)
            else:
                pending = v if pending is None else pending * v
        if pending is not None:
            if out:
                out[-1] = out[-1] * LPDO.scalar(pending)
            else:
                out.append(LPDO.scalar(pending))
        return out

    def _product_chain(self) -> List[Value]:
        items = [self.unary()]
        while self.tok.text == "*":
            self.i += 1
            items.append(self.unary())
        return items

    def command(self) -> Command:
        t = self.ident()
        name = t.text
        while self.tok.text == "-" and self.peek().kind == "ident":
            self.i += 1
            name += "-" + self.ident().text
        if name not in COMMANDS:
            self.error(f"unknown command {name!r}", t)
        self._arg_names = {}
        args = tuple(getattr(self, "cmd_" + name.replace("-", "_"))())
        names = tuple(self._arg_names.get(id(a)) for a in args)
        return Command(name, args, names if any(names) else ())

    # command argument forms
    def _value_args(self, n_min: int, n_max: int) -> List[Value]:
        args = [self.expr()]
        while self.accept(","):
            args.append(self.expr())
        if not n_min <= len(args) <= n_max:
            self.error(f"expected {n_min}..{n_max} arguments, got {len(args)}")
        return args

    def _operator_arg(self) -> LPDO:
        t = self.tok
        named = (t.kind == "ident" and isinstance(self.env.get(t.text), OpDef)
                 and self.peek().text in (",", ""))
        v = self.expr()
        v = v if _is_op(v) else LPDO.scalar(v)
        if named:
            self._arg_names[id(v)] = t.text
        return v

    def _scalar_arg(self) -> Expr:
        start = self.tok
        v = self.expr()
        if _is_op(v):
            self.error("expected a scalar expression", start)
        return v

    def cmd_compose(self):
        args = [self._operator_arg()]
        while self.accept(","):
            args.append(self._operator_arg())
        return args

    def cmd_adjoint(self):
        return [self._operator_arg()]

    cmd_symbol = cmd_factor_symbol = cmd_hyperbolic = cmd_adjoint

    def cmd_gauge(self):
        L = self._operator_arg()
        self.expect(",")
        return [L, self._scalar_arg()]

    def cmd_apply(self):
        L = self._operator_arg()
        self.expect(",")
        return [L, self._scalar_arg()]

    def cmd_types(self):
        k = self.integer()
        self.expect(",")
        return [k, self._operator_arg()]

    def family_ref(self) -> FamilyRef:
        t = self.tok
        if t.kind != "ident":
            self.error("expected a family name")
        if t.text == "thm41" and self.peek().text == ":" and "thm41" not in self.env:
            self.i += 1
            self.expect(":")
            a = self._scalar_arg()
            self.expect(":")
            b = self._scalar_arg()
            return FamilyRef("thm41", "thm41", (a, b))
        save = self.i
        name = self.ident().text
        while self.tok.text == "-" and self.peek().kind == "ident":
            self.i += 1
            name += "-" + self.ident().text
        if name in CATALOGUE and name not in self.env:
            return FamilyRef("catalogue", name)
        self.i = save
        name = self.ident().text
        if isinstance(self.env.get(name), OpDef):
            return FamilyRef("op", name)
        self.error(f"unknown family {name!r}", t)

    def cmd_verify_family(self):
        ref = self.family_ref()
        if self.accept(","):
            return [ref, self._operator_arg()]
        return [ref]

    def cmd_reducible(self):
        return [self.family_ref()]

    def cmd_linearize(self):
        self.expect("(")
        m1 = self.integer()
        self.expect(",")
        m2 = self.integer()
        self.expect(")")
        self.expect(",")
        L1 = self._operator_arg()
        self.expect(",")
        L2 = self._operator_arg()
        return [(m1, m2), L1, L2]

    def cmd_factorize(self):
        parts = []
        self.type_mode = True
        try:
            while self.tok.text == "(":
                self.i += 1
                start = self.tok
                v = self.sum()
                if not _is_op(v):
                    self.error("a type part must be a symbol in X and Y", start)
                parts.append(v)
                self.expect(")")
        finally:
            self.type_mode = False
        if len(parts) < 2:
            self.error("a factorization type needs at least two parts")
        for P in parts:
            if any(i + j != P.order for (i, j), _ in P):
                self.error("type parts must be homogeneous in X and Y")
        self.expect(",")
        return [TypeLiteral(tuple(parts)), self._operator_arg()]

    # expressions
    def expr(self) -> Value:
        return self.sum()

    def sum(self) -> Value:
        v = self.product()
        while self.tok.text in ("+", "-"):
            opr = self.tok.text
            self.i += 1
            w = self.product()
            v = _add(v, w) if opr == "+" else _add(v, _neg(w))
        return v

    def product(self) -> Value:
        v = self.unary()
        while self.tok.text in ("*", "/"):
            opr = self.tok
            self.i += 1
            w = self.unary()
            if opr.text == "*":
                v = _mul(v, w)
            else:
                if _is_op(v) or _is_op(w):
                    self.error("division is only defined for scalars", opr)
                if w.is_zero:
                    self.error("division by zero", opr)
                v = v / w
        return v

    def unary(self) -> Value:
        if self.accept("-"):
            return _neg(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Value:
        base = self.primary()
        if self.tok.text == "^":
            t = self.tok
            self.i += 1
            n = self.integer()
            if _is_op(base):
                if n < 0:
                    self.error("negative power of an operator", t)
                return base ** n
            if n < 0 and base.is_zero:
                self.error("division by zero", t)
            return base ** n
        return base

    def primary(self) -> Value:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Expr.const(int(t.text))
        if t.text == "(":
            self.i += 1
            v = self.sum()
            self.expect(")")
            return self._postfix(v, None)
        if t.kind == "ident":
            if t.text == "d" and self.peek().text == "/" and self.peek(2).text in ("dx", "dy") \
                    and self.peek(3).text == "(":
                v = self.peek(2).text[1]
                self.i += 4
                start = self.tok
                arg = self.sum()
                self.expect(")")
                if _is_op(arg):
                    self.error("d/dx and d/dy apply to scalars", start)
                return arg.diff(v)
            self.i += 1
            return self._postfix(self._name(t), t)
        self.error("expected an expression")

    def _name(self, t: Token) -> Value:
        name = t.text
        if name in ("x", "y"):
            return var(name)
        if name == "Dx":
            return Dx
        if name == "Dy":
            return Dy
        if self.self_name == name:
            return Expr.atom(SELF)
        if self.type_mode and re.fullmatch(r"[XY]+", name) and name not in self.env:
            out = LPDO.scalar(1)
            for ch in name:
                out = out * (Dx if ch == "X" else Dy)
            return out
        item = self.env.get(name)
        if item is None:
            self.error(f"undeclared identifier {name!r}", t)
        if isinstance(item, OpDef):
            return item.value
        v = item.value
        if self.tok.text == "(":
            self._call_args(item, t)
        return v

    def _call_args(self, decl: Decl, t: Token):
        self.expect("(")
        args = []
        if not self.accept(")"):
            while True:
                a = self.ident()
                args.append(a.text)
                if self.accept(")"):
                    break
                self.expect(",")
        if tuple(sorted(args)) != decl.deps or len(args) != len(decl.deps):
            self.error(f"{decl.name} takes ({', '.join(decl.deps)}), got ({', '.join(args)})", t)

    def _postfix(self, v: Value, t: Optional[Token]) -> Value:
        primes = 0
        while self.tok.text == "'":
            self.i += 1
            primes += 1
        if primes:
            deps = self._deps_of(v, t)
            if len(deps) != 1:
                self.error("primes need a function of one variable; use _x or _y", t)
            v = v.diff(deps[0], primes)
        if self.tok.kind == "suffix":
            s = self.tok
            self.i += 1
            if _is_op(v):
                self.error("derivative suffix on an operator", s)
            for ch in s.text[1:]:
                v = v.diff(ch)
        return v

    def _deps_of(self, v: Value, t: Optional[Token]) -> Tuple[str, ...]:
        if _is_op(v):
            self.error("derivative of an operator", t)
        a = v.as_atom()
        if a is None or a.kind == "var":
            self.error("primes apply to a declared symbol", t)
        return tuple(sorted(a.deps))


def _add(a: Value, b: Value) -> Value:
    if _is_op(a) or _is_op(b):
        return _as_op(a) + _as_op(b)
    return a + b


def _neg(a: Value) -> Value:
    return -a


def _mul(a: Value, b: Value) -> Value:
    if _is_op(a) or _is_op(b):
        return _as_op(a) * _as_op(b)
    return a * b


def _as_op(v: Value) -> LPDO:
    return v if _is_op(v) else LPDO.scalar(v)


def parse(source: str) -> Script:
    return Parser(source).script()


# -- printing -----------------------------------------------------------------------

def _print_value(v) -> str:
    return str(v)


def _print_rule(name_atom: Expr, r: Expr) -> str:
    return str(_replace(r, {_intern(SELF): name_atom}))


def print_script(s: Script) -> str:
    """Canonical source text; ``parse(print_script(s)) == s``."""
    lines = []
    decls = {d.name: d for d in s.decls}
    ops = {o.name: o for o in s.ops}
    order = s.order or tuple([("decl", d.name) for d in s.decls] + [("op", o.name) for o in s.ops])
    for kind, name in order:
        if kind == "decl":
            d = decls[name]
            deps = f"({', '.join(d.deps)})"
            if d.kind == "defsym":
                me = Expr.atom(Atom("def", d.name, frozenset(d.deps)))
                rules = "".join(f" d{v}={_print_rule(me, r)}" for v, r in d.rules)
                lines.append(f"defsym {d.name}{deps}{rules};")
            else:
                lines.append(f"{d.kind} {d.name}{deps};")
        else:
            o = ops[name]
            body = " * ".join(f"({F})" for F in o.factors) if len(o.factors) > 1 else str(o.factors[0])
            lines.append(f"op {o.name} = {body};")
    lines.append(print_command(s.command))
    return "\n".join(lines) + "\n"


def print_command(c: Command) -> str:
    args = []
    for n, a in enumerate(c.args):
        if c.names and c.names[n]:
            args.append(c.names[n])
        elif isinstance(a, tuple):
            args.append(f"({a[0]}, {a[1]})")
        else:
            args.append(_print_value(a))
    return c.name + (" " + ", ".join(args) if args else "")
