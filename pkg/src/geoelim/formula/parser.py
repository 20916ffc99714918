"""Recursive-descent parser for formulas and polynomial terms.

Grammar (quantifiers may also start any literal)::

    formula := {("exists"|"forall") ident ":"} impl
    impl    := disj [("->" | "<->") disj]
    disj    := conj {"or" conj}
    conj    := lit {"and" lit}
    lit     := "not" lit | "(" formula ")" | atom
    atom    := term relop term | Ident "(" term {"," term} ")" | "true" | "false"
    term    := prod {("+"|"-") prod}
    prod    := power {"*" power}
    power   := unary ["^" natural]
    unary   := "-" unary | primary
    primary := rational | ident | Ident "(" term {"," term} ")" | "(" term ")"

Unary minus binds tighter than ``^``, so ``-x^2`` is ``(-x)^2``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..exactalg.rational import parse_rational
from .ast import (
    ORDER_RELOPS, RELOPS, And, Atom, Exists, Forall, Formula, Iff, Implies, Not, Or,
    RelApp, Truth,
)
from .terms import PARAM, VAR, Add, Const, FuncApp, Mul, Neg, Pow, Sub, Sym, Term


class FormulaSyntaxError(SyntaxError):
    """Malformed input; ``pos`` is the character offset of the problem."""

    def __init__(self, message: str, pos: int = 0, text: str = ""):
        super().__init__(f"{message} at offset {pos}")
        self.pos = pos
        self.text = text


class ModeError(FormulaSyntaxError):
    """Order relation used while parsing in complex mode."""


class UndeclaredSymbol(FormulaSyntaxError):
    pass


class ArityMismatch(FormulaSyntaxError):
    pass


_DEFAULT_PARAM = re.compile(r"u\d*$")


@dataclass(frozen=True)
class Context:
    """Declaration context resolving identifiers to symbol kinds.

    With ``strict=False`` undeclared identifiers are accepted: names of the
    form ``u``/``u<digits>`` become parameters, everything else a variable,
    and any ``Name(...)`` is a schema symbol of the arity it is used with.
    """

    params: Tuple[str, ...] = ()
    vars: Tuple[str, ...] = ()
    relations: Dict[str, int] = field(default_factory=dict)
    functions: Dict[str, int] = field(default_factory=dict)
    mode: str = "real"
    strict: bool = False

    def kind(self, name: str) -> Optional[str]:
        if name in self.params:
            return PARAM
        if name in self.vars:
            return VAR
        if self.strict:
            return None
        return PARAM if _DEFAULT_PARAM.match(name) else VAR


DEFAULT_CONTEXT = Context()

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op><->|->|!=|<=|>=|[-+*^(),:=<>]|[∧∨¬→↔∃∀≤≥≠])
""", re.VERBOSE)

_UNICODE = {"∧": "and", "∨": "or", "¬": "not", "→": "->", "↔": "<->",
            "∃": "exists", "∀": "forall", "≤": "<=", "≥": ">=", "≠": "!="}
_KEYWORDS = {"exists", "forall", "and", "or", "not", "true", "false", "implies", "iff"}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> List[_Tok]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        tok = m.group()
        if kind != "ws":
            if kind == "op" and tok in _UNICODE:
                tok = _UNICODE[tok]
                kind = "op" if not tok.isalpha() else "kw"
            elif kind == "ident" and tok in _KEYWORDS:
                kind = "kw"
                tok = {"implies": "->", "iff": "<->"}.get(tok, tok)
                if tok in ("->", "<->"):
                    kind = "op"
            out.append(_Tok(kind, tok, m.start()))
        pos = m.end()
    out.append(_Tok("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, ctx: Context):
        self.text = text
        self.ctx = ctx
        self.toks = tokenize(text)
        self.i = 0
        self.bound: List[str] = []

    # token helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, cls=FormulaSyntaxError):
        raise cls(msg, self.tok.pos, self.text)

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind in ("op", "kw"):
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")

    def done(self):
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r}")

    # formulas
    def formula(self) -> Formula:
        if self.tok.kind == "kw" and self.tok.text in ("exists", "forall"):
            q = self.tok.text
            self.i += 1
            if self.tok.kind != "ident":
                self.error("expected a variable after quantifier")
            name = self.tok.text
            if self.ctx.kind(name) == PARAM and name in self.ctx.params:
                self.error(f"quantifier binds the parameter {name!r}")
            self.i += 1
            self.expect(":")
            self.bound.append(name)
            try:
                body = self.formula()
            finally:
                self.bound.pop()
            return Exists(name, body) if q == "exists" else Forall(name, body)
        return self.impl()

    def impl(self) -> Formula:
        left = self.disj()
        if self.accept("->"):
            return Implies(left, self.disj())
        if self.accept("<->"):
            return Iff(left, self.disj())
        return left

    def disj(self) -> Formula:
        parts = [self.conj()]
        while self.accept("or"):
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self) -> Formula:
        parts = [self.lit()]
        while self.accept("and"):
            parts.append(self.lit())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def lit(self) -> Formula:
        if self.accept("not"):
            return Not(self.lit())
        if self.tok.kind == "kw" and self.tok.text in ("exists", "forall"):
            return self.formula()
        if self.tok.text == "(" and self.tok.kind == "op":
            save = self.i
            self.i += 1
            try:
                inner = self.formula()
                self.expect(")")
            except FormulaSyntaxError as exc:
                if isinstance(exc, (ModeError, UndeclaredSymbol, ArityMismatch)):
                    raise
                self.i = save
                return self.atom()
            if self.tok.text in RELOPS or self.tok.text in ("+", "-", "*", "^"):
                self.i = save
                return self.atom()
            return inner
        return self.atom()

    def atom(self) -> Formula:
        if self.tok.kind == "kw" and self.tok.text in ("true", "false"):
            value = self.tok.text == "true"
            self.i += 1
            return Truth(value)
        if self.tok.kind == "ident" and self.peek().text == "(" and self._is_relation(self.tok.text):
            save = self.i
            name = self.tok.text
            self.i += 1
            args = self.arglist()
            if self.tok.text not in RELOPS and self.tok.text not in ("+", "-", "*", "^"):
                self._check_arity(name, len(args), self.ctx.relations, "relation")
                return RelApp(name, tuple(args))
            self.i = save
        lhs = self.term()
        if self.tok.text not in RELOPS:
            self.error(f"expected a relation operator, found {self.tok.text or 'end of input'!r}")
        op = self.tok.text
        if self.ctx.mode == "complex" and op in ORDER_RELOPS:
            self.error(f"order relation {op!r} in complex mode", ModeError)
        self.i += 1
        rhs = self.term()
        return Atom(lhs, op, rhs)

    def _is_relation(self, name: str) -> bool:
        if name in self.ctx.functions:
            return False
        return True

    def _check_arity(self, name, k, table, what):
        if name in table:
            if table[name] != k:
                self.error(f"{what} {name!r} has arity {table[name]}, used with {k}", ArityMismatch)
        elif self.ctx.strict:
            self.error(f"undeclared {what} {name!r}", UndeclaredSymbol)

    def arglist(self) -> List[Term]:
        self.expect("(")
        args = [self.term()]
        while self.accept(","):
            args.append(self.term())
        self.expect(")")
        return args

    # terms
    def term(self) -> Term:
        t = self.prod()
        while True:
            if self.accept("+"):
                t = Add(t, self.prod())
            elif self.accept("-"):
                t = Sub(t, self.prod())
            else:
                return t

    def prod(self) -> Term:
        t = self.power()
        while self.accept("*"):
            t = Mul(t, self.power())
        return t

    def power(self) -> Term:
        base = self.unary()
        if self.accept("^"):
            if self.tok.kind != "num" or "/" in self.tok.text:
                self.error("exponent must be a natural number")
            e = int(self.tok.text)
            self.i += 1
            return Pow(base, e)
        return base

    def unary(self) -> Term:
        if self.accept("-"):
            return Neg(self.unary())
        return self.primary()

    def primary(self) -> Term:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            try:
                return Const(parse_rational(tok.text))
            except ValueError:
                self.error(f"malformed rational {tok.text!r}")
        if tok.kind == "ident":
            self.i += 1
            if self.tok.text == "(" and self.tok.kind == "op":
                if tok.text in self.ctx.relations:
                    self.error(f"relation {tok.text!r} used as a term")
                args = self.arglist()
                self._check_arity(tok.text, len(args), self.ctx.functions, "function")
                return FuncApp(tok.text, tuple(args))
            if tok.text in self.bound:
                return Sym(tok.text, VAR)
            kind = self.ctx.kind(tok.text)
            if kind is None:
                self.i -= 1
                self.error(f"undeclared symbol {tok.text!r}", UndeclaredSymbol)
            return Sym(tok.text, kind)
        if self.accept("("):
            t = self.term()
            self.expect(")")
            return t
        self.error(f"unexpected {tok.text or 'end of input'!r}")


def parse(text: str, ctx: Optional[Context] = None) -> Formula:
    """Parse a formula; symbol kinds are resolved through ``ctx``."""
    p = _Parser(text, ctx or DEFAULT_CONTEXT)
    f = p.formula()
    p.done()
    return f


def parse_term(text: str, ctx: Optional[Context] = None) -> Term:
    p = _Parser(text, ctx or DEFAULT_CONTEXT)
    t = p.term()
    p.done()
    return t
