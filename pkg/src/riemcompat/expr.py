"""Infix expression parser and jet evaluator for metric/field components.

Grammar (loosest to tightest)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative
    atom   := number | name | func '(' expr ')' | '(' expr ')'

Names resolve to chart coordinates, declared parameters, or the constants
``pi`` and ``e`` (in that priority order).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import DomainError, ExpressionSyntaxError, UnknownIdentifier
from .jets import Jet

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh")
CONSTANTS = {"pi": math.pi, "e": math.e}


@dataclass(frozen=True)
class Num:
    value: float

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class Var:
    name: str
    index: int

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Param:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg:
    arg: "Node"

    def __str__(self):
        return f"(-{self.arg})"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"

    def __str__(self):
        return f"{self.func}({self.arg})"


Node = Union[Num, Var, Param, Const, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    raw = source.encode("utf-8")
    tokens = []
    pos = 0
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            start = pos + (len(source[pos:]) - len(source[pos:].lstrip()))
            raise ExpressionSyntaxError(
                f"unexpected character {source[start]!r}", len(source[:start].encode("utf-8"))
            )
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), len(source[:start].encode("utf-8"))))
        pos = m.end()
    tokens.append(("end", "", len(raw)))
    return tokens


class _Parser:
    def __init__(self, source: str, coords: Sequence[str], params: Sequence[str]):
        self.tokens = _tokenize(source)
        self.pos = 0
        self.coords = {c: i for i, c in enumerate(coords)}
        self.params = set(params)

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str):
        kind, val, off = self.take()
        if val != text or kind == "end":
            what = "end of input" if kind == "end" else repr(val)
            raise ExpressionSyntaxError(f"expected {text!r}, found {what}", off)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {val!r}", off)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                if val not in FUNCTIONS:
                    raise UnknownIdentifier(val)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            if val in self.coords:
                return Var(val, self.coords[val])
            if val in self.params:
                return Param(val)
            if val in CONSTANTS:
                return Const(val)
            if val in FUNCTIONS:
                raise ExpressionSyntaxError(f"function {val!r} requires an argument", off)
            raise UnknownIdentifier(val)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(val)
        raise ExpressionSyntaxError(f"unexpected {what}", off)


@dataclass(frozen=True)
class Expr:
    """Parsed expression together with the names it was resolved against."""

    root: Node
    source: str
    coords: tuple[str, ...]
    params: tuple[str, ...]

    def __str__(self):
        return self.source


def parse(source: str, coords: Sequence[str], params: Sequence[str] = ()) -> Expr:
    if not isinstance(source, str) or not source.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    root = _Parser(source, coords, params).parse()
    return Expr(root, source, tuple(coords), tuple(params))


def _integer_exponent(node: Node) -> int | None:
    sign = 1
    while isinstance(node, Neg):
        sign = -sign
        node = node.arg
    if isinstance(node, Num) and float(node.value).is_integer():
        return sign * int(node.value)
    return None


class _JetEvaluator:
    def __init__(self, point, order: int, values: Mapping[str, float]):
        self.point = tuple(float(x) for x in point)
        self.n = len(self.point)
        self.order = order
        self.values = values

    def const(self, v: float) -> Jet:
        return Jet.constant(v, self.n, self.order, self.point)

    def __call__(self, node: Node) -> Jet:
        if isinstance(node, Num):
            return self.const(node.value)
        if isinstance(node, Var):
            return Jet.variable(node.index, self.point[node.index], self.n, self.order, self.point)
        if isinstance(node, Param):
            return self.const(float(self.values[node.name]))
        if isinstance(node, Const):
            return self.const(CONSTANTS[node.name])
        if isinstance(node, Neg):
            return -self(node.arg)
        if isinstance(node, BinOp):
            return self.binop(node)
        if isinstance(node, Call):
            return self.call(node)
        raise TypeError(node)

    def binop(self, node: BinOp) -> Jet:
        if node.op == "^":
            k = _integer_exponent(node.right)
            base = self(node.left)
            if k is not None:
                if k < 0 and base.value == 0.0:
                    raise DomainError(f"division by zero in {node}", node)
                return base.ipow(k)
            if base.value <= 0.0:
                raise DomainError(f"non-integer power of non-positive value in {node}", node)
            return (self(node.right) * base.apply("log")).apply("exp")
        a = self(node.left)
        b = self(node.right)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b.value == 0.0:
            raise DomainError(f"division by zero in {node}", node)
        return a / b

    def call(self, node: Call) -> Jet:
        x = self(node.arg)
        f = node.func
        if f in ("log", "sqrt") and x.value <= 0.0:
            raise DomainError(f"{f} of non-positive value {x.value!r} in {node}", node)
        if f == "tan":
            c = x.apply("cos")
            if c.value == 0.0:
                raise DomainError(f"tan pole in {node}", node)
            return x.apply("sin") / c
        if f == "tanh":
            return x.apply("sinh") / x.apply("cosh")
        return x.apply(f)


def _bind(e: Expr, param_values: Mapping[str, float] | None) -> Mapping[str, float]:
    values = dict(param_values or {})
    missing = [p for p in e.params if p not in values]
    if missing:
        raise UnknownIdentifier(missing[0])
    return values


def eval_jet(e: Expr, p, order: int, param_values: Mapping[str, float] | None = None) -> Jet:
    """Evaluate ``e`` and all its partial derivatives up to ``order`` at ``p``."""
    p = np.asarray(p, dtype=float).ravel()
    if len(p) != len(e.coords):
        raise ValueError(f"point has {len(p)} coordinates, expression expects {len(e.coords)}")
    return _JetEvaluator(p, order, _bind(e, param_values))(e.root)


def eval_float(e: Expr, p, param_values: Mapping[str, float] | None = None) -> float:
    return eval_jet(e, p, 0, param_values).value
