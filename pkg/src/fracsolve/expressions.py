"""Tiny expression language for config-defined coefficients.

Grammar (whitespace-insensitive):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?            # right-associative
    atom   := NUMBER | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'

Identifiers: the variables x, t, u and the constant pi. Functions: sin, cos,
exp, pow, gamma. Compiles to a vectorized callable of (x, t, u).
"""

from __future__ import annotations

import math
import re

import numpy as np

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?|([A-Za-z_]\w*)|(.))")

_FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "pow": lambda a, b: np.asarray(a, dtype=float) ** b,
    "gamma": np.vectorize(math.gamma, otypes=[float]),
}

_VARIABLES = ("x", "t", "u")


class ExpressionError(ValueError):
    """Syntax or name error in a coefficient expression."""


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionError(f"cannot tokenize at position {pos}: {text[pos:]!r}")
        num, ident, sym = m.group(1), m.group(2), m.group(3)
        if num is not None:
            tokens.append(("num", float(m.group(0))))
        elif ident is not None:
            tokens.append(("ident", ident))
        elif sym in "+-*/^(),":
            tokens.append(("op", sym))
        elif sym.strip():
            raise ExpressionError(f"unexpected character {sym!r} in expression")
        pos = m.end()
    tokens.append(("end", None))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, sym: str):
        kind, val = self.next()
        if kind != "op" or val != sym:
            raise ExpressionError(f"expected {sym!r} in {self.text!r}, got {val!r}")

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            raise ExpressionError(f"trailing input in {self.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.next()
            rhs = self.term()
            node = (lambda l, r: lambda env: l(env) + r(env))(node, rhs) if op == "+" \
                else (lambda l, r: lambda env: l(env) - r(env))(node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            _, op = self.next()
            rhs = self.unary()
            node = (lambda l, r: lambda env: l(env) * r(env))(node, rhs) if op == "*" \
                else (lambda l, r: lambda env: l(env) / r(env))(node, rhs)
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.next()
            inner = self.unary()
            return lambda env: -inner(env)
        if self.peek() == ("op", "+"):
            self.next()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.next()
            expo = self.unary()
            return lambda env: np.asarray(base(env), dtype=float) ** expo(env)
        return base

    def atom(self):
        kind, val = self.next()
        if kind == "num":
            return lambda env, _v=val: _v
        if kind == "ident":
            if self.peek() == ("op", "("):
                if val not in _FUNCTIONS:
                    raise ExpressionError(f"unknown function {val!r}")
                self.next()
                args = [self.expr()]
                while self.peek() == ("op", ","):
                    self.next()
                    args.append(self.expr())
                self.expect(")")
                fn = _FUNCTIONS[val]
                return lambda env, _a=args, _f=fn: _f(*[a(env) for a in _a])
            if val == "pi":
                return lambda env: math.pi
            if val in _VARIABLES:
                return lambda env, _v=val: env[_v]
            raise ExpressionError(f"unknown identifier {val!r}")
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExpressionError(f"unexpected token {val!r} in {self.text!r}")


def compile_expression(text: str):
    """Compile an expression into fn(x, t, u) (numpy-broadcasting)."""
    node = _Parser(text).parse()

    def fn(x=0.0, t=0.0, u=0.0):
        return node({"x": x, "t": t, "u": u})

    fn.source = text
    return fn
