"""Closed-form per-agent parameter rules such as ``abs(x0) min 0.8``.

Grammar, lowest precedence first::

    expr   := sum (("min" | "∧" | "max" | "∨") sum)*
    sum    := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | atom
    atom   := number | "x0" | "i" | "N" | "abs" "(" expr ")" | "(" expr ")"

``x0`` is each agent's initial judgment (its Euclidean norm when d > 1; a
bare ``x0`` in two dimensions is rejected unless wrapped in ``abs``),
``i`` the zero-based agent index and ``N`` the population size. Results
are arrays with one entry per agent.
"""
from __future__ import annotations

import re

import numpy as np

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?|(x0|abs|min|max|i|N)\b|(∧|∨|[-+*/()]))")
_NUMBER = re.compile(r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?")


class RuleError(ValueError):
    """A parameter rule could not be parsed or evaluated."""


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise RuleError(f"unexpected input at column {pos + 1} in rule {text!r}")
        out.append(m.group(0).strip())
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str, env: dict):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.env = env

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise RuleError(f"expected {expected or 'a value'} in rule {self.text!r}, got {tok!r}")
        self.pos += 1
        return tok

    def parse(self):
        value = self.expr()
        if self.peek() is not None:
            raise RuleError(f"trailing input {self.peek()!r} in rule {self.text!r}")
        return value

    def expr(self):
        value = self.sum()
        while self.peek() in ("min", "∧", "max", "∨"):
            op = self.take()
            rhs = self.sum()
            value = np.minimum(value, rhs) if op in ("min", "∧") else np.maximum(value, rhs)
        return value

    def sum(self):
        value = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.unary()
            value = value * rhs if op == "*" else value / rhs
        return value

    def unary(self):
        if self.peek() == "-":
            self.take()
            return -self.unary()
        return self.atom()

    def atom(self):
        tok = self.take()
        if _NUMBER.fullmatch(tok):
            return float(tok)
        if tok == "(":
            value = self.expr()
            self.take(")")
            return value
        if tok == "abs":
            self.take("(")
            if self.peek() == "x0" and self.tokens[self.pos + 1:self.pos + 2] == [")"]:
                self.pos += 2
                return self.env["norm"]
            value = self.expr()
            self.take(")")
            return np.abs(value)
        if tok == "x0":
            if self.env["x0"] is None:
                raise RuleError("bare x0 is ambiguous for d > 1; use abs(x0) for the Euclidean norm")
            return self.env["x0"]
        if tok in ("i", "N"):
            return self.env[tok]
        raise RuleError(f"unexpected token {tok!r} in rule {self.text!r}")


def evaluate_rule(rule, x0: np.ndarray) -> np.ndarray:
    """Evaluate a rule (string or number) for every agent; ``x0`` has shape ``(N, d)``."""
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim == 1:
        x0 = x0[:, None]
    n = x0.shape[0]
    if isinstance(rule, (int, float)) and not isinstance(rule, bool):
        return np.full(n, float(rule))
    if not isinstance(rule, str):
        raise RuleError(f"a rule must be a number or a string, got {type(rule).__name__}")
    env = {
        "x0": x0[:, 0] if x0.shape[1] == 1 else None,
        "norm": np.linalg.norm(x0, axis=1),
        "i": np.arange(n, dtype=float),
        "N": float(n),
    }
    value = _Parser(rule, env).parse()
    return np.broadcast_to(np.asarray(value, dtype=float), (n,)).copy()
