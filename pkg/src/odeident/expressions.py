"""Scalar expression grammar for right-hand sides and parameter functions.

Grammar (usual precedence, ``^`` binds tightest and is right-associative)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' unary)?
    atom  := NUMBER | 't' | x<i> | p<j>
           | sin '(' expr ')' | cos '(' expr ')' | exp '(' expr ')'
           | pow '(' expr ',' expr ')' | '(' expr ')'

Exponents (both ``^`` and ``pow``) must fold to integer constants, keeping
every expression C1 in its variables.  Parsing returns a simplified tree;
``canonical()`` emits text that re-parses to an equal tree.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import ExpressionSyntaxError

_FUNCS = ("sin", "cos", "exp")

_TOKEN_RE = re.compile(r"""
    (?P<num>(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
  | (?P<ws>\s+)
  | (?P<bad>.)
""", re.VERBOSE)


@dataclass(frozen=True)
class _Token:
    kind: str   # num | ident | op | end
    text: str
    line: int
    col: int


def _tokenize(text):
    tokens = []
    line, col = 1, 1
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        chunk = m.group()
        if kind == "bad":
            raise ExpressionSyntaxError(f"unexpected character {chunk!r}",
                                        line, col)
        if kind != "ws":
            tokens.append(_Token(kind, chunk, line, col))
        nl = chunk.count("\n")
        if nl:
            line += nl
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
    tokens.append(_Token("end", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: float

    def eval(self, t, x, p):
        return self.value

    def diff(self, wrt):
        return Num(0.0)


@dataclass(frozen=True)
class Var:
    kind: str   # 't' | 'x' | 'p'
    idx: int

    def eval(self, t, x, p):
        if self.kind == "t":
            return t
        if self.kind == "x":
            return x[self.idx]
        return p[self.idx]

    def diff(self, wrt):
        return Num(1.0 if (self.kind, self.idx) == wrt else 0.0)


@dataclass(frozen=True)
class Bin:
    op: str
    a: object
    b: object

    def eval(self, t, x, p):
        va = self.a.eval(t, x, p)
        vb = self.b.eval(t, x, p)
        if self.op == "+":
            return va + vb
        if self.op == "-":
            return va - vb
        if self.op == "*":
            return va * vb
        return va / vb

    def diff(self, wrt):
        da, db = self.a.diff(wrt), self.b.diff(wrt)
        if self.op in "+-":
            return Bin(self.op, da, db)
        if self.op == "*":
            return Bin("+", Bin("*", da, self.b), Bin("*", self.a, db))
        num = Bin("-", Bin("*", da, self.b), Bin("*", self.a, db))
        return Bin("/", num, Pow(self.b, 2))


@dataclass(frozen=True)
class Neg:
    a: object

    def eval(self, t, x, p):
        return -self.a.eval(t, x, p)

    def diff(self, wrt):
        return Neg(self.a.diff(wrt))


@dataclass(frozen=True)
class Pow:
    base: object
    k: int

    def eval(self, t, x, p):
        return self.base.eval(t, x, p) ** self.k

    def diff(self, wrt):
        inner = Bin("*", Num(float(self.k)), Pow(self.base, self.k - 1))
        return Bin("*", inner, self.base.diff(wrt))


@dataclass(frozen=True)
class Fun:
    name: str
    a: object

    def eval(self, t, x, p):
        v = self.a.eval(t, x, p)
        return getattr(math, self.name)(v)

    def diff(self, wrt):
        da = self.a.diff(wrt)
        if self.name == "sin":
            outer = Fun("cos", self.a)
        elif self.name == "cos":
            outer = Neg(Fun("sin", self.a))
        else:
            outer = Fun("exp", self.a)
        return Bin("*", outer, da)


def _simplify(node):
    if isinstance(node, (Num, Var)):
        return node
    if isinstance(node, Neg):
        a = _simplify(node.a)
        if isinstance(a, Num):
            return Num(-a.value)
        if isinstance(a, Neg):
            return a.a
        return Neg(a)
    if isinstance(node, Pow):
        base = _simplify(node.base)
        if node.k == 0:
            return Num(1.0)
        if node.k == 1:
            return base
        if isinstance(base, Num) and (node.k >= 0 or base.value != 0.0):
            return Num(base.value ** node.k)
        return Pow(base, node.k)
    if isinstance(node, Fun):
        a = _simplify(node.a)
        if isinstance(a, Num):
            return Num(getattr(math, node.name)(a.value))
        return Fun(node.name, a)
    # Bin
    a = _simplify(node.a)
    b = _simplify(node.b)
    op = node.op
    if isinstance(a, Num) and isinstance(b, Num):
        if op != "/" or b.value != 0.0:
            return Num(Bin(op, a, b).eval(0.0, (), ()))
    if op == "+":
        if _is_zero(a):
            return b
        if _is_zero(b):
            return a
    elif op == "-":
        if _is_zero(b):
            return a
        if _is_zero(a):
            return _simplify(Neg(b))
    elif op == "*":
        if _is_zero(a) or _is_zero(b):
            return Num(0.0)
        if _is_one(a):
            return b
        if _is_one(b):
            return a
    elif op == "/":
        if _is_zero(a) and not _is_zero(b):
            return Num(0.0)
        if _is_one(b):
            return a
    return Bin(op, a, b)


def _is_zero(node):
    return isinstance(node, Num) and node.value == 0.0


def _is_one(node):
    return isinstance(node, Num) and node.value == 1.0


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _to_str(node, parent_prec=0):
    if isinstance(node, Num):
        s = repr(node.value)
        if s.endswith(".0"):
            s = s[:-2]
        if node.value < 0 and parent_prec > 1:
            return f"({s})"
        return s
    if isinstance(node, Var):
        return "t" if node.kind == "t" else f"{node.kind}{node.idx}"
    if isinstance(node, Neg):
        inner = _to_str(node.a, _PREC["neg"])
        s = f"-{inner}"
        return f"({s})" if parent_prec > 1 else s
    if isinstance(node, Pow):
        base = _to_str(node.base, _PREC["^"] + 1)
        if isinstance(node.base, Pow):
            base = f"({_to_str(node.base)})"  # x^2^3 would re-parse as x^(2^3)
        s = f"{base}^{node.k}" if node.k >= 0 else f"pow({_to_str(node.base)}, {node.k})"
        return s
    if isinstance(node, Fun):
        return f"{node.name}({_to_str(node.a)})"
    p = _PREC[node.op]
    a = _to_str(node.a, p)
    # left-assoc: right child needs parens at equal precedence for - and /
    b = _to_str(node.b, p + (1 if node.op in "-/" else 0))
    s = f"{a} {node.op} {b}"
    return f"({s})" if parent_prec > p else s


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, tokens, n_states, n_params):
        self.toks = tokens
        self.i = 0
        self.n_states = n_states
        self.n_params = n_params

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect_op(self, text):
        tok = self.next()
        if tok.kind != "op" or tok.text != text:
            raise ExpressionSyntaxError(
                f"expected {text!r}, found {tok.text!r}" if tok.kind != "end"
                else f"expected {text!r}, found end of input",
                tok.line, tok.col)
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExpressionSyntaxError(f"unexpected {tok.text!r}",
                                        tok.line, tok.col)
        return node

    def expr(self):
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.next().text
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.next().text
            node = Bin(op, node, self.unary())
        return node

    def unary(self):
        if self.peek().kind == "op" and self.peek().text == "-":
            self.next()
            return Neg(self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            tok = self.next()
            exponent = self.unary()
            k = _as_int(exponent)
            if k is None:
                raise ExpressionSyntaxError(
                    "exponent must be an integer constant",
                    tok.line, tok.col)
            node = Pow(node, k)
        return node

    def atom(self):
        tok = self.next()
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.kind == "op" and tok.text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if tok.kind == "ident":
            return self.ident(tok)
        raise ExpressionSyntaxError(
            f"unexpected {tok.text!r}" if tok.kind != "end"
            else "unexpected end of input",
            tok.line, tok.col)

    def ident(self, tok):
        name = tok.text
        if name == "t":
            return Var("t", 0)
        if name in _FUNCS:
            self.expect_op("(")
            arg = self.expr()
            self.expect_op(")")
            return Fun(name, arg)
        if name == "pow":
            self.expect_op("(")
            base = self.expr()
            self.expect_op(",")
            exponent = self.expr()
            close = self.expect_op(")")
            k = _as_int(_simplify(exponent))
            if k is None:
                raise ExpressionSyntaxError(
                    "pow exponent must be an integer constant",
                    close.line, close.col)
            return Pow(base, k)
        m = re.fullmatch(r"([xp])(\d+)", name)
        if m:
            kind, idx = m.group(1), int(m.group(2))
            limit = self.n_states if kind == "x" else self.n_params
            if limit is not None and idx >= limit:
                raise ExpressionSyntaxError(
                    f"{name} is out of range (dimension {limit})",
                    tok.line, tok.col)
            return Var(kind, idx)
        raise ExpressionSyntaxError(f"unknown identifier {name!r}",
                                    tok.line, tok.col)


def _as_int(node):
    node = _simplify(node)
    if isinstance(node, Num) and float(node.value).is_integer():
        return int(node.value)
    return None


# ---------------------------------------------------------------------------
# Public wrapper


@dataclass(frozen=True)
class Expression:
    """A parsed scalar expression in ``t``, ``x0..``, and ``p0..``."""

    ast: object
    text: str

    def eval(self, t, x=(), p=()):
        """Value at ``(t, x, p)``; sequences may be shorter than the
        variable index space if unused."""
        return float(self.ast.eval(t, x, p))

    def diff_t(self):
        """Partial derivative with respect to ``t`` as an Expression."""
        return self._wrap(self.ast.diff(("t", 0)))

    def diff_x(self, j):
        """Partial derivative with respect to state coordinate ``j``."""
        return self._wrap(self.ast.diff(("x", j)))

    def diff_p(self, j):
        """Partial derivative with respect to parameter coordinate ``j``."""
        return self._wrap(self.ast.diff(("p", j)))

    def canonical(self):
        """Canonical text; re-parsing it yields an equal expression."""
        return _to_str(self.ast)

    def _wrap(self, ast):
        ast = _simplify(ast)
        return Expression(ast, _to_str(ast))

    def __eq__(self, other):
        return isinstance(other, Expression) and self.ast == other.ast


def parse_expression(text, n_states=None, n_params=None):
    """Parse expression text into an :class:`Expression`.

    Parameters
    ----------
    text : str
        Expression source.
    n_states, n_params : int, optional
        When given, variable indices are validated against these dimensions
        and out-of-range names rejected.

    Raises
    ------
    ExpressionSyntaxError
        With 1-based line/column of the offending token.
    """
    if not isinstance(text, str) or not text.strip():
        raise ExpressionSyntaxError("empty expression")
    tokens = _tokenize(text)
    ast = _Parser(tokens, n_states, n_params).parse()
    ast = _simplify(ast)
    return Expression(ast, text)
