"""Small expression language for test functions f(t, x).

Grammar: numbers, the variables t and x, binary + - * /, integer powers
via ^, unary minus, parentheses, and the calls exp/sin/cos/log.  Parsing
is recursive descent with the usual precedence (^ above unary minus above
* / above + -, binary operators left-associative).  Differentiation is
symbolic with constant folding only; evaluation is IEEE double and
accepts scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "ExprError",
    "ParseError",
    "EvalDomainError",
    "Expr",
    "Const",
    "Var",
    "BinOp",
    "Pow",
    "Neg",
    "Call",
    "parse",
    "diff",
    "eval_expr",
    "to_source",
    "FunctionSpec",
    "CATALOG",
]


class ExprError(ValueError):
    """Base class for expression failures."""


class ParseError(ExprError):
    """Syntax error; ``offset`` is the byte offset into the source."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class EvalDomainError(ExprError):
    """Evaluation hit a domain violation (log of a nonpositive value,
    division by zero); ``node`` is the offending subexpression."""

    def __init__(self, message: str, node: "Expr"):
        super().__init__(f"{message} in '{to_source(node)}'")
        self.node = node


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "t" or "x"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int  # >= 0


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Call:
    func: str  # exp, sin, cos, log
    arg: "Expr"


Expr = Union[Const, Var, BinOp, Pow, Neg, Call]

_FUNCS = ("exp", "sin", "cos", "log")


# -- folding constructors ---------------------------------------------------


def _is_const(e: Expr, v: float | None = None) -> bool:
    return isinstance(e, Const) and (v is None or e.value == v)


def add(l: Expr, r: Expr) -> Expr:
    if _is_const(l) and _is_const(r):
        return Const(l.value + r.value)
    if _is_const(l, 0.0):
        return r
    if _is_const(r, 0.0):
        return l
    return BinOp("+", l, r)


def sub(l: Expr, r: Expr) -> Expr:
    if _is_const(l) and _is_const(r):
        return Const(l.value - r.value)
    if _is_const(r, 0.0):
        return l
    if _is_const(l, 0.0):
        return neg(r)
    return BinOp("-", l, r)


def mul(l: Expr, r: Expr) -> Expr:
    if _is_const(l) and _is_const(r):
        return Const(l.value * r.value)
    if _is_const(l, 0.0) or _is_const(r, 0.0):
        return Const(0.0)
    if _is_const(l, 1.0):
        return r
    if _is_const(r, 1.0):
        return l
    return BinOp("*", l, r)


def div(l: Expr, r: Expr) -> Expr:
    if _is_const(l) and _is_const(r) and r.value != 0.0:
        return Const(l.value / r.value)
    if _is_const(r, 1.0):
        return l
    if _is_const(l, 0.0) and not _is_const(r, 0.0):
        return Const(0.0)
    return BinOp("/", l, r)


def powi(base: Expr, exponent: int) -> Expr:
    if exponent < 0:
        raise ExprError(f"integer power must be >= 0, got {exponent}")
    if exponent == 0:
        return Const(1.0)
    if exponent == 1:
        return base
    if _is_const(base):
        try:
            return Const(base.value**exponent)
        except OverflowError:
            return Const(math.inf if base.value > 0 or exponent % 2 == 0 else -math.inf)
    return Pow(base, exponent)


def neg(u: Expr) -> Expr:
    if _is_const(u):
        return Const(-u.value)
    if isinstance(u, Neg):
        return u.operand
    return Neg(u)


def call(func: str, arg: Expr) -> Expr:
    if _is_const(arg):
        v = arg.value
        try:
            if func == "exp":
                return Const(math.exp(v))
            if func == "sin":
                return Const(math.sin(v))
            if func == "cos":
                return Const(math.cos(v))
            if func == "log" and v > 0.0:
                return Const(math.log(v))
        except OverflowError:
            pass  # leave the node; evaluation yields inf under IEEE rules
    return Call(func, arg)


# -- parser -----------------------------------------------------------------


class _Parser:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0

    def error(self, message: str, offset: int | None = None):
        raise ParseError(message, self.pos if offset is None else offset)

    def skip_ws(self):
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            self.error(f"expected '{ch}'")
        self.pos += 1

    def parse(self) -> Expr:
        e = self.expression()
        self.skip_ws()
        if self.pos != len(self.src):
            self.error(f"unexpected trailing input '{self.src[self.pos:]}'")
        return e

    def expression(self) -> Expr:
        e = self.term()
        while True:
            self.skip_ws()
            op = self.peek()
            if op not in ("+", "-"):
                return e
            self.pos += 1
            e = add(e, self.term()) if op == "+" else sub(e, self.term())

    def term(self) -> Expr:
        e = self.unary()
        while True:
            self.skip_ws()
            op = self.peek()
            if op not in ("*", "/"):
                return e
            self.pos += 1
            e = mul(e, self.unary()) if op == "*" else div(e, self.unary())

    def unary(self) -> Expr:
        self.skip_ws()
        if self.peek() == "-":
            self.pos += 1
            return neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        self.skip_ws()
        if self.peek() != "^":
            return base
        self.pos += 1
        at = self.pos
        exponent = self.unary()  # right-associative; must fold to an integer
        if not isinstance(exponent, Const):
            self.error("exponent must be a constant", at)
        k = exponent.value
        if k < 0 or k != int(k):
            self.error(f"exponent must be a nonnegative integer, got {k}", at)
        return powi(base, int(k))

    def atom(self) -> Expr:
        self.skip_ws()
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            e = self.expression()
            self.skip_ws()
            self.expect(")")
            return e
        if ch.isdigit() or ch == ".":
            return self.number()
        if ch.isalpha():
            return self.identifier()
        self.error("expected a number, variable, function or '('")

    def number(self) -> Expr:
        start = self.pos
        while self.peek().isdigit():
            self.pos += 1
        if self.peek() == ".":
            self.pos += 1
            while self.peek().isdigit():
                self.pos += 1
        if self.peek() in ("e", "E"):
            mark = self.pos
            self.pos += 1
            if self.peek() in ("+", "-"):
                self.pos += 1
            if not self.peek().isdigit():
                self.pos = mark  # the e was not an exponent marker
            else:
                while self.peek().isdigit():
                    self.pos += 1
        text = self.src[start : self.pos]
        try:
            return Const(float(text))
        except ValueError:
            self.error(f"malformed number '{text}'", start)

    def identifier(self) -> Expr:
        start = self.pos
        while self.peek().isalnum() or self.peek() == "_":
            self.pos += 1
        name = self.src[start : self.pos]
        if name in ("t", "x"):
            return Var(name)
        if name in _FUNCS:
            self.skip_ws()
            if self.peek() != "(":
                self.error(f"function '{name}' requires parentheses")
            self.pos += 1
            arg = self.expression()
            self.skip_ws()
            self.expect(")")
            return call(name, arg)
        self.error(f"unknown identifier '{name}'", start)


def parse(source: str) -> Expr:
    """Parse a function of t and x into an AST (with constants folded)."""
    return _Parser(source).parse()


def uses_var(e: Expr, name: str) -> bool:
    """True when the expression references the named variable."""
    if isinstance(e, Var):
        return e.name == name
    if isinstance(e, BinOp):
        return uses_var(e.left, name) or uses_var(e.right, name)
    if isinstance(e, Neg):
        return uses_var(e.operand, name)
    if isinstance(e, Call):
        return uses_var(e.arg, name)
    if isinstance(e, Pow):
        return uses_var(e.base, name)
    return False


# -- differentiation ----------------------------------------------------------


def diff(e: Expr, var: str) -> Expr:
    """Exact symbolic derivative with respect to 't' or 'x'."""
    if var not in ("t", "x"):
        raise ExprError(f"unknown differentiation variable '{var}'")
    if isinstance(e, Const):
        return Const(0.0)
    if isinstance(e, Var):
        return Const(1.0 if e.name == var else 0.0)
    if isinstance(e, Neg):
        return neg(diff(e.operand, var))
    if isinstance(e, Pow):
        return mul(mul(Const(float(e.exponent)), powi(e.base, e.exponent - 1)), diff(e.base, var))
    if isinstance(e, Call):
        du = diff(e.arg, var)
        if e.func == "exp":
            return mul(e, du)
        if e.func == "sin":
            return mul(call("cos", e.arg), du)
        if e.func == "cos":
            return neg(mul(call("sin", e.arg), du))
        return div(du, e.arg)  # log
    dl, dr = diff(e.left, var), diff(e.right, var)
    if e.op == "+":
        return add(dl, dr)
    if e.op == "-":
        return sub(dl, dr)
    if e.op == "*":
        return add(mul(dl, e.right), mul(e.left, dr))
    # quotient rule
    return div(sub(mul(dl, e.right), mul(e.left, dr)), powi(e.right, 2))


# -- evaluation ----------------------------------------------------------------


def eval_expr(e: Expr, t, x):
    """Evaluate at scalar or ndarray arguments; raises EvalDomainError on
    log of a nonpositive value or division by zero."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return t if e.name == "t" else x
    if isinstance(e, Neg):
        return -eval_expr(e.operand, t, x)
    if isinstance(e, Pow):
        return eval_expr(e.base, t, x) ** e.exponent
    if isinstance(e, Call):
        arg = eval_expr(e.arg, t, x)
        if e.func == "exp":
            return np.exp(arg)
        if e.func == "sin":
            return np.sin(arg)
        if e.func == "cos":
            return np.cos(arg)
        if np.any(np.asarray(arg) <= 0.0):
            raise EvalDomainError("log of a nonpositive value", e)
        return np.log(arg)
    l = eval_expr(e.left, t, x)
    r = eval_expr(e.right, t, x)
    if e.op == "+":
        return l + r
    if e.op == "-":
        return l - r
    if e.op == "*":
        return l * r
    if np.any(np.asarray(r) == 0.0):
        raise EvalDomainError("division by zero", e)
    return l / r


# -- printing -------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    if isinstance(e, Pow):
        return 4
    return 5


def to_source(e: Expr) -> str:
    """Render to source text; reparsing yields a structurally identical AST."""
    if isinstance(e, Const):
        return f"({e.value!r})" if e.value < 0 else repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        inner = to_source(e.operand)
        return f"-{inner}" if _prec(e.operand) >= 3 else f"-({inner})"
    if isinstance(e, Pow):
        base = to_source(e.base)
        if _prec(e.base) < 5:
            base = f"({base})"
        return f"{base}^{e.exponent}"
    if isinstance(e, Call):
        return f"{e.func}({to_source(e.arg)})"
    lhs, rhs = to_source(e.left), to_source(e.right)
    if _prec(e.left) < _PREC[e.op]:
        lhs = f"({lhs})"
    # right operand needs parens at equal precedence to keep left associativity
    if _prec(e.right) <= _PREC[e.op]:
        rhs = f"({rhs})"
    return f"{lhs} {e.op} {rhs}"


# -- function bundles -------------------------------------------------------------


@dataclass(frozen=True)
class FunctionSpec:
    """A test function f(t, x) with its symbolically derived partials."""

    source: str
    f: Expr
    f_t: Expr
    f_x: Expr
    f_xx: Expr

    @classmethod
    def from_source(cls, source: str) -> "FunctionSpec":
        f = parse(source)
        fx = diff(f, "x")
        return cls(source=source, f=f, f_t=diff(f, "t"), f_x=fx, f_xx=diff(fx, "x"))


# Smooth test functions used throughout the verification suites; all are
# well defined for every real x and every t >= 0.
CATALOG = (
    "x^2",
    "t*x",
    "exp(x)",
    "x^3 - 2*x",
    "sin(x)",
    "t*cos(x)",
    "x^2 + t^2",
    "exp(x)*sin(t)",
    "x / (t + 1)",
)
