"""Arithmetic expression language for immersion components.

Expressions are parsed once into an immutable AST and evaluated over any
scalar type that supports ``+ - * /`` and exposes the elementary functions
as methods (``x.sin()``, ``x.sqrt()``, ...).  Plain Python floats are
handled through :mod:`math`, so the same tree evaluates over floats and over
:class:`qbslant.jet.Jet2` values.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := number | ident | ident '(' expr ')' | '(' expr ')'
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Any, Mapping, Union

FUNCTIONS = ("sin", "cos", "tan", "sqrt", "exp", "log", "asin", "acos", "atan")
CONSTANTS = {"pi": math.pi}


class ParseError(ValueError):
    """Syntax error at a byte offset of the source."""

    def __init__(self, offset: int, expected: str, source: str = ""):
        self.offset = offset
        self.expected = expected
        self.source = source
        super().__init__(f"at byte {offset}: expected {expected}")


class EvaluationError(ValueError):
    """Raised when an expression cannot be evaluated (unbound name, domain)."""


class UnboundVariableError(EvaluationError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound variable {name!r}")


class DomainError(EvaluationError):
    pass


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Ast"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Ast"
    right: "Ast"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Ast"


Ast = Union[Const, Var, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise _error(source, pos, "number, identifier, operator or parenthesis")
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


def _error(source: str, char_pos: int, expected: str) -> ParseError:
    offset = len(source[:char_pos].encode("utf-8", errors="surrogatepass"))
    return ParseError(offset, expected, source)


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def _take(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def _expect(self, text: str):
        kind, val, pos = self.tok
        if val != text or kind != "op":
            raise _error(self.source, pos, repr(text))
        self.i += 1

    def parse(self) -> Ast:
        if self.tok[0] == "end":
            raise _error(self.source, self.tok[2], "expression")
        node = self.expr()
        kind, _, pos = self.tok
        if kind != "end":
            raise _error(self.source, pos, "operator or end of input")
        return node

    def expr(self) -> Ast:
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self._take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Ast:
        node = self.factor()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self._take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Ast:
        if self.tok[0] == "op" and self.tok[1] == "-":
            self._take()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Ast:
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self._take()
            return BinOp("^", base, self.factor())
        return base

    def atom(self) -> Ast:
        kind, val, pos = self.tok
        if kind == "num":
            self._take()
            value = float(val)
            if not math.isfinite(value):
                raise _error(self.source, pos, "finite numeric literal")
            return Const(value)
        if kind == "ident":
            self._take()
            is_call = self.tok[0] == "op" and self.tok[1] == "("
            if val in FUNCTIONS:
                if not is_call:
                    raise _error(self.source, self.tok[2], f"'(' after {val}")
                self._take()
                arg = self.expr()
                self._expect(")")
                return Call(val, arg)
            if is_call:
                raise _error(self.source, pos, "known function name")
            if val in CONSTANTS:
                return Const(CONSTANTS[val])
            return Var(val)
        if kind == "op" and val == "(":
            self._take()
            node = self.expr()
            self._expect(")")
            return node
        raise _error(self.source, pos, "number, identifier or '('")


def parse(source: str | bytes) -> Ast:
    """Parse an expression string into an AST.

    Raises :class:`ParseError` for any malformed input, including bytes that
    are not valid UTF-8.
    """
    if isinstance(source, (bytes, bytearray)):
        try:
            source = bytes(source).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(exc.start, "valid UTF-8") from None
    return _Parser(source).parse()


def pretty(node: Ast) -> str:
    """Fully parenthesised rendering; ``parse(pretty(t)) == t``."""
    match node:
        case Const(value):
            return repr(value)
        case Var(name):
            return name
        case Neg(operand):
            return f"(-{pretty(operand)})"
        case BinOp(op, left, right):
            return f"({pretty(left)} {op} {pretty(right)})"
        case Call(func, arg):
            return f"{func}({pretty(arg)})"
    raise TypeError(f"not an AST node: {node!r}")


def free_variables(node: Ast) -> tuple[str, ...]:
    """Variable names in first-occurrence (left-to-right) order."""
    seen: dict[str, None] = {}

    def walk(n):
        match n:
            case Var(name):
                seen.setdefault(name, None)
            case Neg(operand) | Call(_, operand):
                walk(operand)
            case BinOp(_, left, right):
                walk(left)
                walk(right)

    walk(node)
    return tuple(seen)


def _apply(func: str, x: Any) -> Any:
    method = getattr(x, func, None)
    if method is not None and not isinstance(x, (int, float)):
        return method()
    return getattr(math, func)(float(x))


def power(x: Any, y: Any) -> Any:
    """``x ** y``: integer exponents by repeated squaring, else exp(y log x)."""
    yv = getattr(y, "value", y)
    constant_exponent = not hasattr(y, "grad") or not (y.grad.any() or y.hess.any())
    if constant_exponent and float(yv).is_integer():
        k = int(yv)
        if k == 0:
            return x * 0.0 + 1.0
        result = None
        base = x
        e = abs(k)
        while e:
            if e & 1:
                result = base if result is None else result * base
            e >>= 1
            if e:
                base = base * base
        return 1.0 / result if k < 0 else result
    xv = getattr(x, "value", x)
    if xv <= 0:
        raise DomainError(f"non-integer power of non-positive base {xv!r}")
    return _apply("exp", y * _apply("log", x))


def evaluate(node: Ast, env: Mapping[str, Any]) -> Any:
    """Evaluate ``node`` with variables bound from ``env``.

    Works for any scalar carrier; errors from the underlying arithmetic are
    reported as :class:`EvaluationError`.
    """
    try:
        return _eval(node, env)
    except EvaluationError:
        raise
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise DomainError(str(exc) or type(exc).__name__) from exc


def _eval(node: Ast, env: Mapping[str, Any]) -> Any:
    match node:
        case Const(value):
            return value
        case Var(name):
            try:
                return env[name]
            except KeyError:
                raise UnboundVariableError(name) from None
        case Neg(operand):
            return -_eval(operand, env)
        case BinOp(op, left, right):
            a = _eval(left, env)
            b = _eval(right, env)
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op == "/":
                return a / b
            return power(a, b)
        case Call(func, arg):
            return _apply(func, _eval(arg, env))
    raise TypeError(f"not an AST node: {node!r}")
