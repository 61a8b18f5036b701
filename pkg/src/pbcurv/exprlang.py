"""A small expression language for surface coordinates and densities.

Grammar (precedence climbing, loosest to tightest):

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          right associative
    atom    := NUMBER | 'u' | 'v' | 'pi' | 'e'
             | FUNC '(' expr ')' | '(' expr ')'

The only variables are u and v.  Functions are the fixed set sin, cos,
tan, sinh, cosh, tanh, exp, ln, sqrt.  '^' requires a constant right
operand (no u or v inside); the exponent subtree is folded to a number
at parse time, so -u^2 parses as -(u^2) and 2^3^2 is 512.  Unknown
identifiers are rejected while parsing, not at evaluation.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from . import jets
from .errors import EvalError, JetDivisionByZero, JetDomainError, LexError, ParseError
from .jets import Jet2

VARIABLES = ("u", "v")
CONSTANTS = {"pi": math.pi, "e": math.e}

_NUMBER = re.compile(r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_SINGLE = {
    "+": "plus",
    "-": "minus",
    "*": "star",
    "/": "slash",
    "^": "caret",
    "(": "lparen",
    ")": "rparen",
    ",": "comma",
}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(source: str) -> list[Token]:
    """Split source into tokens, tracking character offsets."""
    tokens: list[Token] = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch.isdigit():
            m = _NUMBER.match(source, i)
            assert m is not None
            tokens.append(Token("number", m.group(), i))
            i = m.end()
            continue
        if ch.isalpha() or ch == "_":
            m = _IDENT.match(source, i)
            assert m is not None
            tokens.append(Token("ident", m.group(), i))
            i = m.end()
            continue
        kind = _SINGLE.get(ch)
        if kind is None:
            raise LexError(f"unexpected character {ch!r}", i)
        tokens.append(Token(kind, ch, i))
        i += 1
    return tokens


# --- AST ---------------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    value: float
    pos: int = field(compare=False, default=0)


@dataclass(frozen=True)
class Variable:
    name: str  # "u" or "v"
    pos: int = field(compare=False, default=0)

    @property
    def index(self) -> int:
        return VARIABLES.index(self.name)


@dataclass(frozen=True)
class Neg:
    child: Ast
    pos: int = field(compare=False, default=0)


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: Ast
    right: Ast
    pos: int = field(compare=False, default=0)


@dataclass(frozen=True)
class PowConst:
    base: Ast
    exponent: float
    pos: int = field(compare=False, default=0)


@dataclass(frozen=True)
class Call:
    fn: str
    arg: Ast
    pos: int = field(compare=False, default=0)


Ast = Constant | Variable | Neg | BinOp | PowConst | Call

_ADD, _MUL, _UNARY, _POW = 1, 2, 3, 4
_BINARY_PREC = {"+": _ADD, "-": _ADD, "*": _MUL, "/": _MUL, "^": _POW}


class _Parser:
    def __init__(self, tokens: list[Token], length: int) -> None:
        self.tokens = tokens
        self.i = 0
        self.end = length

    def peek(self) -> Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of expression", self.end)
        self.i += 1
        return tok

    def expect(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            pos = tok.pos if tok is not None else self.end
            raise ParseError(f"expected {what}", pos)
        return self.next()

    def parse_expr(self, min_prec: int) -> Ast:
        lhs = self.parse_prefix()
        while True:
            tok = self.peek()
            if tok is None:
                return lhs
            prec = _BINARY_PREC.get(tok.text) if tok.kind in (
                "plus", "minus", "star", "slash", "caret") else None
            if prec is None or prec < min_prec:
                return lhs
            self.next()
            if tok.kind == "caret":
                rhs = self.parse_expr(_POW)  # right associative
                lhs = PowConst(lhs, _fold_constant(rhs, tok.pos), tok.pos)
            else:
                rhs = self.parse_expr(prec + 1)
                lhs = BinOp(tok.text, lhs, rhs, tok.pos)

    def parse_prefix(self) -> Ast:
        tok = self.next()
        if tok.kind == "minus":
            return Neg(self.parse_expr(_UNARY), tok.pos)
        if tok.kind == "number":
            return Constant(float(tok.text), tok.pos)
        if tok.kind == "lparen":
            inner = self.parse_expr(0)
            self.expect("rparen", "')'")
            return inner
        if tok.kind == "ident":
            name = tok.text
            if name in VARIABLES:
                return Variable(name, tok.pos)
            if name in CONSTANTS:
                return Constant(CONSTANTS[name], tok.pos)
            if name in jets.ELEMENTARY:
                self.expect("lparen", f"'(' after function {name}")
                arg = self.parse_expr(0)
                nxt = self.peek()
                if nxt is not None and nxt.kind == "comma":
                    raise ParseError(f"{name} takes exactly one argument", nxt.pos)
                self.expect("rparen", "')'")
                return Call(name, arg, tok.pos)
            raise ParseError(f"unknown identifier {name!r}", tok.pos)
        raise ParseError(f"unexpected token {tok.text!r}", tok.pos)


def _fold_constant(node: Ast, caret_pos: int) -> float:
    """Reduce an exponent subtree to a number; reject variables."""
    if isinstance(node, Constant):
        return node.value
    if isinstance(node, Neg):
        return -_fold_constant(node.child, caret_pos)
    if isinstance(node, BinOp):
        left = _fold_constant(node.left, caret_pos)
        right = _fold_constant(node.right, caret_pos)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if abs(right) == 0.0:
            raise ParseError("division by zero in constant exponent", node.pos)
        return left / right
    if isinstance(node, PowConst):
        return _fold_constant(node.base, caret_pos) ** node.exponent
    raise ParseError("exponent must be a constant expression", caret_pos)


def parse(tokens: list[Token], length: int = 0) -> Ast:
    """Parse a token list produced by tokenize."""
    parser = _Parser(tokens, length)
    ast = parser.parse_expr(0)
    leftover = parser.peek()
    if leftover is not None:
        raise ParseError(f"unexpected token {leftover.text!r}", leftover.pos)
    return ast


def parse_expression(source: str) -> Ast:
    return parse(tokenize(source), len(source))


# --- Evaluation --------------------------------------------------------

def eval_jet(node: Ast, at: tuple[float, float]) -> Jet2:
    """Evaluate to an order-2 jet at the parameter point `at`."""
    if isinstance(node, Constant):
        return Jet2.constant(node.value)
    if isinstance(node, Variable):
        return Jet2.variable(node.index + 1, at)
    if isinstance(node, Neg):
        return -eval_jet(node.child, at)
    try:
        if isinstance(node, BinOp):
            left = eval_jet(node.left, at)
            right = eval_jet(node.right, at)
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            if node.op == "*":
                return left * right
            return left / right
        if isinstance(node, PowConst):
            return jets.pow_const(eval_jet(node.base, at), node.exponent)
        if isinstance(node, Call):
            return jets.ELEMENTARY[node.fn](eval_jet(node.arg, at))
    except (JetDomainError, JetDivisionByZero) as exc:
        raise EvalError(str(exc), node.pos) from exc
    raise TypeError(f"not an AST node: {node!r}")


def eval_value(node: Ast, at: tuple[float, float]) -> float:
    """Plain float evaluation, independent of the jet arithmetic."""
    if isinstance(node, Constant):
        return node.value
    if isinstance(node, Variable):
        return float(at[node.index])
    if isinstance(node, Neg):
        return -eval_value(node.child, at)
    if isinstance(node, BinOp):
        left = eval_value(node.left, at)
        right = eval_value(node.right, at)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if abs(right) <= jets.DENOM_FLOOR:
            raise EvalError(f"division by near-zero value {right!r}", node.pos)
        return left / right
    if isinstance(node, PowConst):
        base = eval_value(node.base, at)
        c = node.exponent
        if c.is_integer():
            if base == 0.0 and c < 0:
                raise EvalError("zero base with negative exponent", node.pos)
            return base ** int(c)
        if base <= 0.0:
            raise EvalError(f"fractional power of non-positive base {base!r}", node.pos)
        return base**c
    if isinstance(node, Call):
        arg = eval_value(node.arg, at)
        try:
            return _FLOAT_FNS[node.fn](arg)
        except ValueError as exc:
            raise EvalError(f"{node.fn} undefined at {arg!r}", node.pos) from exc
    raise TypeError(f"not an AST node: {node!r}")


_FLOAT_FNS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "tanh": math.tanh,
    "exp": math.exp,
    "ln": math.log,
    "sqrt": math.sqrt,
}


# --- Pretty printing ---------------------------------------------------

def _node_prec(node: Ast) -> int:
    if isinstance(node, BinOp):
        return _BINARY_PREC[node.op]
    if isinstance(node, Neg):
        return _UNARY
    if isinstance(node, PowConst):
        return _POW
    return 5


def _wrap(node: Ast, min_prec: int) -> str:
    text = to_source(node)
    return f"({text})" if _node_prec(node) < min_prec else text


def to_source(node: Ast) -> str:
    """Render an AST back to a string that reparses to an equal tree."""
    if isinstance(node, Constant):
        return _format_number(node.value)
    if isinstance(node, Variable):
        return node.name
    if isinstance(node, Neg):
        return f"-{_wrap(node.child, _UNARY)}"
    if isinstance(node, BinOp):
        prec = _BINARY_PREC[node.op]
        left = _wrap(node.left, prec)
        right = _wrap(node.right, prec + 1)
        return f"{left} {node.op} {right}"
    if isinstance(node, PowConst):
        base = _wrap(node.base, _POW + 1)
        if node.exponent < 0:
            return f"{base}^(-{_format_number(-node.exponent)})"
        return f"{base}^{_format_number(node.exponent)}"
    if isinstance(node, Call):
        return f"{node.fn}({to_source(node.arg)})"
    raise TypeError(f"not an AST node: {node!r}")


def _format_number(value: float) -> str:
    # repr round-trips exactly and stays within the lexer's number form
    # (digits, optional fraction, optional exponent) for non-negatives.
    return repr(float(value))
