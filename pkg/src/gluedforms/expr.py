"""Symbolic scalar expressions: AST, parser, printer, calculus, equality.

The AST covers constants, variables x0,x1,..., the four arithmetic
operations, integer powers and sin/cos/exp.  There is deliberately no
general simplifier; the usable contract is ``expr_equal``, which decides
equality exactly on the polynomial fragment (via expanded canonical
coefficient maps) and probabilistically elsewhere (seeded sampling).

Grammar accepted by ``parse_expr`` (whitespace insignificant)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-'? base ('^' int)?
    base   := number | 'x' nat | '(' expr ')' | ('sin'|'cos'|'exp') '(' expr ')'

Integer literals parse to exact rationals, decimal/scientific literals to
floats.  The parser never rewrites: ``sin(x0)^2 + cos(x0)^2`` stays as
written.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    EvaluationError,
    ExprSyntaxError,
    NotPolynomialError,
    UnknownIdentifierError,
    VariableIndexError,
)
from .scalar import Num, as_num, is_exact

CONST = "const"
VAR = "var"
ADD = "add"
SUB = "sub"
MUL = "mul"
DIV = "div"
POW = "pow"
SIN = "sin"
COS = "cos"
EXP = "exp"

_FUNCS = (SIN, COS, EXP)
_BINOPS = (ADD, SUB, MUL, DIV)


@dataclass(frozen=True)
class Expr:
    op: str
    args: tuple["Expr", ...] = ()
    value: Num | None = None
    index: int | None = None
    exponent: int | None = None

    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __sub__(self, other):
        return sub(self, _lift(other))

    def __rsub__(self, other):
        return sub(_lift(other), self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __truediv__(self, other):
        return div(self, _lift(other))

    def __rtruediv__(self, other):
        return div(_lift(other), self)

    def __pow__(self, n: int):
        return int_pow(self, n)

    def __neg__(self):
        return sub(const(0), self)

    def __repr__(self):
        return f"Expr({format_expr(self)!r})"


def _lift(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return const(x)


def const(v) -> Expr:
    return Expr(CONST, value=as_num(v))


def var(i: int) -> Expr:
    if i < 0:
        raise ValueError("variable index must be >= 0")
    return Expr(VAR, index=i)


def add(a: Expr, b: Expr) -> Expr:
    return Expr(ADD, (a, b))


def sub(a: Expr, b: Expr) -> Expr:
    return Expr(SUB, (a, b))


def mul(a: Expr, b: Expr) -> Expr:
    return Expr(MUL, (a, b))


def div(a: Expr, b: Expr) -> Expr:
    return Expr(DIV, (a, b))


def int_pow(a: Expr, n: int) -> Expr:
    if not isinstance(n, int):
        raise TypeError("exponent must be an int")
    return Expr(POW, (a,), exponent=n)


def sin(a: Expr) -> Expr:
    return Expr(SIN, (a,))


def cos(a: Expr) -> Expr:
    return Expr(COS, (a,))


def exp(a: Expr) -> Expr:
    return Expr(EXP, (a,))


ZERO = const(0)
ONE = const(1)


def is_zero_const(e: Expr) -> bool:
    return e.op == CONST and e.value == 0


def is_one_const(e: Expr) -> bool:
    return e.op == CONST and e.value == 1


# Pruning builders, used when deriving new expressions (derivatives,
# pullbacks) so trees stay small.  The parser never uses them.

def padd(a: Expr, b: Expr) -> Expr:
    if is_zero_const(a):
        return b
    if is_zero_const(b):
        return a
    return add(a, b)


def psub(a: Expr, b: Expr) -> Expr:
    if is_zero_const(b):
        return a
    return sub(a, b)


def pmul(a: Expr, b: Expr) -> Expr:
    if is_zero_const(a) or is_zero_const(b):
        return ZERO
    if is_one_const(a):
        return b
    if is_one_const(b):
        return a
    return mul(a, b)


def psum(terms: Iterable[Expr]) -> Expr:
    out = ZERO
    for t in terms:
        out = padd(out, t)
    return out


def max_var_index(e: Expr) -> int:
    """Largest variable index used, or -1 for a closed expression."""
    if e.op == VAR:
        return e.index
    if not e.args:
        return -1
    return max(max_var_index(a) for a in e.args)


def substitute(e: Expr, replacements: Sequence[Expr]) -> Expr:
    """Replace variable i by replacements[i] everywhere."""
    if e.op == CONST:
        return e
    if e.op == VAR:
        if e.index >= len(replacements):
            raise VariableIndexError(f"x{e.index} has no replacement", 0)
        return replacements[e.index]
    new_args = tuple(substitute(a, replacements) for a in e.args)
    return Expr(e.op, new_args, exponent=e.exponent)


def differentiate(e: Expr, i: int) -> Expr:
    """Symbolic partial derivative with respect to x_i."""
    if i < 0:
        raise ValueError("variable index must be >= 0")
    if e.op == CONST:
        return ZERO
    if e.op == VAR:
        return ONE if e.index == i else ZERO
    if e.op == ADD:
        return padd(differentiate(e.args[0], i), differentiate(e.args[1], i))
    if e.op == SUB:
        return psub(differentiate(e.args[0], i), differentiate(e.args[1], i))
    if e.op == MUL:
        a, b = e.args
        return padd(pmul(differentiate(a, i), b), pmul(a, differentiate(b, i)))
    if e.op == DIV:
        a, b = e.args
        num = psub(pmul(differentiate(a, i), b), pmul(a, differentiate(b, i)))
        return div(num, int_pow(b, 2)) if not is_zero_const(num) else ZERO
    if e.op == POW:
        a = e.args[0]
        n = e.exponent
        if n == 0:
            return ZERO
        inner = pmul(const(n), differentiate(a, i))
        if n == 1:
            return inner
        return pmul(inner, int_pow(a, n - 1))
    if e.op == SIN:
        return pmul(cos(e.args[0]), differentiate(e.args[0], i))
    if e.op == COS:
        return pmul(pmul(const(-1), sin(e.args[0])), differentiate(e.args[0], i))
    if e.op == EXP:
        return pmul(e, differentiate(e.args[0], i))
    raise ValueError(f"unknown node {e.op}")


def has_transcendental(e: Expr) -> bool:
    if e.op in _FUNCS:
        return True
    return any(has_transcendental(a) for a in e.args)


def has_float_const(e: Expr) -> bool:
    if e.op == CONST:
        return not is_exact(e.value)
    return any(has_float_const(a) for a in e.args)


def evaluate(e: Expr, coords: Sequence) -> Num:
    """Evaluate at a point.

    The mode is decided for the whole computation: exact rational
    arithmetic when the expression has no transcendental node, no float
    constant and the point is exact; float arithmetic otherwise.  Poles
    and non-finite results raise ``EvaluationError``.
    """
    point = [as_num(c) for c in coords]
    exact = (
        not has_transcendental(e)
        and not has_float_const(e)
        and all(is_exact(c) for c in point)
    )
    if exact:
        return _eval_exact(e, point)
    fpoint = [float(c) for c in point]
    out = _eval_float(e, fpoint)
    if not math.isfinite(out):
        raise EvaluationError("non-finite value")
    return out


def _eval_exact(e: Expr, point: list[Fraction]) -> Fraction:
    if e.op == CONST:
        return e.value
    if e.op == VAR:
        if e.index >= len(point):
            raise VariableIndexError(f"x{e.index} outside point dimension", 0)
        return point[e.index]
    if e.op == ADD:
        return _eval_exact(e.args[0], point) + _eval_exact(e.args[1], point)
    if e.op == SUB:
        return _eval_exact(e.args[0], point) - _eval_exact(e.args[1], point)
    if e.op == MUL:
        return _eval_exact(e.args[0], point) * _eval_exact(e.args[1], point)
    if e.op == DIV:
        denom = _eval_exact(e.args[1], point)
        if denom == 0:
            raise EvaluationError("division by zero")
        return _eval_exact(e.args[0], point) / denom
    if e.op == POW:
        base = _eval_exact(e.args[0], point)
        if e.exponent < 0 and base == 0:
            raise EvaluationError("zero to negative power")
        return base ** e.exponent
    raise ValueError(f"unexpected node {e.op} in exact evaluation")


def _eval_float(e: Expr, point: list[float]) -> float:
    if e.op == CONST:
        return float(e.value)
    if e.op == VAR:
        if e.index >= len(point):
            raise VariableIndexError(f"x{e.index} outside point dimension", 0)
        return point[e.index]
    try:
        if e.op == ADD:
            return _eval_float(e.args[0], point) + _eval_float(e.args[1], point)
        if e.op == SUB:
            return _eval_float(e.args[0], point) - _eval_float(e.args[1], point)
        if e.op == MUL:
            return _eval_float(e.args[0], point) * _eval_float(e.args[1], point)
        if e.op == DIV:
            denom = _eval_float(e.args[1], point)
            if denom == 0.0:
                raise EvaluationError("division by zero")
            return _eval_float(e.args[0], point) / denom
        if e.op == POW:
            base = _eval_float(e.args[0], point)
            if e.exponent < 0 and base == 0.0:
                raise EvaluationError("zero to negative power")
            return base ** e.exponent
        if e.op == SIN:
            return math.sin(_eval_float(e.args[0], point))
        if e.op == COS:
            return math.cos(_eval_float(e.args[0], point))
        if e.op == EXP:
            return math.exp(_eval_float(e.args[0], point))
    except OverflowError as exc:
        raise EvaluationError("overflow") from exc
    except ValueError as exc:
        raise EvaluationError("math domain error") from exc
    raise ValueError(f"unknown node {e.op}")


# ---------------------------------------------------------------------------
# Canonical form of the polynomial fragment

Monomial = tuple[int, ...]
PolyCoeffs = dict[Monomial, Fraction]


def _poly_zero() -> PolyCoeffs:
    return {}


def _poly_const(c: Fraction, dim: int) -> PolyCoeffs:
    if c == 0:
        return {}
    return {(0,) * dim: c}


def _poly_add(a: PolyCoeffs, b: PolyCoeffs, sign: int = 1) -> PolyCoeffs:
    out = dict(a)
    for mono, c in b.items():
        nc = out.get(mono, Fraction(0)) + sign * c
        if nc == 0:
            out.pop(mono, None)
        else:
            out[mono] = nc
    return out


def _poly_mul(a: PolyCoeffs, b: PolyCoeffs) -> PolyCoeffs:
    out: PolyCoeffs = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            mono = tuple(x + y for x, y in zip(ma, mb))
            nc = out.get(mono, Fraction(0)) + ca * cb
            if nc == 0:
                out.pop(mono, None)
            else:
                out[mono] = nc
    return out


def _poly_pow(a: PolyCoeffs, n: int, dim: int) -> PolyCoeffs:
    out = _poly_const(Fraction(1), dim)
    base = a
    while n:
        if n & 1:
            out = _poly_mul(out, base)
        base = _poly_mul(base, base)
        n >>= 1
    return out


def polynomial_coeffs(e: Expr, dim: int) -> PolyCoeffs:
    """Expanded canonical coefficients of the polynomial fragment.

    Raises ``NotPolynomialError`` on transcendental nodes and on division
    by a non-constant.  Float constants are dyadic rationals and convert
    exactly, so the decision stays exact.  Division by a nonzero constant
    is folded into the coefficients.
    """
    if e.op == CONST:
        return _poly_const(Fraction(e.value), dim)
    if e.op == VAR:
        if e.index >= dim:
            raise VariableIndexError(f"x{e.index} out of range for dim {dim}", 0)
        mono = tuple(1 if k == e.index else 0 for k in range(dim))
        return {mono: Fraction(1)}
    if e.op == ADD:
        return _poly_add(polynomial_coeffs(e.args[0], dim), polynomial_coeffs(e.args[1], dim))
    if e.op == SUB:
        return _poly_add(polynomial_coeffs(e.args[0], dim), polynomial_coeffs(e.args[1], dim), -1)
    if e.op == MUL:
        return _poly_mul(polynomial_coeffs(e.args[0], dim), polynomial_coeffs(e.args[1], dim))
    if e.op == DIV:
        denom = polynomial_coeffs(e.args[1], dim)
        c = _constant_of(denom, dim)
        if c is None:
            raise NotPolynomialError("division by a non-constant")
        if c == 0:
            raise EvaluationError("division by zero")
        num = polynomial_coeffs(e.args[0], dim)
        return {m: v / c for m, v in num.items()}
    if e.op == POW:
        base = polynomial_coeffs(e.args[0], dim)
        if e.exponent >= 0:
            return _poly_pow(base, e.exponent, dim)
        c = _constant_of(base, dim)
        if c is None:
            raise NotPolynomialError("negative power of a non-constant")
        if c == 0:
            raise EvaluationError("zero to negative power")
        return _poly_const(c ** e.exponent, dim)
    raise NotPolynomialError(f"{e.op} is not polynomial")


def _constant_of(coeffs: PolyCoeffs, dim: int) -> Fraction | None:
    if not coeffs:
        return Fraction(0)
    if len(coeffs) == 1 and (0,) * dim in coeffs:
        return coeffs[(0,) * dim]
    return None


def total_degree(e: Expr, dim: int) -> int:
    """Total degree of the polynomial fragment (0 for the zero polynomial)."""
    coeffs = polynomial_coeffs(e, dim)
    if not coeffs:
        return 0
    return max(sum(m) for m in coeffs)


def is_affine(e: Expr, dim: int) -> bool:
    try:
        return total_degree(e, dim) <= 1
    except NotPolynomialError:
        return False


# ---------------------------------------------------------------------------
# Equality oracle

EQUAL_SAMPLES = 32
EQUAL_TOL = 1e-9
MAX_CONSECUTIVE_FAILURES = 64


@dataclass(frozen=True)
class EqualityResult:
    equal: bool
    exact: bool
    seed: int = 0

    @property
    def mode(self) -> str:
        return "exact" if self.exact else "sampled"

    def __bool__(self) -> bool:
        return self.equal


def expr_equal(a: Expr, b: Expr, dim: int, *, seed: int = 0,
               samples: int = EQUAL_SAMPLES, tol: float = EQUAL_TOL) -> EqualityResult:
    """Decide whether two expressions agree as functions on R^dim.

    Polynomial fragment: exact, by comparing canonical coefficient maps.
    Otherwise: probabilistic, equal at ``samples`` points drawn uniformly
    from [-1,1]^dim within ``tol`` absolute.  Samples that hit a pole are
    redrawn; more than 64 consecutive failures raise ``EvaluationError``.
    """
    try:
        ca = polynomial_coeffs(a, dim)
        cb = polynomial_coeffs(b, dim)
        return EqualityResult(ca == cb, True, seed)
    except NotPolynomialError:
        pass
    rng = random.Random(seed)
    done = 0
    consecutive_failures = 0
    while done < samples:
        point = [rng.uniform(-1.0, 1.0) for _ in range(dim)]
        try:
            va = evaluate(a, point)
            vb = evaluate(b, point)
        except EvaluationError:
            consecutive_failures += 1
            if consecutive_failures > MAX_CONSECUTIVE_FAILURES:
                raise EvaluationError(
                    "could not find enough evaluable sample points")
            continue
        consecutive_failures = 0
        if abs(float(va) - float(vb)) > tol:
            return EqualityResult(False, False, seed)
        done += 1
    return EqualityResult(True, False, seed)


# ---------------------------------------------------------------------------
# Parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


class _Token:
    __slots__ = ("kind", "text", "offset")

    def __init__(self, kind: str, text: str, offset: int):
        self.kind = kind
        self.text = text
        self.offset = offset


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad_at = len(text) - len(stripped)
            raise ExprSyntaxError(f"unexpected character {stripped[0]!r}", bad_at)
        kind = m.lastgroup
        tokens.append(_Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


def _number_value(text: str) -> Num:
    if re.fullmatch(r"\d+", text):
        return Fraction(int(text))
    return float(text)


class _Parser:
    def __init__(self, tokens: list[_Token], dim: int):
        self.tokens = tokens
        self.pos = 0
        self.dim = dim

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, text: str) -> _Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != text:
            raise ExprSyntaxError(f"expected {text!r}", tok.offset)
        return self.next()

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExprSyntaxError(f"unexpected trailing input {tok.text!r}", tok.offset)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "+-":
                self.next()
                rhs = self.term()
                e = add(e, rhs) if tok.text == "+" else sub(e, rhs)
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "*/":
                self.next()
                rhs = self.factor()
                e = mul(e, rhs) if tok.text == "*" else div(e, rhs)
            else:
                return e

    def factor(self) -> Expr:
        negate = False
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.next()
            negate = True
        e, was_number = self.base()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.next()
            e = int_pow(e, self.int_literal())
            was_number = False
        if negate:
            if was_number:
                e = const(-e.value)
            else:
                e = sub(ZERO, e)
        return e

    def int_literal(self) -> int:
        sign = 1
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.next()
            sign = -1
        tok = self.next()
        if tok.kind != "number" or not re.fullmatch(r"\d+", tok.text):
            raise ExprSyntaxError("expected an integer exponent", tok.offset)
        return sign * int(tok.text)

    def base(self) -> tuple[Expr, bool]:
        tok = self.next()
        if tok.kind == "number":
            return const(_number_value(tok.text)), True
        if tok.kind == "name":
            m = re.fullmatch(r"x(\d+)", tok.text)
            if m:
                idx = int(m.group(1))
                if idx >= self.dim:
                    raise VariableIndexError(
                        f"variable x{idx} out of range for dimension {self.dim}",
                        tok.offset)
                return var(idx), False
            if tok.text in _FUNCS:
                self.expect_op("(")
                inner = self.expr()
                self.expect_op(")")
                return Expr(tok.text, (inner,)), False
            raise UnknownIdentifierError(f"unknown identifier {tok.text!r}", tok.offset)
        if tok.kind == "op" and tok.text == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner, False
        raise ExprSyntaxError(f"unexpected token {tok.text!r}", tok.offset)


def parse_expr(text: str, dim: int) -> Expr:
    """Parse an expression using variables x0..x{dim-1}."""
    return _Parser(_tokenize(text), dim).parse()


# ---------------------------------------------------------------------------
# Printer (round-trips through parse_expr up to canonical equality;
# structurally except for unary minus spelled as ``0 - e``)

_LEVEL = {ADD: 1, SUB: 1, MUL: 2, DIV: 2, POW: 3}


def format_num(v: Num) -> str:
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return f"{v.numerator}/{v.denominator}"
    return repr(v)


def format_expr(e: Expr) -> str:
    return _fmt(e, 0)


def _fmt(e: Expr, parent_level: int) -> str:
    if e.op == CONST:
        s = format_num(e.value)
        # a negative literal binds like a factor; parenthesize inside
        # higher-precedence contexts that follow another atom
        if s.startswith("-") and parent_level >= 2:
            return f"({s})"
        if "/" in s and parent_level >= 2:
            return f"({s})"
        return s
    if e.op == VAR:
        return f"x{e.index}"
    if e.op in _FUNCS:
        return f"{e.op}({_fmt(e.args[0], 0)})"
    if e.op == POW:
        base = _fmt(e.args[0], 4)
        return f"{base}^{e.exponent}"
    level = _LEVEL[e.op]
    symbol = {ADD: " + ", SUB: " - ", MUL: "*", DIV: "/"}[e.op]
    left = _fmt(e.args[0], level)
    # right operand of - and / needs parens at equal precedence
    right_level = level + 1 if e.op in (SUB, DIV) else level
    right = _fmt(e.args[1], right_level)
    out = f"{left}{symbol}{right}"
    if level < parent_level:
        return f"({out})"
    return out
