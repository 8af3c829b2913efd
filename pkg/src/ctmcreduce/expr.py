"""Rate expressions: exact rational functions of ``lambda``.

Polynomials are tuples of :class:`fractions.Fraction` in ascending powers of
lambda, trimmed so the last coefficient is nonzero. The zero polynomial is
``(Fraction(0),)``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

from .errors import (
    EventuallyNegative,
    ExprSyntaxError,
    PoleAtLambda,
    ZeroDenominator,
)

Poly = Tuple[Fraction, ...]
Number = Union[int, Fraction]

ZERO: Poly = (Fraction(0),)
ONE: Poly = (Fraction(1),)


# --------------------------------------------------------------------------
# polynomial arithmetic over Q

def _trim(coeffs: Sequence[Fraction]) -> Poly:
    c = list(coeffs)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    if not c:
        return ZERO
    return tuple(x if type(x) is Fraction else Fraction(x) for x in c)


def _is_zero(p: Poly) -> bool:
    return len(p) == 1 and p[0] == 0


def degree(p: Poly) -> int:
    """Degree of ``p``; the zero polynomial has degree -1."""
    return -1 if _is_zero(p) else len(p) - 1


def poly_add(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    return _trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def poly_neg(p: Poly) -> Poly:
    return _trim([-c for c in p])


def poly_sub(p: Poly, q: Poly) -> Poly:
    return poly_add(p, poly_neg(q))


def poly_mul(p: Poly, q: Poly) -> Poly:
    if _is_zero(p) or _is_zero(q):
        return ZERO
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return _trim(out)


def poly_scale(p: Poly, c: Number) -> Poly:
    return _trim([a * c for a in p])


def poly_divmod(p: Poly, q: Poly) -> Tuple[Poly, Poly]:
    if _is_zero(q):
        raise ZeroDivisionError("polynomial division by zero")
    dq = degree(q)
    lead = q[-1]
    rem = list(p)
    if degree(p) < dq:
        return ZERO, _trim(rem)
    quot = [Fraction(0)] * (len(p) - dq)
    for k in range(len(p) - 1, dq - 1, -1):
        c = rem[k] / lead
        if c == 0:
            continue
        quot[k - dq] = c
        for j in range(dq + 1):
            rem[k - dq + j] -= c * q[j]
    return _trim(quot), _trim(rem[:dq] if dq > 0 else [0])


def poly_monic(p: Poly) -> Poly:
    if _is_zero(p):
        return p
    return poly_scale(p, 1 / p[-1])


def poly_gcd(p: Poly, q: Poly) -> Poly:
    """Monic gcd by the Euclidean algorithm."""
    a, b = p, poly_monic(q)
    while not _is_zero(b):
        _, r = poly_divmod(a, b)
        a, b = b, poly_monic(r)
    if _is_zero(a):
        return ONE
    return poly_monic(a)


def poly_eval_exact(p: Poly, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _horner(coeffs, x: float) -> float:
    acc = 0.0
    for c in coeffs:
        acc = acc * x + c
    return acc


# --------------------------------------------------------------------------
# limits

@dataclass(frozen=True)
class LimitValue:
    """Limit of a rate as lambda -> infinity: a finite rational or +infinity.

    Negative infinity cannot be represented; rates must be eventually
    nonnegative.
    """

    value: Optional[Fraction]

    @classmethod
    def finite(cls, value: Number) -> "LimitValue":
        return cls(Fraction(value))

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def __float__(self) -> float:
        return math.inf if self.value is None else float(self.value)

    def __str__(self) -> str:
        return "inf" if self.value is None else str(self.value)


PLUS_INFINITY = LimitValue(None)


# --------------------------------------------------------------------------
# rational expressions

@dataclass(frozen=True)
class RationalExpr:
    """Canonical ratio of two polynomials in lambda.

    The denominator is monic and coprime to the numerator, so two
    expressions are equal exactly when their coefficient tuples are.
    """

    num: Poly
    den: Poly

    def __post_init__(self):
        if _is_zero(self.den):
            raise ZeroDenominator("denominator is the zero polynomial")

    @classmethod
    def from_polys(cls, num: Sequence[Number], den: Sequence[Number] = ONE) -> "RationalExpr":
        n = _trim(num)
        d = _trim(den)
        if _is_zero(d):
            raise ZeroDenominator("expression divides by the zero polynomial")
        if _is_zero(n):
            return cls(ZERO, ONE)
        if len(d) == 1:
            return cls(poly_scale(n, 1 / d[0]), ONE)
        g = poly_gcd(n, d) if len(n) > 1 else ONE
        if g != ONE:
            n, _ = poly_divmod(n, g)
            d, _ = poly_divmod(d, g)
        lead = d[-1]
        return cls(poly_scale(n, 1 / lead), poly_scale(d, 1 / lead))

    @classmethod
    def const(cls, c: Number) -> "RationalExpr":
        return cls.from_polys([c])

    @classmethod
    def lam(cls) -> "RationalExpr":
        return cls.from_polys([0, 1])

    # arithmetic ----------------------------------------------------------

    @staticmethod
    def _coerce(other) -> "RationalExpr":
        if isinstance(other, RationalExpr):
            return other
        if isinstance(other, (int, Fraction)):
            return RationalExpr.const(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.den == o.den:
            return RationalExpr.from_polys(poly_add(self.num, o.num), self.den)
        return RationalExpr.from_polys(
            poly_add(poly_mul(self.num, o.den), poly_mul(o.num, self.den)),
            poly_mul(self.den, o.den),
        )

    __radd__ = __add__

    def __neg__(self):
        return RationalExpr(poly_neg(self.num), self.den)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RationalExpr.from_polys(poly_mul(self.num, o.num), poly_mul(self.den, o.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.is_zero:
            raise ZeroDenominator("division by an expression that is identically zero")
        return RationalExpr.from_polys(poly_mul(self.num, o.den), poly_mul(self.den, o.num))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    # queries -------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return _is_zero(self.num)

    @property
    def numerator(self):
        return list(self.num)

    @property
    def denominator(self):
        return list(self.den)

    def exact_value(self, lam: Union[Number, float]) -> Fraction:
        x = Fraction(lam)
        d = poly_eval_exact(self.den, x)
        if d == 0:
            raise PoleAtLambda(f"{self} has a pole at lambda={lam!r}")
        return poly_eval_exact(self.num, x) / d

    def rescaled(self, c: Number) -> "RationalExpr":
        """Substitute ``c*lambda`` for ``lambda``."""
        c = Fraction(c)
        return RationalExpr.from_polys(
            [a * c**k for k, a in enumerate(self.num)],
            [a * c**k for k, a in enumerate(self.den)],
        )

    def __str__(self) -> str:
        n = _poly_text(self.num)
        if self.den == ONE:
            return n
        return f"({n})/({_poly_text(self.den)})"

    def __repr__(self) -> str:
        return f"RationalExpr({self})"


def _coef_text(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"({c.numerator}/{c.denominator})"


def _poly_text(p: Poly) -> str:
    if _is_zero(p):
        return "0"
    parts = []
    for k, c in enumerate(p):
        if c == 0:
            continue
        mag = abs(c)
        atoms = ["lambda"] * k
        if mag != 1 or k == 0:
            atoms.insert(0, _coef_text(mag))
        body = "*".join(atoms)
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts)


# --------------------------------------------------------------------------
# parser

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/()]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad, text=text)
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        value = m.group(kind)
        if kind == "name" and value != "lambda":
            raise ExprSyntaxError(f"unknown identifier {value!r}", start, "'lambda'", text)
        tokens.append((kind, value, start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected):
        kind, value, pos = self.peek()
        found = "end of input" if kind == "end" else repr(value)
        raise ExprSyntaxError(f"unexpected {found}", pos, expected, self.text)

    def parse(self) -> RationalExpr:
        e = self.expr()
        if self.peek()[0] != "end":
            self.fail("operator or end of input")
        return e

    def expr(self) -> RationalExpr:
        acc = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self) -> RationalExpr:
        acc = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op, pos = self.advance()[1], self.peek()[2]
            rhs = self.factor()
            if op == "*":
                acc = acc * rhs
            else:
                if rhs.is_zero:
                    raise ZeroDenominator(f"division by zero at position {pos}")
                acc = acc / rhs
        return acc

    def factor(self) -> RationalExpr:
        kind, value, _ = self.peek()
        if kind == "num":
            self.advance()
            return RationalExpr.const(Fraction(value))
        if kind == "name":
            self.advance()
            return RationalExpr.lam()
        if kind == "op" and value == "(":
            self.advance()
            e = self.expr()
            if self.peek()[1] != ")":
                self.fail("')'")
            self.advance()
            return e
        if kind == "op" and value == "-":
            self.advance()
            return -self.factor()
        self.fail("number, 'lambda', '(' or '-'")


def parse(text: str) -> RationalExpr:
    """Parse a rate expression into canonical form.

    >>> parse("2*lambda + 1/(lambda+3)").numerator
    [Fraction(1, 1), Fraction(6, 1), Fraction(2, 1)]
    """
    if not isinstance(text, str):
        raise ExprSyntaxError("expression must be a string", 0, text=repr(text))
    return _Parser(text).parse()


def evaluate(e: RationalExpr, lam: float) -> float:
    """Floating-point value of ``e`` at ``lam``.

    For ``lam > 1`` both polynomials are evaluated in ``1/lam`` so large
    arguments do not overflow.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    if poly_eval_exact(e.den, Fraction(lam)) == 0:
        raise PoleAtLambda(f"{e} has a pole at lambda={lam!r}")
    if e.is_zero:
        return 0.0
    num = [float(c) for c in e.num]
    den = [float(c) for c in e.den]
    if lam <= 1.0:
        return _horner(num[::-1], lam) / _horner(den[::-1], lam)
    x = 1.0 / lam
    ratio = _horner(num, x) / _horner(den, x)
    return ratio * lam ** (len(num) - len(den))


def limit_at_infinity(e: RationalExpr) -> LimitValue:
    if e.is_zero:
        return LimitValue.finite(0)
    lead = e.num[-1] / e.den[-1]
    if lead < 0:
        raise EventuallyNegative(f"{e} is negative for all large lambda")
    dn, dd = degree(e.num), degree(e.den)
    if dn > dd:
        return PLUS_INFINITY
    if dn < dd:
        return LimitValue.finite(0)
    return LimitValue.finite(lead)


def affine_decompose(e: RationalExpr) -> Optional[Tuple[Fraction, Fraction]]:
    """``(a, b)`` with ``e == a*lambda + b``, or None if ``e`` is not affine."""
    if e.den != ONE or degree(e.num) > 1:
        return None
    b = e.num[0]
    a = e.num[1] if len(e.num) > 1 else Fraction(0)
    return a, b
