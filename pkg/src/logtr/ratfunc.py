"""Univariate rational functions and rational-plus-logarithmic functions.

A LogFunction is a rational function plus a finite sum of terms
c * log(z - a) (or c * log(1/z) for a at infinity).  Branch constants of the
logarithms are never materialized: every consumer works with the derivative,
which is again rational, or with explicitly log-stripped germs.
"""

from __future__ import annotations

from .poly import Poly
from .scalar import (OO, Q, QZERO, ExactAlgebraError, as_q, is_inf, is_rat,
                     point_eq, qstr)


class RatFunc:
    """Quotient of two polynomials, stored with monic denominator and gcd 1."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        if is_rat(num):
            num = Poly.const(num)
        if den is None:
            den = Poly.const(1)
        if is_rat(den):
            den = Poly.const(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        g = num.gcd(den)
        if g.degree >= 1:
            num = num.exact_div(g)
            den = den.exact_div(g)
        lc = den.lead
        if lc != 1:
            num = num * (1 / lc)
            den = den * (1 / lc)
        self.num = num
        self.den = den

    # -- constructors -------------------------------------------------

    @staticmethod
    def const(c):
        return RatFunc(Poly.const(c))

    @staticmethod
    def z():
        return RatFunc(Poly.x())

    # -- structure ----------------------------------------------------

    def is_zero(self):
        return self.num.is_zero()

    def __bool__(self):
        return bool(self.num)

    def is_const(self):
        return self.num.degree <= 0 and self.den.degree == 0

    def const_value(self):
        if not self.is_const():
            raise ExactAlgebraError("not a constant")
        return self.num.coeff(0)

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        if self.den.degree == 0:
            return f"RatFunc({self.num!r})"
        return f"RatFunc({self.num!r} / {self.den!r})"

    # -- field operations ---------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RatFunc(self.num * other.den + other.num * self.den,
                       self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverting the zero rational function")
        return RatFunc(self.den, self.num)

    def __rtruediv__(self, other):
        other = _coerce(other)
        return other / self

    def __pow__(self, k):
        if k < 0:
            return RatFunc(self.den ** (-k), self.num ** (-k))
        return RatFunc(self.num ** k, self.den ** k)

    # -- calculus -----------------------------------------------------

    def derivative(self):
        return RatFunc(self.num.derivative() * self.den
                       - self.num * self.den.derivative(),
                       self.den * self.den)

    def __call__(self, x):
        """Evaluate at a scalar, RatFunc, or any field element."""
        if is_rat(x):
            d = self.den(x)
            if d == 0:
                raise ZeroDivisionError(f"pole at {x}")
            return self.num(x) / d
        n = self.num(x)
        d = self.den(x)
        return n / d

    def order_at(self, p):
        """Valuation at p: zero order (>0), pole order (<0), 0 if regular & nonzero.

        Returns None for the zero function.
        """
        if self.is_zero():
            return None
        if is_inf(p):
            return self.den.degree - self.num.degree
        p = as_q(p)
        lin = Poly([-p, 1])
        ordn = _mult(self.num, lin)
        ordd = _mult(self.den, lin)
        return ordn - ordd

    def eval_or_none(self, x):
        try:
            return self(x)
        except ZeroDivisionError:
            return None

    def pole_points(self):
        """Finite rational poles with orders, plus the non-rational factor.

        Returns (dict point -> order, leftover squarefree-part Poly with no
        rational roots, order at infinity (>0 means pole)).
        """
        roots, rest = self.den.rational_roots()
        inf_order = self.num.degree - self.den.degree
        return roots, rest.squarefree_part(), inf_order


def _mult(poly, lin):
    m = 0
    while True:
        q, r = divmod(poly, lin)
        if not r.is_zero():
            return m
        poly = q
        m += 1


def _coerce(x):
    if isinstance(x, RatFunc):
        return x
    if is_rat(x):
        return RatFunc.const(x)
    if isinstance(x, Poly):
        return RatFunc(x)
    return NotImplemented


RF_ZERO = RatFunc.const(0)
RF_ONE = RatFunc.const(1)


class LogFunction:
    """rational_part + sum of coeff * log(z - a); location OO means log(1/z)."""

    __slots__ = ("rational_part", "log_terms")

    def __init__(self, rational_part=RF_ZERO, log_terms=()):
        if is_rat(rational_part) or isinstance(rational_part, Poly):
            rational_part = _coerce(rational_part)
        merged = {}
        for loc, c in log_terms:
            key = OO if is_inf(loc) else as_q(loc)
            merged[key] = merged.get(key, QZERO) + as_q(c)
        self.rational_part = rational_part
        self.log_terms = tuple(sorted(
            ((loc, c) for loc, c in merged.items() if c),
            key=lambda t: (is_inf(t[0]), str(t[0]))))

    # -- constructors -------------------------------------------------

    @staticmethod
    def rational(f):
        return LogFunction(f if isinstance(f, RatFunc) else _coerce(f))

    @staticmethod
    def log(a=QZERO, coeff=1):
        """coeff * log(z - a)."""
        return LogFunction(RF_ZERO, [(a, coeff)])

    # -- structure ----------------------------------------------------

    def is_rational(self):
        return not self.log_terms

    def is_zero(self):
        return self.rational_part.is_zero() and not self.log_terms

    def __eq__(self, other):
        if isinstance(other, (RatFunc, Poly)) or is_rat(other):
            other = LogFunction.rational(_coerce(other))
        if not isinstance(other, LogFunction):
            return NotImplemented
        return (self.rational_part == other.rational_part
                and self.log_terms == other.log_terms)

    def __hash__(self):
        return hash((self.rational_part, self.log_terms))

    def __repr__(self):
        parts = [repr(self.rational_part)]
        for loc, c in self.log_terms:
            loc_s = "1/z" if is_inf(loc) else f"z-({qstr(loc)})"
            parts.append(f"{qstr(c)}*log({loc_s})")
        return "LogFunction(" + " + ".join(parts) + ")"

    # -- arithmetic (module over Q, plus rational shifts) --------------

    def __add__(self, other):
        if isinstance(other, (RatFunc, Poly)) or is_rat(other):
            other = LogFunction.rational(_coerce(other))
        if not isinstance(other, LogFunction):
            return NotImplemented
        return LogFunction(self.rational_part + other.rational_part,
                           self.log_terms + other.log_terms)

    __radd__ = __add__

    def __neg__(self):
        return LogFunction(-self.rational_part,
                           [(loc, -c) for loc, c in self.log_terms])

    def __sub__(self, other):
        if isinstance(other, (RatFunc, Poly)) or is_rat(other):
            other = LogFunction.rational(_coerce(other))
        if not isinstance(other, LogFunction):
            return NotImplemented
        return self + (-other)

    def scale(self, c):
        c = as_q(c)
        return LogFunction(self.rational_part * c,
                           [(loc, k * c) for loc, k in self.log_terms])

    # -- calculus -----------------------------------------------------

    def derivative(self):
        """d/dz; always an honest RatFunc."""
        out = self.rational_part.derivative()
        for loc, c in self.log_terms:
            if is_inf(loc):
                out = out + RatFunc(Poly.const(-c), Poly.x())
            else:
                out = out + RatFunc(Poly.const(c), Poly([-loc, 1]))
        return out

    def log_coeff_at(self, p):
        for loc, c in self.log_terms:
            if point_eq(loc, p):
                return c
        return QZERO
