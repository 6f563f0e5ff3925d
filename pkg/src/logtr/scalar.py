"""Exact rational scalars and points on the genus-zero curve.

All coefficient arithmetic in this package is exact.  Scalars are
arbitrary-precision rationals (gmpy2.mpq when available, fractions.Fraction
otherwise).  Points on CP^1 are either a rational coordinate value or the
symbol ``OO`` for the point at infinity.
"""

from __future__ import annotations

try:
    from gmpy2 import mpq as _ratbase

    def Q(a=0, b=1):
        return _ratbase(a, b)

except ImportError:  # pragma: no cover
    from fractions import Fraction as _ratbase

    def Q(a=0, b=1):
        return _ratbase(a, b)

#: type used for isinstance checks on exact rationals
Rat = type(_ratbase(1))

QZERO = Q(0)
QONE = Q(1)


def is_rat(x):
    return isinstance(x, (int, Rat))


def as_q(x):
    """Coerce an int, rational or 'p/q' string to a scalar."""
    if isinstance(x, Rat):
        return x
    if isinstance(x, int):
        return Q(x)
    if isinstance(x, str):
        s = x.strip()
        if "/" in s:
            p, q = s.split("/")
            return Q(int(p), int(q))
        return Q(int(s))
    raise TypeError(f"cannot coerce {x!r} to an exact rational")


def qstr(x):
    """Render a scalar as 'p' or 'p/q' (used by the JSON wire format)."""
    x = as_q(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class _Infinity:
    """The point at infinity on CP^1 (tagged union with rational points)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "oo"

    def __hash__(self):
        return hash("logtr.oo")

    def __eq__(self, other):
        return other is self


OO = _Infinity()


def is_inf(p):
    return p is OO


def point_eq(p, q):
    if is_inf(p) or is_inf(q):
        return p is q
    return as_q(p) == as_q(q)


def point_str(p):
    return "oo" if is_inf(p) else qstr(p)


def parse_point(s):
    if isinstance(s, str) and s.strip() in ("oo", "inf", "infinity"):
        return OO
    return as_q(s)


class TruncationError(Exception):
    """Raised when a series is read beyond its stored truncation order."""


class ExactAlgebraError(Exception):
    """Raised on violated preconditions in the exact-algebra layer."""
