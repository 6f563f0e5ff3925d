"""The S-operator and hbar-graded series.

S(t) = (e^{t/2} - e^{-t/2})/t = 1 + t^2/24 + t^4/1920 + ...  Applied as
S(w*hbar*d/dx) it acts termwise on functions of the curve coordinate; the
result is graded by even powers of hbar.
"""

from __future__ import annotations

from math import factorial

from .poly import Poly
from .ratfunc import LogFunction, RatFunc
from .scalar import Q, QZERO, ExactAlgebraError, TruncationError, as_q, is_rat


def s_series(order):
    """Coefficients {2k: c} of S(t) up to degree <= order."""
    out = {}
    for k in range(0, order // 2 + 1):
        out[2 * k] = Q(1, 4 ** k * factorial(2 * k + 1))
    return out


def inv_s_series(order):
    """Coefficients {2k: c} of 1/S(t) up to degree <= order."""
    s = s_series(order)
    out = {0: Q(1)}
    for m in range(2, order + 1, 2):
        acc = QZERO
        for j in range(2, m + 1, 2):
            acc += s[j] * out.get(m - j, QZERO)
        out[m] = -acc
    return out


class HbarSeries:
    """Finite hbar-expansion {power: coefficient object}, exclusive trunc.

    Coefficients are whatever the producing operation yields (rational
    functions, 1-form coefficients, log functions); access past the stored
    truncation raises rather than returning zero.
    """

    __slots__ = ("terms", "trunc")

    def __init__(self, terms, trunc):
        self.terms = {k: v for k, v in terms.items()
                      if k < trunc and not _is_zeroish(v)}
        self.trunc = trunc

    def coeff(self, k):
        if k >= self.trunc:
            raise TruncationError(
                f"hbar^{k} beyond truncation {self.trunc}")
        return self.terms.get(k, QZERO)

    def is_zero_to_truncation(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, HbarSeries):
            return NotImplemented
        return self.trunc == other.trunc and self.terms == other.terms

    def __repr__(self):
        body = " + ".join(f"hbar^{k}*({self.terms[k]!r})"
                          for k in sorted(self.terms)) or "0"
        return f"HbarSeries[{body}; O(hbar^{self.trunc})]"

    def __add__(self, other):
        if not isinstance(other, HbarSeries):
            return NotImplemented
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, QZERO) + v if k in out else v
        return HbarSeries(out, min(self.trunc, other.trunc))

    def __neg__(self):
        return HbarSeries({k: -v for k, v in self.terms.items()}, self.trunc)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return HbarSeries({k: v * c for k, v in self.terms.items()},
                          self.trunc)

    def __mul__(self, other):
        if not isinstance(other, HbarSeries):
            return self.scale(other)
        trunc = min(self.trunc, other.trunc)
        out = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = k1 + k2
                if k < trunc:
                    p = v1 * v2
                    out[k] = out[k] + p if k in out else p
        return HbarSeries(out, trunc)

    __rmul__ = __mul__

    def map(self, fn):
        return HbarSeries({k: fn(v) for k, v in self.terms.items()},
                          self.trunc)


def _is_zeroish(v):
    if is_rat(v):
        return v == 0
    if isinstance(v, (RatFunc, LogFunction)):
        return v.is_zero()
    return not v


def d_dx(f, x):
    """Derivative of f with respect to the coordinate function x.

    f may be a LogFunction, RatFunc or Poly; x a RatFunc, LogFunction, Poly
    or None (meaning x = z).  The result is always a RatFunc.
    """
    fp = f.derivative() if isinstance(f, (RatFunc, LogFunction, Poly)) else None
    if fp is None:
        raise ExactAlgebraError(f"cannot differentiate {type(f).__name__}")
    if isinstance(fp, Poly):
        fp = RatFunc(fp)
    if x is None:
        return fp
    xp = x.derivative()
    if isinstance(xp, Poly):
        xp = RatFunc(xp)
    if xp.is_zero():
        raise ExactAlgebraError("coordinate with identically zero derivative")
    return fp / xp


def s_operator(target, x, hbar_order, weight=1, inverse=False):
    """Apply S(weight*hbar*d/dx) (or its reciprocal) to target.

    Returns an HbarSeries whose hbar^0 entry is the target itself and whose
    hbar^{2k} entry is the 2k-th d/dx derivative times the series
    coefficient; hbar_order is the largest retained power of hbar.
    """
    w = as_q(weight)
    coeffs = inv_s_series(hbar_order) if inverse else s_series(hbar_order)
    out = {0: target}
    if hbar_order >= 2:
        cur = target
        for m in range(1, hbar_order // 2 + 1):
            cur = d_dx(d_dx(cur, x), x)
            out[2 * m] = cur * (coeffs[2 * m] * w ** (2 * m))
    return HbarSeries(out, hbar_order + 1)


def d_over_dx(eta, dx):
    """d(eta/dx) for 1-forms given by their dz-coefficients; returns the
    dz-coefficient of the exact differential."""
    if isinstance(eta, Poly):
        eta = RatFunc(eta)
    if isinstance(dx, Poly):
        dx = RatFunc(dx)
    if dx.is_zero():
        raise ExactAlgebraError("d_over_dx with zero dx")
    return (eta / dx).derivative()
