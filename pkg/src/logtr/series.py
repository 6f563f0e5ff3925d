"""Truncated Laurent series in a local coordinate.

A LocalSeries lives at a point of CP^1 in the chart t = z - p (or t = 1/z at
infinity) and stores finitely many coefficients up to an exclusive truncation
order.  Reading a coefficient at or beyond the truncation raises
TruncationError; there is no silent zero-padding past what is actually known.

Coefficients can be exact rationals or any ring elements with the usual
operators (in practice multivariate rational functions in spectator
variables), so the same class drives both plain expansions and the recursion
kernels.
"""

from __future__ import annotations

from .poly import Poly
from .ratfunc import RatFunc
from .scalar import (OO, Q, QZERO, ExactAlgebraError, TruncationError, as_q,
                     is_inf, is_rat, point_str)


class LocalSeries:
    """Laurent series sum_{k < trunc} c_k t^k at a point of CP^1."""

    __slots__ = ("point", "coeffs", "trunc")

    def __init__(self, point, coeffs, trunc):
        self.point = point if is_inf(point) else as_q(point)
        self.coeffs = {k: c for k, c in coeffs.items() if k < trunc and _nz(c)}
        self.trunc = trunc

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(point, trunc):
        return LocalSeries(point, {}, trunc)

    @staticmethod
    def monomial(point, k, c, trunc):
        return LocalSeries(point, {k: c}, trunc)

    @staticmethod
    def const(point, c, trunc):
        return LocalSeries(point, {0: c}, trunc)

    # -- structure ----------------------------------------------------

    def coeff(self, k):
        if k >= self.trunc:
            raise TruncationError(
                f"coefficient t^{k} beyond truncation {self.trunc} "
                f"at {point_str(self.point)}")
        return self.coeffs.get(k, QZERO)

    def order(self):
        """Lowest order with a nonzero stored coefficient; None if all zero."""
        if not self.coeffs:
            return None
        return min(self.coeffs)

    def is_zero_to_truncation(self):
        return not self.coeffs

    def relabel(self, point):
        """Same coefficients under a different chart label."""
        return LocalSeries(point, self.coeffs, self.trunc)

    def truncate(self, trunc):
        if trunc > self.trunc:
            raise TruncationError(
                f"cannot extend truncation {self.trunc} to {trunc}")
        return LocalSeries(self.point, self.coeffs, trunc)

    def __eq__(self, other):
        if not isinstance(other, LocalSeries):
            return NotImplemented
        return (self.point == other.point and self.trunc == other.trunc
                and self.coeffs == other.coeffs)

    def __repr__(self):
        terms = " + ".join(f"({self.coeffs[k]})*t^{k}"
                           for k in sorted(self.coeffs)) or "0"
        return (f"LocalSeries[{point_str(self.point)}; "
                f"O(t^{self.trunc})]({terms})")

    def _check_chart(self, other):
        if not isinstance(other, LocalSeries):
            raise TypeError("expected a LocalSeries")
        if not (self.point == other.point
                or (is_inf(self.point) and is_inf(other.point))):
            raise ExactAlgebraError("series live at different points")

    # -- ring operations ----------------------------------------------

    def __add__(self, other):
        if is_rat(other):
            other = LocalSeries.const(self.point, as_q(other), self.trunc)
        self._check_chart(other)
        trunc = min(self.trunc, other.trunc)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, QZERO) + c
        return LocalSeries(self.point, out, trunc)

    __radd__ = __add__

    def __neg__(self):
        return LocalSeries(self.point, {k: -c for k, c in self.coeffs.items()},
                           self.trunc)

    def __sub__(self, other):
        if is_rat(other):
            other = LocalSeries.const(self.point, as_q(other), self.trunc)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        return LocalSeries(self.point,
                           {k: v * c for k, v in self.coeffs.items()},
                           self.trunc)

    def __mul__(self, other):
        if is_rat(other):
            return self.scale(as_q(other))
        if not isinstance(other, LocalSeries):
            # ring-element scalar (e.g. a spectator rational function)
            return self.scale(other)
        self._check_chart(other)
        lo1 = self.order()
        lo2 = other.order()
        if lo1 is None or lo2 is None:
            # 0 * (known to order t) loses nothing below min of the bounds
            trunc = min(self.trunc + (lo2 or 0), other.trunc + (lo1 or 0))
            return LocalSeries.zero(self.point, trunc)
        trunc = min(self.trunc + lo2, other.trunc + lo1)
        out = {}
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                k = k1 + k2
                if k < trunc:
                    out[k] = out.get(k, QZERO) + c1 * c2
        return LocalSeries(self.point, out, trunc)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        out = LocalSeries.const(self.point, Q(1), self.trunc)
        base = self
        first = True
        while n:
            if n & 1:
                out = base if first else out * base
                first = False
            n >>= 1
            if n:
                base = base * base
        return out

    def inverse(self):
        """Multiplicative inverse; the leading coefficient must be a unit."""
        lo = self.order()
        if lo is None:
            raise ZeroDivisionError("inverting a series with no known terms")
        lead = self.coeffs[lo]
        rel = self.trunc - lo  # number of known coefficients past the lead
        # u = 1 + e with e of positive order; invert by geometric series
        inv_lead = 1 / lead if is_rat(lead) else lead.inverse()
        u_coeffs = {k - lo: c * inv_lead for k, c in self.coeffs.items()}
        out = {0: _one_like(lead)}
        for m in range(1, rel):
            s = QZERO
            for j in range(1, m + 1):
                cj = u_coeffs.get(j)
                if cj is not None and _nz(cj) and (m - j) in out:
                    s = s - cj * out[m - j]
            if _nz(s):
                out[m] = s
        return LocalSeries(self.point,
                           {k - lo: c * inv_lead for k, c in out.items()},
                           rel - lo)

    def __truediv__(self, other):
        if is_rat(other):
            return self.scale(1 / as_q(other))
        if isinstance(other, LocalSeries):
            return self * other.inverse()
        return self.scale(1 / other)

    # -- calculus -----------------------------------------------------

    def derivative(self):
        """d/dt in the local chart."""
        return LocalSeries(self.point,
                           {k - 1: k * c for k, c in self.coeffs.items()
                            if k != 0},
                           self.trunc - 1)

    def antiderivative(self):
        """Term-by-term integral; requires no t^{-1} term."""
        if -1 in self.coeffs:
            raise ExactAlgebraError("antiderivative of a series with a "
                                    "residue term")
        return LocalSeries(self.point,
                           {k + 1: c / Q(k + 1)
                            for k, c in self.coeffs.items()},
                           self.trunc + 1)

    def residue(self):
        return self.coeff(-1)

    # -- composition, sqrt, reversion ---------------------------------

    def compose(self, inner):
        """self(inner(t)); inner must have positive order, same point chart
        is not required for inner (it provides the new chart)."""
        lo = inner.order()
        if lo is None:
            lo = inner.trunc
        if lo < 1:
            raise ExactAlgebraError("composition needs inner order >= 1")
        if self.order() is not None and self.order() < 0:
            # split off the principal part and use powers of 1/inner
            inv = inner.inverse()
            result = None
            for k in sorted(j for j in self.coeffs if j < 0):
                term = (inv ** (-k)).scale(self.coeffs[k])
                result = term if result is None else result + term
            pos = LocalSeries(self.point,
                              {k: c for k, c in self.coeffs.items() if k >= 0},
                              self.trunc)
            pos_part = pos.compose(inner)
            return pos_part if result is None else result + pos_part
        # Horner over descending powers
        top = self.trunc - 1
        acc = LocalSeries.const(inner.point,
                                self.coeff(top) if top >= 0 else QZERO,
                                inner.trunc)
        for k in range(top - 1, -1, -1):
            acc = acc * inner + self.coeff(k)
        # the error term O(t^trunc) of self contributes O(s^{lo*trunc})
        reliable = min(inner.trunc, lo * self.trunc)
        return acc.truncate(min(acc.trunc, reliable))

    def sqrt(self):
        """Square root of a series with even leading order and square lead."""
        lo = self.order()
        if lo is None:
            raise ExactAlgebraError("sqrt of a zero series")
        if lo % 2:
            raise ExactAlgebraError("sqrt needs even leading order")
        lead = self.coeffs[lo]
        root = _rat_sqrt(lead)
        rel = self.trunc - lo
        inv_lead = 1 / lead
        u = {k - lo: c * inv_lead for k, c in self.coeffs.items()}
        # s with s^2 = u, s = 1 + ...
        s = {0: Q(1)}
        for m in range(1, rel):
            acc = u.get(m, QZERO)
            for j in range(1, m):
                acc = acc - s.get(j, QZERO) * s.get(m - j, QZERO)
            s[m] = acc / 2
        return LocalSeries(self.point,
                           {k + lo // 2: c * root for k, c in s.items()},
                           rel + lo // 2)

    def reversion(self):
        """Compositional inverse of a series c1*t + ... with c1 != 0."""
        if self.order() != 1:
            raise ExactAlgebraError("reversion needs order exactly 1")
        n = self.trunc
        c1 = self.coeffs[1]
        inv_c1 = 1 / c1 if is_rat(c1) else c1.inverse()
        # normalize to f = t + higher, invert, then rescale
        f = {k: c * inv_c1 ** k for k, c in self.coeffs.items()}
        g = {1: _one_like(c1)}
        for m in range(2, n):
            # [t^m] f(g(t)) = 0 determines g_m since f_1 = 1
            acc = QZERO
            for j in range(2, m + 1):
                fj = f.get(j)
                if fj is None or not _nz(fj):
                    continue
                acc = acc + fj * _power_coeff(g, j, m)
            gm = -acc
            if _nz(gm):
                g[m] = gm
        return LocalSeries(self.point,
                           {k: c * inv_c1 for k, c in g.items()}, n)


def _power_coeff(g, j, m):
    """[t^m] of (sum g_k t^k)^j for a series with g_1 = 1, g supported >= 1."""
    # dynamic expansion, fine at the orders used here
    cur = {0: Q(1)}
    for _ in range(j):
        nxt = {}
        for a, ca in cur.items():
            for b, cb in g.items():
                k = a + b
                if k <= m:
                    nxt[k] = nxt.get(k, QZERO) + ca * cb
        cur = nxt
    return cur.get(m, QZERO)


def _nz(c):
    if is_rat(c):
        return c != 0
    return bool(c)


def _one_like(c):
    if is_rat(c):
        return Q(1)
    return c * 0 + 1


def _rat_sqrt(c):
    c = as_q(c)
    if c < 0:
        raise ExactAlgebraError("sqrt of a negative rational")
    p, q = int(c.numerator), int(c.denominator)
    from math import isqrt

    rp, rq = isqrt(p), isqrt(q)
    if rp * rp != p or rq * rq != q:
        raise ExactAlgebraError(f"{c} is not a rational square")
    return Q(rp, rq)


def series_expand(f, point, trunc):
    """Expand a RatFunc (or Poly) at a rational point or infinity.

    At a finite point p the chart is t = z - p; at infinity it is t = 1/z.
    """
    if isinstance(f, Poly):
        f = RatFunc(f)
    if is_inf(point):
        num = f.num.reverse()
        den = f.den.reverse()
        # z^deg factors: f(1/t) = t^(deg den - deg num) * num_rev/den_rev
        lead_shift = f.den.degree - f.num.degree
        num_s = _poly_series(num, OO, trunc - min(lead_shift, 0) + 1)
        den_s = _poly_series(den, OO, trunc - min(lead_shift, 0) + 1)
        res = num_s * den_s.inverse()
        shifted = LocalSeries(OO, {k + lead_shift: c
                                   for k, c in res.coeffs.items()},
                              res.trunc + lead_shift)
        return shifted.truncate(min(shifted.trunc, trunc))
    p = as_q(point)
    num = f.num.shift(p)
    den = f.den.shift(p)
    # pull out the zero at t=0 of the denominator
    v = 0
    while den.coeff(v) == 0:
        v += 1
    den_u = Poly(den.coeffs[v:])
    num_s = _poly_series(num, p, trunc + v + 1)
    den_s = _poly_series(den_u, p, trunc + v + 1)
    res = num_s * den_s.inverse()
    shifted = LocalSeries(p, {k - v: c for k, c in res.coeffs.items()},
                          res.trunc - v)
    return shifted.truncate(min(shifted.trunc, trunc))


def _poly_series(poly, point, trunc):
    return LocalSeries(point, {k: c for k, c in enumerate(poly.coeffs)},
                       trunc)


def series_expand_log(f, point, trunc, log_stripped=False):
    """Expand a LogFunction at a point, dropping additive branch constants.

    Log terms centered away from the expansion point contribute their Taylor
    tail (the branch constant log(p - a) is omitted; only derivatives of the
    result are meaningful at order 0).  A log term centered at the point
    itself is an error unless log_stripped is set, in which case the log(t)
    summand is removed and the rest expanded.
    """
    from .ratfunc import LogFunction

    if not isinstance(f, LogFunction):
        return series_expand(f, point, trunc)
    out = series_expand(f.rational_part, point, trunc)
    for loc, c in f.log_terms:
        # expand d/dz of the log term, move to the local chart, strip the
        # t^{-1} piece (a c'*log t summand of the function), integrate back
        if is_inf(loc):
            der = RatFunc(Poly.const(-c), Poly.x())
        else:
            der = RatFunc(Poly.const(c), Poly([-loc, 1]))
        if is_inf(point):
            # d/dt = -z^2 d/dz in the chart t = 1/z
            der_t = series_expand(der, point, trunc + 1)
            der_t = der_t * LocalSeries(point, {-2: Q(-1)}, trunc + 1)
        else:
            der_t = series_expand(der, point, trunc - 1)
        res = der_t.coeffs.pop(-1, QZERO)
        if res and not log_stripped:
            raise ExactAlgebraError(
                "expanding a log term at its own branch point")
        der_t = LocalSeries(der_t.point, der_t.coeffs,
                            min(der_t.trunc, trunc - 1))
        out = out + der_t.antiderivative()
    return out


def residue_at(f, p):
    """Residue of the 1-form f(z) dz at p (rational point or infinity)."""
    if isinstance(f, Poly):
        f = RatFunc(f)
    if f.is_zero():
        return QZERO
    if is_inf(p):
        # f dz = -sum c_k t^{k-2} dt in the chart t = 1/z
        s = series_expand(f, OO, 2)
        return -s.coeff(1)
    return series_expand(f, p, 0).coeffs.get(-1, QZERO)


def principal_part(series):
    """Polar coefficients [(k, coeff of t^{-k})], highest pole order first."""
    out = [(-k, c) for k, c in series.coeffs.items() if k < 0]
    out.sort(key=lambda t: -t[0])
    return out
