"""Genus-zero spectral curves: (x, y) on CP^1 with derived local structure.

build_curve finds the (simple, rational) ramification points of x, computes
deck transformation series there, and classifies the points where dy has a
simple pole with nonzero residue while dx stays regular; those drive the
logarithmic correction of the recursion.
"""

from __future__ import annotations

from .poly import Poly
from .psi import PsiData, PsiFunction
from .ratfunc import LogFunction, RatFunc
from .scalar import (OO, Q, QZERO, ExactAlgebraError, as_q, is_inf, is_rat,
                     point_str)
from .series import (LocalSeries, residue_at, series_expand,
                     series_expand_log)


class RamPoint:
    """A simple zero of dx with its deck transformation germ."""

    __slots__ = ("location", "deck", "x_series", "y_series", "trunc")

    def __init__(self, location, deck, x_series, y_series, trunc):
        self.location = location
        self.deck = deck
        self.x_series = x_series  # germ of x - x(p), order 2, no constants
        self.y_series = y_series  # germ of y, additive constants dropped
        self.trunc = trunc

    def __repr__(self):
        return f"RamPoint({point_str(self.location)})"


class LogVitalPoint:
    """Simple pole of dy, residue 1/alpha != 0, with dx regular there."""

    __slots__ = ("location", "alpha")

    def __init__(self, location, alpha):
        self.location = location
        self.alpha = alpha

    @property
    def inverse_residue(self):
        return self.alpha

    def __repr__(self):
        return f"LogVitalPoint({point_str(self.location)}, alpha={self.alpha})"


class SpectralCurve:

    __slots__ = ("x", "y", "dx", "dy", "ramification", "logvital",
                 "series_order")

    def __init__(self, x, y, dx, dy, ramification, logvital, series_order):
        self.x = x
        self.y = y
        self.dx = dx
        self.dy = dy
        self.ramification = ramification
        self.logvital = logvital
        self.series_order = series_order

    def __repr__(self):
        return (f"SpectralCurve(ram={[r.location for r in self.ramification]},"
                f" vital={[(v.location, v.alpha) for v in self.logvital]})")


DEFAULT_SERIES_ORDER = 20


def _as_logfunction(f):
    if isinstance(f, LogFunction):
        return f
    if isinstance(f, (RatFunc, Poly)) or is_rat(f):
        return LogFunction.rational(f if isinstance(f, RatFunc)
                                    else RatFunc(f) if isinstance(f, Poly)
                                    else RatFunc.const(f))
    raise ExactAlgebraError(f"cannot use {type(f).__name__} as a coordinate")


def build_curve(x, y, series_order=DEFAULT_SERIES_ORDER):
    x = _as_logfunction(x)
    y = _as_logfunction(y)
    dx = x.derivative()
    dy = y.derivative()
    if dx.is_zero():
        raise ExactAlgebraError("dx is identically zero")
    if dy.is_zero():
        raise ExactAlgebraError("dy is identically zero")
    ram = _ramification_scan(x, y, dx, dy, series_order)
    vital = _vital_scan(dx, dy)
    return SpectralCurve(x, y, dx, dy, ram, vital, series_order)


def _ramification_scan(x, y, dx, dy, series_order):
    roots, rest = dx.num.rational_roots()
    if rest.degree >= 1:
        raise ExactAlgebraError(
            "dx has zeros outside the rational numbers; such curves are "
            "not supported")
    # a zero of the 1-form dx at infinity (chart order >= 1) is unsupported
    if dx.order_at(OO) is not None and dx.order_at(OO) - 2 >= 1:
        raise ExactAlgebraError("ramification at infinity is not supported")
    out = []
    for p, mult in sorted(roots.items()):
        if mult != 1:
            raise ExactAlgebraError(f"dx has a non-simple zero at {p}")
        if dy.order_at(p) is not None and dy.order_at(p) > 0:
            raise ExactAlgebraError(
                f"dx and dy share a zero at {p}")
        if dy.order_at(p) is not None and dy.order_at(p) < 0:
            raise ExactAlgebraError(
                f"y is singular at the ramification point {p}")
        out.append(_make_ram_point(x, y, p, series_order))
    return out


def _make_ram_point(x, y, p, trunc):
    # germ of x - x(p): log terms contribute analytic tails only
    xs = series_expand_log(x, p, trunc + 2)
    xs = LocalSeries(xs.point, {k: c for k, c in xs.coeffs.items() if k != 0},
                     xs.trunc)
    if xs.order() != 2:
        raise ExactAlgebraError(
            f"x does not look like a double cover near {p}")
    c2 = xs.coeff(2)
    # v(t) = sqrt((x - x(p))/c2), an odd-friendly coordinate with v^2*c2 = x
    v = (xs * (1 / c2)).sqrt()
    sigma = v.reversion().compose(-v)
    ys = series_expand_log(y, p, trunc)
    ys = LocalSeries(ys.point, {k: c for k, c in ys.coeffs.items() if k != 0},
                     ys.trunc)
    return RamPoint(p, sigma, xs, ys, trunc)


def _vital_scan(dx, dy):
    poles, rest, _ = dy.pole_points()
    if rest.degree >= 1:
        # poles of dy at irrational points: they can never be vital for the
        # supported curves only if dx is singular there too; refuse otherwise
        g = rest.gcd(dx.den.squarefree_part())
        if g.degree != rest.degree:
            raise ExactAlgebraError(
                "dy has irrational simple poles where dx is regular; "
                "such vital points are not supported")
    out = []
    for p, order in sorted(poles.items()):
        if order != 1:
            continue
        res = residue_at(dy, p)
        if not res:
            continue
        if dx.order_at(p) is not None and dx.order_at(p) < 0:
            continue
        out.append(LogVitalPoint(p, 1 / res))
    # infinity: dy form has order (order of coefficient at oo) - 2
    o = dy.order_at(OO)
    if o is not None and o - 2 == -1:
        res = residue_at(dy, OO)
        dx_o = dx.order_at(OO)
        dx_regular = dx_o is not None and dx_o - 2 >= 0
        if res and dx_regular:
            raise ExactAlgebraError(
                "a log-vital point at infinity is not supported")
    return out


def xy_swap_curve(c):
    return build_curve(c.y, c.x, c.series_order)


# ----------------------------------------------------------------------
# psi composed with y

def log_of_ratfunc(f, coeff):
    """coeff * log(f(z)) as a LogFunction, additive constant dropped.

    Requires the zeros and poles of f to be rational; the constant
    coeff*log(lead) never matters downstream since only derivatives and
    polar germs of the result are consumed.
    """
    terms = []
    for poly, sign in ((f.num, 1), (f.den, -1)):
        roots, rest = poly.rational_roots()
        if rest.degree >= 1:
            raise ExactAlgebraError(
                "log of a rational function with irrational zeros or poles")
        for r, m in roots.items():
            terms.append((r, coeff * sign * m))
    return LogFunction(RatFunc.const(0), terms)


def compose_psi_y(psi, y):
    """psi(y(z)) as a LogFunction; validated per supported family shape."""
    y = _as_logfunction(y)
    if y.is_rational():
        # rational y: T(y) rational, log terms become logs of rational fns
        R = y.rational_part
        out = LogFunction.rational(psi.rational(R))
        for b, c in psi.log_terms:
            out = out + log_of_ratfunc(R - b, c)
        if psi.exp_poly is not None and not psi.exp_poly.is_zero():
            raise ExactAlgebraError(
                "exponential psi needs a pure-log y")
        return out
    # y carries log terms: only a linear rational part of psi survives
    T = psi.rational
    if T.num.degree > 1 or T.den.degree > 0:
        raise ExactAlgebraError(
            "nonlinear rational psi on a log-type y is not supported")
    if psi.log_terms:
        raise ExactAlgebraError("log psi on a log-type y is not supported")
    k1 = T.num.coeff(1)
    k0 = T.num.coeff(0)
    out = y.scale(k1) + LogFunction.rational(RatFunc.const(k0))
    if psi.exp_poly is not None and not psi.exp_poly.is_zero():
        out = out + LogFunction.rational(exp_of_y(psi, y))
    return out


def exp_of_y(psi, y):
    """E(e^{gamma*y(z)}) as a RatFunc; y must be a pure log combination
    with every gamma/alpha_i an integer."""
    if not y.rational_part.is_const():
        raise ExactAlgebraError(
            "exponential psi needs y with no nonconstant rational part")
    if y.rational_part.const_value():
        raise ExactAlgebraError(
            "exponential psi with a constant offset in y is not supported")
    gamma = psi.exp_gamma
    w = RatFunc.const(1)
    for loc, c in y.log_terms:
        e = gamma * c
        if e.denominator != 1:
            raise ExactAlgebraError(
                "gamma/alpha is not an integer; exponential psi rejected")
        k = int(e)
        if is_inf(loc):
            base = RatFunc(Poly.const(1), Poly.x())
        else:
            base = RatFunc(Poly([-loc, 1]))
        w = w * base ** k
    return psi.exp_poly(w)


def symplectic_transform_curve(c, psi_data):
    """x -> x + psi(y), y unchanged; revalidates the curve."""
    psi = psi_data.psi if isinstance(psi_data, PsiData) else psi_data
    if psi.is_zero():
        return c
    x_new = c.x + compose_psi_y(psi, c.y)
    return build_curve(x_new, c.y, c.series_order)
