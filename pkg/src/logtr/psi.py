"""Transformation data for x -> x + psi(y).

A PsiFunction is psi(theta) = T(theta) + sum c_i log(theta - b_i)
+ E(exp(gamma*theta)) with T rational, E a polynomial without constant term.
PsiData couples psi with its deformation partner psi-tilde, which by default
is psi with every log term dressed by 1/(beta*S(beta*hbar*d_theta)) (where
c = 1/beta), and psi itself when there are no log terms.
"""

from __future__ import annotations

from .poly import Poly
from .ratfunc import LogFunction, RatFunc
from .scalar import Q, QZERO, ExactAlgebraError, as_q, is_rat
from .soperator import inv_s_series, s_series


class PsiFunction:

    __slots__ = ("rational", "log_terms", "exp_gamma", "exp_poly")

    def __init__(self, rational=None, log_terms=(), exp_gamma=None,
                 exp_poly=None):
        if rational is None:
            rational = RatFunc.const(0)
        if is_rat(rational):
            rational = RatFunc.const(rational)
        if isinstance(rational, Poly):
            rational = RatFunc(rational)
        self.rational = rational
        self.log_terms = tuple((as_q(b), as_q(c)) for b, c in log_terms)
        if exp_poly is not None and exp_poly.coeff(0):
            raise ExactAlgebraError("exponential part must omit the constant")
        self.exp_gamma = None if exp_gamma is None else as_q(exp_gamma)
        self.exp_poly = exp_poly

    def is_zero(self):
        return (self.rational.is_zero() and not self.log_terms
                and (self.exp_poly is None or self.exp_poly.is_zero()))

    def negated(self):
        return PsiFunction(-self.rational,
                           [(b, -c) for b, c in self.log_terms],
                           self.exp_gamma,
                           None if self.exp_poly is None else -self.exp_poly)

    def added(self, other):
        if (self.exp_poly is not None and other.exp_poly is not None
                and self.exp_gamma != other.exp_gamma):
            raise ExactAlgebraError("incompatible exponential parts")
        gamma = self.exp_gamma if self.exp_poly is not None else \
            other.exp_gamma
        ep = None
        if self.exp_poly is not None or other.exp_poly is not None:
            ep = (self.exp_poly or Poly()) + (other.exp_poly or Poly())
        return PsiFunction(self.rational + other.rational,
                           self.log_terms + other.log_terms, gamma, ep)

    def as_logfunction(self):
        """psi as a function of theta, usable when E is absent."""
        if self.exp_poly is not None and not self.exp_poly.is_zero():
            raise ExactAlgebraError("exponential psi has no LogFunction form")
        return LogFunction(self.rational, list(self.log_terms))

    def derivative_theta(self):
        """d psi / d theta as a RatFunc in theta (E-part must be absent)."""
        return self.as_logfunction().derivative()


class PsiData:
    """psi together with the hbar-deformed psi-tilde.

    tilde_mode 'dressed' replaces each log term c*log(theta-b) by
    c/S((1/c) hbar d_theta) log(theta-b); 'same' keeps psi-tilde = psi;
    'explicit' carries user-supplied corrections {even k >= 2: RatFunc}
    on top of psi (so that psi-tilde at hbar = 0 is psi itself).
    """

    __slots__ = ("psi", "tilde_mode", "explicit_parts")

    def __init__(self, psi, tilde_mode="auto", explicit_parts=None):
        if tilde_mode == "auto":
            tilde_mode = "dressed" if psi.log_terms else "same"
        if tilde_mode not in ("dressed", "same", "explicit"):
            raise ExactAlgebraError(f"unknown tilde mode {tilde_mode!r}")
        if tilde_mode == "explicit":
            parts = {}
            for k, f in (explicit_parts or {}).items():
                if k < 2 or k % 2:
                    raise ExactAlgebraError(
                        "explicit psi-tilde corrections must sit at even "
                        "positive hbar powers")
                if is_rat(f):
                    f = RatFunc.const(f)
                if not f.is_zero():
                    parts[k] = f
            self.explicit_parts = parts
        else:
            if explicit_parts:
                raise ExactAlgebraError(
                    "explicit corrections need tilde_mode='explicit'")
            self.explicit_parts = None
        self.psi = psi
        self.tilde_mode = tilde_mode

    def inverse(self):
        if self.tilde_mode == "explicit":
            return PsiData(self.psi.negated(), "explicit",
                           {k: -f for k, f in self.explicit_parts.items()})
        return PsiData(self.psi.negated(), self.tilde_mode)

    def added(self, other, order=None):
        """Composition data for applying self then other.

        The combined deformation is the sum of the two psi-tildes; when the
        modes do not combine structurally an explicit table up to hbar^order
        is materialized (order is then required).
        """
        psi = self.psi.added(other.psi)
        modes = {self.tilde_mode, other.tilde_mode}
        if modes == {"same"}:
            return PsiData(psi, "same")
        if modes == {"dressed"} or (
                "dressed" in modes and all(
                    p.tilde_mode == "dressed" or not p.psi.log_terms
                    for p in (self, other))):
            # dressing acts term by term, so a plain union of log terms
            # (kept unmerged by PsiFunction) adds the corrections exactly
            return PsiData(psi, "dressed")
        if order is None:
            raise ExactAlgebraError(
                "combining these deformation modes needs an hbar order for "
                "the explicit table")
        parts = {}
        for k in range(2, order + 1, 2):
            f = self.tilde_hbar_part(k) + other.tilde_hbar_part(k)
            if not f.is_zero():
                parts[k] = f
        return PsiData(psi, "explicit", parts)

    # -- hbar grading of psi-tilde ------------------------------------

    def tilde_hbar_part(self, k):
        """[hbar^k] psi-tilde, as a function of theta.

        k = 0 gives psi itself (a LogFunction in theta); even k >= 2 give
        RatFunc corrections; odd k give zero.
        """
        if k == 0:
            return self.psi.as_logfunction()
        if k % 2 or self.tilde_mode == "same":
            return RatFunc.const(0)
        if self.tilde_mode == "explicit":
            return self.explicit_parts.get(k, RatFunc.const(0))
        coeffs = inv_s_series(k)
        out = RatFunc.const(0)
        for b, c in self.psi.log_terms:
            beta = 1 / c
            # c * [t^k] 1/S(beta*t*d_theta) applied to log(theta - b)
            der = RatFunc(Poly.const(c), Poly([-b, 1]))
            for _ in range(k - 1):
                der = der.derivative()
            out = out + der * (coeffs[k] * beta ** k)
        return out

    def tilde_theta_deriv(self, m, k):
        """d^m/d_theta^m of [hbar^k] psi-tilde, as a RatFunc in theta.

        For k = 0 and m = 0 the log terms make this a LogFunction; that
        combination is rejected here (callers use psi directly).
        """
        if k == 0:
            if m == 0:
                raise ExactAlgebraError("use psi.as_logfunction() for (0,0)")
            f = self.psi.derivative_theta()
            for _ in range(m - 1):
                f = f.derivative()
            return f
        f = self.tilde_hbar_part(k)
        for _ in range(m):
            f = f.derivative()
        return f
