"""Dense univariate polynomials over exact rationals."""

from __future__ import annotations

from .scalar import Q, QONE, QZERO, as_q, is_rat, ExactAlgebraError


class Poly:
    """Univariate polynomial, coefficients ascending by degree.

    Immutable by convention; the coefficient tuple never carries a trailing
    zero unless the polynomial is zero (empty tuple).
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [as_q(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    # -- constructors -------------------------------------------------

    @staticmethod
    def const(c):
        return Poly([as_q(c)])

    @staticmethod
    def x():
        return Poly([0, 1])

    @staticmethod
    def monomial(k, c=1):
        return Poly([0] * k + [as_q(c)])

    # -- basic structure ----------------------------------------------

    @property
    def degree(self):
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def coeff(self, k):
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return QZERO

    @property
    def lead(self):
        if not self.coeffs:
            return QZERO
        return self.coeffs[-1]

    def __eq__(self, other):
        if is_rat(other):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        if not self.coeffs:
            return "Poly(0)"
        parts = []
        for k, c in enumerate(self.coeffs):
            if c:
                parts.append(f"{c}*z^{k}" if k else f"{c}")
        return "Poly(" + " + ".join(parts) + ")"

    # -- ring operations ----------------------------------------------

    def __add__(self, other):
        if is_rat(other):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly([self.coeff(k) + other.coeff(k) for k in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other):
        if is_rat(other):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if is_rat(other):
            c = as_q(other)
            return Poly([a * c for a in self.coeffs])
        if not isinstance(other, Poly):
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            return Poly()
        out = [QZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if b:
                    out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            raise ExactAlgebraError("negative power of a Poly")
        out = Poly.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __divmod__(self, other):
        if is_rat(other):
            other = Poly.const(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lead = other.lead
        if len(rem) <= dq:
            return Poly(), self
        quot = [QZERO] * (len(rem) - dq)
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k]
            if not c:
                continue
            f = c / lead
            quot[k - dq] = f
            for j in range(dq + 1):
                rem[k - dq + j] -= f * other.coeffs[j]
        return Poly(quot), Poly(rem[:dq])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def exact_div(self, other):
        q, r = divmod(self, other)
        if not r.is_zero():
            raise ExactAlgebraError("inexact polynomial division")
        return q

    # -- calculus and evaluation --------------------------------------

    def derivative(self):
        return Poly([k * c for k, c in enumerate(self.coeffs)][1:])

    def __call__(self, x):
        """Horner evaluation; works for any ring element (Q, Poly, RatFunc, MRat)."""
        if not self.coeffs:
            return QZERO if is_rat(x) else x * 0
        acc = self.coeffs[-1]
        if not is_rat(x):
            acc = x * 0 + acc
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    def shift(self, c):
        """Taylor shift: returns p(z + c)."""
        return self(Poly([as_q(c), 1]))

    def reverse(self):
        """Coefficient reversal z^deg * p(1/z)."""
        return Poly(list(reversed(self.coeffs)))

    def monic(self):
        if self.is_zero():
            return self
        return self * (1 / self.lead)

    # -- gcd and factorization helpers --------------------------------

    def gcd(self, other):
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic() if not a.is_zero() else a

    def squarefree_part(self):
        if self.degree <= 0:
            return Poly.const(1)
        g = self.gcd(self.derivative())
        return self.exact_div(g).monic()

    def squarefree_decomposition(self):
        """Yun's algorithm: list of (factor, multiplicity) with the factors
        monic, squarefree and pairwise coprime; product recovers self/lead."""
        p = self.monic()
        if p.degree <= 0:
            return []
        out = []
        g = p.gcd(p.derivative())
        w = p.exact_div(g)
        y = p.derivative().exact_div(g)
        m = 1
        while w.degree >= 1:
            z = y - w.derivative()
            f = w.gcd(z) if not z.is_zero() else w
            if f.degree >= 1:
                out.append((f.monic(), m))
            w = w.exact_div(f) if f.degree >= 1 else w
            if f.degree >= 1:
                y = z.exact_div(f)
            else:
                y = z
            m += 1
        return out

    def _int_scaled(self):
        """Return integer coefficient list (primitive up to sign)."""
        from math import gcd, lcm

        den = 1
        for c in self.coeffs:
            den = lcm(den, int(c.denominator))
        ints = [int(c * den) for c in self.coeffs]
        g = 0
        for v in ints:
            g = gcd(g, abs(v))
        if g:
            ints = [v // g for v in ints]
        return ints

    def rational_roots(self):
        """All rational roots with multiplicities, as a dict root -> mult."""
        roots = {}
        p = self
        while p.degree >= 1:
            r = p._one_rational_root()
            if r is None:
                break
            m = 0
            lin = Poly([-r, 1])
            while True:
                q, rem = divmod(p, lin)
                if not rem.is_zero():
                    break
                p = q
                m += 1
            roots[r] = roots.get(r, 0) + m
        return roots, p

    def _one_rational_root(self):
        if self.degree < 1:
            return None
        if self.coeff(0) == 0:
            return Q(0)
        ints = self._int_scaled()
        a0, an = abs(ints[0]), abs(ints[-1])
        for p in _divisors(a0):
            for q in _divisors(an):
                for s in (1, -1):
                    cand = Q(s * p, q)
                    if self(cand) == 0:
                        return cand
        return None


def _divisors(n):
    n = abs(n)
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    return sorted(out)
