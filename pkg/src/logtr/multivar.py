"""Multivariate rational functions with structured denominators.

Differentials in n points only ever have poles along coordinate hyperplanes
z_i = c, along diagonals z_i = z_j, or along univariate irreducible loci
q(z_i) = 0 with q free of rational roots.  MRat exploits this: the numerator
is a sparse multivariate polynomial over Q and the denominator is a
multiset of "atoms" of exactly these three shapes.  This keeps zero-testing,
substitution, per-variable series expansion and residues exact and cheap.

Atoms:
    ('lin', i, c)        the factor (z_i - c), c rational
    ('diag', i, j), i<j  the factor (z_i - z_j)
    ('up', i, coeffs)    a monic univariate polynomial in z_i (coefficient
                         tuple, ascending) with no rational roots
"""

from __future__ import annotations

from math import comb, factorial

from .poly import Poly
from .ratfunc import RatFunc
from .scalar import (OO, Q, QZERO, ExactAlgebraError, as_q, is_inf, is_rat)
from .series import LocalSeries


class MPoly:
    """Sparse polynomial in nvars variables over Q."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars, terms=()):
        self.nvars = nvars
        clean = {}
        src = terms.items() if isinstance(terms, dict) else terms
        for exps, c in src:
            c = as_q(c)
            if c:
                exps = tuple(exps)
                clean[exps] = clean.get(exps, QZERO) + c
        self.terms = {e: c for e, c in clean.items() if c}

    # -- constructors -------------------------------------------------

    @staticmethod
    def const(nvars, c):
        c = as_q(c)
        if not c:
            return MPoly(nvars)
        return MPoly(nvars, {(0,) * nvars: c})

    @staticmethod
    def var(nvars, i):
        e = [0] * nvars
        e[i] = 1
        return MPoly(nvars, {tuple(e): Q(1)})

    @staticmethod
    def from_poly(nvars, i, poly):
        out = {}
        for k, c in enumerate(poly.coeffs):
            if c:
                e = [0] * nvars
                e[i] = k
                out[tuple(e)] = c
        return MPoly(nvars, out)

    # -- structure ----------------------------------------------------

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_const(self):
        return not self.terms or (len(self.terms) == 1
                                  and (0,) * self.nvars in self.terms)

    def const_value(self):
        if not self.is_const():
            raise ExactAlgebraError("not a constant")
        return self.terms.get((0,) * self.nvars, QZERO)

    def __eq__(self, other):
        if is_rat(other):
            other = MPoly.const(self.nvars, other)
        if not isinstance(other, MPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "MPoly(0)"
        bits = []
        for e in sorted(self.terms):
            mono = "*".join(f"z{i}^{k}" for i, k in enumerate(e) if k)
            c = self.terms[e]
            bits.append(f"{c}*{mono}" if mono else f"{c}")
        return "MPoly(" + " + ".join(bits) + ")"

    def degree_in(self, i):
        if not self.terms:
            return -1
        return max(e[i] for e in self.terms)

    def vars_used(self):
        used = set()
        for e in self.terms:
            for i, k in enumerate(e):
                if k:
                    used.add(i)
        return used

    # -- ring operations ----------------------------------------------

    def _coerce(self, other):
        if is_rat(other):
            return MPoly.const(self.nvars, other)
        if isinstance(other, MPoly):
            if other.nvars != self.nvars:
                raise ExactAlgebraError("arity mismatch")
            return other
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = dict(self.terms)
        for e, c in o.terms.items():
            out[e] = out.get(e, QZERO) + c
        return MPoly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return MPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if is_rat(other):
            c = as_q(other)
            return MPoly(self.nvars,
                         {e: v * c for e, v in self.terms.items()})
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, QZERO) + c1 * c2
        return MPoly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k):
        out = MPoly.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- univariate views ---------------------------------------------

    def coeffs_in(self, i):
        """Coefficients as a polynomial in z_i: list of MPoly (ascending),
        each independent of z_i."""
        d = self.degree_in(i)
        buckets = [dict() for _ in range(d + 1)]
        for e, c in self.terms.items():
            k = e[i]
            e0 = e[:i] + (0,) + e[i + 1:]
            buckets[k][e0] = buckets[k].get(e0, QZERO) + c
        return [MPoly(self.nvars, b) for b in buckets]

    def to_poly(self, i):
        """Convert to a univariate Poly in z_i; errors if other vars occur."""
        if self.vars_used() - {i}:
            raise ExactAlgebraError("polynomial is not univariate")
        d = self.degree_in(i)
        return Poly([self.terms.get(
            tuple(k if j == i else 0 for j in range(self.nvars)), QZERO)
            for k in range(d + 1)])

    def deriv(self, i):
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = e[:i] + (e[i] - 1,) + e[i + 1:]
                out[e2] = out.get(e2, QZERO) + c * e[i]
        return MPoly(self.nvars, out)

    def subs_scalar(self, i, c):
        c = as_q(c)
        out = {}
        for e, v in self.terms.items():
            e2 = e[:i] + (0,) + e[i + 1:]
            w = v * c ** e[i]
            out[e2] = out.get(e2, QZERO) + w
        return MPoly(self.nvars, out)

    def subs_var(self, i, j):
        """Substitute z_i -> z_j."""
        out = {}
        for e, v in self.terms.items():
            e2 = list(e)
            e2[j] += e2[i]
            e2[i] = 0
            e2 = tuple(e2)
            out[e2] = out.get(e2, QZERO) + v
        return MPoly(self.nvars, out)

    def eval_all(self, values):
        acc = QZERO
        for e, c in self.terms.items():
            term = c
            for i, k in enumerate(e):
                if k:
                    term = term * as_q(values[i]) ** k
            acc += term
        return acc


# ----------------------------------------------------------------------
# atoms

def atom_mpoly(atom, nvars):
    kind = atom[0]
    if kind == "lin":
        _, i, c = atom
        return MPoly.var(nvars, i) - MPoly.const(nvars, c)
    if kind == "diag":
        _, i, j = atom
        return MPoly.var(nvars, i) - MPoly.var(nvars, j)
    if kind == "up":
        _, i, coeffs = atom
        return MPoly.from_poly(nvars, i, Poly(list(coeffs)))
    raise ExactAlgebraError(f"unknown atom {atom!r}")


def atom_vars(atom):
    if atom[0] == "diag":
        return {atom[1], atom[2]}
    return {atom[1]}


def divide_by_atom(p, atom):
    """Exact quotient p / atom as MPoly, or None if not divisible."""
    kind = atom[0]
    n = p.nvars
    if kind == "lin":
        _, i, c = atom
        cs = p.coeffs_in(i)
        if len(cs) <= 1:
            return None if p else MPoly(n)
        # synthetic division by (z_i - c)
        quot = [None] * (len(cs) - 1)
        carry = MPoly(n)
        for k in range(len(cs) - 1, 0, -1):
            carry = cs[k] + carry * as_q(c) if k != len(cs) - 1 else cs[k]
            quot[k - 1] = carry
        rem = cs[0] + carry * as_q(c)
        if not rem.is_zero():
            return None
        return _from_univar_coeffs(n, i, quot)
    if kind == "diag":
        _, i, j = atom
        zj = MPoly.var(n, j)
        cs = p.coeffs_in(i)
        if len(cs) <= 1:
            return None if p else MPoly(n)
        quot = [None] * (len(cs) - 1)
        carry = MPoly(n)
        for k in range(len(cs) - 1, 0, -1):
            carry = cs[k] + carry * zj if k != len(cs) - 1 else cs[k]
            quot[k - 1] = carry
        rem = cs[0] + carry * zj
        if not rem.is_zero():
            return None
        return _from_univar_coeffs(n, i, quot)
    if kind == "up":
        _, i, coeffs = atom
        q = Poly(list(coeffs))
        cs = p.coeffs_in(i)
        dq = q.degree
        if len(cs) - 1 < dq:
            return None if p else MPoly(n)
        rem = list(cs)
        quot = [MPoly(n)] * (len(cs) - dq)
        for k in range(len(rem) - 1, dq - 1, -1):
            f = rem[k]
            if f.is_zero():
                continue
            quot[k - dq] = f
            for m in range(dq + 1):
                rem[k - dq + m] = rem[k - dq + m] - f * q.coeff(m)
        if any(not r.is_zero() for r in rem[:dq]):
            return None
        return _from_univar_coeffs(n, i, quot)
    raise ExactAlgebraError(f"unknown atom {atom!r}")


def _from_univar_coeffs(nvars, i, coeffs):
    out = MPoly(nvars)
    zi = MPoly.var(nvars, i)
    acc = MPoly(nvars)
    for k in range(len(coeffs) - 1, -1, -1):
        acc = acc * zi + coeffs[k]
    return acc


def factor_numerator(p):
    """Factor an MPoly into (scalar, {atom: mult}); raises if the polynomial
    is not a product of diagonal and univariate factors."""
    n = p.nvars
    if p.is_zero():
        raise ZeroDivisionError("inverting zero")
    atoms = {}
    if p.is_const():
        return p.const_value(), atoms
    # peel diagonal factors
    used = sorted(p.vars_used())
    changed = True
    while changed and not p.is_const():
        changed = False
        used = sorted(p.vars_used())
        for a in range(len(used)):
            for b in range(a + 1, len(used)):
                atom = ("diag", used[a], used[b])
                q = divide_by_atom(p, atom)
                while q is not None:
                    atoms[atom] = atoms.get(atom, 0) + 1
                    p = q
                    changed = True
                    q = divide_by_atom(p, atom)
    scalar = Q(1)
    # split off univariate factors by content extraction
    work = [p]
    while work:
        p = work.pop()
        if p.is_const():
            scalar *= p.const_value()
            continue
        used = sorted(p.vars_used())
        if len(used) == 1:
            i = used[0]
            poly = p.to_poly(i)
            scalar *= poly.lead
            poly = poly.monic()
            roots, rest = poly.rational_roots()
            for r, m in roots.items():
                atom = ("lin", i, r)
                atoms[atom] = atoms.get(atom, 0) + m
            for fac, m in rest.squarefree_decomposition():
                atom = ("up", i, tuple(fac.coeffs))
                atoms[atom] = atoms.get(atom, 0) + m
            continue
        # try to split p = u(z_i) * g(rest) for the first usable variable
        split = None
        for i in used:
            cs = p.coeffs_in(i)
            nzs = [c for c in cs if not c.is_zero()]
            g = nzs[0]
            ratios = []
            ok = True
            for c in cs:
                r = _mpoly_ratio(c, g)
                if r is None:
                    ok = False
                    break
                ratios.append(r)
            if ok:
                split = (i, Poly(ratios), g)
                break
        if split is None:
            raise ExactAlgebraError(
                "numerator does not factor into supported atoms")
        i, upoly, g = split
        work.append(MPoly.from_poly(n, i, upoly))
        work.append(g)
    return scalar, atoms


def _mpoly_ratio(c, g):
    """Scalar r with c = r*g, or None."""
    if c.is_zero():
        return QZERO
    e0, c0 = next(iter(g.terms.items()))
    v = c.terms.get(e0)
    if v is None:
        return None
    r = v / c0
    if c == g * r:
        return r
    return None


class MRat:
    """Quotient of an MPoly by a product of atom powers."""

    __slots__ = ("nvars", "num", "den")

    def __init__(self, nvars, num, den=None):
        if is_rat(num):
            num = MPoly.const(nvars, num)
        if isinstance(num, Poly):
            raise ExactAlgebraError("wrap Poly via MPoly.from_poly")
        self.nvars = nvars
        den = dict(den) if den else {}
        if num.is_zero():
            den = {}
        else:
            # cancel atoms that divide the numerator exactly
            for atom in list(den):
                while den.get(atom, 0) > 0:
                    q = divide_by_atom(num, atom)
                    if q is None:
                        break
                    num = q
                    den[atom] -= 1
                if den.get(atom, 0) == 0:
                    den.pop(atom, None)
        self.num = num
        self.den = den

    # -- constructors -------------------------------------------------

    @staticmethod
    def const(nvars, c):
        return MRat(nvars, MPoly.const(nvars, c))

    @staticmethod
    def var(nvars, i):
        return MRat(nvars, MPoly.var(nvars, i))

    @staticmethod
    def from_univar(nvars, i, f):
        """Lift a univariate RatFunc (or Poly) into variable slot i."""
        if isinstance(f, Poly):
            f = RatFunc(f)
        num = MPoly.from_poly(nvars, i, f.num)
        scalar, atoms = factor_numerator(MPoly.from_poly(nvars, i, f.den)) \
            if f.den.degree >= 1 else (f.den.coeff(0), {})
        return MRat(nvars, num * (1 / scalar), atoms)

    # -- structure ----------------------------------------------------

    def is_zero(self):
        return self.num.is_zero()

    def __bool__(self):
        return bool(self.num)

    def is_const(self):
        return self.num.is_const() and not self.den

    def const_value(self):
        if not self.is_const():
            raise ExactAlgebraError("not a constant")
        return self.num.const_value()

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).is_zero()

    def __hash__(self):
        raise TypeError("MRat is unhashable (equality is semantic)")

    def __repr__(self):
        if not self.den:
            return f"MRat({self.num!r})"
        ds = " * ".join(f"{a}^{m}" if m != 1 else f"{a}"
                        for a, m in sorted(self.den.items(),
                                           key=lambda t: repr(t)))
        return f"MRat({self.num!r} / [{ds}])"

    # -- arithmetic ---------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, MRat):
            if other.nvars != self.nvars:
                raise ExactAlgebraError("arity mismatch")
            return other
        if is_rat(other):
            return MRat.const(self.nvars, other)
        if isinstance(other, MPoly):
            return MRat(self.nvars, other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        den = dict(self.den)
        for a, m in o.den.items():
            den[a] = max(den.get(a, 0), m)
        lift_s = self.num
        for a, m in den.items():
            extra = m - self.den.get(a, 0)
            if extra:
                lift_s = lift_s * atom_mpoly(a, self.nvars) ** extra
        lift_o = o.num
        for a, m in den.items():
            extra = m - o.den.get(a, 0)
            if extra:
                lift_o = lift_o * atom_mpoly(a, self.nvars) ** extra
        return MRat(self.nvars, lift_s + lift_o, den)

    __radd__ = __add__

    def __neg__(self):
        return MRat(self.nvars, -self.num, self.den)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if is_rat(other):
            return MRat(self.nvars, self.num * as_q(other), self.den)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        den = dict(self.den)
        for a, m in o.den.items():
            den[a] = den.get(a, 0) + m
        return MRat(self.nvars, self.num * o.num, den)

    __rmul__ = __mul__

    def inverse(self):
        scalar, atoms = factor_numerator(self.num)
        num = MPoly.const(self.nvars, 1 / scalar)
        for a, m in self.den.items():
            num = num * atom_mpoly(a, self.nvars) ** m
        return MRat(self.nvars, num, atoms)

    def __truediv__(self, other):
        if is_rat(other):
            return self * (1 / as_q(other))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        out = MRat.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- calculus -----------------------------------------------------

    def deriv(self, i):
        out = MRat(self.nvars, self.num.deriv(i), self.den)
        for a, m in self.den.items():
            if i not in atom_vars(a):
                continue
            ap = atom_mpoly(a, self.nvars).deriv(i)
            den = dict(self.den)
            den[a] = m + 1
            out = out + MRat(self.nvars, self.num * ap * (-m), den)
        return out

    # -- substitution and expansion -----------------------------------

    def subs_scalar(self, i, c):
        """Substitute z_i = c (rational); errors on a pole there."""
        c = as_q(c)
        num = self.num.subs_scalar(i, c)
        den = {}
        scalar = Q(1)
        for a, m in self.den.items():
            if i not in atom_vars(a):
                den[a] = den.get(a, 0) + m
                continue
            kind = a[0]
            if kind == "lin":
                v = c - a[2]
                if not v:
                    raise ZeroDivisionError(f"pole at z{i} = {c}")
                scalar *= v ** m
            elif kind == "diag":
                _, p, q = a
                if p == i:
                    # (c - z_q) = -(z_q - c)
                    den_a = ("lin", q, c)
                    den[den_a] = den.get(den_a, 0) + m
                    scalar *= Q(-1) ** m
                else:
                    den_a = ("lin", p, c)
                    den[den_a] = den.get(den_a, 0) + m
            else:
                v = Poly(list(a[2]))(c)
                scalar *= v ** m
        return MRat(self.nvars, num * (1 / scalar), den)

    def subs_var(self, i, j):
        """Substitute z_i = z_j; errors if a (z_i - z_j) pole is present."""
        num = self.num.subs_var(i, j)
        den = {}
        scalar = Q(1)
        for a, m in self.den.items():
            if i not in atom_vars(a):
                den[a] = den.get(a, 0) + m
                continue
            kind = a[0]
            if kind == "lin":
                den_a = ("lin", j, a[2])
                den[den_a] = den.get(den_a, 0) + m
            elif kind == "diag":
                _, p, q = a
                other = q if p == i else p
                if other == j:
                    raise ZeroDivisionError(
                        "diagonal substitution hits a diagonal pole; "
                        "use diagonal_limit")
                lo, hi = min(j, other), max(j, other)
                den_a = ("diag", lo, hi)
                if p == i:
                    sign = 1 if lo == j else -1
                else:
                    sign = 1 if lo == p else -1
                den[den_a] = den.get(den_a, 0) + m
                scalar *= Q(sign) ** m
            else:
                den_a = ("up", j, a[2])
                den[den_a] = den.get(den_a, 0) + m
        return MRat(self.nvars, num * (1 / scalar), den)

    def series_in(self, i, center, trunc):
        """Laurent expansion in z_i at a center, coefficients MRat.

        center is a rational number, OO (chart t = 1/z_i), or ('var', j)
        for expansion along the diagonal z_i = z_j (chart t = z_i - z_j).
        """
        n = self.nvars
        shift = 0  # exact power of t factored out (numerator minus poles)
        factors = []  # unit LocalSeries to multiply
        # how deep the denominator can push the pole at this center
        budget = 0
        for a, m in self.den.items():
            if i in atom_vars(a):
                budget += m * _atom_degree(a)
        if is_inf(center):
            budget += max(0, self.num.degree_in(i))
        T = trunc + budget + 1
        point = OO if is_inf(center) else Q(0)

        num_t, num_shift = _num_series(self.num, i, center, T)
        shift += num_shift
        const_den = MRat.const(n, 1)
        for a, m in self.den.items():
            if i not in atom_vars(a):
                const_den = const_den * MRat(
                    n, atom_mpoly(a, n) ** m)
                continue
            fac, p = _atom_series(a, i, center, T, n)
            shift -= m * p
            factors.append((fac, m))
        out = num_t
        for fac, m in factors:
            inv = fac.inverse().truncate(min(fac.inverse().trunc, T))
            out = out * (inv ** m)
        out = out * const_den.inverse()
        shifted = LocalSeries(point,
                              {k + shift: c for k, c in out.coeffs.items()},
                              out.trunc + shift)
        return shifted.truncate(min(shifted.trunc, trunc))

    def order_in(self, i, center):
        """Valuation in z_i at the center; None if identically zero."""
        if self.is_zero():
            return None
        s = self.series_in(i, center, self._order_probe(i, center))
        o = s.order()
        if o is None:
            raise ExactAlgebraError("order probe truncation too small")
        return o

    def _order_probe(self, i, center):
        # a safe upper bound for the valuation
        if is_inf(center):
            bound = self.num.degree_in(i) + 2
            for a, m in self.den.items():
                if i in atom_vars(a):
                    bound += m * _atom_degree(a)
            return bound
        bound = 1
        for a, m in self.den.items():
            if i in atom_vars(a):
                bound += m * _atom_degree(a)
        for e in self.num.terms:
            bound = max(bound, e[i] + 1)
        return bound

    def residue_in(self, i, center):
        """Residue of self * dz_i at the center (MRat in the other vars)."""
        s = self.series_in(i, center, 0)
        c = s.coeffs.get(-1)
        if is_inf(center):
            # f dz = -sum c_k t^{k-2} dt in t = 1/z
            s = self.series_in(i, center, 2)
            c = s.coeffs.get(1)
            return MRat.const(self.nvars, 0) if c is None else -_as_mrat(
                c, self.nvars)
        return MRat.const(self.nvars, 0) if c is None else _as_mrat(
            c, self.nvars)

    def diagonal_limit(self, i, j):
        """Value of self at z_i = z_j when the diagonal is regular there."""
        s = self.series_in(i, ("var", j), 1)
        o = s.order()
        if o is not None and o < 0:
            raise ZeroDivisionError("pole on the diagonal")
        c = s.coeffs.get(0, QZERO)
        return _as_mrat(c, self.nvars)

    # -- conversions --------------------------------------------------

    def to_ratfunc(self, i):
        """Collapse to a univariate RatFunc in z_i."""
        num = self.num.to_poly(i)
        den = Poly.const(1)
        for a, m in self.den.items():
            av = atom_vars(a)
            if av and av != {i}:
                raise ExactAlgebraError("not univariate")
            den = den * atom_mpoly(a, self.nvars).to_poly(i) ** m
        return RatFunc(num, den)

    def to_scalar(self):
        if self.den:
            # atoms should have cancelled only if numerator is zero
            if self.num.is_zero():
                return QZERO
            raise ExactAlgebraError("not a constant")
        return self.num.const_value()

    def eval_all(self, values):
        """Evaluate at a full rational point."""
        num = self.num.eval_all(values)
        den = Q(1)
        for a, m in self.den.items():
            v = atom_mpoly(a, self.nvars).eval_all(values)
            if not v:
                raise ZeroDivisionError(f"pole of atom {a}")
            den *= v ** m
        return num / den


def rename_vars(f, new_nvars, mapping):
    """Carry an MRat (or MPoly) into a space with new_nvars variables,
    sending old slot i to mapping[i]; slots outside the mapping must be
    unused in f."""
    if isinstance(f, MPoly):
        out = {}
        for e, c in f.terms.items():
            e2 = [0] * new_nvars
            for i, k in enumerate(e):
                if not k:
                    continue
                if i not in mapping:
                    raise ExactAlgebraError(
                        f"variable z{i} used but not mapped")
                e2[mapping[i]] += k
            key = tuple(e2)
            out[key] = out.get(key, QZERO) + c
        return MPoly(new_nvars, out)
    num = rename_vars(f.num, new_nvars, mapping)
    den = {}
    sign = Q(1)
    for a, m in f.den.items():
        kind = a[0]
        if kind == "lin":
            a2 = ("lin", mapping[a[1]], a[2])
        elif kind == "diag":
            i, j = mapping[a[1]], mapping[a[2]]
            if i == j:
                raise ExactAlgebraError("renaming collapses a diagonal atom")
            a2 = ("diag", min(i, j), max(i, j))
            if i > j:
                sign *= Q(-1) ** m
        else:
            a2 = ("up", mapping[a[1]], a[2])
        den[a2] = den.get(a2, 0) + m
    return MRat(new_nvars, num * sign, den)


def _atom_degree(a):
    if a[0] == "up":
        return Poly(list(a[2])).degree
    return 1


def _as_mrat(c, nvars):
    if is_rat(c):
        return MRat.const(nvars, c)
    return c


def _num_series(num, i, center, T):
    """(LocalSeries of the numerator in the chart, exact power shift)."""
    n = num.nvars
    cs = num.coeffs_in(i)
    point = OO if is_inf(center) else Q(0)
    if is_inf(center):
        d = len(cs) - 1
        coeffs = {}
        for k, c in enumerate(cs):
            if not c.is_zero():
                coeffs[d - k] = MRat(n, c)
        return LocalSeries(point, coeffs, T), -d if d >= 0 else 0
    if isinstance(center, tuple) and center[0] == "var":
        s = MRat.var(n, center[1])
    else:
        s = MRat.const(n, as_q(center))
    coeffs = {}
    for k, c in enumerate(cs):
        if c.is_zero():
            continue
        ck = MRat(n, c)
        for m2 in range(0, k + 1):
            term = ck * (comb(k, m2) * s ** (k - m2))
            if m2 in coeffs:
                coeffs[m2] = coeffs[m2] + term
            else:
                coeffs[m2] = term
    return LocalSeries(Q(0), coeffs, T), 0


def _atom_series(atom, i, center, T, nvars):
    """Atom as t^p * unit; returns (unit LocalSeries, p)."""
    kind = atom[0]
    point = OO if is_inf(center) else Q(0)
    one = MRat.const(nvars, 1)
    if is_inf(center):
        if kind == "lin":
            # z_i - c = (1 - c t)/t
            return (LocalSeries(point, {0: one, 1: MRat.const(
                nvars, -atom[2])}, T), -1)
        if kind == "diag":
            _, p, q = atom
            other = q if p == i else p
            sign = 1 if p == i else -1
            zo = MRat.var(nvars, other)
            return (LocalSeries(point, {0: one * sign,
                                        1: zo * (-sign)}, T), -1)
        _, _, coeffs = atom
        qp = Poly(list(coeffs))
        d = qp.degree
        cdict = {}
        for k, c in enumerate(qp.coeffs):
            if c:
                cdict[d - k] = MRat.const(nvars, c)
        return (LocalSeries(point, cdict, T), -d)
    if isinstance(center, tuple) and center[0] == "var":
        j = center[1]
        s = MRat.var(nvars, j)
    else:
        j = None
        s = MRat.const(nvars, as_q(center))
    if kind == "lin":
        _, _, c = atom
        lead = s - c
        if j is None and not lead:
            return (LocalSeries(point, {0: one}, T), 1)
        return (LocalSeries(point, {0: lead, 1: one}, T), 0)
    if kind == "diag":
        _, p, q = atom
        other = q if p == i else p
        sign = 1 if p == i else -1
        if j is not None and other == j:
            # (z_i - z_j) = sign * t
            return (LocalSeries(point, {0: one * sign}, T), 1)
        lead = (s - MRat.var(nvars, other)) * sign
        return (LocalSeries(point, {0: lead, 1: one * sign}, T), 0)
    _, _, coeffs = atom
    qp = Poly(list(coeffs))
    cs = {}
    for k in range(qp.degree + 1):
        # Taylor coefficients of q at the center
        dk = qp
        for _ in range(k):
            dk = dk.derivative()
        val = _poly_at(dk, s) * Q(1, factorial(k))
        if val:
            cs[k] = val
    return (LocalSeries(point, cs, T), 0)


def _poly_at(poly, s):
    acc = None
    for c in reversed(poly.coeffs):
        if acc is None:
            acc = s * 0 + c
        else:
            acc = acc * s + c
    if acc is None:
        return s * 0
    return acc
