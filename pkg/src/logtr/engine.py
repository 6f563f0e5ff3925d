"""Residue recursion for (log) topological recursion and its checkers.

Differentials are stored by their coefficient with respect to dz_1...dz_n as
multivariate rational functions.  The recursion computes, for each cell
(g, n) with 2g-2+n <= budget, the sum over ramification points of the
kernel residue; in log mode each (g, 1) cell additionally receives the
prescribed polar parts at the log-vital points.
"""

from __future__ import annotations

import itertools

from .multivar import MPoly, MRat, rename_vars
from .poly import Poly
from .ratfunc import RatFunc
from .scalar import (OO, Q, QZERO, ExactAlgebraError, TruncationError, as_q,
                     is_inf, is_rat, point_str)
from .series import LocalSeries, principal_part, series_expand
from .soperator import d_dx, inv_s_series


class SymDifferential:
    """Coefficient of omega^{(g)}_n with respect to dz_1 ... dz_n."""

    __slots__ = ("g", "n", "value")

    def __init__(self, g, n, value):
        self.g = g
        self.n = n
        self.value = value  # MRat with nvars = n; None for the (0,1) cell

    def __repr__(self):
        return f"SymDifferential(g={self.g}, n={self.n})"

    def is_symmetric(self):
        if self.n <= 1 or self.value is None:
            return True
        base = self.value
        for i in range(self.n - 1):
            swapped = _swap_slots(base, i, i + 1)
            if not (swapped - base).is_zero():
                return False
        return True


def _swap_slots(w, i, j):
    mapping = {k: k for k in range(w.nvars)}
    mapping[i], mapping[j] = j, i
    return rename_vars(w, w.nvars, mapping)


class DifferentialFamily:

    __slots__ = ("curve", "budget", "log_mode", "table")

    def __init__(self, curve, budget, log_mode, table):
        self.curve = curve
        self.budget = budget
        self.log_mode = log_mode
        self.table = table

    def value(self, g, n):
        """MRat coefficient of omega^{(g)}_n; the (0,1) cell has none."""
        return self.table[(g, n)].value

    def cells(self):
        return sorted(self.table, key=lambda gn: (2 * gn[0] - 2 + gn[1], gn))


class CheckReport:

    def __init__(self):
        self.entries = []

    def add(self, ok, label, detail=""):
        self.entries.append((ok, label, detail))

    @property
    def ok(self):
        return all(e[0] for e in self.entries)

    def failures(self):
        return [e for e in self.entries if not e[0]]

    def __repr__(self):
        n_bad = len(self.failures())
        return f"CheckReport(ok={self.ok}, checks={len(self.entries)}, " \
               f"failures={n_bad})"


def bergman(nvars=2, i=0, j=1):
    """Coefficient of B = dz_i dz_j / (z_i - z_j)^2."""
    return MRat(nvars, MPoly.const(nvars, 1), {("diag", i, j): 2})


# ----------------------------------------------------------------------
# germ substitution

def mrat_on_series(w, subs, trunc):
    """Expand an MRat after substituting coordinate series for some slots.

    subs maps slot index -> LocalSeries (the value of that coordinate as a
    series in the local parameter t); remaining slots stay symbolic inside
    the coefficients.  Returns a LocalSeries with MRat coefficients.
    """
    n = w.nvars
    label = next(iter(subs.values())).point
    pows = {}

    def spow(i, k):
        cache = pows.setdefault(i, {1: subs[i]})
        if k not in cache:
            cache[k] = (subs[i] ** k).truncate(
                min((subs[i] ** k).trunc, trunc))
        return cache[k]

    out = LocalSeries.zero(label, trunc)
    for e, q in w.num.terms.items():
        ser = None
        rest = [0] * n
        for i, k in enumerate(e):
            if not k:
                continue
            if i in subs:
                s = spow(i, k)
                ser = s if ser is None else ser * s
            else:
                rest[i] = k
        cf = MRat(n, MPoly(n, {tuple(rest): q}))
        if ser is None:
            out = out + LocalSeries.const(label, cf, trunc)
        else:
            out = out + ser.scale(cf)
    passive = MRat.const(n, 1)
    for atom, m in w.den.items():
        avs = _atom_var_set(atom)
        if not (avs & set(subs)):
            passive = passive * MRat(n, _atom_poly(atom, n)) ** m
            continue
        val = _atom_on_series(atom, subs, label, trunc, n)
        out = out * (val.inverse() ** m)
    if not passive.is_const() or passive.const_value() != 1:
        out = out.scale(passive.inverse())
    return out.truncate(min(out.trunc, trunc))


def _atom_var_set(atom):
    if atom[0] == "diag":
        return {atom[1], atom[2]}
    return {atom[1]}


def _atom_poly(atom, n):
    from .multivar import atom_mpoly

    return atom_mpoly(atom, n)


def _atom_on_series(atom, subs, label, trunc, n):
    kind = atom[0]
    if kind == "lin":
        _, i, c = atom
        return subs[i] - as_q(c)
    if kind == "diag":
        _, i, j = atom
        if i in subs and j in subs:
            return subs[i] - subs[j]
        if i in subs:
            return subs[i] + LocalSeries.const(
                label, MRat.var(n, j) * (-1), trunc)
        return (-subs[j]) + LocalSeries.const(label, MRat.var(n, i), trunc)
    _, i, coeffs = atom
    return Poly(list(coeffs))(subs[i])


# ----------------------------------------------------------------------
# the recursion

def eo_recursion(curve, budget):
    if budget >= 1 and not curve.ramification:
        raise ExactAlgebraError(
            "curve has no ramification points; only the unstable cells "
            "exist (use the log recursion for purely logarithmic curves)")
    return _recurse(curve, budget, log_mode=False)


def logtr_recursion(curve, budget):
    return _recurse(curve, budget, log_mode=True)


def _recurse(curve, budget, log_mode):
    table = {
        (0, 1): SymDifferential(0, 1, None),
        (0, 2): SymDifferential(0, 2, bergman()),
    }
    germ_cache = {}
    for chi in range(1, budget + 1):
        for g in range(0, (chi + 1) // 2 + 1):
            n = chi + 2 - 2 * g
            if n < 1:
                continue
            val = _cell_residues(curve, table, g, n, germ_cache)
            if log_mode and n == 1 and g >= 1:
                corr = logtr_correction(curve, g)
                if not corr.is_zero():
                    val = val + MRat.from_univar(1, 0, corr)
            table[(g, n)] = SymDifferential(g, n, val)
    return DifferentialFamily(curve, budget, log_mode, table)


def _cell_residues(curve, table, g, n, germ_cache):
    m = n - 1
    NV = n + 2
    da, db = n, n + 1
    total = MRat.const(NV, 0)
    T = curve.series_order
    for rp in curve.ramification:
        p = rp.location
        sigma = rp.deck
        xprime = rp.x_series.derivative()
        dy_germ = rp.y_series - rp.y_series.compose(sigma)
        sigma_prime = sigma.derivative()
        denom = (dy_germ * xprime).scale(Q(2))
        kd = denom.inverse()
        z0 = MRat.var(NV, 0)
        base_a = LocalSeries(p, {0: z0 - as_q(p), 1: Q(-1)}, T)
        inv_a = base_a.inverse()
        base_b = LocalSeries(p, {0: z0 - as_q(p)}, T) - sigma
        inv_b = base_b.inverse()
        kernel = (inv_a - inv_b) * kd

        e_sum = None
        # the (g-1, n+1) term with arguments (z, sigma(z), spectators)
        if g >= 1:
            cell = table[(g - 1, n + 1)]
            if (g - 1, n + 1) == (0, 2):
                dd = (_coord_series(rp, T) - _coord_series_sigma(rp, T))
                term = (dd.inverse() ** 2) * sigma_prime
            else:
                mapping = {0: da, 1: db}
                for j in range(1, m + 1):
                    mapping[j + 1] = j
                lifted = rename_vars(cell.value, NV, mapping)
                term = mrat_on_series(
                    lifted, {da: _coord_series(rp, T),
                             db: _coord_series_sigma(rp, T)}, T)
                term = term * sigma_prime
            e_sum = term
        # splitting terms, (0,1) pieces excluded
        spect = list(range(1, m + 1))
        for g1 in range(0, g + 1):
            g2 = g - g1
            for r in range(0, m + 1):
                for I1 in itertools.combinations(spect, r):
                    I2 = tuple(s for s in spect if s not in I1)
                    n1, n2 = 1 + len(I1), 1 + len(I2)
                    if (g1, n1) == (0, 1) or (g2, n2) == (0, 1):
                        continue
                    if (g1, n1) not in table or (g2, n2) not in table:
                        continue
                    ga = _germ(table[(g1, n1)], rp, I1, "z", NV, da, db, T,
                               germ_cache)
                    gb = _germ(table[(g2, n2)], rp, I2, "s", NV, da, db, T,
                               germ_cache)
                    term = ga * gb * sigma_prime
                    e_sum = term if e_sum is None else e_sum + term
        if e_sum is None:
            continue
        integrand = kernel * e_sum
        res = integrand.coeff(-1)
        if is_rat(res):
            res = MRat.const(NV, res)
        total = total + res
    return rename_vars(total, n, {i: i for i in range(n)})


def _coord_series(rp, T):
    """z = p + t as a series."""
    return LocalSeries(rp.location, {0: as_q(rp.location), 1: Q(1)}, T)


def _coord_series_sigma(rp, T):
    """z = p + sigma(t) as a series."""
    s = rp.deck
    coeffs = dict(s.coeffs)
    coeffs[0] = coeffs.get(0, QZERO) + as_q(rp.location)
    return LocalSeries(rp.location, coeffs, min(T, s.trunc))


def _germ(cell, rp, spect_slots, side, NV, da, db, T, cache):
    """Series of omega^{(g1)}_{n1}(z_or_sigma, spectators)/dz at the point.

    The sigma side carries no extra measure factor here; callers multiply
    by sigma' once per recursion term as the d(sigma z) factor.
    """
    key = (id(cell), rp.location, tuple(spect_slots), side, NV)
    if key in cache:
        return cache[key]
    mapping = {0: da}
    for k, s in enumerate(spect_slots):
        mapping[k + 1] = s
    lifted = rename_vars(cell.value, NV, mapping)
    sub = _coord_series(rp, T) if side == "z" else _coord_series_sigma(rp, T)
    out = mrat_on_series(lifted, {da: sub}, T)
    cache[key] = out
    return out


# ----------------------------------------------------------------------
# log corrections

def vital_polar(curve, vital, g):
    """Polar part at a vital point of the order-2g hbar coefficient of the
    dressed log germ, as a rational dz-coefficient vanishing at infinity."""
    a = vital.location
    alpha = vital.alpha
    coeffs = inv_s_series(2 * g)
    f = RatFunc(Poly.const(1), Poly([-as_q(a), 1]))
    cur = f / curve.dx  # d/dx applied to log(z - a), once
    for _ in range(2 * g - 1):
        cur = d_dx(cur, curve.x)
    form = cur * curve.dx * (coeffs[2 * g] * alpha ** (2 * g - 1))
    s = series_expand(form, a, 0)
    out = RatFunc.const(0)
    for k, c in principal_part(s):
        out = out + RatFunc(Poly.const(c), Poly([-as_q(a), 1]) ** k)
    return out


def logtr_correction(curve, g):
    """Total correction 1-form added to the (g, 1) cell, g >= 1."""
    if g < 1:
        raise ExactAlgebraError("the log correction starts at genus 1")
    out = RatFunc.const(0)
    for v in curve.logvital:
        out = out + vital_polar(curve, v, g)
    return out


# ----------------------------------------------------------------------
# checkers

def _w01_germ(rp, side):
    """Germ of y dx / dt at z = p + t (side 'z') or z = p + sigma(t)."""
    xprime = rp.x_series.derivative()
    if side == "z":
        return rp.y_series * xprime
    # d x(sigma(t)) / dt = x'(t) since x is deck invariant
    return rp.y_series.compose(rp.deck) * xprime


def check_linear_loop(fam):
    """Each omega(z_J, z) + omega(z_J, sigma(z)) must vanish to first order
    at every ramification point."""
    rep = CheckReport()
    curve = fam.curve
    T = curve.series_order
    for (g, n) in fam.cells():
        cell = fam.table[(g, n)]
        for rp in curve.ramification:
            if cell.value is None:
                germ = _w01_germ(rp, "z") + _w01_germ(rp, "s")
            else:
                NV = n + 1
                da = n
                mapping = {n - 1: da}
                for j in range(n - 1):
                    mapping[j] = j
                lifted = rename_vars(cell.value, NV, mapping)
                gz = mrat_on_series(lifted, {da: _coord_series(rp, T)}, T)
                gs = mrat_on_series(
                    lifted, {da: _coord_series_sigma(rp, T)}, T)
                germ = gz + gs * rp.deck.derivative()
            bad = {k: c for k, c in germ.coeffs.items() if k < 1}
            label = f"LLE g={g} n={n} p={point_str(rp.location)}"
            if germ.trunc < 2:
                rep.add(False, label, "insufficient truncation")
            else:
                rep.add(not bad, label,
                        "" if not bad else f"low-order terms {sorted(bad)}")
    return rep


def check_quadratic_loop(fam):
    """Original-form quadratic loop equations (the linear ones being
    established, this is equivalent to the symmetrized form)."""
    rep = CheckReport()
    curve = fam.curve
    T = curve.series_order
    cache = {}
    for (g, n_parent) in fam.cells():
        m = n_parent - 1
        NV = m + 3
        da, db = m + 1, m + 2
        for rp in curve.ramification:
            sigma_prime = rp.deck.derivative()
            total = None
            if g >= 1 and (g - 1, m + 2) in fam.table:
                cell = fam.table[(g - 1, m + 2)]
                if (g - 1, m + 2) == (0, 2):
                    dd = (_coord_series(rp, T)
                          - _coord_series_sigma(rp, T))
                    term = (dd.inverse() ** 2) * sigma_prime
                else:
                    mapping = {0: da, 1: db}
                    for j in range(1, m + 1):
                        mapping[j + 1] = j
                    lifted = rename_vars(cell.value, NV, mapping)
                    term = mrat_on_series(
                        lifted, {da: _coord_series(rp, T),
                                 db: _coord_series_sigma(rp, T)}, T)
                    term = term * sigma_prime
                total = term
            spect = list(range(1, m + 1))
            for g1 in range(0, g + 1):
                g2 = g - g1
                for r in range(0, m + 1):
                    for I1 in itertools.combinations(spect, r):
                        I2 = tuple(s for s in spect if s not in I1)
                        n1, n2 = 1 + len(I1), 1 + len(I2)
                        if (g1, n1) not in fam.table or \
                                (g2, n2) not in fam.table:
                            continue
                        ga = _qle_germ(fam, g1, n1, I1, rp, "z", NV,
                                       da, T, cache)
                        gb = _qle_germ(fam, g2, n2, I2, rp, "s", NV,
                                       da, T, cache)
                        if fam.table[(g2, n2)].value is not None:
                            # d(sigma z) measure; the (0,1) germ has it
                            # built in already
                            gb = gb * sigma_prime
                        term = ga * gb
                        total = term if total is None else total + term
            label = f"QLE g={g} m={m} p={point_str(rp.location)}"
            if total is None:
                continue
            bad = {k: c for k, c in total.coeffs.items() if k < 2}
            if total.trunc < 3:
                rep.add(False, label, "insufficient truncation")
            else:
                rep.add(not bad, label,
                        "" if not bad else
                        f"low-order terms {sorted(bad)}")
    return rep


def _qle_germ(fam, g1, n1, spect_slots, rp, side, NV, da, T, cache):
    cell = fam.table[(g1, n1)]
    if cell.value is None:
        return _w01_germ(rp, side)
    key = ("qle", id(cell), rp.location, tuple(spect_slots), side, NV)
    if key in cache:
        return cache[key]
    mapping = {0: da}
    for k, s in enumerate(spect_slots):
        mapping[k + 1] = s
    lifted = rename_vars(cell.value, NV, mapping)
    sub = _coord_series(rp, T) if side == "z" else _coord_series_sigma(rp, T)
    out = mrat_on_series(lifted, {da: sub}, T)
    cache[key] = out
    return out


def check_projection(fam, log_mode=False):
    """Pole locations: stable cells may only have poles at ramification
    points; in log mode the (g, 1) cells additionally carry exactly the
    prescribed polar parts at the vital points."""
    rep = CheckReport()
    curve = fam.curve
    ram_locs = {as_q(rp.location) for rp in curve.ramification}
    vital_locs = {as_q(v.location): v for v in curve.logvital}
    for (g, n) in fam.cells():
        if 2 * g - 2 + n <= 0:
            continue
        w = fam.value(g, n)
        label_base = f"projection g={g} n={n}"
        if w.is_zero():
            ok_vital = not (log_mode and n == 1 and g >= 1
                            and any(not vital_polar(curve, v, g).is_zero()
                                    for v in curve.logvital))
            rep.add(ok_vital, label_base,
                    "" if ok_vital else "missing vital polar part")
            continue
        problems = []
        for atom, mult in w.den.items():
            kind = atom[0]
            if kind == "diag":
                problems.append(f"diagonal pole {atom}")
            elif kind == "up":
                problems.append(f"irrational pole locus {atom}")
            else:
                loc = as_q(atom[2])
                if loc in ram_locs:
                    continue
                if log_mode and n == 1 and loc in vital_locs:
                    continue
                problems.append(
                    f"pole at {point_str(loc)} in slot {atom[1]}")
        # no pole at infinity in any slot
        for i in range(n):
            o = w.order_in(i, OO)
            if o is not None and o < 2:
                problems.append(f"pole at oo in slot {i}")
        if n == 1:
            f = w.to_ratfunc(0)
            for loc, v in vital_locs.items():
                expected = vital_polar(curve, v, g) if (log_mode and g >= 1) \
                    else RatFunc.const(0)
                diff = f - expected
                o = diff.order_at(loc)
                if o is not None and o < 0:
                    problems.append(
                        f"polar part mismatch at {point_str(loc)}")
        rep.add(not problems, label_base, "; ".join(problems))
    return rep
