"""x-y duality and symplectic duality: involution, closed small-case
forms, factorization, group property, and the determinantal check."""

import random

import pytest

from logtr.curve import build_curve
from logtr.duality import (check_determinantal, group_property_check,
                           lemma_identity_check, psi_tilde_default,
                           symplectic_dual, symplectic_factorization_check,
                           w_factorization_check, xy_dual, xy_dual_direct_w)
from logtr.engine import (DifferentialFamily, SymDifferential, bergman,
                          eo_recursion, logtr_recursion)
from logtr.extended import _shift_series, extended_w, trivial_family
from logtr.multivar import MRat
from logtr.poly import Poly
from logtr.psi import PsiData, PsiFunction
from logtr.ratfunc import LogFunction, RatFunc
from logtr.scalar import Q
from logtr.series import LocalSeries
from logtr.soperator import d_dx, inv_s_series


def same_fams(a, b):
    cells = sorted(set(a.table) | set(b.table))
    for gn in cells:
        if gn == (0, 1):
            continue
        va, vb = a.table[gn].value, b.table[gn].value
        assert (va - vb).is_zero(), gn


@pytest.fixture(scope="module")
def airy():
    return build_curve(RatFunc(Poly([0, 0, Q(1, 2)])), RatFunc.z())


@pytest.fixture(scope="module")
def airy_fam(airy):
    return eo_recursion(airy, 2)


def test_involution_airy(airy_fam):
    d = xy_dual(airy_fam, 2)
    same_fams(xy_dual(d, 2), airy_fam)


def test_dual_one_one_small_case(airy, airy_fam):
    """The (1,1) dual cell against the explicit second-order formula
    built from the deck-free regularized kernel."""
    xp, yp = airy.dx, airy.dy
    T = 6
    dcoeffs = {}
    cur = xp
    fact = Q(1)
    for k in range(1, T):
        if k > 1:
            cur = cur.derivative()
        fact = fact / k
        if not cur.is_zero():
            dcoeffs[k] = cur * fact
    delta_x = LocalSeries(Q(0), dcoeffs, T)
    reg = (LocalSeries(Q(0), {-2: RatFunc.const(1)}, T)
           - (_shift_series(xp, T).scale(xp) * (delta_x.inverse() ** 2)))
    regf = reg.coeff(0)
    if not isinstance(regf, RatFunc):
        regf = RatFunc.const(regf)

    def ddy(f):
        return d_dx(f, airy.y)

    w11 = airy_fam.value(1, 1).to_ratfunc(0)
    corr = regf / (xp * yp * 2) - ddy(ddy(yp / xp)) * Q(1, 24)
    expected = -w11 + corr.derivative()
    got = xy_dual(airy_fam, 2).value(1, 1).to_ratfunc(0)
    assert (got - expected).is_zero()


def test_log_curve_duality_triangle():
    # (z, log z) recursion, its dual, and the trivial family on (log z, z)
    zlog = build_curve(RatFunc.z(), LogFunction.log(0))
    fam_log = logtr_recursion(zlog, 2)
    dlog = xy_dual(fam_log, 2)
    for gn, cell in dlog.table.items():
        if gn == (0, 1):
            continue
        if gn == (0, 2):
            assert (cell.value - bergman()).is_zero()
        else:
            assert cell.value.is_zero(), gn
    logz = build_curve(LogFunction.log(0), RatFunc.z())
    triv = trivial_family(logz, 2)
    dtriv = xy_dual(triv, 2)
    same_fams(dtriv, fam_log)
    same_fams(xy_dual(dtriv, 2), triv)


@pytest.mark.parametrize("n", [1, 2])
def test_direct_w_duality(airy_fam, n):
    B = 2
    for fam in (airy_fam,
                trivial_family(build_curve(LogFunction.log(0), RatFunc.z()),
                               B)):
        dualfam = xy_dual(fam, B)
        w = extended_w(fam, n, B - n + 1)
        wd = xy_dual_direct_w(w)
        wdd = xy_dual_direct_w(wd)
        for k in set(w.terms) | set(wdd.terms):
            a = w.terms.get(k, MRat.const(n, 0))
            b = wdd.terms.get(k, MRat.const(n, 0))
            assert (a - b).is_zero(), k
        assert wd.delta == (n == 1)
        wg = extended_w(dualfam, n, B - n + 1)
        for k in set(wg.terms) | set(wd.terms):
            a = wg.terms.get(k, MRat.const(n, 0))
            b = wd.terms.get(k, MRat.const(n, 0))
            assert (a - b).is_zero(), k
        assert wg.delta == wd.delta


def test_zero_psi_is_identity(airy, airy_fam):
    psi0 = PsiData(PsiFunction())
    same_fams(symplectic_dual(airy_fam, psi0, 2), airy_fam)


def log_theta_instance(fam, reco_x, reco_y, budget):
    """Reinterpret a family so that x -> x + log y realizes the x-y dual
    (signs flip per slot, the curve data is replaced)."""
    reco = build_curve(reco_x, reco_y)
    table = {(0, 1): SymDifferential(0, 1, None)}
    for gn, cell in fam.table.items():
        if cell.value is not None:
            table[gn] = SymDifferential(gn[0], gn[1],
                                        cell.value * Q(-1) ** gn[1])
    return DifferentialFamily(reco, budget, False, table)


def test_xy_duality_as_log_theta_symplectic_dual(airy):
    psi_log = PsiData(PsiFunction(log_terms=[(0, 1)]), "dressed")
    triv_zz = trivial_family(build_curve(RatFunc.z(), RatFunc.z()), 2)
    famB = log_theta_instance(triv_zz,
                              LogFunction(RatFunc.const(0), [(0, -1)]),
                              RatFunc(Poly([0, 0, 1])), 2)
    same_fams(symplectic_dual(famB, psi_log, 2), xy_dual(triv_zz, 2))
    airy2 = eo_recursion(airy, 2)
    famB2 = log_theta_instance(airy2,
                               LogFunction(RatFunc.const(0), [(0, -2)]),
                               RatFunc(Poly([0, 0, 0, Q(1, 2)])), 2)
    same_fams(symplectic_dual(famB2, psi_log, 2), xy_dual(airy2, 2))


@pytest.fixture(scope="module")
def case2_fam():
    curve = build_curve(LogFunction.log(0), LogFunction.log(1))
    return logtr_recursion(curve, 2)


def test_factorization_linear_psi(case2_fam):
    psi_lin = PsiData(PsiFunction(Poly([0, 1])), "same")
    assert symplectic_factorization_check(case2_fam, psi_lin, 2).ok
    assert w_factorization_check(case2_fam, psi_lin, 2, n_max=2).ok


def test_factorization_rational_psi(airy_fam):
    psi_poly = PsiData(PsiFunction(Poly([0, 0, 0, Q(1, 3)])), "same")
    assert symplectic_factorization_check(airy_fam, psi_poly, 2).ok


def test_factorization_dressed_log_psi():
    logz = build_curve(LogFunction.log(0), RatFunc.z())
    trivlog = trivial_family(logz, 2)
    psi_mon = PsiData(PsiFunction(log_terms=[(1, 1)]), "dressed")
    assert symplectic_factorization_check(trivlog, psi_mon, 2).ok
    assert w_factorization_check(trivlog, psi_mon, 2, n_max=2).ok


def test_group_property(case2_fam):
    psi1 = PsiData(PsiFunction(Poly([0, 1])), "same")
    psi2 = PsiData(PsiFunction(Poly([0, 2])))
    assert group_property_check(case2_fam, psi1, psi2, 2).ok


def _rand_rf(rng):
    num = Poly([Q(rng.randint(-3, 3)) for _ in range(rng.randint(1, 3))]
               or [Q(1)])
    if num.is_zero():
        num = Poly.const(1)
    den = Poly([Q(rng.randint(-2, 2)) for _ in range(rng.randint(1, 2))])
    if den.is_zero():
        den = Poly.const(1)
    return RatFunc(num, den)


def test_exchange_identity_random():
    rng = random.Random(7)
    for trial in range(10):
        r = rng.randint(0, 3)
        A = {p: _rand_rf(rng) for p in range(rng.randint(1, 3))}
        B = {p: _rand_rf(rng) for p in range(rng.randint(1, 3))}
        xdag = _rand_rf(rng)
        while xdag.derivative().is_zero():
            xdag = _rand_rf(rng)
        y = _rand_rf(rng)
        while y.derivative().is_zero():
            y = _rand_rf(rng)
        assert lemma_identity_check(r, A, B, xdag, y, 4).ok, trial


def test_psi_tilde_default(airy):
    logz = build_curve(LogFunction.log(0), RatFunc.z())
    pd = psi_tilde_default(logz, PsiFunction(log_terms=[(1, -1)]), order=4)
    assert pd.tilde_mode == "dressed"
    expect = RatFunc(Poly.const(Q(-1, 24)), Poly([1, -2, 1]))
    assert (pd.tilde_hbar_part(2) - expect).is_zero()
    pd2 = psi_tilde_default(airy, PsiFunction(Poly([0, 0, 1])), order=4)
    assert pd2.tilde_mode == "same"


def test_determinantal(airy):
    triv_z = trivial_family(build_curve(RatFunc.z(), RatFunc.z()), 2)
    assert check_determinantal(triv_z, 2).ok
    fam = eo_recursion(airy, 2)
    assert check_determinantal(fam, 2).ok
    table = dict(fam.table)
    table[(1, 2)] = SymDifferential(1, 2, MRat.const(2, 0))
    mut = DifferentialFamily(airy, 2, False, table)
    rep = check_determinantal(mut, 2)
    assert not rep.ok and rep.failures()
