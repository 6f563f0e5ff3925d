"""Hypergeometric closed formulas, the three enumeration oracles, and
the shape-class instance checker."""

import itertools

import pytest

from logtr.curve import build_curve
from logtr.duality import symplectic_dual
from logtr.engine import eo_recursion, logtr_recursion
from logtr.extended import trivial_family
from logtr.hurwitz import (OSData, HurwitzTable, Partition, _mrat_affine,
                           family_instance, hurwitz_extract, monotone_oracle,
                           monotone_table, os_closed_formula, os_family,
                           os_tau_oracle, partitions_of, schur_eval,
                           unramified_formula)
from logtr.multivar import MRat
from logtr.poly import Poly
from logtr.psi import PsiData, PsiFunction
from logtr.ratfunc import LogFunction, RatFunc
from logtr.scalar import Q, ExactAlgebraError


def same_fams(a, b):
    cells = sorted(set(a.table) | set(b.table))
    for gn in cells:
        if gn == (0, 1):
            continue
        va = a.table[gn].value if gn in a.table else None
        vb = b.table[gn].value if gn in b.table else None
        assert va is not None and vb is not None, gn
        assert (va - vb).is_zero(), gn


MONOTONE = PsiData(PsiFunction(log_terms=[(1, -1)]), "dressed")


# ---------------------------------------------------------------------
# closed formulas against the direct recursion

def test_unramified_rational_y():
    airy = build_curve(RatFunc(Poly([0, 0, Q(1, 2)])), RatFunc.z())
    same_fams(unramified_formula(airy, 2), eo_recursion(airy, 2))


def test_unramified_rational_y_log_x():
    curve = build_curve(LogFunction(RatFunc.const(0), [(0, 1), (1, 1)]),
                        RatFunc.z())
    same_fams(unramified_formula(curve, 2), logtr_recursion(curve, 2))


def test_unramified_log_y():
    curve = build_curve(RatFunc.z(), LogFunction.log(0))
    same_fams(unramified_formula(curve, 2), logtr_recursion(curve, 2))


def test_os_equals_symplectic_dual_of_trivial():
    base = build_curve(LogFunction.log(0), RatFunc.z())
    triv = trivial_family(base, 2)
    sd = symplectic_dual(triv, MONOTONE.inverse(), 2)
    data = OSData(RatFunc.z(), MONOTONE)
    osf = os_family(data, 2)
    same_fams(osf, sd)
    cell = os_closed_formula(data, 1, 1)
    assert (cell.value - osf.table[(1, 1)].value).is_zero()


def test_os_reduction_to_airy():
    psi_kw = PsiData(PsiFunction(Poly([0, 0, Q(-1, 2)]), [(0, 1)]), "dressed")
    osf = os_family(OSData(RatFunc.z(), psi_kw), 2)
    airy = build_curve(RatFunc(Poly([0, 0, Q(1, 2)])), RatFunc.z())
    same_fams(osf, eo_recursion(airy, 2))


def test_os_reduction_to_log_y():
    from logtr.soperator import inv_s_series
    xlog2 = build_curve(LogFunction(RatFunc.const(0), [(0, 1), (2, 1)]),
                        LogFunction.log(0))
    invs = inv_s_series(8)
    # x-hat correction at the vital point a = 2: the dressing series of
    # the extra log applied through D = z d/dz
    yhat = {}
    for k in (1, 2):
        der = RatFunc(Poly.x()) * RatFunc(Poly.const(1), Poly([-2, 1]))
        for _ in range(2 * k - 1):
            der = RatFunc(Poly.x()) * der.derivative()
        yhat[2 * k] = der * (-invs[2 * k])
    data = OSData(LogFunction(RatFunc.const(0), [(2, -1)]),
                  PsiData(PsiFunction(Poly([0, 1])), "same"),
                  y_hat_parts=yhat)
    osf = os_family(data, 2)
    unr = unramified_formula(xlog2, 2)
    same_fams(osf, unr)
    same_fams(unr, logtr_recursion(xlog2, 2))


# ---------------------------------------------------------------------
# partitions, Schur evaluation, tables

def test_partitions_of():
    assert partitions_of(4) == [(4,), (3, 1), (2, 2), (2, 1, 1),
                                (1, 1, 1, 1)] or \
        sorted(partitions_of(4)) == sorted([(4,), (3, 1), (2, 2), (2, 1, 1),
                                            (1, 1, 1, 1)])
    assert partitions_of(3, cap=2) == [(2, 1), (1, 1, 1)] or \
        all(max(p) <= 2 for p in partitions_of(3, cap=2))


def test_partition_cells():
    lam = Partition((2, 1))
    assert sorted(lam.cells()) == [(1, 1), (1, 2), (2, 1)]
    assert lam.size == 3


def test_schur_normalization():
    # s_(1) = t_1 and s_(2) + s_(1,1) = t_1^2 / 2 ... checked numerically
    t = [Q(5), Q(7)]    # t_1 = 5, t_2 = 7
    s1 = schur_eval((1,), t)
    assert s1 == Q(5)
    # p-to-t conversion: h_2 = (t_1^2 + 2 t_2)/2 with t_k = p_k / k
    s2 = schur_eval((2,), t)
    s11 = schur_eval((1, 1), t)
    assert s2 + s11 == Q(25)
    assert s2 - s11 == Q(14)


def test_table_merge_conflict():
    a = HurwitzTable("closed-formula")
    a.set(0, (2, 1), Q(1, 2))
    b = HurwitzTable("tau-oracle")
    b.set(0, (1, 2), Q(1, 2))
    merged = a.merge(b)
    assert merged.get(0, (2, 1)) == Q(1, 2)
    assert merged.provenance == ("closed-formula", "tau-oracle")
    c = HurwitzTable("permutation-oracle")
    c.set(0, (2, 1), Q(3))
    with pytest.raises(ExactAlgebraError):
        merged.merge(c)


# ---------------------------------------------------------------------
# the permutation oracle against direct enumeration

def brute_transitive_monotone(d, k, profile):
    """Count monotone transposition factorizations by brute force."""
    import math
    perms = list(itertools.permutations(range(d)))
    transpositions = [(a, b) for b in range(d) for a in range(b)]
    count = 0
    for seq in itertools.product(transpositions, repeat=k):
        if any(seq[i][1] > seq[i + 1][1] for i in range(k - 1)):
            continue
        perm = list(range(d))
        for a, b in seq:
            perm[a], perm[b] = perm[b], perm[a]
        lengths = []
        seen = [False] * d
        for s in range(d):
            if seen[s]:
                continue
            ln, j = 0, s
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                ln += 1
            lengths.append(ln)
        if tuple(sorted(lengths, reverse=True)) != profile:
            continue
        # transitivity of the group generated by the transpositions
        parent = list(range(d))

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for a, b in seq:
            parent[find(a)] = find(b)
        if len({find(v) for v in range(d)}) == 1:
            count += 1
    return count


@pytest.mark.parametrize("d,k,profile", [
    (3, 2, (3,)), (3, 3, (2, 1)), (3, 4, (3,)),
    (4, 3, (4,)), (4, 4, (3, 1)), (4, 4, (2, 2)),
])
def test_monotone_oracle_brute_force(d, k, profile):
    assert monotone_oracle(d, k, profile) == \
        brute_transitive_monotone(d, k, profile)


def test_monotone_oracle_rejects_large_degree():
    with pytest.raises(ExactAlgebraError):
        monotone_oracle(9, 2)


# ---------------------------------------------------------------------
# the oracle triangle

def test_oracle_triangle_monotone_small():
    data = OSData(RatFunc.z(), MONOTONE, vev=True)
    fam = os_family(data, 2, n_max=3)
    extract = hurwitz_extract(data, fam, 3)
    tau = os_tau_oracle(data, 3, 2, n=3)
    perm = monotone_table(3, 2, n=3)
    merged = extract.merge(tau).merge(perm)
    assert len(merged.provenance) == 3
    shared = set(extract.entries) & set(perm.entries)
    assert shared
    # a couple of fixed values as regression anchors
    assert merged.get(0, (1,)) == 1
    assert merged.get(0, (3,)) == 2
    assert merged.get(0, (1, 1, 1)) == 8


def test_spin_extraction_vs_tau():
    psi = PsiData(PsiFunction(Poly([0, 0, Q(1, 2)])), "same")
    data = OSData(RatFunc.z(), psi, vev=True)
    fam = os_family(data, 2, n_max=3)
    extract = hurwitz_extract(data, fam, 3)
    tau = os_tau_oracle(data, 3, 2, n=3)
    merged = extract.merge(tau)
    assert set(extract.entries) & set(tau.entries)


# ---------------------------------------------------------------------
# affine pullback helper

def test_mrat_affine():
    f = RatFunc(Poly([1, 2]), Poly([-1, 0, 1]))
    w = MRat.from_univar(2, 0, f) * MRat.from_univar(2, 1, f)
    moved = _mrat_affine(w, Q(2), Q(-3))
    sub = RatFunc(Poly([-3, 2]))
    expect = f(sub)  # composition via __call__ on a RatFunc argument
    if not isinstance(expect, RatFunc):
        expect = RatFunc.const(expect)
    direct = MRat.from_univar(2, 0, expect) * MRat.from_univar(2, 1, expect)
    assert (moved - direct).is_zero()


# ---------------------------------------------------------------------
# shape-class instances

def test_family_instance_valid_cases():
    logz = LogFunction.log(0)
    c, p, bad = family_instance("I", logz, RatFunc.z(),
                                PsiFunction(log_terms=[(1, 1)]))
    assert not bad and p.tilde_mode == "dressed"
    c, p, bad = family_instance("II", logz, LogFunction.log(1),
                                PsiFunction(Poly([0, 1])))
    assert not bad
    c, p, bad = family_instance("III", logz, LogFunction.log(2),
                                PsiFunction(exp_gamma=1,
                                            exp_poly=Poly([0, 1])))
    assert not bad


def test_family_instance_violations():
    logz = LogFunction.log(0)
    # nonlinear psi in the linear-psi class
    _, _, bad = family_instance("II", logz, LogFunction.log(1),
                                PsiFunction(Poly([0, 0, 1])))
    assert "psi must be linear" in bad
    # non-integer gamma/alpha in the exponential class
    _, _, bad = family_instance("III", logz, LogFunction.log(2).scale(2),
                                PsiFunction(exp_gamma=1,
                                            exp_poly=Poly([0, 1])))
    assert any("integrality" in v or "rejected" in v for v in bad)
