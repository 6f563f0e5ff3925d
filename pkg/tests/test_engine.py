"""The recursion engine: cell layout, loop equations, projection
property, and the logarithmic corrections."""

from logtr.curve import build_curve
from logtr.engine import (DifferentialFamily, SymDifferential, bergman,
                          check_linear_loop, check_projection,
                          check_quadratic_loop, eo_recursion, logtr_recursion)
from logtr.multivar import MRat
from logtr.poly import Poly
from logtr.ratfunc import LogFunction, RatFunc
from logtr.scalar import Q
from logtr.soperator import inv_s_series


def airy_family(budget=3):
    curve = build_curve(RatFunc(Poly([0, 0, Q(1, 2)])), RatFunc.z())
    return eo_recursion(curve, budget)


def compare_families(a, b):
    cells = set(a.table) | set(b.table)
    for gn in cells:
        if gn == (0, 1):
            continue
        va = a.table[gn].value
        vb = b.table[gn].value
        assert (va - vb).is_zero(), gn


def test_cell_layout():
    fam = airy_family(3)
    assert set(fam.table) == {(0, 1), (0, 2), (0, 3), (0, 4), (0, 5),
                              (1, 1), (1, 2), (1, 3), (2, 1)}
    assert fam.table[(0, 1)].value is None
    assert (fam.value(0, 2) - bergman()).is_zero()


def test_symmetry():
    fam = airy_family(3)
    for (g, n), cell in fam.table.items():
        if cell.value is not None:
            assert cell.is_symmetric(), (g, n)


def test_airy_checks():
    fam = airy_family(3)
    assert check_linear_loop(fam).ok
    assert check_quadratic_loop(fam).ok
    assert check_projection(fam).ok


def test_logtr_reduces_to_plain_recursion():
    curve = build_curve(RatFunc(Poly([0, 0, Q(1, 2)])), RatFunc.z())
    compare_families(logtr_recursion(curve, 3), eo_recursion(curve, 3))


def test_log_family_g_one_cells():
    # on (z, log z) the only nonzero cells beyond (0,2) sit at n = 1
    curve = build_curve(RatFunc.z(), LogFunction.log(0))
    fam = logtr_recursion(curve, 3)
    invs = inv_s_series(6)
    for g in (1, 2):
        der = LogFunction.log(0).derivative()
        for _ in range(2 * g - 1):
            der = der.derivative()
        assert (fam.value(g, 1).to_ratfunc(0) - der * invs[2 * g]).is_zero()
    for (g, n), cell in fam.table.items():
        if n >= 2 and (g, n) != (0, 2):
            assert cell.value.is_zero(), (g, n)


def test_log_correction_with_ramification():
    # x = z^2/2 - z ramifies at 1; y = log z has a vital point at 0
    curve = build_curve(RatFunc(Poly([0, -1, Q(1, 2)])), LogFunction.log(0))
    fam = logtr_recursion(curve, 2)
    assert fam.log_mode
    assert check_linear_loop(fam).ok
    assert check_quadratic_loop(fam).ok
    assert check_projection(fam, log_mode=True).ok
    # the correction genuinely changes the family
    plain = eo_recursion(curve, 2)
    assert not (fam.value(1, 1) - plain.value(1, 1)).is_zero()


def test_checks_detect_mutilation():
    fam = airy_family(2)
    table = dict(fam.table)
    table[(1, 1)] = SymDifferential(1, 1, MRat.var(1, 0))
    bad = DifferentialFamily(fam.curve, 2, False, table)
    assert not check_projection(bad).ok
