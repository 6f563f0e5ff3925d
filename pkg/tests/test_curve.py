"""Curve construction: ramification data, log-vital points, the
x -> x + psi(y) transform and its validation errors."""

import pytest

from logtr.curve import (build_curve, compose_psi_y, log_of_ratfunc,
                         symplectic_transform_curve, xy_swap_curve)
from logtr.poly import Poly
from logtr.psi import PsiData, PsiFunction
from logtr.ratfunc import LogFunction, RatFunc
from logtr.scalar import Q, ExactAlgebraError


def airy():
    return build_curve(RatFunc(Poly([0, 0, Q(1, 2)])), RatFunc.z())


def test_airy_ramification():
    c = airy()
    assert [r.location for r in c.ramification] == [Q(0)]
    assert not c.logvital
    deck = c.ramification[0].deck
    # the deck transformation of z^2/2 at 0 is z -> -z
    assert deck.coeff(1) == -1
    assert all(not deck.coeff(k) for k in range(2, 6))


def test_deck_transformation_nontrivial():
    # x = z^2/2 + z^3/3 ramifies at 0 and -1 with curved decks
    c = build_curve(RatFunc(Poly([0, 0, Q(1, 2), Q(1, 3)])), RatFunc.z())
    assert [r.location for r in c.ramification] == [Q(-1), Q(0)]
    r0 = next(r for r in c.ramification if r.location == 0)
    s = r0.deck
    # sigma(sigma(z)) = z
    comp = s.compose(s)
    assert comp.coeff(1) == 1
    assert all(not comp.coeff(k) for k in range(2, 8))


def test_log_vital_points():
    c = build_curve(RatFunc.z(), LogFunction.log(0))
    assert not c.ramification
    assert [(v.location, v.alpha) for v in c.logvital] == [(Q(0), Q(1))]
    c2 = build_curve(RatFunc.z(), LogFunction(RatFunc.const(0),
                                              [(1, Q(1, 3))]))
    assert c2.logvital[0].alpha == 3


def test_vital_requires_dx_regular():
    # dy has a pole at 0 but so does dx: not a vital point
    c = build_curve(LogFunction.log(0), LogFunction.log(0) + LogFunction.log(1))
    assert [v.location for v in c.logvital] == [Q(1)]


def test_irrational_ramification_rejected():
    with pytest.raises(ExactAlgebraError):
        build_curve(RatFunc(Poly([0, 2, 0, 0, 1])), RatFunc.z())


def test_nonsimple_ramification_rejected():
    with pytest.raises(ExactAlgebraError):
        build_curve(RatFunc(Poly([0, 0, 0, 1])), RatFunc.z())


def test_shared_zero_rejected():
    with pytest.raises(ExactAlgebraError):
        build_curve(RatFunc(Poly([0, 0, 1])), RatFunc(Poly([0, 0, 1])))


def test_log_of_ratfunc():
    f = RatFunc(Poly([-1, 1]), Poly([0, 1]))    # (z-1)/z
    lf = log_of_ratfunc(f, Q(2))
    assert sorted(lf.log_terms) == [(Q(0), Q(-2)), (Q(1), Q(2))]
    with pytest.raises(ExactAlgebraError):
        log_of_ratfunc(RatFunc(Poly([-2, 0, 1])), Q(1))


def test_compose_psi_rational_y():
    psi = PsiFunction(Poly([0, 1]), [(1, Q(1))])
    out = compose_psi_y(psi, RatFunc(Poly([0, 0, 1])))
    assert out.rational_part == RatFunc(Poly([0, 0, 1]))
    assert sorted(out.log_terms) == [(Q(-1), Q(1)), (Q(1), Q(1))]


def test_compose_psi_log_y():
    # linear psi on y = log z just rescales the log
    psi = PsiFunction(Poly([0, Q(3)]))
    out = compose_psi_y(psi, LogFunction.log(0))
    assert out.log_terms == ((Q(0), Q(3)),)
    with pytest.raises(ExactAlgebraError):
        compose_psi_y(PsiFunction(Poly([0, 0, 1])), LogFunction.log(0))


def test_compose_psi_exponential():
    # e^y with y = log z - log(z-1) is z/(z-1)
    psi = PsiFunction(exp_gamma=1, exp_poly=Poly([0, 1]))
    y = LogFunction(RatFunc.const(0), [(0, 1), (1, -1)])
    out = compose_psi_y(psi, y)
    assert out.is_rational()
    assert (out.rational_part
            - RatFunc(Poly([0, 1]), Poly([-1, 1]))).is_zero()
    # gamma/alpha not an integer is rejected
    bad = PsiFunction(exp_gamma=Q(1, 2), exp_poly=Poly([0, 1]))
    with pytest.raises(ExactAlgebraError):
        compose_psi_y(bad, y)


def test_symplectic_transform_curve():
    base = build_curve(LogFunction.log(0), RatFunc.z())
    psi = PsiData(PsiFunction(log_terms=[(1, 1)]), "dressed")
    c = symplectic_transform_curve(base, psi)
    assert (c.x - (LogFunction.log(0) + LogFunction.log(1))).is_zero()
    # x gains a ramification point where dx = 1/z + 1/(z-1) vanishes
    assert [r.location for r in c.ramification] == [Q(1, 2)]


def test_xy_swap():
    c = xy_swap_curve(airy())
    assert (c.x - LogFunction.rational(RatFunc.z())).is_zero()
    assert [r.location for r in c.ramification] == []
