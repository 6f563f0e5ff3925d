"""Extended n-point differentials: hypergraph enumeration, the closed
Cauchy-kernel forms for trivial families, and the u -> 0 reduction."""

import itertools
from math import factorial

import pytest

from logtr.curve import build_curve
from logtr.engine import eo_recursion, logtr_recursion
from logtr.extended import (brute_force_aut, enumerate_hypergraphs,
                            extended_w, trivial_family)
from logtr.multivar import MRat
from logtr.poly import Poly
from logtr.ratfunc import LogFunction, RatFunc
from logtr.scalar import Q
from logtr.soperator import inv_s_series, s_series


def test_hypergraph_enumeration_small():
    hs = enumerate_hypergraphs(1, 2)
    assert len(hs) == 3
    by_edges = {h.edges: h.aut for h in hs}
    assert by_edges[()] == 1
    assert by_edges[((0, (0, 0)),)] == 2      # self-loop, swap symmetry
    assert by_edges[((1, (0,)),)] == 1
    hs = enumerate_hypergraphs(2, 2)
    assert len(hs) == 1
    assert hs[0].edges == ((0, (0, 1)),) and hs[0].aut == 1
    hs = enumerate_hypergraphs(1, 0)
    assert len(hs) == 1 and hs[0].edges == ()


@pytest.mark.parametrize("n,budget", [(1, 4), (2, 4), (3, 4)])
def test_aut_order_matches_brute_force(n, budget):
    for h in enumerate_hypergraphs(n, budget):
        assert brute_force_aut(h) == h.aut, h


# ---------------------------------------------------------------------
# independent closed forms for the trivial family (n-cycle Cauchy kernel)

def convolve(d1, d2, cap):
    out = {}
    for (h1, u1), v1 in d1.items():
        for (h2, u2), v2 in d2.items():
            h = h1 + h2
            if h > cap:
                continue
            key = (h, tuple(a + b for a, b in zip(u1, u2)))
            p = v1 * v2
            out[key] = out[key] + p if key in out else p
    return {k: v for k, v in out.items() if not v.is_zero()}


def vertex_table_direct(y, xmode, n, cap):
    """exp(sum_i u_i (S(u_i hbar D) - 1) y(z_i)) expanded termwise;
    D = d/dz for x = z and z d/dz for x = log z."""
    s = s_series(cap)
    derivs = {}
    cur = y
    for k in range(1, cap + 1):
        if xmode == "z":
            cur = cur.derivative()
        else:
            cur = RatFunc(Poly.x()) * cur.derivative()
        derivs[k] = cur
    table = {(0, (0,) * n): MRat.const(n, 1)}
    for i in range(n):
        for k in range(1, cap // 2 + 1):
            f = derivs[2 * k]
            if f.is_zero():
                continue
            lift = MRat.from_univar(n, i, f) * s[2 * k]
            expo = {(0, (0,) * n): MRat.const(n, 1)}
            power = MRat.const(n, 1)
            j = 1
            while j * 2 * k <= cap:
                power = power * lift
                us = [0] * n
                us[i] = j * (2 * k + 1)
                expo[(j * 2 * k, tuple(us))] = power * Q(1, factorial(j))
                j += 1
            table = convolve(table, expo, cap)
    return table


def n_cycles(n):
    if n == 1:
        return [(0,)]
    out = []
    for p in itertools.permutations(range(n)):
        seen = set()
        i = 0
        for _ in range(n):
            i = p[i]
            seen.add(i)
        if len(seen) == n:
            out.append(p)
    return out


def u_monomial(n, i, k):
    us = [0] * n
    us[i] = k
    return tuple(us)


def kernel_cycle_table(sigma, xmode, n, cap):
    table = {(0, (0,) * n): MRat.const(n, 1)}
    for i, j in enumerate(sigma):
        if i == j:
            continue
        d = MRat.var(n, i) - MRat.var(n, j)
        dinv = d.inverse()
        if xmode == "z":
            # 1/(z_i - z_j + (u_i + u_j) hbar / 2)
            fac = {}
            for k in range(0, cap + 1):
                body = dinv ** (k + 1) * Q((-1) ** k, 2 ** k)
                for a in range(k + 1):
                    c = Q(factorial(k), factorial(a) * factorial(k - a))
                    us = [0] * n
                    us[i] += a
                    us[j] += k - a
                    key = (k, tuple(us))
                    t = body * c
                    fac[key] = fac[key] + t if key in fac else t
        else:
            # 1/(e^{u_i hbar/2} z_i - e^{-u_j hbar/2} z_j)
            g = {}
            for k in range(1, cap + 1):
                c = Q(1, 2 ** k * factorial(k))
                g[(k, u_monomial(n, i, k))] = MRat.var(n, i) * c
                key = (k, u_monomial(n, j, k))
                t = MRat.var(n, j) * (c * Q(-1) ** (k + 1))
                g[key] = g[key] + t if key in g else t
            fac = {(0, (0,) * n): dinv}
            gp = {(0, (0,) * n): MRat.const(n, 1)}
            for k in range(1, cap + 1):
                gp = convolve(gp, g, cap)
                if not gp:
                    break
                for key, v in gp.items():
                    t = v * (dinv ** (k + 1)) * Q(-1) ** k
                    fac[key] = fac[key] + t if key in fac else t
        table = convolve(table, fac, cap)
    return table


def closed_form_w(y, xmode, n, hbudget):
    """The trivial-family extended differential straight from the n-cycle
    Cauchy kernel; returns (regular terms, delta coefficient or None)."""
    cap = hbudget + n
    total = {}
    for sigma in n_cycles(n):
        t = kernel_cycle_table(sigma, xmode, n, cap)
        for k, v in t.items():
            v = v * Q(-1) ** (n - 1)
            total[k] = total[k] + v if k in total else v
    total = convolve(total, vertex_table_direct(y, xmode, n, cap), cap)
    if n == 1:
        # divide out the exact singular kernel
        if xmode == "z":
            ker = {(-1, (-1,)): MRat.const(1, 1)}
        else:
            invs = inv_s_series(cap + 1)
            zinv = MRat.var(1, 0).inverse()
            ker = {(2 * k - 1, (2 * k - 1,)): zinv * invs[2 * k]
                   for k in range(0, cap // 2 + 1)}
        total = convolve(ker, total, cap)
    out = {}
    delta = None
    for (h, us), v in total.items():
        if n == 1 and (h, us) == (-1, (-1,)):
            delta = v
            continue
        assert h >= 0 and all(k >= 0 for k in us), ((h, us), v)
        if h <= hbudget:
            out[(h, us)] = v
    return out, delta


def assert_matches_closed_form(w, closed, delta):
    keys = set(w.terms) | set(closed)
    for k in sorted(keys):
        a = w.terms.get(k, MRat.const(w.n, 0))
        b = closed.get(k, MRat.const(w.n, 0))
        assert (a - b).is_zero(), k
    if w.n == 1:
        assert w.delta and delta is not None
        xp = MRat.from_univar(1, 0, w.curve.dx)
        assert (delta - xp).is_zero()


@pytest.mark.parametrize("y", [RatFunc.z(), RatFunc(Poly([0, 3, 1]))],
                         ids=["y=z", "y=z^2+3z"])
@pytest.mark.parametrize("n,budget", [(1, 4), (2, 3), (3, 2)])
def test_trivial_family_closed_form_x_z(y, n, budget):
    curve = build_curve(RatFunc.z(), y)
    fam = trivial_family(curve, 4)
    w = extended_w(fam, n, budget)
    closed, delta = closed_form_w(y, "z", n, budget)
    assert_matches_closed_form(w, closed, delta)


@pytest.mark.parametrize("y", [RatFunc.z(), RatFunc(Poly([0, 0, 1]))],
                         ids=["y=z", "y=z^2"])
@pytest.mark.parametrize("n,budget", [(1, 4), (2, 3), (3, 2)])
def test_trivial_family_closed_form_x_logz(y, n, budget):
    curve = build_curve(LogFunction.log(0), y)
    fam = trivial_family(curve, 4)
    w = extended_w(fam, n, budget)
    closed, delta = closed_form_w(y, "logz", n, budget)
    assert_matches_closed_form(w, closed, delta)


def test_u_zero_reduction_airy():
    airy = build_curve(RatFunc(Poly([0, 0, Q(1, 2)])), RatFunc.z())
    fam = eo_recursion(airy, 3)
    for (g, n) in [(0, 2), (0, 3), (1, 1), (1, 2), (2, 1), (0, 4)]:
        h = 2 * g - 2 + n
        w = extended_w(fam, n, h)
        assert (w.u_zero_part(h) - fam.value(g, n)).is_zero(), (g, n)
        if n == 1:
            assert w.delta


def test_u_zero_reduction_mixed_log():
    curve = build_curve(LogFunction(RatFunc.const(0),
                                    [(1, Q(-1, 2)), (-1, Q(-1, 2))]),
                        RatFunc.z())
    fam = logtr_recursion(curve, 3)
    for (g, n) in [(0, 3), (1, 1), (2, 1), (1, 2)]:
        h = 2 * g - 2 + n
        w = extended_w(fam, n, h)
        assert (w.u_zero_part(h) - fam.value(g, n)).is_zero(), (g, n)
