"""Extended n-point differentials via hypergraph sums.

The extended differential W_n(z, u) packages a whole system of differentials
into one object: it is a sum over connected hypergraphs on n labeled
vertices, where a multiedge of genus g-tilde with m legs contributes the
corresponding omega with each leg acted on by u*hbar*S(u*hbar*d/dx) and
attached to its vertex, each vertex carries the factor
exp(u_i*(S(u_i*hbar*d/dx_i)-1)*y_i), and everything is multiplied by
prod dx_i/(u_i*hbar).  Every hbar-coefficient of W_n - delta_{n,1}
dx_1/(u_1*hbar) is a polynomial in the u-variables; W_n is stored as the
finite table of those polynomial coefficients.

A multiedge of type (0,2) with both legs on one vertex is regularized: its
kernel is B(z1, z2) - dx1 dx2/(x1 - x2)^2, which is finite on the diagonal.
That diagonal limit (after the leg operators) is computed through a Laurent
expansion in the separation of the two legs.
"""

from __future__ import annotations

import itertools
from math import factorial

from .multivar import MPoly, MRat, rename_vars
from .poly import Poly
from .ratfunc import RatFunc
from .scalar import (OO, Q, QZERO, ExactAlgebraError, TruncationError, as_q,
                     is_rat)
from .series import LocalSeries
from .soperator import d_dx, s_series


class Hypergraph:
    """Connected multigraph on n labeled vertices with multiedges.

    Each multiedge is a pair (g_tilde, attach) where attach is the sorted
    tuple of vertex labels its legs are glued to; (0,1) edges are excluded.
    The weight of an edge is 2*g_tilde - 2 + 2*len(attach), the minimal
    hbar-degree its contribution can carry.
    """

    __slots__ = ("n", "edges", "aut")

    def __init__(self, n, edges):
        self.n = n
        self.edges = tuple(sorted((g, tuple(sorted(a))) for g, a in edges))
        self.aut = _aut_order(self.edges)

    @property
    def weight(self):
        return sum(2 * g - 2 + 2 * len(a) for g, a in self.edges)

    def is_connected(self):
        return _covers_connected(self.n, [a for _, a in self.edges])

    def __eq__(self, other):
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Hypergraph(n={self.n}, edges={list(self.edges)}, " \
               f"aut={self.aut})"


def _aut_order(edges):
    """Product formula: permutations of identical multiedges times, per
    edge, permutations of legs sharing a vertex."""
    order = 1
    seen = {}
    for e in edges:
        seen[e] = seen.get(e, 0) + 1
    for mult in seen.values():
        order *= factorial(mult)
    for _, attach in edges:
        for v in set(attach):
            order *= factorial(attach.count(v))
    return order


def brute_force_aut(hg):
    """|Aut| by direct counting: permutations of the edge list fixing every
    edge type, combined with leg permutations fixing each attachment map."""
    edges = list(hg.edges)
    E = len(edges)
    count = 0
    for perm in itertools.permutations(range(E)):
        if all(edges[perm[i]] == edges[i] for i in range(E)):
            count += 1
    for _, attach in edges:
        m = len(attach)
        legs = sum(1 for s in itertools.permutations(range(m))
                   if all(attach[s[j]] == attach[j] for j in range(m)))
        count *= legs
    return count


def _covers_connected(n, attachments):
    if n == 1:
        return True
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for attach in attachments:
        r = find(attach[0])
        for v in attach[1:]:
            rv = find(v)
            if rv != r:
                parent[rv] = r
    root = find(0)
    return all(find(v) == root for v in range(n))


def enumerate_hypergraphs(n, budget):
    """All connected hypergraphs on n labeled vertices with total edge
    weight at most budget (weight of an edge: 2*g_tilde - 2 + 2*|legs|)."""
    types = []
    m = 1
    while 2 * m - 2 <= budget:
        g_min = 1 if m == 1 else 0
        g = g_min
        while 2 * g - 2 + 2 * m <= budget:
            for attach in itertools.combinations_with_replacement(
                    range(n), m):
                types.append((g, attach))
            g += 1
        m += 1
    types.sort()
    out = []

    def rec(idx, remaining, chosen):
        if idx == len(types):
            hg = Hypergraph(n, chosen)
            if hg.is_connected():
                out.append(hg)
            return
        g, attach = types[idx]
        w = 2 * g - 2 + 2 * len(attach)
        count = 0
        while count * w <= remaining:
            rec(idx + 1, remaining - count * w,
                chosen + [(g, attach)] * count)
            count += 1

    rec(0, budget, [])
    out.sort(key=lambda h: (h.weight, h.edges))
    return out


# ----------------------------------------------------------------------
# the extended differential container

class ExtendedDifferential:
    """W_n as a finite table {(h, u-exponents): MRat dz-coefficient}.

    h is the hbar-power after dividing out the prefactors; for n = 1 the
    singular summand dx_1/(u_1*hbar) is recorded by the delta flag rather
    than by a table entry.
    """

    __slots__ = ("curve", "n", "hbar_budget", "terms", "delta")

    def __init__(self, curve, n, hbar_budget, terms, delta=False):
        self.curve = curve
        self.n = n
        self.hbar_budget = hbar_budget
        self.terms = {k: v for k, v in terms.items() if not v.is_zero()}
        self.delta = delta
        for (h, us) in self.terms:
            if h < 0 or any(k < 0 for k in us):
                raise ExactAlgebraError(
                    "extended differential with a non-polynomial term "
                    f"(h={h}, u={us})")

    def coeff(self, h, us):
        if h > self.hbar_budget:
            raise TruncationError(
                f"hbar^{h} beyond the stored budget {self.hbar_budget}")
        return self.terms.get((h, tuple(us)), MRat.const(self.n, 0))

    def u_degree(self):
        return max((max(us) for _, us in self.terms), default=0)

    def hbar_parts(self, h):
        """All u-monomial entries at a fixed hbar-power."""
        return {us: v for (hh, us), v in self.terms.items() if hh == h}

    def u_zero_part(self, h):
        """[u^0 hbar^h] W; for a consistent graph sum this is the plain sum
        of the differentials, i.e. omega^{(g)}_n with h = 2g - 2 + n."""
        return self.coeff(h, (0,) * self.n)

    def __repr__(self):
        return (f"ExtendedDifferential(n={self.n}, "
                f"hbar<=|{self.hbar_budget}|, terms={len(self.terms)}, "
                f"delta={self.delta})")


# ----------------------------------------------------------------------
# assembling W from a family of differentials

def trivial_family(curve, budget):
    """The family with omega^{(0)}_1 = y dx, omega^{(0)}_2 = B and all
    stable differentials zero, on the given curve."""
    from .engine import DifferentialFamily, SymDifferential, bergman

    table = {
        (0, 1): SymDifferential(0, 1, None),
        (0, 2): SymDifferential(0, 2, bergman()),
    }
    for chi in range(1, budget + 1):
        for g in range(0, (chi + 1) // 2 + 1):
            n = chi + 2 - 2 * g
            if n < 1:
                continue
            table[(g, n)] = SymDifferential(g, n, MRat.const(n, 0))
    return DifferentialFamily(curve, budget, False, table)

def _convolve(d1, d2, cap):
    out = {}
    for (h1, u1), v1 in d1.items():
        for (h2, u2), v2 in d2.items():
            h = h1 + h2
            if h > cap:
                continue
            key = (h, tuple(a + b for a, b in zip(u1, u2)))
            prod = v1 * v2
            out[key] = out[key] + prod if key in out else prod
    return {k: v for k, v in out.items() if not v.is_zero()}


def _shift_series(f, trunc):
    """f(z + eps) as a LocalSeries in eps with RatFunc coefficients."""
    coeffs = {}
    cur = f
    fact = Q(1)
    for k in range(trunc):
        if k:
            cur = cur.derivative()
            fact = fact / k
        if not cur.is_zero():
            coeffs[k] = cur * fact
    return LocalSeries(Q(0), coeffs, trunc)


def _self_loop_table(curve, n, vertex, cap):
    """Contribution table of a (0,2) multiedge with both legs on one vertex.

    Work in coordinates (z, eps) with the two legs at z and z + eps; the
    regularized kernel B - dx dx/(x1 - x2)^2 is finite at eps = 0, the leg
    operators become (1/x'(z))(d_z - d_eps) and (1/x'(z+eps)) d_eps, and
    the attachment takes the eps^0 coefficient.
    """
    spare = cap - 2
    if spare < 0:
        return {}
    T = cap + 4
    inv_dx = curve.dx.inverse()
    inv_dx_shift = _shift_series(inv_dx, T)
    # delta x = x(z + eps) - x(z); derivatives of x are rational
    dxs = {}
    cur = curve.dx
    fact = Q(1)
    for k in range(1, T):
        if k > 1:
            cur = cur.derivative()
            fact = fact / k
        if not cur.is_zero():
            dxs[k] = cur * fact
    delta_x = LocalSeries(Q(0), dxs, T)
    F = (LocalSeries(Q(0), {-2: RatFunc.const(1)}, T) * inv_dx_shift
         ).scale(inv_dx) - delta_x.inverse() ** 2

    def op_first(S):
        dz = LocalSeries(S.point, {k: c.derivative()
                                   for k, c in S.coeffs.items()}, S.trunc)
        return (dz - S.derivative()).scale(inv_dx)

    def op_second(S):
        return S.derivative() * inv_dx_shift

    s_coeffs = s_series(spare)
    out = {}
    base1 = F
    for k1 in range(0, spare // 2 + 1):
        base2 = base1
        for k2 in range(0, spare // 2 - k1 + 1):
            h = 2 + 2 * k1 + 2 * k2
            if h <= cap:
                val = base2.coeff(0)
                if is_rat(val):
                    val = RatFunc.const(val)
                val = val * (s_coeffs[2 * k1] * s_coeffs[2 * k2])
                if not val.is_zero():
                    us = [0] * n
                    us[vertex] = h
                    key = (h, tuple(us))
                    lifted = MRat.from_univar(n, vertex, val)
                    out[key] = out[key] + lifted if key in out else lifted
            base2 = op_second(op_second(base2))
        base1 = op_first(op_first(base1))
    return out


def _edge_table(fam, g_tilde, attach, n, cap):
    """Contribution table of one multiedge type, as {(h, u-exps): MRat(n)}."""
    m = len(attach)
    base = 2 * g_tilde - 2 + m
    if (g_tilde, m) == (0, 2) and attach[0] == attach[1]:
        return _self_loop_table(fam.curve, n, attach[0], cap)
    if (g_tilde, m) == (0, 2):
        body = MRat(2, MPoly.const(2, 1), {("diag", 0, 1): 2})
    else:
        if (g_tilde, m) not in fam.table:
            raise TruncationError(
                f"the hypergraph sum needs omega^({g_tilde})_{m}, outside "
                f"the family budget {fam.budget}")
        body = fam.value(g_tilde, m)
    inv_dx = fam.curve.dx.inverse()
    inv_dx_slots = [MRat.from_univar(m, j, inv_dx) for j in range(m)]
    for j in range(m):
        body = body * inv_dx_slots[j]
    spare = cap - base - m
    if spare < 0 or body.is_zero():
        return {}
    s_coeffs = s_series(spare)
    out = {}
    for ks in _even_budget_vectors(m, spare):
        D = body
        scal = Q(1)
        for j, k in enumerate(ks):
            scal *= s_coeffs[2 * k]
            for _ in range(2 * k):
                D = D.deriv(j) * inv_dx_slots[j]
        if D.is_zero():
            continue
        mapping = {j: attach[j] for j in range(m)}
        lifted = rename_vars(D, n, mapping) * scal
        h = base + m + 2 * sum(ks)
        us = [0] * n
        for j, k in enumerate(ks):
            us[attach[j]] += 2 * k + 1
        key = (h, tuple(us))
        out[key] = out[key] + lifted if key in out else lifted
    return out


def _even_budget_vectors(m, spare):
    """All (k_1..k_m) with 2*sum(k) <= spare."""
    if m == 0:
        yield ()
        return
    for k in range(0, spare // 2 + 1):
        for rest in _even_budget_vectors(m - 1, spare - 2 * k):
            yield (k,) + rest


def vertex_factor_table(curve, n, cap):
    """exp(sum_i u_i (S(u_i hbar d/dx_i) - 1) y_i) as a contribution table."""
    a = {}  # 2k -> (d/dx)^{2k} y as RatFunc
    cur = curve.y
    for k in range(1, cap // 2 + 1):
        cur = d_dx(d_dx(cur, curve.x), curve.x)
        a[2 * k] = cur
    s_coeffs = s_series(cap)
    table = {(0, (0,) * n): MRat.const(n, 1)}
    for i in range(n):
        for k2, func in a.items():
            if func.is_zero():
                continue
            lift = MRat.from_univar(n, i, func) * s_coeffs[k2]
            # multiply by exp of the single term hbar^{2k} u_i^{2k+1} lift
            expo = {(0, (0,) * n): MRat.const(n, 1)}
            power = MRat.const(n, 1)
            j = 1
            fact = Q(1)
            while j * k2 <= cap:
                power = power * lift
                fact = fact / j
                us = [0] * n
                us[i] = j * (k2 + 1)
                expo[(j * k2, tuple(us))] = power * fact
                j += 1
            table = _convolve(table, expo, cap)
    return table


def extended_w(fam, n, hbar_budget):
    """The extended differential W_n of a family, up to hbar^hbar_budget.

    Entries are coefficients with respect to dz_1 ... dz_n; the n = 1 delta
    summand dx/(u hbar) is tracked separately.
    """
    curve = fam.curve
    cap = hbar_budget + n
    total = {}
    edge_cache = {}
    for hg in enumerate_hypergraphs(n, cap):
        contrib = {(0, (0,) * n): MRat.const(n, 1)}
        for key, group in itertools.groupby(hg.edges):
            mult = len(list(group))
            if key not in edge_cache:
                edge_cache[key] = _edge_table(fam, key[0], key[1], n, cap)
            for _ in range(mult):
                contrib = _convolve(contrib, edge_cache[key], cap)
            if not contrib:
                break
        if not contrib:
            continue
        w = Q(1, hg.aut)
        for k, v in contrib.items():
            scaled = v * w
            total[k] = total[k] + scaled if k in total else scaled
    total = _convolve(total, vertex_factor_table(curve, n, cap), cap)
    dx_slots = [MRat.from_univar(n, i, curve.dx) for i in range(n)]
    out = {}
    delta = False
    for (h, us), val in total.items():
        if val.is_zero():
            continue
        h2 = h - n
        us2 = tuple(k - 1 for k in us)
        if n == 1 and (h2, us2) == (-1, (-1,)):
            if not (val.is_const() and val.const_value() == 1):
                raise ExactAlgebraError("malformed singular summand of W_1")
            delta = True
            continue
        if h2 > hbar_budget:
            continue
        for i in range(n):
            val = val * dx_slots[i]
        out[(h2, us2)] = out[(h2, us2)] + val if (h2, us2) in out else val
    return ExtendedDifferential(curve, n, hbar_budget, out, delta)
