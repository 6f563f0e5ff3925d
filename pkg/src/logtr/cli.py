"""Batch front end: JSON job specs in, JSON (or text) artifacts out.

Subcommands
  tr             run the recursion on a curve and emit the family
  xy-dual        swap the roles of x and y on a computed family
  sympl-dual     x -> x + psi(y) on a computed family (direct or --via-xy)
  verify         loop / projection / determinantal / factorization checks
  hurwitz        weighted degeneration tables with oracle cross-checks
  kw-compare     three routes to the quadratic-potential differentials
  atlantes-spin  the two deformation choices for psi = theta^r / r

Exit codes: 0 success, 1 a verification failed (verdict artifacts are
still written), 2 malformed input, 3 an internal truncation bound was
exceeded.

All payloads are deterministic: rationals are "p/q" strings, polynomial
coefficient lists are ascending, JSON keys are sorted, and no
environment-dependent data (timestamps, paths, versions) is embedded, so
identical job specs produce identical output bytes.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from .curve import build_curve
from .duality import (check_determinantal, group_property_check,
                      lemma_identity_check, symplectic_dual,
                      symplectic_dual_via_xy, symplectic_factorization_check,
                      xy_dual)
from .engine import (DifferentialFamily, SymDifferential, check_linear_loop,
                     check_projection, check_quadratic_loop, eo_recursion,
                     logtr_recursion)
from .hurwitz import (OSData, HurwitzTable, hurwitz_extract, kw_equivalence,
                      monotone_table, os_family, os_tau_oracle,
                      atlantes_vs_spin)
from .multivar import MPoly, MRat
from .poly import Poly
from .psi import PsiData, PsiFunction
from .ratfunc import LogFunction, RatFunc
from .scalar import (OO, Q, ExactAlgebraError, TruncationError, as_q,
                     is_inf)

BUDGET_CAP = 4


class SpecError(Exception):
    """Malformed job input (bad JSON, bad schema, out-of-range values)."""


# ----------------------------------------------------------------------
# scalars and univariate objects on the wire

def _q_str(v):
    v = as_q(v)
    return f"{v.numerator}/{v.denominator}"


def _parse_q(s, where):
    if isinstance(s, bool) or not isinstance(s, (str, int)):
        raise SpecError(f"{where}: expected a rational 'p/q' string")
    try:
        return as_q(s)
    except (ValueError, ZeroDivisionError, TypeError):
        raise SpecError(f"{where}: cannot parse rational {s!r}")


def _parse_point(s, where):
    if s == "oo":
        return OO
    return _parse_q(s, where)


def _point_str(p):
    return "oo" if is_inf(p) else _q_str(p)


def _parse_poly(lst, where):
    if not isinstance(lst, list):
        raise SpecError(f"{where}: expected a coefficient list")
    return Poly([_parse_q(c, f"{where}[{i}]") for i, c in enumerate(lst)])


def _poly_json(p):
    return [_q_str(p.coeff(k)) for k in range(p.degree + 1)]


def _parse_ratfunc(pair, where):
    if not (isinstance(pair, list) and len(pair) in (1, 2)):
        raise SpecError(f"{where}: expected [numerator, denominator] "
                        "coefficient lists")
    num = _parse_poly(pair[0], f"{where}.num")
    den = _parse_poly(pair[1], f"{where}.den") if len(pair) == 2 \
        else Poly.const(1)
    if den.is_zero():
        raise SpecError(f"{where}: zero denominator")
    return RatFunc(num, den)


def _ratfunc_json(f):
    return [_poly_json(f.num), _poly_json(f.den)]


def _parse_coordinate(d, where):
    """{"rational": [[..],[..]], "log": [[loc, "c"], ...]} -> LogFunction."""
    if not isinstance(d, dict):
        raise SpecError(f"{where}: expected an object")
    for k in d:
        if k not in ("rational", "log"):
            raise SpecError(f"{where}: unknown field {k!r}")
    rat = _parse_ratfunc(d["rational"], f"{where}.rational") \
        if "rational" in d else RatFunc.const(0)
    terms = []
    for i, item in enumerate(d.get("log", [])):
        if not (isinstance(item, list) and len(item) == 2):
            raise SpecError(f"{where}.log[{i}]: expected [location, coeff]")
        loc = _parse_point(item[0], f"{where}.log[{i}]")
        if is_inf(loc):
            raise SpecError(f"{where}.log[{i}]: a log singularity at "
                            "infinity has no chart-free meaning here")
        terms.append((loc, _parse_q(item[1], f"{where}.log[{i}]")))
    return LogFunction(rat, terms)


def _coordinate_json(f):
    if isinstance(f, RatFunc):
        f = LogFunction.rational(f)
    out = {}
    if not f.rational_part.is_zero():
        out["rational"] = _ratfunc_json(f.rational_part)
    if f.log_terms:
        out["log"] = [[_q_str(b), _q_str(c)]
                      for b, c in sorted(f.log_terms)]
    return out


def _parse_curve_spec(d, where="curve"):
    if not isinstance(d, dict):
        raise SpecError(f"{where}: expected an object")
    for k in ("x", "y"):
        if k not in d:
            raise SpecError(f"{where}: missing field {k!r}")
    for k in d:
        if k not in ("x", "y", "series_order"):
            raise SpecError(f"{where}: unknown field {k!r}")
    x = _parse_coordinate(d["x"], f"{where}.x")
    y = _parse_coordinate(d["y"], f"{where}.y")
    order = d.get("series_order")
    if order is not None and not (isinstance(order, int) and order >= 4):
        raise SpecError(f"{where}.series_order: expected an integer >= 4")
    try:
        if order is None:
            return build_curve(x, y)
        return build_curve(x, y, order)
    except ExactAlgebraError as exc:
        raise SpecError(f"{where}: {exc}")


def _curve_json(curve):
    return {"x": _coordinate_json(curve.x), "y": _coordinate_json(curve.y)}


def _parse_psi_spec(d, where="psi"):
    """Weight spec -> PsiData.

    Fields: "rational" (RatFunc pair), "log" ([[b, "c"], ...]),
    "exp" ({"gamma": "g", "poly": [...]}) and "tilde" with one of
    "auto" / "dressed" / "same" / "explicit"; explicit mode reads
    "tilde_parts" mapping even hbar powers to RatFunc pairs.
    """
    if not isinstance(d, dict):
        raise SpecError(f"{where}: expected an object")
    for k in d:
        if k not in ("rational", "log", "exp", "tilde", "tilde_parts"):
            raise SpecError(f"{where}: unknown field {k!r}")
    rat = _parse_ratfunc(d["rational"], f"{where}.rational") \
        if "rational" in d else None
    terms = []
    for i, item in enumerate(d.get("log", [])):
        if not (isinstance(item, list) and len(item) == 2):
            raise SpecError(f"{where}.log[{i}]: expected [b, c]")
        terms.append((_parse_q(item[0], f"{where}.log[{i}]"),
                      _parse_q(item[1], f"{where}.log[{i}]")))
    gamma, epoly = None, None
    if "exp" in d:
        e = d["exp"]
        if not (isinstance(e, dict) and set(e) <= {"gamma", "poly"}):
            raise SpecError(f"{where}.exp: expected gamma and poly fields")
        gamma = _parse_q(e.get("gamma", "1"), f"{where}.exp.gamma")
        epoly = _parse_poly(e.get("poly", []), f"{where}.exp.poly")
    mode = d.get("tilde", "auto")
    parts = None
    if mode == "explicit":
        parts = {}
        for k, pair in (d.get("tilde_parts") or {}).items():
            try:
                ki = int(k)
            except ValueError:
                raise SpecError(f"{where}.tilde_parts: bad key {k!r}")
            parts[ki] = _parse_ratfunc(pair, f"{where}.tilde_parts[{k}]")
    elif "tilde_parts" in d:
        raise SpecError(f"{where}: tilde_parts needs tilde='explicit'")
    try:
        psi = PsiFunction(rat, terms, gamma, epoly)
        return PsiData(psi, mode, parts)
    except ExactAlgebraError as exc:
        raise SpecError(f"{where}: {exc}")


# ----------------------------------------------------------------------
# multivariate fractions and families on the wire

def _atom_json(atom):
    if atom[0] == "lin":
        return ["lin", atom[1], _q_str(atom[2])]
    if atom[0] == "diag":
        return ["diag", atom[1], atom[2]]
    return ["up", atom[1], [_q_str(c) for c in atom[2]]]


def _parse_atom(item, where):
    if not (isinstance(item, list) and len(item) == 3):
        raise SpecError(f"{where}: expected [kind, slot, data]")
    kind = item[0]
    if kind == "lin":
        return ("lin", int(item[1]), _parse_q(item[2], where))
    if kind == "diag":
        return ("diag", int(item[1]), int(item[2]))
    if kind == "up":
        coeffs = tuple(_parse_q(c, where) for c in item[2])
        return ("up", int(item[1]), coeffs)
    raise SpecError(f"{where}: unknown denominator kind {kind!r}")


def _mrat_json(w):
    num = [[list(expo), _q_str(c)]
           for expo, c in sorted(w.num.terms.items())]
    den = [[_atom_json(atom), mult]
           for atom, mult in sorted(w.den.items(),
                                    key=lambda kv: _atom_json(kv[0]))]
    return {"nvars": w.nvars, "num": num, "den": den}


def _parse_mrat(d, where):
    if not (isinstance(d, dict) and {"nvars", "num", "den"} <= set(d)):
        raise SpecError(f"{where}: expected nvars/num/den")
    nvars = int(d["nvars"])
    terms = {}
    for i, item in enumerate(d["num"]):
        if not (isinstance(item, list) and len(item) == 2):
            raise SpecError(f"{where}.num[{i}]: expected [exponents, coeff]")
        expo = tuple(int(e) for e in item[0])
        if len(expo) != nvars:
            raise SpecError(f"{where}.num[{i}]: exponent arity mismatch")
        terms[expo] = _parse_q(item[1], f"{where}.num[{i}]")
    den = {}
    for i, item in enumerate(d["den"]):
        if not (isinstance(item, list) and len(item) == 2):
            raise SpecError(f"{where}.den[{i}]: expected [atom, mult]")
        atom = _parse_atom(item[0], f"{where}.den[{i}]")
        den[atom] = den.get(atom, 0) + int(item[1])
    return MRat(nvars, MPoly(nvars, terms), den)


FAMILY_FORMAT = "logtr-family/1"


def family_to_json(fam):
    cells = {}
    for (g, n), cell in fam.table.items():
        if cell.value is None:
            continue
        cells[f"{g},{n}"] = _mrat_json(cell.value)
    return {"format": FAMILY_FORMAT,
            "curve": _curve_json(fam.curve),
            "budget": fam.budget,
            "log_mode": fam.log_mode,
            "cells": cells}


def family_from_json(d, where="family"):
    if not isinstance(d, dict) or d.get("format") != FAMILY_FORMAT:
        raise SpecError(f"{where}: not a {FAMILY_FORMAT} document")
    curve = _parse_curve_spec(d.get("curve"), f"{where}.curve")
    budget = d.get("budget")
    if not isinstance(budget, int) or budget < 0:
        raise SpecError(f"{where}.budget: expected a nonnegative integer")
    table = {(0, 1): SymDifferential(0, 1, None)}
    for key, cell in (d.get("cells") or {}).items():
        try:
            g, n = (int(t) for t in key.split(","))
        except ValueError:
            raise SpecError(f"{where}.cells: bad key {key!r}")
        w = _parse_mrat(cell, f"{where}.cells[{key}]")
        if w.nvars != n:
            raise SpecError(f"{where}.cells[{key}]: nvars != n")
        table[(g, n)] = SymDifferential(g, n, w)
    return DifferentialFamily(curve, budget, bool(d.get("log_mode")), table)


def report_json(rep):
    return {"ok": rep.ok,
            "checks": [{"ok": ok, "label": label, "detail": detail}
                       for ok, label, detail in rep.entries]}


# ----------------------------------------------------------------------
# job plumbing

def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise SpecError(f"{path}: {exc.strerror or exc}")
    except json.JSONDecodeError as exc:
        raise SpecError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}")


def _render_text(payload, lines=None, indent=""):
    if lines is None:
        lines = []
    if isinstance(payload, dict):
        for k in sorted(payload):
            v = payload[k]
            if isinstance(v, (dict, list)):
                lines.append(f"{indent}{k}:")
                _render_text(v, lines, indent + "  ")
            else:
                lines.append(f"{indent}{k}: {v}")
    elif isinstance(payload, list):
        for v in payload:
            if isinstance(v, (dict, list)):
                lines.append(f"{indent}-")
                _render_text(v, lines, indent + "  ")
            else:
                lines.append(f"{indent}- {v}")
    return lines


def _emit(args, name, payload):
    os.makedirs(args.out, exist_ok=True)
    if args.format == "json":
        path = os.path.join(args.out, name + ".json")
        body = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    else:
        path = os.path.join(args.out, name + ".txt")
        body = "\n".join(_render_text(payload)) + "\n"
    with open(path, "w") as fh:
        fh.write(body)
    print(path)
    return path


def _effective_budget(args):
    budget = args.budget
    if args.fast_sample:
        budget = min(budget, 1)
    if budget > BUDGET_CAP and not args.allow_deep:
        raise SpecError(
            f"budget {budget} exceeds the cap {BUDGET_CAP}; pass "
            "--allow-deep to override")
    return budget


def _obtain_family(args):
    """Family from --family (round trip) or from --curve via the
    recursion; returns the family at the effective budget."""
    if args.family:
        fam = family_from_json(_load_json(args.family), args.family)
        if fam.budget > BUDGET_CAP and not args.allow_deep:
            raise SpecError(
                f"family budget {fam.budget} exceeds the cap {BUDGET_CAP}; "
                "pass --allow-deep to override")
        return fam
    if not args.curve:
        raise SpecError("either --curve or --family is required")
    curve = _parse_curve_spec(_load_json(args.curve))
    budget = _effective_budget(args)
    if curve.logvital or not curve.x.is_rational():
        return logtr_recursion(curve, budget)
    return eo_recursion(curve, budget)


def _require_psi(args):
    if not args.psi:
        raise SpecError("this command needs --psi FILE")
    return _parse_psi_spec(_load_json(args.psi))


# ----------------------------------------------------------------------
# subcommands

def cmd_tr(args):
    fam = _obtain_family(args)
    _emit(args, "family", family_to_json(fam))
    return 0


def cmd_xy_dual(args):
    fam = _obtain_family(args)
    dual = xy_dual(fam, fam.budget)
    _emit(args, "family-xy-dual", family_to_json(dual))
    return 0


def cmd_sympl_dual(args):
    fam = _obtain_family(args)
    psi = _require_psi(args)
    op = symplectic_dual_via_xy if args.via_xy else symplectic_dual
    dual = op(fam, psi, fam.budget)
    name = "family-sympl-dual-via-xy" if args.via_xy else "family-sympl-dual"
    _emit(args, name, family_to_json(dual))
    return 0


def cmd_verify(args):
    fam = _obtain_family(args)
    results = {}
    for label, rep in (("linear_loop", check_linear_loop(fam)),
                       ("quadratic_loop", check_quadratic_loop(fam)),
                       ("projection", check_projection(fam, fam.log_mode)),
                       ("determinantal",
                        check_determinantal(fam, fam.budget))):
        results[label] = report_json(rep)
    if args.theorem_factorization:
        psi = _require_psi(args)
        results["symplectic_factorization"] = report_json(
            symplectic_factorization_check(fam, psi, fam.budget))
    if args.psi2:
        psi = _require_psi(args)
        psi2 = _parse_psi_spec(_load_json(args.psi2), "psi2")
        results["group_property"] = report_json(
            group_property_check(fam, psi, psi2, fam.budget))
    if args.lemma_samples:
        results["exchange_lemma"] = report_json(
            _lemma_battery(args.lemma_samples))
    ok = all(r["ok"] for r in results.values())
    _emit(args, "verdict", {"command": "verify", "ok": ok,
                            "results": results})
    return 0 if ok else 1


def _lemma_battery(count):
    """Seeded random instances of the operator exchange identity."""
    rng = random.Random(20240824)

    def rand_rf():
        num = Poly([Q(rng.randint(-3, 3)) for _ in range(rng.randint(1, 4))])
        den = Poly([Q(rng.randint(-2, 2)) for _ in range(rng.randint(1, 2))])
        if num.is_zero():
            num = Poly.const(1)
        if den.is_zero():
            den = Poly.const(1)
        return RatFunc(num, den)

    def rand_nonconst():
        f = rand_rf()
        while f.derivative().is_zero():
            f = rand_rf()
        return f

    agg = None
    for _ in range(count):
        r = rng.randint(0, 3)
        A = {p: rand_rf() for p in range(rng.randint(1, 3))}
        B = {p: rand_rf() for p in range(rng.randint(1, 3))}
        rep = lemma_identity_check(r, A, B, rand_nonconst(), rand_nonconst(),
                                   4)
        if agg is None:
            agg = rep
        else:
            agg.entries.extend(rep.entries)
    return agg


def cmd_hurwitz(args):
    curve = _parse_curve_spec(_load_json(args.curve)) if args.curve else None
    if curve is None:
        raise SpecError("hurwitz needs --curve (its y is the base function)")
    if curve.x != LogFunction.log(0):
        raise SpecError("hurwitz needs x = log z in the curve spec")
    if not curve.y.is_rational():
        raise SpecError("hurwitz needs a rational y")
    psi = _require_psi(args)
    budget = _effective_budget(args)
    degree_cut = args.degree_cut
    if args.fast_sample:
        degree_cut = min(degree_cut, 2)
    data = OSData(curve.y.rational_part, psi, vev=True)
    n_max = min(3, degree_cut)
    fam = os_family(data, budget, n_max=n_max)
    extract = hurwitz_extract(data, fam, degree_cut)
    tau = os_tau_oracle(data, degree_cut, budget, n=n_max)
    tables = [extract, tau]
    if args.monotone:
        p = psi.psi
        if (p.log_terms != ((Q(1), Q(-1)),) or not p.rational.is_zero()
                or p.exp_poly is not None):
            raise SpecError(
                "--monotone applies only to the weight -log(theta - 1)")
        tables.append(monotone_table(degree_cut, budget, n=n_max))
    merged, conflict = tables[0], None
    for t in tables[1:]:
        try:
            merged = merged.merge(t)
        except ExactAlgebraError as exc:
            conflict = str(exc)
            break
    payload = {"command": "hurwitz", "degree_cut": degree_cut,
               "budget": budget, "ok": conflict is None}
    if conflict is None:
        payload["table"] = merged.to_json_dict()
    else:
        payload["conflict"] = conflict
        payload["tables"] = [t.to_json_dict() for t in tables]
    _emit(args, "hurwitz", payload)
    return 0 if conflict is None else 1


def cmd_kw_compare(args):
    a = _parse_q(args.a, "--a")
    if not a:
        raise SpecError("--a must be nonzero")
    budget = _effective_budget(args)
    rep = kw_equivalence(a, budget)
    payload = {"command": "kw-compare", "a": _q_str(a), "budget": budget,
               **report_json(rep)}
    _emit(args, "verdict", payload)
    return 0 if rep.ok else 1


def cmd_atlantes_spin(args):
    if args.r < 2 or args.r % 2:
        raise SpecError("--r must be even (odd r has irrational "
                        "ramification, outside the exact base field)")
    budget = _effective_budget(args)
    rep = atlantes_vs_spin(args.r, budget)
    payload = {"command": "atlantes-spin", "r": args.r, "budget": budget,
               **report_json(rep)}
    _emit(args, "verdict", payload)
    return 0 if rep.ok else 1


# ----------------------------------------------------------------------

def _build_parser():
    top = argparse.ArgumentParser(
        prog="logtr",
        description="exact (log) topological recursion toolkit")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, curve=True, psi=False, family=False):
        if curve:
            p.add_argument("--curve", metavar="FILE",
                           help="curve spec (JSON with x and y)")
        if psi:
            p.add_argument("--psi", metavar="FILE",
                           help="weight spec (JSON)")
        if family:
            p.add_argument("--family", metavar="FILE",
                           help="family file produced by the tr command")
        p.add_argument("--budget", type=int, default=2, metavar="N",
                       help="compute cells with 2g-2+n <= N (default 2)")
        p.add_argument("--allow-deep", action="store_true",
                       help=f"permit budgets beyond {BUDGET_CAP}")
        p.add_argument("--fast-sample", action="store_true",
                       help="clamp the workload for a quick smoke run")
        p.add_argument("--out", default=".", metavar="DIR",
                       help="artifact directory (default .)")
        p.add_argument("--format", choices=("json", "text"), default="json")

    p = sub.add_parser("tr", help="run the recursion, emit the family")
    common(p, family=True)
    p.set_defaults(func=cmd_tr)

    p = sub.add_parser("xy-dual", help="x-y dual of a family")
    common(p, family=True)
    p.set_defaults(func=cmd_xy_dual)

    p = sub.add_parser("sympl-dual", help="symplectic dual of a family")
    common(p, psi=True, family=True)
    p.add_argument("--via-xy", action="store_true",
                   help="compose the three x-y dualities instead of the "
                        "direct formula")
    p.set_defaults(func=cmd_sympl_dual)

    p = sub.add_parser("verify", help="run structural checks on a family")
    common(p, psi=True, family=True)
    p.add_argument("--theorem-5-1", dest="theorem_factorization",
                   action="store_true",
                   help="check that the direct symplectic dual agrees with "
                        "the composition of x-y dualities (needs --psi)")
    p.add_argument("--psi2", metavar="FILE",
                   help="second weight; enables the group-property check")
    p.add_argument("--lemma-samples", type=int, default=0, metavar="N",
                   help="also run N seeded instances of the operator "
                        "exchange identity")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("hurwitz",
                       help="degeneration tables with oracle cross-checks")
    common(p, psi=True)
    p.add_argument("--degree-cut", type=int, default=4, metavar="D",
                   help="largest total profile size (default 4)")
    p.add_argument("--monotone", action="store_true",
                   help="also merge the permutation-counting oracle "
                        "(weight log(theta - 1) only)")
    p.set_defaults(func=cmd_hurwitz)

    p = sub.add_parser("kw-compare",
                       help="quadratic-potential route comparison")
    common(p, curve=False)
    p.add_argument("--a", default="1", metavar="Q",
                   help="potential parameter (default 1)")
    p.set_defaults(func=cmd_kw_compare)

    p = sub.add_parser("atlantes-spin",
                       help="deformation dichotomy for psi = theta^r / r")
    common(p, curve=False)
    p.add_argument("--r", type=int, default=2, metavar="R")
    p.set_defaults(func=cmd_atlantes_spin)

    return top


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TruncationError as exc:
        print(f"truncation error: {exc}", file=sys.stderr)
        return 3
    except ExactAlgebraError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
