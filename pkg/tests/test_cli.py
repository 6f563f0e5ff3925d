"""Command line interface: wire formats, round trips, determinism and
exit codes."""

import json

import pytest

from logtr.cli import family_from_json, main
from logtr.curve import build_curve
from logtr.duality import xy_dual
from logtr.engine import eo_recursion
from logtr.poly import Poly
from logtr.ratfunc import RatFunc
from logtr.scalar import Q

AIRY = {"x": {"rational": [["0", "0", "1/2"]]},
        "y": {"rational": [["0", "1"]]}}
LOGZ_Z = {"x": {"log": [["0", "1"]]},
          "y": {"rational": [["0", "1"]]}}
PSI_MONOTONE = {"log": [["1", "-1"]], "tilde": "dressed"}


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def run_tr(tmp_path, curve, budget=2, sub="out", extra=()):
    cpath = write(tmp_path, "curve.json", curve)
    out = tmp_path / sub
    code = main(["tr", "--curve", cpath, "--budget", str(budget),
                 "--out", str(out), *extra])
    return code, out / "family.json"


def test_tr_airy_cells(tmp_path):
    code, fpath = run_tr(tmp_path, AIRY)
    assert code == 0
    doc = json.loads(fpath.read_text())
    assert {"0,3", "1,1", "0,4", "1,2"} <= set(doc["cells"])
    assert doc["budget"] == 2


def test_tr_deterministic_bytes(tmp_path):
    _, f1 = run_tr(tmp_path, AIRY, sub="a")
    _, f2 = run_tr(tmp_path, AIRY, sub="b")
    assert f1.read_bytes() == f2.read_bytes()


def test_no_floats_on_the_wire(tmp_path):
    _, fpath = run_tr(tmp_path, AIRY)
    doc = json.loads(fpath.read_text(), parse_float=lambda s: pytest.fail(
        f"float on the wire: {s}"))
    coeffs = [c for _, c in doc["cells"]["1,1"]["num"]]
    assert all(isinstance(c, str) and "/" in c for c in coeffs)


def test_family_round_trip_exact(tmp_path):
    _, fpath = run_tr(tmp_path, AIRY)
    fam2 = family_from_json(json.loads(fpath.read_text()))
    curve = build_curve(RatFunc(Poly([0, 0, Q(1, 2)])), RatFunc.z())
    fam = eo_recursion(curve, 2)
    for gn, cell in fam.table.items():
        if cell.value is None:
            continue
        assert (cell.value - fam2.table[gn].value).is_zero(), gn


def test_xy_dual_round_trip(tmp_path):
    _, fpath = run_tr(tmp_path, LOGZ_Z)
    out = tmp_path / "dual"
    assert main(["xy-dual", "--family", str(fpath), "--out", str(out)]) == 0
    got = family_from_json(json.loads((out / "family-xy-dual.json")
                                      .read_text()))
    fam = family_from_json(json.loads(fpath.read_text()))
    expect = xy_dual(fam, 2)
    for gn, cell in expect.table.items():
        if cell.value is None:
            continue
        assert (cell.value - got.table[gn].value).is_zero(), gn


def test_sympl_dual_direct_vs_via_xy(tmp_path):
    cpath = write(tmp_path, "curve.json", LOGZ_Z)
    ppath = write(tmp_path, "psi.json", PSI_MONOTONE)
    outs = []
    for flag, sub in ((), "direct"), (("--via-xy",), "viaxy"):
        out = tmp_path / sub
        assert main(["sympl-dual", "--curve", cpath, "--psi", ppath,
                     "--budget", "2", "--out", str(out), *flag]) == 0
        name = "family-sympl-dual-via-xy" if flag else "family-sympl-dual"
        outs.append(json.loads((out / (name + ".json")).read_text()))
    assert outs[0]["cells"] == outs[1]["cells"]
    assert outs[0]["curve"] == outs[1]["curve"]


def test_verify_ok(tmp_path):
    _, fpath = run_tr(tmp_path, AIRY)
    out = tmp_path / "v"
    assert main(["verify", "--family", str(fpath), "--out", str(out)]) == 0
    doc = json.loads((out / "verdict.json").read_text())
    assert doc["ok"] and set(doc["results"]) >= {"linear_loop",
                                                 "quadratic_loop",
                                                 "projection",
                                                 "determinantal"}


def test_verify_failure_still_writes_verdict(tmp_path):
    _, fpath = run_tr(tmp_path, AIRY)
    doc = json.loads(fpath.read_text())
    doc["cells"]["1,2"] = {"nvars": 2, "num": [], "den": []}
    bad = write(tmp_path, "mutilated.json", doc)
    out = tmp_path / "v"
    assert main(["verify", "--family", bad, "--out", str(out)]) == 1
    verdict = json.loads((out / "verdict.json").read_text())
    assert not verdict["ok"]


def test_verify_factorization_flag(tmp_path):
    cpath = write(tmp_path, "curve.json", LOGZ_Z)
    ppath = write(tmp_path, "psi.json", PSI_MONOTONE)
    out = tmp_path / "v"
    assert main(["verify", "--curve", cpath, "--psi", ppath, "--budget", "2",
                 "--theorem-5-1", "--out", str(out)]) == 0
    doc = json.loads((out / "verdict.json").read_text())
    assert doc["results"]["symplectic_factorization"]["ok"]


def test_malformed_json_reports_position(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"x": {"rational": [[}]]}')
    assert main(["tr", "--curve", str(p), "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "line 1" in err and "column" in err


def test_schema_errors(tmp_path):
    assert main(["tr", "--curve",
                 write(tmp_path, "c1.json", {"x": {"rational": [["1"]]}}),
                 "--out", str(tmp_path)]) == 2
    assert main(["tr", "--curve",
                 write(tmp_path, "c2.json",
                       {"x": {"rational": [["0.5"]]}, "y": AIRY["y"]}),
                 "--out", str(tmp_path)]) == 2
    assert main(["tr", "--curve",
                 write(tmp_path, "c3.json", dict(AIRY, extra=1)),
                 "--out", str(tmp_path)]) == 2


def test_budget_cap(tmp_path):
    cpath = write(tmp_path, "curve.json", AIRY)
    assert main(["tr", "--curve", cpath, "--budget", "9",
                 "--out", str(tmp_path)]) == 2


def test_fast_sample_clamps_budget(tmp_path):
    code, fpath = run_tr(tmp_path, AIRY, budget=3, extra=("--fast-sample",))
    assert code == 0
    assert json.loads(fpath.read_text())["budget"] == 1


def test_hurwitz_three_oracles(tmp_path):
    cpath = write(tmp_path, "curve.json", LOGZ_Z)
    ppath = write(tmp_path, "psi.json", PSI_MONOTONE)
    out = tmp_path / "h"
    assert main(["hurwitz", "--curve", cpath, "--psi", ppath, "--budget", "2",
                 "--degree-cut", "3", "--monotone", "--out", str(out)]) == 0
    doc = json.loads((out / "hurwitz.json").read_text())
    assert doc["ok"]
    assert doc["table"]["provenance"] == ["closed-formula", "tau-oracle",
                                          "permutation-oracle"]
    values = {(e["g"], tuple(e["degree"])): e["value"]
              for e in doc["table"]["entries"]}
    assert values[(0, (3,))] == "2/1"


def test_hurwitz_monotone_flag_guard(tmp_path):
    cpath = write(tmp_path, "curve.json", LOGZ_Z)
    ppath = write(tmp_path, "psi.json", {"rational": [["0", "0", "1/2"]]})
    assert main(["hurwitz", "--curve", cpath, "--psi", ppath, "--monotone",
                 "--out", str(tmp_path)]) == 2


def test_text_format(tmp_path):
    cpath = write(tmp_path, "curve.json", AIRY)
    out = tmp_path / "t"
    assert main(["verify", "--curve", cpath, "--budget", "1",
                 "--format", "text", "--out", str(out)]) == 0
    body = (out / "verdict.txt").read_text()
    assert "ok: True" in body


def test_atlantes_spin_odd_r_rejected(tmp_path):
    assert main(["atlantes-spin", "--r", "3", "--out", str(tmp_path)]) == 2
