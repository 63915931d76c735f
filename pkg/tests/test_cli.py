import json
import subprocess
import sys
from fractions import Fraction

import pytest

from mdlpoly.cli import (
    EXIT_BUDGET,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VIOLATION,
    default_decomposition_text,
    main,
    parse_decomposition,
    verify_decomposition,
)
from mdlpoly.model import Scenario, load_point
from mdlpoly.polytope import MdlBounds
from mdlpoly.reference import block_reference, builtin_point


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_membership_exit_codes(capsys):
    code, out, _ = run(capsys, "membership", "--point", "builtin:pr2", "--class", "dep", "--h2", "1/10")
    assert code == EXIT_OK and json.loads(out)["status"] == "optimal"
    code, out, _ = run(capsys, "membership", "--point", "builtin:pr2", "--class", "dep", "--h2", "99/1000")
    assert code == EXIT_VIOLATION and json.loads(out)["status"] == "infeasible"


def test_flag_order_does_not_matter(capsys):
    a = run(capsys, "membership", "--h2", "1/10", "--class", "dep", "--point", "builtin:pr2")
    b = run(capsys, "membership", "--point", "builtin:pr2", "--h2", "1/10", "--class", "dep")
    assert a == b


def test_usage_errors(capsys):
    assert run(capsys, "membership", "--point", "builtin:pr2", "--h2", "one tenth")[0] == EXIT_USAGE
    assert run(capsys, "membership", "--point", "builtin:pr2", "--h2", "1/10", "--H", "1/10")[0] == EXIT_USAGE
    assert run(capsys, "membership", "--point", "/nonexistent.json", "--h2", "1/10")[0] == EXIT_USAGE
    assert run(capsys, "family-bound", "--N", "2", "--k", "5")[0] == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["membership", "--class", "sideways"])
    assert exc.value.code == EXIT_USAGE


def test_budget_exit(capsys):
    code, _, err = run(capsys, "spectrum", "--point", "builtin:pr", "--space", "coarse", "--N", "3", "--class", "dep")
    assert code == EXIT_BUDGET and "error" in err


def test_point_round_trip(capsys, tmp_path):
    path = tmp_path / "pr2.json"
    assert run(capsys, "point", "pr2", "-o", str(path))[0] == EXIT_OK
    assert load_point(path) == block_reference("pr2")
    direct = run(capsys, "membership", "--point", "builtin:pr2", "--h2", "1/10")
    via_file = run(capsys, "membership", "--point", str(path), "--h2", "1/10")
    assert direct == via_file


def test_coarse_grain_command(capsys, tmp_path):
    path = tmp_path / "c.json"
    assert run(capsys, "coarse-grain", "--point", "builtin:pr2", "-o", str(path))[0] == EXIT_OK
    assert load_point(path) == builtin_point("pr")


def test_threshold_output(capsys):
    code, out, _ = run(capsys, "threshold", "--point", "builtin:pr2", "--class", "dep")
    assert code == EXIT_OK and out.strip() == "h2 = 1/10"


def test_spectrum_worker_invariance(capsys, monkeypatch):
    one = run(capsys, "spectrum", "--point", "builtin:hardy2", "--class", "indep", "--workers", "1")
    two = run(capsys, "spectrum", "--point", "builtin:hardy2", "--class", "indep", "--workers", "2")
    assert one == two
    monkeypatch.setenv("MDLPOLY_WORKERS", "2")
    env = run(capsys, "spectrum", "--point", "builtin:hardy2", "--class", "indep")
    assert env == one
    data = json.loads(one[1])
    assert data["strategies"] == 256 and data["k_min"] == 0


def test_maximize_and_count(capsys):
    code, out, _ = run(capsys, "maximize", "--functional", "chsh", "--N", "1", "--h", "1/4")
    assert code == EXIT_OK and json.loads(out)["value"] == "2"
    code, out, _ = run(capsys, "maximize", "--N", "2", "--h", "1/4", "--class", "dep")
    assert json.loads(out)["value"] == "0"
    code, out, _ = run(capsys, "count-vertices", "--class", "indep", "--H", "9/88")
    assert json.loads(out)["vertices"] == 20_500_480


def test_family_bound_command(capsys):
    code, out, _ = run(capsys, "family-bound", "--N", "2", "--k", "1")
    assert code == EXIT_OK and "h0^2 = 1/12" in out and "0.02232910" in out


def test_verify_decomposition_fixture(capsys):
    code, out, _ = run(capsys, "verify-decomposition")
    assert code == EXIT_OK and "weight sum: 1" in out


def test_verify_decomposition_perturbed():
    text = default_decomposition_text()
    rows, errors = parse_decomposition(text)
    assert len(rows) == 32 and not errors
    lines = text.splitlines()
    first = next(i for i, l in enumerate(lines) if l.strip() and not l.startswith("#"))
    w, rest = lines[first].split(";", 1)
    lines[first] = f"{Fraction(w.strip()) + Fraction(1, 96)} ;{rest}"
    rep = verify_decomposition("\n".join(lines), block_reference("pr2"), MdlBounds(0, Fraction(1, 10)))
    assert not rep.ok and rep.residuals and any("weights sum" in e for e in rep.errors)


def test_verify_decomposition_single_row(tmp_path):
    from mdlpoly.model import deterministic_point, InputDistribution
    s2 = Scenario(N=2)
    target = deterministic_point(s2, [0] * 4, [0] * 4, InputDistribution.uniform(s2))
    rep = verify_decomposition("1; 00,00,00,00; 00,00,00,00", target, MdlBounds(0, Fraction(1, 16)))
    assert rep.ok
    bad = verify_decomposition("1; 00,00,00\nnot a row", target, MdlBounds(0, Fraction(1, 16)))
    assert not bad.ok and any("row 1" in e for e in bad.errors)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "mdlpoly", "family-bound", "--N", "1", "--k", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "h0^1 = 1/3" in res.stdout


def test_curve_csv(capsys):
    code, out, _ = run(capsys, "curve", "--class", "indep", "--points", "3", "--hardy-variant")
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert lines[0].startswith("h,h_squared,mdl_value,quantum_value,crossed")
    assert len(lines) == 4
