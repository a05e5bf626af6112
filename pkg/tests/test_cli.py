import io
import json
import os
import subprocess
import sys

import pytest

from heunhyp.cli import main
from heunhyp.expansions import evaluate
from heunhyp.termination import eps_case_n1_quadratic
from heunhyp.core import make_params

FIXTURE = {"a": 0.5, "q": 0.475, "alpha": 0.5, "beta": 1.5, "gamma": 1.2, "epsilon": 1.0}
ALPHA0 = ["--a", "2", "--alpha", "1.5", "--beta", "0.4", "--gamma", "0.6", "--epsilon", "0.9"]
EPS1 = ["--a", "2", "--alpha", "0.83", "--beta", "1.27", "--gamma", "0.61", "--epsilon", "-1"]


def run(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


@pytest.fixture
def fixture_file(tmp_path):
    path = tmp_path / "fx.json"
    path.write_text(json.dumps(FIXTURE))
    return str(path)


def inline(params):
    return [t for k, v in params.items() for t in (f"--{k}", repr(v))]


def test_eval_fixture(fixture_file):
    code, text = run(["eval", "--params", fixture_file, "--z", "0.3", "--format", "json"])
    assert code == 0
    rep = json.loads(text)
    row = rep["results"][0]
    assert row["value"] == evaluate(make_params(**FIXTURE), 0.3).value
    assert row["regime"] == "two-term" and row["expansion"] == "ascending"
    assert rep["params"]["delta"] == pytest.approx(0.8)
    assert rep["version"]


def test_eval_inline_matches_file(fixture_file):
    a = run(["eval", "--params", fixture_file, "--z", "0.1,0.3", "--format", "json"])
    b = run(["eval", *inline(FIXTURE), "--z", "0.1,0.3", "--format", "json"])
    assert a == b


def test_eval_z_out_of_range(fixture_file, capsys):
    code, _ = run(["eval", "--params", fixture_file, "--z", "1.5"])
    assert code == 2
    assert "z out of range" in capsys.readouterr().err


def test_eval_alpha_beta_zero(capsys):
    p = dict(FIXTURE, alpha=0.0)
    code, _ = run(["eval", *inline(p), "--z", "0.2"])
    assert code == 4
    assert "meaningless if alpha*beta = 0" in capsys.readouterr().err


def test_eval_no_convergence():
    # a = 0.9 and z = 0.6: ascending rate 9, descending rate 1.5
    p = {"a": 0.9, "q": 0.3, "alpha": 1.1, "beta": 0.7, "gamma": 0.9, "epsilon": 0.4}
    code, _ = run(["eval", *inline(p), "--z", "0.6"])
    assert code == 3


def test_eval_pole():
    p = {"a": 0.3, "q": 0.3, "alpha": 1.1, "beta": 0.7, "gamma": 0.5, "epsilon": -2.5}
    code, _ = run(["eval", *inline(p), "--z", "0.1", "--expansion", "ascending"])
    assert code == 4


def test_eval_csv_columns(fixture_file):
    code, text = run(["eval", "--params", fixture_file, "--z", "0.1,0.2", "--format", "csv"])
    assert code == 0
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    assert lines[0] == "z,value_re,value_im,abs_err,terms,regime,expansion"
    assert len(lines) == 3
    assert any("0.1.0" in l or "version" in l for l in text.splitlines() if l.startswith("#"))


@pytest.mark.parametrize("fmt", ["json", "csv"])
@pytest.mark.parametrize("cmd", [["eval", "--z", "0.1,0.25"], ["boundary"]])
def test_deterministic_output(fixture_file, fmt, cmd):
    argv = [cmd[0], "--params", fixture_file, *cmd[1:], "--format", fmt]
    assert run(argv) == run(argv)


def test_qroots_deterministic():
    argv = ["qroots", *EPS1, "--format", "json"]
    assert run(argv) == run(argv)


def test_delta_rejected(tmp_path, capsys):
    path = tmp_path / "p.json"
    path.write_text(json.dumps(dict(FIXTURE, delta=0.8)))
    code, _ = run(["eval", "--params", str(path), "--z", "0.1"])
    assert code == 2
    assert "delta" in capsys.readouterr().err


def test_delta_flag_rejected():
    with pytest.raises(SystemExit) as exc:
        main(["eval", *inline(FIXTURE), "--delta", "0.8", "--z", "0.1"], io.StringIO())
    assert exc.value.code == 2


@pytest.mark.parametrize("content", ["{not json", "[1, 2]", '{"a": 0.5}', '{"a": "x", "q": 0, '
                                     '"alpha": 1, "beta": 1, "gamma": 1, "epsilon": 1}'])
def test_bad_parameter_files(tmp_path, content):
    path = tmp_path / "p.json"
    path.write_text(content)
    assert run(["eval", "--params", str(path), "--z", "0.1"])[0] == 2


@pytest.mark.parametrize("extra", [["--tol", "0"], ["--tol", "0.5"], ["--max-terms", "4"]])
def test_config_bounds(fixture_file, extra):
    assert run(["eval", "--params", fixture_file, "--z", "0.1", *extra])[0] == 2


def test_qroots_alpha_fixture():
    code, text = run(["qroots", *ALPHA0, "--format", "json"])
    assert code == 0
    case = json.loads(text)["cases"][0]
    assert case["case"] == "alpha" and case["N"] == 0
    (root,) = case["roots"]
    assert root["q"][0] == pytest.approx(0.48, abs=1e-12) and root["q"][1] == 0.0
    assert root["residual"] < 1e-12


def test_qroots_eps_n1_reports_quadratic():
    code, text = run(["qroots", *EPS1, "--format", "json"])
    assert code == 0
    (case,) = json.loads(text)["cases"]
    assert len(case["roots"]) == 2
    p = make_params(2.0, 0.0, 0.83, 1.27, 0.61, -1.0)
    for r in case["roots"]:
        assert r["quadratic_check"] < 1e-10
        assert abs(eps_case_n1_quadratic(p, complex(*r["q"]))) < 1e-10
    code, text = run(["qroots", *EPS1])
    assert "quadratic check" in text


def test_qroots_no_case():
    argv = ["qroots", "--a", "2", "--alpha", "1.4142", "--beta", "1.0472",
            "--gamma", "1.3591", "--epsilon", "0.8366"]
    assert run(argv)[0] == 5


def test_qroots_forced_case():
    argv = ["qroots", "--a", "2", "--alpha", "1.4142", "--beta", "1.0472",
            "--gamma", "1.3591", "--epsilon", "-2", "--case", "eps", "--N", "2", "--format", "json"]
    code, text = run(argv)
    assert code == 0 and len(json.loads(text)["cases"][0]["roots"]) == 3
    # forcing a case the parameters do not satisfy is an input error
    bad = argv[:argv.index("--epsilon")] + ["--epsilon", "0.3", "--case", "eps", "--N", "2"]
    assert run(bad)[0] == 2


def test_qroots_complex_roots_as_pairs():
    argv = ["qroots", "--a", "2", "--alpha", "2.3", "--beta", "0.4", "--gamma", "0.7",
            "--epsilon", "-3", "--format", "json"]
    code, text = run(argv)
    assert code == 0
    qs = [r["q"] for r in json.loads(text)["cases"][0]["roots"]]
    assert all(isinstance(q, list) and len(q) == 2 for q in qs)


def test_boundary_fixture(fixture_file):
    code, text = run(["boundary", "--params", fixture_file, "--format", "json"])
    assert code == 0
    fams = {f["family"]: f for f in json.loads(text)["families"]}
    assert set(fams) == {"ascending", "desc-gamma", "desc-alpha", "desc-beta"}
    asc = fams["ascending"]
    assert asc["u0"] == pytest.approx(1.17099993857718, rel=1e-12)
    assert asc["u1"] == pytest.approx(4.4960639964533, rel=1e-11)
    assert fams["desc-alpha"]["u1"] == 0.0
    assert fams["desc-alpha"]["methods"]["u_at_1"] == "exact-zero"


def test_boundary_human_shows_exact_zero(fixture_file):
    code, text = run(["boundary", "--params", fixture_file])
    assert code == 0 and "exact-zero" in text


def test_boundary_not_two_term(capsys):
    code, _ = run(["boundary", *inline(dict(FIXTURE, a=0.3))])
    assert code == 6
    err = capsys.readouterr().err
    assert "a != 1/2" in err and "FAIL: a = 1/2" in err and "pass: gamma + delta = 2" in err


def test_orbit():
    code, text = run(["orbit", "--a", "2", "--format", "json"])
    assert code == 0
    assert sorted(json.loads(text)["orbit"]) == pytest.approx([-1.0, 0.5, 2.0])
    assert run(["orbit", "--a", "1"])[0] == 2


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_verify_seeds(seed):
    code, text = run(["verify", "--seed", str(seed)])
    assert code == 0, text
    for name in ("contiguous", "euler", "gauss", "oracle", "two-term", "mirror"):
        assert name in text


def test_verify_loose_tolerance():
    code, text = run(["verify", "--tol", "1e-2", "--format", "json"])
    assert code == 0
    assert all(s["threshold"] == 1e-2 for s in json.loads(text)["suites"])


def test_verify_failure_exit_code(monkeypatch):
    from heunhyp import verify
    monkeypatch.setitem(verify.SUITES, "euler", (lambda rng, n: [1.0] * n, 3, 1e-12))
    assert run(["verify"])[0] == 1


def test_debug_logging(fixture_file):
    env = dict(os.environ, HEUN_LOG="debug")
    res = subprocess.run([sys.executable, "-m", "heunhyp", "eval", "--params", fixture_file,
                          "--z", "0.2"], capture_output=True, text=True, env=env)
    assert res.returncode == 0
    assert "DEBUG" in res.stderr


def test_version():
    res = subprocess.run([sys.executable, "-m", "heunhyp", "--version"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip()
