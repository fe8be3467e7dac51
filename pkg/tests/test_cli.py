import json
import subprocess
import sys

import pytest
from flint import fmpq_poly

from finitegap.cli import run
from finitegap.elliptic import ExactRoots
from finitegap.errors import UnsupportedFormat
from finitegap.report import emit_report
from finitegap.spectral import spectral_data

ROOTS = "3,-1,-2"


def run_out(tmp_path, argv, name="out.txt"):
    path = tmp_path / name
    code = run(argv + ["--out", str(path)])
    return code, (path.read_bytes() if path.exists() else b"")


def test_spectral_json(tmp_path):
    code, data = run_out(tmp_path, ["spectral", "--couplings", "2,0,0,0", "--roots", ROOTS])
    assert code == 0
    out = json.loads(data)
    want = fmpq_poly([-84, 0, 1]) * fmpq_poly([-9, 1]) * fmpq_poly([3, 1]) * fmpq_poly([6, 1])
    assert out["Q"] == [f"{int(c.p)}/{int(c.q)}" for c in want.coeffs()]
    assert out["g"] == 2


def test_help_exits_zero():
    proc = subprocess.run([sys.executable, "-m", "finitegap", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "spectral" in proc.stdout and "monodromy" in proc.stdout


def test_bad_couplings_usage_error(capsys):
    assert run(["spectral", "--couplings", "2,0,-1,0", "--roots", ROOTS]) == 2
    err = capsys.readouterr().err
    assert "couplings must be non-negative integers" in err and "--couplings" in err


def test_missing_roots(capsys):
    assert run(["spectral", "--couplings", "1,0,0,0"]) == 2
    assert "--roots" in capsys.readouterr().err


def test_computational_failure(capsys):
    assert run(["hk", "--roots", ROOTS, "--E", "9.16515138991168,0"]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "SingularP2"


def test_degenerate_roots(capsys):
    assert run(["spectral", "--couplings", "1,0,0,0", "--roots", "1,1,-2"]) == 2
    assert "pairwise distinct" in capsys.readouterr().err


def test_determinism(tmp_path):
    argv = ["monodromy", "--couplings", "1,0,0,0", "--roots", ROOTS, "--E", "1,0.3", "--route", "ode"]
    _, a = run_out(tmp_path, argv, "a.json")
    _, b = run_out(tmp_path, argv, "b.json")
    assert a == b and a


def test_csv_sweep(tmp_path):
    code, data = run_out(tmp_path, ["monodromy", "--couplings", "1,0,0,0", "--roots", ROOTS, "--sweep=-4,3,3",
                                    "--imag", "0.1", "--k", "1", "--format", "csv"])
    assert code == 0
    lines = data.decode().splitlines()
    assert lines[0] == "E_re,E_im,B_re,B_im,route"
    assert len(lines) == 1 + 3 * 3
    assert {ln.split(",")[-1] for ln in lines[1:]} == {"ode", "integral", "bethe"}


def test_csv_rejected_elsewhere(capsys):
    assert run(["spectral", "--couplings", "1,0,0,0", "--roots", ROOTS, "--format", "csv"]) == 2


def test_config_file_flags_win(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"couplings": "2,0,0,0", "roots": ROOTS}))
    _, a = run_out(tmp_path, ["spectral", "--config", str(cfg)], "a.json")
    assert json.loads(a)["g"] == 2
    _, b = run_out(tmp_path, ["spectral", "--config", str(cfg), "--couplings", "1,0,0,0"], "b.json")
    assert json.loads(b)["g"] == 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"colour": 1}))
    assert run(["spectral", "--config", str(bad)]) == 2


def test_precision_env(tmp_path, monkeypatch):
    argv = ["hk", "--roots", ROOTS, "--E", "1,0.3"]
    monkeypatch.setenv("FINITEGAP_PRECISION", "20")
    _, lo = run_out(tmp_path, argv, "lo.json")
    monkeypatch.setenv("FINITEGAP_PRECISION", "40")
    _, hi = run_out(tmp_path, argv, "hi.json")
    a_lo = json.loads(lo)["alpha"]["re"]
    a_hi = json.loads(hi)["alpha"]["re"]
    assert len(a_hi) > len(a_lo) and a_hi.startswith(a_lo[:15])


def test_bands(tmp_path):
    code, data = run_out(tmp_path, ["bands", "--couplings", "1,0,0,0", "--roots", ROOTS])
    out = json.loads(data)
    assert code == 0 and out["edges"] == ["-3/1", "1/1", "2/1"]
    assert [iv["kind"] for iv in out["intervals"]] == ["band", "gap"]


def test_bethe_and_bcn_and_a3(tmp_path):
    code, data = run_out(tmp_path, ["bethe", "--couplings", "1,0,0,0", "--roots", ROOTS, "--seed", "0.4,0.3", "--c", "0.3,0"])
    assert code == 0 and max(float(r) for r in json.loads(data)["residuals"]) < 1e-10
    code, data = run_out(tmp_path, ["bcn", "--N", "1", "--couplings", "2,0,0,0", "--roots", ROOTS, "--crosscheck"])
    out = json.loads(data)
    assert code == 0 and len(out["sectors"]) == 4 and out["crosscheck"]["agree"]
    code, data = run_out(tmp_path, ["verify-a3", "--roots", ROOTS, "--samples", "5"])
    assert code == 0 and json.loads(data)["passed"]


def test_emit_report_examples():
    S = spectral_data((0, 0, 0, 0), ExactRoots(3, -1, -2))
    out = json.loads(emit_report(S))
    assert out["Q"] == ["0/1", "1/1"]
    assert emit_report(S) == emit_report(S)
    with pytest.raises(UnsupportedFormat):
        emit_report(S, "csv")
    with pytest.raises(UnsupportedFormat):
        emit_report(S, "xml")
