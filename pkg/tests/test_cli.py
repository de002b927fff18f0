from __future__ import annotations

import io
import json
import subprocess
import sys

from dworkzeta import cli


def run(argv, env=None):
    buf = io.StringIO()
    code = cli.main(argv, env={} if env is None else env, out=buf)
    return code, buf.getvalue()


def run_json(argv, env=None):
    code, out = run(argv + ["--format", "json"], env)
    return code, json.loads(out) if out else None


def test_polytope_kloosterman():
    code, data = run_json(["polytope", "--p", "3", "--n", "1", "--poly", "x1+x1^-1"])
    assert code == 0
    assert data["normalized_volume"] == 2 and data["geometry"]["M"] == 1


def test_polytope_triangle():
    code, data = run_json(["polytope", "--n", "2", "--poly", "x1+x2+x1^-1*x2^-1"])
    assert code == 0 and data["normalized_volume"] == 3


def test_polytope_mixed_reports_commode():
    code, data = run_json(["polytope", "--n", "2", "--r", "1", "--poly", "x1+x1^-1+x2^2"])
    assert data["commode"]["commode"] and data["v_S"] == 2


def test_malformed_poly_exit_code(capsys):
    code, _ = run(["polytope", "--poly", "x1+*x2"])
    assert code == 2
    assert "position 3" in capsys.readouterr().err


def test_geometry_error_exit_code():
    code, _ = run(["polytope", "--poly", "1"])
    assert code == 3


def test_usage_errors():
    assert run(["lfun"])[0] == 1
    assert run(["lfun", "--poly", "x1", "--p", "4"])[0] == 1
    assert run(["bogus"])[0] == 1


def test_sums_examples():
    code, data = run_json(["sums", "--p", "3", "--poly", "x1+x1^-1", "--oracle-m", "1"])
    assert code == 0
    assert data["sums"][0]["counts"] == [0, 1, 1]
    code, data = run_json(["sums", "--p", "5", "--poly", "x1", "--oracle-m", "1"])
    assert data["sums"][0]["cyc"] == [-1, 0, 0, 0]


def test_sums_cap_exit_code():
    code, _ = run(["sums", "--p", "7", "--poly", "x1+x2", "--oracle-m", "2", "--cap", "10"])
    assert code == 4


def test_lfun_trivial():
    code, data = run_json(["lfun", "--p", "5", "--poly", "x1"])
    assert code == 0 and data["degree"] == 1 and data["status"] == "ok"
    assert all(o["pass"] for o in data["oracle"])
    assert data["W_derivation"]["mode"] == "auto"


def test_lfun_kloosterman():
    code, data = run_json(["lfun", "--p", "3", "--poly", "x1+x1^-1", "--N", "8", "--t-deg", "4"])
    assert code == 0 and data["degree"] == 2
    assert data["volume_check"] == {"expected": 2, "status": "pass", "reason": ""}


def test_lfun_degenerate():
    code, data = run_json(["lfun", "--p", "2", "--poly", "x1^2"])
    assert code == 0
    assert data["status"] == "degenerate"
    assert data["volume_check"]["status"] == "skipped"
    assert data["nondegeneracy"]["point"] == [1]


def test_low_cutoff_is_refused():
    assert run(["lfun", "--p", "3", "--poly", "x1+x1^-1", "--W", "1"])[0] == 4
    assert run(["verify", "--p", "3", "--poly", "x1+x1^-1", "--W", "1"])[0] == 4


def test_verify_default_suite():
    code, data = run_json(["verify", "--p", "3", "--poly", "x1+x1^-1"])
    assert code == 0 and data["all_pass"]
    names = [c["name"] for c in data["checks"]]
    assert any("i <= 50" in nm for nm in names)
    assert "L series: ArtinHasse vs DworkExp" in names


def test_env_and_flag_precedence():
    code, data = run_json(["lfun", "--poly", "x1"], env={"DWORKZETA_P": "5", "DWORKZETA_N": "4"})
    assert data["p"] == 5 and data["N"] == 4
    code, data = run_json(["lfun", "--poly", "x1", "--N", "5"], env={"DWORKZETA_P": "5", "DWORKZETA_N": "4"})
    assert data["N"] == 5


def test_json_is_byte_identical():
    argv = ["lfun", "--p", "3", "--poly", "x1+x1^-1", "--format", "json"]
    assert run(argv)[1] == run(argv)[1]


def test_text_format():
    code, out = run(["polytope", "--p", "3", "--poly", "x1+x1^-1"])
    assert "normalized_volume: 2" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dworkzeta", "polytope", "--poly", "x1+x1^-1", "--format", "json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["normalized_volume"] == 2
