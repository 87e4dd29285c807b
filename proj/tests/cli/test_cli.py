import json
import os
import subprocess
from pathlib import Path

import pytest

LAB = os.environ.get("ROBBA_LAB", "robba-lab")
FIXTURES = Path(os.environ.get("ROBBA_FIXTURES", Path(__file__).resolve().parents[2] / "fixtures"))


def run(*args, env=None):
    full = dict(os.environ)
    full.pop("ROBBA_LAB_MAX_TERMS", None)
    full.update(env or {})
    return subprocess.run([LAB, *args], capture_output=True, text=True, env=full)


def test_partunit_value():
    out = run("localize", "partunit", "--p", "2", "--m", "1", "--n", "1")
    assert out.returncode == 0
    assert out.stdout.strip() == "-2"


def test_identities_report(tmp_path):
    path = tmp_path / "id.json"
    out = run("identities", "--p", "2", "--prec", "40", "--window", "48", "--out", str(path))
    assert out.returncode == 0
    assert not out.stdout.lstrip().startswith("{") and "\"version\"" not in out.stdout
    rep = json.loads(path.read_text())
    assert rep["version"] == 1 and rep["kind"] == "identities"
    assert rep["config"]["budget"] == {"digits": 40, "half_window": 48, "t_order": 16, "slack": 8}
    assert rep["config"]["seed"] == 1
    assert all(x["pass"] for x in rep["identities"])
    assert all("residual" in x and "threshold" in x for x in rep["identities"])


def test_identities_deterministic(tmp_path):
    a, b, c = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "c.json"
    run("identities", "--p", "3", "--seed", "7", "--cases", "4", "--out", str(a))
    run("identities", "--p", "3", "--seed", "7", "--cases", "4", "--out", str(b))
    run("identities", "--p", "3", "--seed", "8", "--cases", "4", "--out", str(c))
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_classify_fixture(tmp_path):
    path = tmp_path / "cls.json"
    out = run("module", "classify", "--input", str(FIXTURES / "rank1_r2.json"), "--n", "2", "--out", str(path))
    assert out.returncode == 0
    rep = json.loads(path.read_text())
    cls = rep["classification"]
    assert cls["flags"]["crystalline"] is True
    assert [w["value"] for w in cls["sen_weights"]] == ["2"]
    assert rep["config"]["p"] == 3


def test_cocycle_is_not_de_rham(tmp_path):
    path = tmp_path / "cc.json"
    out = run("module", "classify", "--input", str(FIXTURES / "cocycle_p3.json"), "--out", str(path))
    assert out.returncode == 0
    flags = json.loads(path.read_text())["classification"]["flags"]
    assert not flags["de_rham"] and not flags["hodge_tate"] and not flags["cp_admissible"]


@pytest.mark.parametrize("sub", ["validate", "dcris", "dst", "sen", "ddr"])
def test_module_pipeline(sub, tmp_path):
    path = tmp_path / f"{sub}.json"
    out = run("module", sub, "--input", str(FIXTURES / "rank1_r2.json"), "--out", str(path))
    assert out.returncode == 0, out.stderr
    rep = json.loads(path.read_text())
    assert rep["kind"] == f"module_{sub}"


def test_module_build_round_trip(tmp_path):
    path = tmp_path / "m.json"
    assert run("module", "build", "--p", "3", "--family", "rank1", "--c0", "2", "--r", "-1", "--out", str(path)).returncode == 0
    out = run("module", "validate", "--input", str(path))
    assert out.returncode == 0
    assert "valid" in out.stdout


def test_ndr(tmp_path):
    path = tmp_path / "ndr.json"
    out = run("ndr", "--p", "3", "--r", "-2", "--out", str(path))
    assert out.returncode == 0
    rep = json.loads(path.read_text())
    assert rep["ndr"]["integral"] and rep["ndr"]["phi_stable"]
    assert rep["untwisted"]["integral"] is False


def test_exit_codes(tmp_path):
    assert run("--p", "4", "identities").returncode == 2
    assert run("identities", "--bogus").returncode == 2
    assert run("ndr", "--p", "3", "--r", "1").returncode == 2
    assert run("module", "classify", "--p", "2", "--input", str(FIXTURES / "rank1_r2.json")).returncode == 2
    assert run("identities", "--prec", "4", "--slack", "1").returncode == 1
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 2, "kind": "module"}')
    err = tmp_path / "err.json"
    out = run("module", "validate", "--input", str(bad), "--out", str(err))
    assert out.returncode == 2
    rep = json.loads(err.read_text())
    assert rep["kind"] == "error" and rep["error"]["kind"] == "SchemaMismatch"


def test_verification_failure_exit(tmp_path):
    # the order two generator with G = 2 breaks the torsion cocycle condition
    bad = json.loads((FIXTURES / "rank1_r2.json").read_text())
    bad["gammas"][1]["G"] = [["2"]]
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(bad))
    assert run("module", "validate", "--input", str(path)).returncode == 3


def test_max_terms_env(tmp_path):
    path = tmp_path / "pu.json"
    out = run("localize", "partunit", "--p", "3", "--m", "2", "--n", "2", "--out", str(path), env={"ROBBA_LAB_MAX_TERMS": "40"})
    assert out.returncode == 0
    cfg = json.loads(path.read_text())["config"]
    assert cfg["max_terms"] == 40
    assert cfg["budget"]["half_window"] == 20
    assert run("localize", "partunit", env={"ROBBA_LAB_MAX_TERMS": "abc"}).returncode == 2


def test_selftest_single(tmp_path):
    path = tmp_path / "st.json"
    out = run("selftest", "--only", "12", "--out", str(path))
    assert out.returncode == 0
    assert "criterion 12 PASS" in out.stdout
    rep = json.loads(path.read_text())
    assert rep["criteria"][0]["pass"] is True
    assert run("selftest", "--only", "13").returncode == 3
