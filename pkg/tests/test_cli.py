import json
import subprocess
import sys
from pathlib import Path

import pytest

BASE = ["python3", "-m", "hexmvop.cli"]


def run(args, **kw):
    return subprocess.run(BASE + args, capture_output=True, text=True, **kw)


@pytest.fixture(scope="module")
def cache(tmp_path_factory):
    return str(tmp_path_factory.mktemp("cache"))


def test_validate_happy(tmp_path, cache):
    r = run(["validate", "--alphas", "0.2,2", "--out", str(tmp_path),
             "--cache-dir", cache])
    assert r.returncode == 0
    payload = json.loads(r.stdout)
    assert payload["passed"]


def test_validate_bad_model_exit_1(tmp_path, cache):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"a": [[1.3] * 3] * 3, "b": [[1.0] * 3] * 3}))
    r = run(["validate", "--model", str(bad), "--out", str(tmp_path),
             "--cache-dir", cache])
    assert r.returncode == 1
    payload = json.loads(r.stdout)
    assert not payload["passed"]
    assert any(not ok for ok in [payload["residuals"]["a_col_product_1"] == 0])


def test_subcommand_rejects_invalid_model(tmp_path, cache):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"a": [[1.3] * 3] * 3, "b": [[1.0] * 3] * 3}))
    r = run(["spectral", "--model", str(bad), "--out", str(tmp_path),
             "--cache-dir", cache])
    assert r.returncode == 1
    assert "a_col_product" in r.stdout


def test_missing_model_file_exit_3(tmp_path, cache):
    r = run(["validate", "--model", str(tmp_path / "nope.json"),
             "--out", str(tmp_path), "--cache-dir", cache])
    assert r.returncode == 3


def test_spectral_outputs(tmp_path, cache):
    r = run(["spectral", "--alphas", "0.2,2", "--out", str(tmp_path),
             "--cache-dir", cache])
    assert r.returncode == 0
    meta = json.loads((tmp_path / "spectral.json").read_text())
    assert abs(meta["beta"] - 2.0340740740740741) < 1e-12
    body = (tmp_path / "spectral.csv").read_text().splitlines()
    assert body[1].split(",")[0] == "z_re"


def test_zeros_count(tmp_path, cache):
    r = run(["zeros", "--alphas", "0.2,2", "--N", "20", "--out", str(tmp_path),
             "--cache-dir", cache])
    assert r.returncode == 0
    assert json.loads(r.stdout)["count"] == 60
    lines = (tmp_path / "zeros.csv").read_text().splitlines()
    assert len(lines) == 2 + 60


def test_csv_determinism(tmp_path, cache):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    for d in (d1, d2):
        r = run(["zeros", "--alphas", "0.2,2", "--N", "6", "--out", str(d),
                 "--cache-dir", cache])
        assert r.returncode == 0
    assert (d1 / "zeros.csv").read_bytes() == (d2 / "zeros.csv").read_bytes()


def test_kernel_map(tmp_path, cache):
    r = run(["kernel", "--alphas", "0.2,2", "--N", "1", "--out", str(tmp_path),
             "--map", "km.csv", "--at", "2,1,2,1", "--cache-dir", cache])
    assert r.returncode == 0
    payload = json.loads(r.stdout)
    assert 0 <= payload["K"] <= 1
    lines = (tmp_path / "km.csv").read_text().splitlines()
    assert lines[1] == "col,row,lozenge_type,probability"


def test_surface_and_gfun(tmp_path, cache):
    r = run(["surface", "--alphas", "0.2,2", "--out", str(tmp_path),
             "--cache-dir", cache])
    assert r.returncode == 0
    assert (tmp_path / "gamma3.csv").exists()
    r = run(["gfun", "--alphas", "0.2,2", "--at", "2+1j", "--out",
             str(tmp_path), "--cache-dir", cache])
    assert r.returncode == 0
    payload = json.loads((tmp_path / "gfun.json").read_text())
    assert "a1" in payload and "L" in payload
