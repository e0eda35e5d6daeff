import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from diracwidth import __version__
from diracwidth.cli import RunConfig, main, parse_n_list
from diracwidth.errors import ConfigError
from diracwidth.kernel import kernel_F


def read_csv(text):
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, val = line[2:].partition(": ")
            meta[key] = val
        else:
            body.append(line)
    header = body[0].split(",")
    rows = [dict(zip(header, line.split(","))) for line in body[1:]]
    return meta, rows


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@given(st.lists(st.integers(1, 60), min_size=1, max_size=8))
def test_parse_n_list_roundtrip(values):
    assert parse_n_list(",".join(map(str, values))) == values


def test_parse_n_list_forms():
    assert parse_n_list("1..4") == [1, 2, 3, 4]
    assert parse_n_list("1..3, 8") == [1, 2, 3, 8]
    for bad in ("", "0", "3..1", "a", "1..x"):
        with pytest.raises(ConfigError):
            parse_n_list(bad)


def test_config_digest_ignores_output_path():
    a = RunConfig("sigma-scan", [1, 2], out="x.csv")
    b = RunConfig("sigma-scan", [1, 2], out="-")
    assert a.digest() == b.digest()
    assert a.digest() != RunConfig("sigma-scan", [1, 3]).digest()


def test_sigma_scan(capsys):
    code, out, _ = run(capsys, "sigma-scan", "--n", "1..4")
    assert code == 0
    meta, rows = read_csv(out)
    assert meta["version"] == __version__ and len(meta["config_hash"]) == 16
    sig = [float(r["sigma"]) for r in rows]
    assert [int(r["n"]) for r in rows] == [1, 2, 3, 4]
    assert all(a > b for a, b in zip(sig, sig[1:]))
    assert all(float(r["second_moment"]) <= float(r["bound_84_over_n2"]) for r in rows)


def test_sigma_scan_mass_and_json(capsys):
    _, out1, _ = run(capsys, "sigma-scan", "--n", "2", "--format", "json")
    _, out2, _ = run(capsys, "sigma-scan", "--n", "2", "--mass", "2", "--format", "json")
    doc1, doc2 = json.loads(out1), json.loads(out2)
    i = doc1["columns"].index("sigma")
    assert doc2["rows"][0][i] < doc1["rows"][0][i]
    assert doc1["metadata"]["units"].startswith("natural units")


def test_density(capsys, tmp_path):
    path = tmp_path / "d.csv"
    code, _, _ = run(capsys, "density", "--n", "1,2", "--grid-points", "200", "--out", str(path))
    assert code == 0
    meta, rows = read_csv(path.read_text())
    assert float(meta["norm[n=1]"]) == pytest.approx(1.0, abs=1e-9)
    assert float(meta["modal_radius[n=2]"]) < float(meta["modal_radius[n=1]"])
    assert {r["n"] for r in rows} == {"1", "2"}


def test_density_flags_lost_probability(capsys):
    code, _, _ = run(capsys, "density", "--n", "1", "--r-max", "1.0", "--grid-points", "50")
    assert code == 2


def test_kernel_default_grid(capsys):
    code, out, _ = run(capsys, "kernel")
    assert code == 0
    meta, rows = read_csv(out)
    r = np.array([float(x["r"]) for x in rows])
    np.testing.assert_allclose(r, np.arange(1, 51) * 0.1)
    assert float(meta["max_rel_diff"]) < 1e-10
    F = np.array([float(x["F"]) for x in rows])
    np.testing.assert_allclose(F, kernel_F(r), rtol=1e-15)


def test_kernel_mass_scaling(capsys):
    code, out, _ = run(capsys, "kernel", "--mass", "2", "--r-max", "2", "--grid-points", "10")
    assert code == 0
    _, rows = read_csv(out)
    for row in rows:
        assert float(row["F"]) == pytest.approx(4 * kernel_F(2 * float(row["r"])), rel=1e-13)


def test_counterexample(capsys):
    code, out, _ = run(capsys, "counterexample", "--n", "2..10", "--d", "2")
    assert code == 0
    _, rows = read_csv(out)
    assert all(float(r["second_moment"]) >= float(r["lower_bound_n_over_2"]) for r in rows)
    row10 = rows[-1]
    assert float(row10["second_moment"]) == pytest.approx(20.208, abs=1e-10)


@pytest.mark.parametrize("argv", [
    ["sigma-scan", "--n", "0"],
    ["counterexample", "--n", "1..3"],
    ["density", "--mass", "-1"],
    ["counterexample", "--d", "4"],
    ["bogus"],
    [],
])
def test_configuration_errors_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert "configuration error" in err


@pytest.mark.slow
def test_verify_fault_injection(tmp_path):
    env = {"DIRACWIDTH_INJECT_FAULT": "kernel_G_sign", "PATH": ""}
    out = tmp_path / "v.json"
    proc = subprocess.run([sys.executable, "-m", "diracwidth.cli", "verify", "--out", str(out)],
                          env=env, capture_output=True, text=True)
    assert proc.returncode == 3
    failed = {c["name"] for c in json.loads(out.read_text())["checks"] if not c["passed"]}
    assert "kernel.gradient_identity" in failed


def test_console_script_version():
    proc = subprocess.run([sys.executable, "-m", "diracwidth.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert __version__ in proc.stdout
