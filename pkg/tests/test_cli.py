import csv
import json
from pathlib import Path

import numpy as np
import pytest
from typer.testing import CliRunner

import wilsonnev
from wilsonnev.errors import ConfigError
from wilsonnev.funcmodel import SyntheticDivisorData, dump_synthetic
from wilsonnev.wilsonnev import app, parse_params

PACKAGE_CFG = Path(wilsonnev.__file__).parent / "cfg.yaml"

runner = CliRunner()


def invoke(*args):
    return runner.invoke(app, [*args[:1], "--config", str(PACKAGE_CFG), *args[1:]])


def read_csv(path):
    with path.open() as f:
        return list(csv.reader(f))


def test_parse_params():
    assert parse_params(None) is None
    assert parse_params(["scale=2", "b=0.5+1i"]) == {"scale": 2.0, "b": "0.5+1i"}
    with pytest.raises(ConfigError):
        parse_params(["scale"])


def test_characteristic_csv(tmp_path):
    out = tmp_path / "t.csv"
    result = invoke(
        "characteristic", "--model", "exp", "--rmin", "10", "--rmax", "1000",
        "--ppd", "5", "--out", str(out),
    )
    assert result.exit_code == 0, result.output
    rows = read_csv(out)
    assert rows[0] == ["r", "m", "N", "T", "quadrature_error"]
    assert len(rows) == 12
    r = np.array([float(row[0]) for row in rows[1:]])
    T = np.array([float(row[3]) for row in rows[1:]])
    assert r[0] == 10.0
    assert r[-1] == 1000.0
    np.testing.assert_allclose(T, r / np.pi, rtol=1e-6)


def test_characteristic_json(tmp_path):
    out = tmp_path / "t.json"
    result = invoke(
        "characteristic", "--rmin", "10", "--rmax", "100", "--ppd", "5",
        "--format", "json", "--out", str(out),
    )
    assert result.exit_code == 0, result.output
    records = json.loads(out.read_text())
    assert len(records) == 6
    assert set(records[0]) == {"r", "m", "N", "T", "quadrature_error"}


def test_malformed_config(tmp_path):
    config = tmp_path / "cfg.yaml"
    config.write_text("run: [1, 2\n")
    result = runner.invoke(app, ["characteristic", "--config", str(config)])
    assert result.exit_code == 2
    assert "wnev: error: config: ConfigError:" in result.output


def test_inverted_radii():
    result = invoke("characteristic", "--rmin", "100", "--rmax", "10")
    assert result.exit_code == 2
    assert "wnev: error:" in result.output


def test_unknown_model():
    result = invoke("characteristic", "--model", "nope")
    assert result.exit_code == 2
    assert "unknown model" in result.output


def test_divisor_only_model_cannot_give_the_characteristic(tmp_path):
    path = tmp_path / "divisors.json"
    dump_synthetic(SyntheticDivisorData().with_pole(1.0), path)
    result = invoke(
        "characteristic", "--model", f"synthetic:{path}", "--a", "inf", "--rmin", "10",
        "--rmax", "100", "--ppd", "5",
    )
    assert result.exit_code == 3
    assert "EvaluatorRequiredError" in result.output


@pytest.mark.parametrize(
    ("content", "reason"),
    [(None, "cannot read divisor data"), ("{not json", "is not valid JSON")],
)
def test_unreadable_divisor_data(tmp_path, content, reason):
    path = tmp_path / "divisors.json"
    if content is not None:
        path.write_text(content)
    result = invoke("characteristic", "--model", f"synthetic:{path}")
    assert result.exit_code == 2
    assert "wnev: error:" in result.output
    assert "ConfigError" in result.output
    assert reason in result.output


def test_wilson_counts_of_exp(tmp_path):
    out = tmp_path / "counts.csv"
    result = invoke(
        "wilson-counts", "--rmin", "10", "--rmax", "100", "--ppd", "5",
        "--out", str(out),
    )
    assert result.exit_code == 0, result.output
    rows = read_csv(out)
    assert rows[0] == ["r", "n_W", "n_W_tilde", "N_W", "N_W_tilde"]
    assert len(rows) == 7
    assert all(row[1:] == ["0", "0", "0", "0"] for row in rows[1:])


def test_figure_chains(tmp_path):
    out = tmp_path / "chains.json"
    result = invoke(
        "wilson-counts", "--model", "figure", "--a", "inf", "--rmin", "1",
        "--rmax", "100", "--chains", "--out", str(out),
    )
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert len(report["chains"]) == 3
    assert len(report["residual"]) == 5


def test_verify():
    result = invoke("verify", "unknown")
    assert result.exit_code == 2
    result = invoke("verify", "kernel")
    assert result.exit_code == 0, result.output
    assert "pass" in result.output


def test_expand_tau(tmp_path):
    out = tmp_path / "series.json"
    result = invoke("expand", "--tau", "2", "-K", "6", "--out", str(out))
    assert result.exit_code == 0, result.output
    document = json.loads(out.read_text())
    assert document["model"] == "tau_2"
    assert document["K"] == 6
    assert document["coeffs"][2]["re"] == pytest.approx(1.0)
    assert abs(document["coeffs"][3]["re"]) < 1e-9
    assert document["gate_margin"] is None


def test_expand_flags_fast_growth(tmp_path):
    out = tmp_path / "series.json"
    result = invoke(
        "expand", "--model", "cosh", "--param", "scale=3.14159", "-K", "8",
        "--rmin", "100", "--rmax", "10000", "--ppd", "5", "--out", str(out),
    )
    assert result.exit_code == 0, result.output
    document = json.loads(out.read_text())
    assert document["flags"] == ["gate-failed"]
    assert document["gate_margin"] < 0


@pytest.mark.parametrize(
    "command",
    [
        ["characteristic", "--model", "product_i", "--rmin", "10", "--rmax", "1000"],
        ["wilson-counts", "--model", "g_iii", "--rmin", "10", "--rmax", "1000"],
    ],
)
def test_identical_runs_give_identical_bytes(tmp_path, command):
    outputs = []
    for name, threads in (("first", "1"), ("second", "1"), ("threaded", "3")):
        out = tmp_path / f"{name}.csv"
        result = invoke(*command, "--ppd", "5", "--threads", threads, "--out", str(out))
        assert result.exit_code == 0, result.output
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]


def test_threads_option_on_every_command(tmp_path):
    out = tmp_path / "series.json"
    result = invoke("expand", "--tau", "1", "-K", "3", "--threads", "2", "--out", str(out))
    assert result.exit_code == 0, result.output
    result = invoke("verify", "kernel", "--threads", "2")
    assert result.exit_code == 0, result.output
    result = invoke("wilson-counts", "--threads", "0")
    assert result.exit_code == 2
    assert "threads must be at least 1" in result.output
