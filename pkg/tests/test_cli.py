"""
End-to-end tests of the command line
"""
import json

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from src.cli import build_run_config, cli
from src.cli.reports import REPORT_FILE, SUMMARY_FILE, VERIFY_FILE
from src.errors import InputError
from src.metric import ScalarField
from src.smoothing import read_grid, write_grid


@pytest.fixture
def run_config(tmp_path):
    path = tmp_path / "run_config.json"
    path.write_text(json.dumps({"defaults": {"demo_size": 60, "seed": 3}, "smooth": {"n": 65}}))
    return str(path)


@pytest.fixture
def invoke(run_config):
    runner = CliRunner()

    def _invoke(*args, config=True):
        args = list(args)
        if config:
            args += ["--config", run_config]
        return runner.invoke(cli, args, catch_exceptions=False)

    return _invoke


def read_report(out):
    return json.loads((out / REPORT_FILE).read_text())


# ============================================
# POINT-CLOUD COMMANDS
# ============================================

@pytest.mark.parametrize("command", ["lip", "extend", "local-step", "global-approx"])
def test_point_cloud_commands_pass(invoke, tmp_path, command):
    out = tmp_path / command
    result = invoke(command, "--input", "demo", "--out", str(out))
    assert result.exit_code == 0, result.output
    report = read_report(out)
    assert report["command"] == command
    assert report["passed"] is True
    assert all(check["passed"] for check in report["checks"])
    assert (out / SUMMARY_FILE).exists()
    assert "parallel" not in report["config"] and "out" not in report["config"]

    verify = invoke("verify", "--out", str(out), config=False)
    assert verify.exit_code == 0, verify.output
    assert json.loads((out / VERIFY_FILE).read_text())["passed"] is True


def test_global_approx_report_lists_stages(invoke, tmp_path):
    out = tmp_path / "ga"
    assert invoke("global-approx", "--eps", "0.1", "--K", "1.0", "--out", str(out)).exit_code == 0
    report = read_report(out)
    stages = json.loads((out / "stages.json").read_text())
    assert stages["K"] == 1.0
    assert all(stage["lambda_n"] < 1.0 for stage in stages["stages"])
    assert len(report["results"]["stages"]) == len(stages["stages"])


def test_tampered_extension_fails_verification(invoke, tmp_path):
    out = tmp_path / "extend"
    assert invoke("extend", "--out", str(out)).exit_code == 0

    path = out / "lower.csv"
    frame = pd.read_csv(path)
    row = frame.index[frame["tag"] == "boundary"][0]
    frame.loc[row, "value"] += 1e-8
    frame.to_csv(path, index=False, float_format="%.17g")

    result = invoke("verify", "--out", str(out), config=False)
    assert result.exit_code == 2
    verification = json.loads((out / VERIFY_FILE).read_text())
    assert verification["passed"] is False


def test_tampered_local_step_breaks_the_inf_convolution_identity(invoke, tmp_path):
    out = tmp_path / "step"
    assert invoke("local-step", "--out", str(out)).exit_code == 0
    results = read_report(out)["results"]

    path = out / "u_lambda.csv"
    frame = pd.read_csv(path)
    u0 = pd.read_csv(out / "input.csv")["value"]
    threshold = u0 + results["delta"] + 0.5 * results["eps_lambda"]
    rows = frame.index[(frame["tag"] != "boundary") & (frame["value"] < threshold)]
    assert len(rows) > 0
    frame.loc[rows[0], "value"] -= 1e-6
    frame.to_csv(path, index=False, float_format="%.17g")

    assert invoke("verify", "--out", str(out), config=False).exit_code == 2
    checks = {check["name"]: check for check in json.loads((out / VERIFY_FILE).read_text())["checks"]}
    assert checks["max |u_lambda - v_lambda|"]["passed"] is False
    assert checks["|G_lambda|"]["passed"] is True


def test_report_does_not_depend_on_parallel_width(invoke, tmp_path):
    serial, parallel = tmp_path / "serial", tmp_path / "parallel"
    assert invoke("extend", "--out", str(serial), "--parallel", "1").exit_code == 0
    assert invoke("extend", "--out", str(parallel), "--parallel", "3").exit_code == 0
    assert (serial / REPORT_FILE).read_bytes() == (parallel / REPORT_FILE).read_bytes()


# ============================================
# INPUT ERRORS
# ============================================

def test_lambda_not_above_mu_is_rejected(invoke, tmp_path):
    result = invoke("local-step", "--lambda", "0.4", "--mu", "0.5", "--out", str(tmp_path / "x"))
    assert result.exit_code == 1
    assert not (tmp_path / "x" / REPORT_FILE).exists()


def test_unknown_norm_is_rejected(invoke, tmp_path):
    assert invoke("lip", "--norm", "l3", "--out", str(tmp_path / "x")).exit_code == 1


def test_missing_input_file(invoke, tmp_path):
    assert invoke("lip", "--input", str(tmp_path / "absent.csv"), "--out", str(tmp_path / "x")).exit_code == 1


def test_verify_without_report(invoke, tmp_path):
    assert invoke("verify", "--out", str(tmp_path / "empty"), config=False).exit_code == 1


def test_malformed_config_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "defaults": {\n    "seed": ,\n  }\n}\n')
    with pytest.raises(InputError) as info:
        build_run_config("lip", {}, str(path))
    assert info.value.line == 3
    result = CliRunner().invoke(cli, ["lip", "--config", str(path), "--out", str(tmp_path / "x")])
    assert result.exit_code == 1


def test_flags_override_the_config_file(run_config):
    config = build_run_config("local-step", {"lambda": 0.9, "mu": None}, run_config)
    assert config.lam == 0.9
    assert config.mu is None
    assert config.demo_size == 60
    assert config.recorded()["lambda"] == 0.9


# ============================================
# GRID COMMANDS AND CASEBOOK
# ============================================

def test_smooth_and_envelope(invoke, tmp_path):
    smooth = tmp_path / "smooth"
    result = invoke("smooth", "--data", "tent", "--eps", "0.1", "--K", "1.0", "--out", str(smooth))
    assert result.exit_code == 0, result.output
    assert invoke("verify", "--out", str(smooth), config=False).exit_code == 0

    envelope = tmp_path / "envelope"
    result = invoke("envelope", "--n", "33", "--data", "tent", "--out", str(envelope))
    assert result.exit_code == 0, result.output
    assert invoke("verify", "--out", str(envelope), config=False).exit_code == 0


def test_eikonal_on_a_small_square(invoke, tmp_path):
    out = tmp_path / "eikonal"
    result = invoke("eikonal", "--n", "65", "--eps", "0.25", "--data", "linear", "--out", str(out))
    assert result.exit_code == 0, result.output
    report = read_report(out)
    assert report["results"]["residual_fraction"] <= 0.05
    for name in ("u0.grid", "reference.grid", "v.grid", "w.grid", "residual.grid"):
        assert (out / name).exists()
    assert invoke("verify", "--out", str(out), config=False).exit_code == 0


def test_eikonal_verify_recomputes_the_residual_from_w(invoke, tmp_path):
    out = tmp_path / "eikonal"
    assert invoke("eikonal", "--n", "65", "--eps", "0.25", "--data", "linear", "--out", str(out)).exit_code == 0

    # the emitted residual grid is not trusted
    domain, _ = read_grid(out / "residual.grid")
    write_grid(out / "residual.grid", ScalarField(domain, np.full(domain.shape, 7.0)))
    assert invoke("verify", "--out", str(out), config=False).exit_code == 0

    # dropping the sawtooth correction leaves w = v with ‖Dw‖_* < 1 everywhere
    _, v = read_grid(out / "v.grid")
    _, w = read_grid(out / "w.grid")
    flat = np.where(domain.boundary, w.values, v.values)
    write_grid(out / "w.grid", ScalarField(domain, flat))
    assert invoke("verify", "--out", str(out), config=False).exit_code == 2
    checks = {check["name"]: check for check in json.loads((out / VERIFY_FILE).read_text())["checks"]}
    assert checks["residual fraction"]["passed"] is False
    assert checks["max |w - u0| on ∂Ω"]["passed"] is True


@pytest.mark.parametrize(
    "args",
    [
        ("smooth", "--data", "tent", "--eps", "0.1", "--K", "1.0"),
        ("envelope", "--n", "33", "--data", "tent"),
        ("eikonal", "--n", "65", "--eps", "0.25", "--data", "linear"),
    ],
    ids=["smooth", "envelope", "eikonal"],
)
def test_grid_reports_are_reproducible(invoke, tmp_path, args):
    first, second = tmp_path / "first", tmp_path / "second"
    assert invoke(*args, "--out", str(first), "--parallel", "1").exit_code == 0
    assert invoke(*args, "--out", str(second), "--parallel", "2").exit_code == 0
    assert (first / REPORT_FILE).read_bytes() == (second / REPORT_FILE).read_bytes()


def test_eikonal_refuses_the_interval_domain(invoke, tmp_path):
    # the grid pipeline needs a two-dimensional domain
    result = invoke("eikonal", "--domain", "interval", "--out", str(tmp_path / "x"))
    assert result.exit_code == 1


def test_casebook(invoke, tmp_path):
    out = tmp_path / "casebook"
    result = invoke("casebook", "l1-disc", "--n-boundary", "256", "--n-axis", "51", "--out", str(out))
    assert result.exit_code == 0, result.output
    assert (out / "axis_profile.dat").exists()
    assert read_report(out)["results"]["verdict"] is True
    assert invoke("verify", "--out", str(out), config=False).exit_code == 0

    image = tmp_path / "image"
    result = invoke("casebook", "linf-image", "--n-boundary", "256", "--n-axis", "51", "--out", str(image))
    assert result.exit_code == 0, result.output


def test_casebook_rejects_undersampled_boundary(invoke, tmp_path):
    result = invoke("casebook", "--n-boundary", "66", "--out", str(tmp_path / "x"))
    assert result.exit_code == 1
