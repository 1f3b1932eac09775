"""
ARTIFACT VERIFICATION
=====================
Recompute the certified inequalities of a finished run from the files it
emitted. Nothing is taken from the report except parameters (λ, ε, K, ...)
and the reported constants that the run itself certified.
"""

import json
from itertools import product
from pathlib import Path
from typing import Callable, Dict, Optional

import numpy as np
import pandas as pd
from loguru import logger

from config import settings
from src.cli.instances import load_saved_cloud
from src.cli.reports import VERIFY_FILE, dump_json, read_report
from src.errors import InputError
from src.extension import cone_envelope, epsilon_lambda
from src.metric import ScalarField, diameter, lip_constant, set_distance
from src.metric.io import read_point_cloud
from src.smoothing import GridDomain, lasry_lions_bound, read_grid, stencil_lip
from src.smoothing.gradients import dual_grad_field, grad_field
from src.verification import CheckLedger

Verifier = Callable[[Path, dict, float], CheckLedger]


def _artifact(out_dir: Path, report: dict, key: str) -> Path:
    name = report.get("artifacts", {}).get(key)
    if name is None or not (out_dir / name).exists():
        raise InputError(f"missing artifact '{key}'", path=str(out_dir / (name or key)))
    return out_dir / name


def _saved_field(out_dir: Path, report: dict, key: str, cloud) -> ScalarField:
    saved = read_point_cloud(_artifact(out_dir, report, key), norm=report["config"]["norm"], matrix_path=(
        out_dir / report["artifacts"]["matrix"] if "matrix" in report["artifacts"] else None
    ))
    return ScalarField(cloud.space, saved.values.flat, name=key)


# ============================================
# POINT-CLOUD RUNS
# ============================================

def verify_lip(out_dir: Path, report: dict, tol: float) -> CheckLedger:
    cloud = load_saved_cloud(out_dir, report)
    ledger = CheckLedger()
    value = lip_constant(cloud.values).value
    ledger.check_le("|recomputed lip - reported lip|", abs(value - report["results"]["lip"]), 0.0, tol)
    return ledger


def verify_extend(out_dir: Path, report: dict, tol: float) -> CheckLedger:
    cloud = load_saved_cloud(out_dir, report)
    F = cloud.boundary_indices
    lam = report["results"]["lambda"]
    h = cloud.values.at(F)
    lower = _saved_field(out_dir, report, "lower", cloud)
    upper = _saved_field(out_dir, report, "upper", cloud)

    ledger = CheckLedger()
    for name, field in (("lower", lower), ("upper", upper)):
        ledger.check_le(f"lip({name})", lip_constant(field).value, lam, tol)
        ledger.check_le(f"max |{name} - h| on F", float(np.max(np.abs(field.at(F) - h))), 0.0, tol)
    ledger.check_le("max (lower - upper)", float(np.max(lower.flat - upper.flat)), 0.0, tol)
    return ledger


def verify_local_step(out_dir: Path, report: dict, tol: float) -> CheckLedger:
    cloud = load_saved_cloud(out_dir, report)
    space = cloud.space
    F = cloud.boundary_indices
    results = report["results"]
    lam, delta = results["lambda"], results["delta"]
    u0 = cloud.values.flat
    u = _saved_field(out_dir, report, "u_lambda", cloud)
    values = u.flat

    outside = np.setdiff1d(np.arange(space.n), F)
    eps = 0.0
    if outside.size:
        eps = epsilon_lambda(lam, results["mu_used"], diameter(space, outside), set_distance(space, outside, F))

    ledger = CheckLedger()
    ledger.check_le("|recomputed eps_lambda - reported eps_lambda|", abs(eps - results["eps_lambda"]), 0.0, tol)
    ledger.check_le("lip(u_lambda, E)", lip_constant(u).value, lam, tol)
    ledger.check_le("max |u_lambda - u_mu| on F", float(np.max(np.abs(u.at(F) - cloud.values.at(F)))), 0.0, tol)
    ledger.check_le("max |u0 - u_lambda|", float(np.max(np.abs(u0 - values))), delta + eps, tol)
    if outside.size:
        bound = u0 + delta + eps
        anchors = np.union1d(F, np.flatnonzero(values >= u0 + delta + eps / 2.0))
        v = cone_envelope(space, anchors, values[anchors], lam, upper=True)
        off_anchors = np.ones(space.n, dtype=bool)
        off_anchors[anchors] = False
        ledger.check_le("|G_lambda|", float(np.count_nonzero(off_anchors & (v >= bound))), 0.0, 0.0)
        ledger.check_le("max |u_lambda - v_lambda|", float(np.max(np.abs(values - v))), 0.0, tol)
    return ledger


def verify_global_approx(out_dir: Path, report: dict, tol: float) -> CheckLedger:
    cloud = load_saved_cloud(out_dir, report)
    F = cloud.boundary_indices
    u = _saved_field(out_dir, report, "u", cloud)
    stages = json.loads(_artifact(out_dir, report, "stages").read_text())
    K = stages["K"]

    ledger = CheckLedger()
    ledger.check_le("max |u - u0| on F", float(np.max(np.abs(u.at(F) - cloud.values.at(F)))), 0.0, tol)
    ledger.check_le("max |u - u0|", float(np.max(np.abs(u.flat - cloud.values.flat))), report["results"]["eps"], tol)
    for stage in stages["stages"]:
        indices = np.asarray(stage["indices"], dtype=int)
        ledger.check_le(f"stage {stage['n']}: lip(u, E_n)", lip_constant(u, indices).value, stage["lambda_n"], tol)
        ledger.check_true(f"stage {stage['n']}: lambda_n < K", stage["lambda_n"] < K)
    return ledger


# ============================================
# GRID RUNS
# ============================================

def verify_smooth(out_dir: Path, report: dict, tol: float) -> CheckLedger:
    domain, u = read_grid(_artifact(out_dir, report, "u"))
    _, v = read_grid(_artifact(out_dir, report, "v"))
    _, eps_field = read_grid(_artifact(out_dir, report, "eps_field"))
    K = report["results"]["K"]

    ledger = CheckLedger()
    gap = np.abs(u.values - v.values)
    ledger.check_le("max (|u - v| - eps_field)", float(np.max((gap - eps_field.values)[domain.region])), 0.0, tol)
    ledger.check_le("max |u - v| on the boundary", float(gap[domain.boundary].max()), 0.0, tol)
    v_on_domain = ScalarField(domain, v.values)
    worst = float(dual_grad_field(v_on_domain).values[domain.interior].max())
    ledger.check_le("max ‖Dv‖_* on the interior", worst, K, settings.MESH_CONSTANT_CAP * domain.h_max)
    return ledger


def verify_envelope(out_dir: Path, report: dict, tol: float) -> CheckLedger:
    domain, f = read_grid(_artifact(out_dir, report, "f"))
    _, lower = read_grid(_artifact(out_dir, report, "lower"))
    _, upper = read_grid(_artifact(out_dir, report, "upper"))
    _, ll = read_grid(_artifact(out_dir, report, "lasry_lions"))
    results = report["results"]
    K = results["K"]

    ledger = CheckLedger()
    for name, g in (("g_lambda", lower), ("g^mu", upper), ("g_lambda^mu", ll)):
        ledger.check_le(f"lip({name})", stencil_lip(domain, g.values).value, K, tol)
    ledger.check_le("max (g_lambda - f)", float(np.max(lower.values - f.values)), 0.0, tol)
    ledger.check_le("max (f - g^mu)", float(np.max(f.values - upper.values)), 0.0, tol)
    ledger.check_le("max (g_lambda - g_lambda^mu)", float(np.max(lower.values - ll.values)), 0.0, tol)
    ledger.check_le("max (g_lambda^mu - g^mu)", float(np.max(ll.values - upper.values)), 0.0, tol)
    ledger.check_le(
        "‖g_lambda^mu - f‖_inf",
        float(np.max(np.abs(ll.values - f.values)[domain.region])),
        lasry_lions_bound(results["lambda"], results["mu"], K, domain.h_max),
        tol,
    )
    return ledger


def off_level_nodes(domain: GridDomain, w: np.ndarray, v: np.ndarray) -> np.ndarray:
    """
    Interior nodes where no backward, central or forward difference of the
    correction w - v, added to the central gradient of v, lands within
    RESIDUAL_TOL of the level set ‖·‖_* = 1
    """
    correction = np.where(domain.region, w - v, 0.0)
    smooth = grad_field(ScalarField(domain, v))
    per_axis = []
    for k, step in enumerate(domain.h):
        backward = (correction - np.roll(correction, 1, axis=k)) / step
        forward = (np.roll(correction, -1, axis=k) - correction) / step
        per_axis.append((backward, 0.5 * (backward + forward), forward))

    on_level = np.zeros(domain.shape, dtype=bool)
    for choice in product(*per_axis):
        total = np.moveaxis(smooth + np.stack(choice, axis=0), 0, -1)
        on_level |= np.abs(domain.norm.dual_norm(total) - 1.0) <= settings.RESIDUAL_TOL
    return domain.interior & ~on_level


def verify_eikonal(out_dir: Path, report: dict, tol: float) -> CheckLedger:
    domain, u0 = read_grid(_artifact(out_dir, report, "u0"))
    _, reference = read_grid(_artifact(out_dir, report, "reference"))
    _, v = read_grid(_artifact(out_dir, report, "v"))
    _, w = read_grid(_artifact(out_dir, report, "w"))
    eps = report["results"]["eps"]

    ledger = CheckLedger()
    ledger.check_le("max |w - u0| on ∂Ω", float(np.max(np.abs(w.values - u0.values)[domain.boundary])), 0.0, tol)
    ledger.check_le("sup |w - u_ref|", float(np.max(np.abs(w.values - reference.values)[domain.region])), eps, tol)
    ledger.check_le("sup |w - v| on the interior", float(np.max(np.abs(w.values - v.values)[domain.interior])), 0.5 * eps, tol)
    lip_w = stencil_lip(domain, w.values).value
    ledger.check_le("mesh constant C of lip(w)", max(0.0, lip_w - 1.0) / domain.h_max, settings.MESH_CONSTANT_CAP, 0.0)
    off_level = off_level_nodes(domain, w.values, v.values)
    ledger.check_le("residual fraction", float(off_level.sum()) / int(domain.interior.sum()), settings.RHO_MAX, 0.0)
    return ledger


def verify_casebook(out_dir: Path, report: dict, tol: float) -> CheckLedger:
    profile = pd.read_csv(_artifact(out_dir, report, "axis_profile"), sep=" ")
    mesh = report["results"]["mesh"]
    x = profile["x"].to_numpy()
    upper = profile["upper"].to_numpy()
    lower = profile["lower"].to_numpy()

    ledger = CheckLedger()
    ledger.check_le("max |inf-convolution - |x|| on the axis", float(np.max(np.abs(upper - np.abs(x)))), 2.0 * mesh, tol)
    ledger.check_le("max |sup-convolution - |x|| on the axis", float(np.max(np.abs(lower - np.abs(x)))), 2.0 * mesh, tol)
    ledger.check_le("max (upper - lower) on the axis", float(np.max(upper - lower)), 4.0 * mesh, tol)
    zero = int(np.argmin(np.abs(x)))
    for name, values in (("upper", upper), ("lower", lower)):
        left = (values[zero] - values[zero - 1]) / (x[zero] - x[zero - 1])
        right = (values[zero + 1] - values[zero]) / (x[zero + 1] - x[zero])
        ledger.check_le(f"2 - slope gap of {name} at the origin", 2.0 - (right - left), 0.1, 0.0)
    return ledger


VERIFIERS: Dict[str, Verifier] = {
    "lip": verify_lip,
    "extend": verify_extend,
    "local-step": verify_local_step,
    "global-approx": verify_global_approx,
    "smooth": verify_smooth,
    "envelope": verify_envelope,
    "eikonal": verify_eikonal,
    "casebook": verify_casebook,
}


def verify_run(out_dir: "str | Path", tol: Optional[float] = None) -> CheckLedger:
    """
    Re-check a finished run

    Raises:
        InputError: missing report or artifacts
    """
    out_dir = Path(out_dir)
    report = read_report(out_dir)
    command = report.get("command")
    if command not in VERIFIERS:
        raise InputError(f"report names unknown command {command!r}", path=str(out_dir))
    recorded_tol = report.get("config", {}).get("tol")
    tol = tol if tol is not None else (recorded_tol if recorded_tol is not None else settings.TOLERANCE)

    ledger = VERIFIERS[command](out_dir, report, tol)
    dump_json(out_dir / VERIFY_FILE, {"command": command, "tol": tol, "checks": ledger.as_records(), "passed": ledger.passed})
    logger.info(f"{'✅' if ledger.passed else '❌'} verify {command}: {len(ledger) - len(ledger.failures)}/{len(ledger)} checks passed")
    return ledger
