"""
COMMAND RUNNERS
===============
One function per CLI command. Each takes a validated RunConfig, writes its
artifacts into the output directory and returns (results, ledger, artifacts).
"""

from typing import Callable, Dict, Tuple

import numpy as np
from loguru import logger

from src.casebook import l1_disc_case, linf_image_case, write_axis_profile
from src.cli.instances import load_cloud, load_grid_field, save_cloud
from src.cli.reports import dump_json
from src.cli.schemas import RunConfig
from src.eikonal import almost_classical
from src.extension import (
    ExtensionProblem,
    LocalStepInput,
    global_approx,
    inf_convolution,
    local_step,
    random_feasible_extensions,
    sup_convolution,
)
from src.metric import ScalarField, lip_constant, set_metrics
from src.metric.io import write_point_field
from src.smoothing import EnvelopeParams, envelope_checks, smooth_below_constant, stencil_lip, write_grid
from src.smoothing.envelopes import effective_constant
from src.smoothing.gradients import dual_grad_field
from src.verification import CheckLedger

Outcome = Tuple[Dict, CheckLedger, Dict[str, str]]

FEASIBLE_SAMPLES = 20


# ============================================
# POINT-CLOUD COMMANDS
# ============================================

def run_lip(config: RunConfig) -> Outcome:
    cloud = load_cloud(config)
    out = config.out_dir
    artifacts = save_cloud(out, cloud)
    ledger = CheckLedger()
    ledger.extend(cloud.space.validate(tol=config.tolerance), prefix="metric: ")

    whole = lip_constant(cloud.values, n_jobs=config.parallel)
    F = cloud.boundary_indices
    on_F = lip_constant(cloud.values, F, n_jobs=config.parallel)
    ledger.check_le("lip(u0, F) <= lip(u0, E)", on_F.value, whole.value, config.tolerance)

    results = {
        "n_points": cloud.space.n,
        "n_boundary": int(F.size),
        "lip": whole.value,
        "witness": [cloud.space.ids[i] for i in whole.witness],
        "lip_boundary": on_F.value,
    }
    interior = cloud.interior_indices
    if interior.size:
        metrics = set_metrics(cloud.space, interior, F)
        results.update({"dist_interior_boundary": metrics.dist_AB, "diam_interior": metrics.diam_A})
    return results, ledger, artifacts


def run_extend(config: RunConfig) -> Outcome:
    cloud = load_cloud(config)
    out = config.out_dir
    artifacts = save_cloud(out, cloud)
    F = cloud.boundary_indices
    data_lip = lip_constant(cloud.values, F, n_jobs=config.parallel).value
    lam = data_lip if config.lam is None else config.lam
    problem = ExtensionProblem.from_field(cloud.space, F, cloud.values, max(lam, config.tolerance))

    lower = sup_convolution(problem, tol=config.tolerance, n_jobs=config.parallel)
    upper = inf_convolution(problem, tol=config.tolerance, n_jobs=config.parallel)
    artifacts["lower"] = write_point_field(out / "lower.csv", cloud.space, lower.flat, cloud.tags).name
    artifacts["upper"] = write_point_field(out / "upper.csv", cloud.space, upper.flat, cloud.tags).name

    ledger = CheckLedger()
    ledger.check_le("lip(h, F)", data_lip, problem.lam, config.tolerance)
    for name, field in (("lower", lower), ("upper", upper)):
        ledger.check_le(f"lip({name})", lip_constant(field, n_jobs=config.parallel).value, problem.lam, config.tolerance)
        ledger.check_le(f"max |{name} - h| on F", float(np.max(np.abs(field.at(F) - problem.h))), 0.0, config.tolerance)
    ledger.check_le("max (lower - upper)", float(np.max(lower.flat - upper.flat)), 0.0, config.tolerance)

    rng = np.random.default_rng(config.seed)
    for sample in random_feasible_extensions(problem, FEASIBLE_SAMPLES, rng, n_jobs=config.parallel):
        ledger.check_le(f"{sample.name}: max (lower - f)", float(np.max(lower.flat - sample.flat)), 0.0, config.tolerance)
        ledger.check_le(f"{sample.name}: max (f - upper)", float(np.max(sample.flat - upper.flat)), 0.0, config.tolerance)

    results = {"lambda": problem.lam, "lip_data": data_lip, "max_spread": float(np.max(upper.flat - lower.flat))}
    return results, ledger, artifacts


def run_local_step(config: RunConfig) -> Outcome:
    cloud = load_cloud(config)
    out = config.out_dir
    artifacts = save_cloud(out, cloud)
    F = cloud.boundary_indices
    mu = 0.5 if config.mu is None else config.mu
    lam = 0.75 if config.lam is None else config.lam
    step = LocalStepInput(
        space=cloud.space,
        F=F,
        u0=cloud.values,
        u_mu=cloud.values.at(F),
        mu=mu,
        delta=0.0 if config.delta is None else config.delta,
        lam=lam,
    )
    result = local_step(step, tol=config.tolerance, n_jobs=config.parallel)
    artifacts["u_lambda"] = write_point_field(out / "u_lambda.csv", cloud.space, result.u_lambda.flat, cloud.tags).name
    results = {
        "lambda": lam,
        "mu": mu,
        "mu_used": result.mu_used,
        "delta": step.delta,
        "eps_lambda": result.eps_lambda,
        "certified_bound": result.certified_bound,
        "S_size": int(result.S_lambda.size),
        "G_size": int(result.G_lambda.size),
    }
    return results, result.ledger, artifacts


def run_global_approx(config: RunConfig) -> Outcome:
    cloud = load_cloud(config)
    out = config.out_dir
    artifacts = save_cloud(out, cloud)
    eps = 0.1 if config.eps is None else config.eps
    result = global_approx(
        cloud.space,
        cloud.boundary_indices,
        cloud.values,
        eps,
        K=config.K,
        tol=config.tolerance,
        n_jobs=config.parallel,
    )
    artifacts["u"] = write_point_field(out / "u.csv", cloud.space, result.u.flat, cloud.tags).name
    stages = [
        {"n": stage.n, "lambda_n": float(result.schedule.K * stage.lam), "indices": stage.indices}
        for stage in result.schedule.stages
    ]
    artifacts["stages"] = dump_json(out / "stages.json", {"K": result.schedule.K, "stages": stages}).name
    results = {
        "eps": eps,
        "K": result.schedule.K,
        "base_point": cloud.space.ids[result.schedule.p],
        "lambda_normalized": [float(v) for v in result.schedule.lambda_n / result.schedule.K],
        "sup_error": result.sup_error,
        "stages": [stage.as_record() for stage in result.stages],
    }
    return results, result.ledger, artifacts


# ============================================
# GRID COMMANDS
# ============================================

def run_smooth(config: RunConfig) -> Outcome:
    domain, u = load_grid_field(config)
    out = config.out_dir
    eps = 0.1 if config.eps is None else config.eps
    K = 1.0 if config.K is None else config.K
    result = smooth_below_constant(u, K, eps, rng=np.random.default_rng(config.seed), tol=config.tolerance)
    artifacts = {
        "u": write_grid(out / "u.grid", u).name,
        "v": write_grid(out / "v.grid", result.v).name,
        "eps_field": write_grid(out / "eps_field.grid", ScalarField(domain, result.eps_field, name="eps_field")).name,
    }
    grads = dual_grad_field(result.v).values[domain.interior]
    results = {
        "eps": eps,
        "K": K,
        "max_dual_gradient": float(grads.max()),
        "sup_error": float(np.max(np.abs(u.values - result.v.values)[domain.region])),
        "lip_u": stencil_lip(domain, u.values).value,
    }
    return results, result.ledger, artifacts


def run_envelope(config: RunConfig) -> Outcome:
    domain, f = load_grid_field(config)
    out = config.out_dir
    params = EnvelopeParams(
        lam=0.05 if config.lam is None else config.lam,
        mu=0.025 if config.mu is None else config.mu,
        K=config.K,
    )
    lower, upper, ll, ledger = envelope_checks(f, params, rng=np.random.default_rng(config.seed), tol=config.tolerance)
    artifacts = {
        "f": write_grid(out / "f.grid", f).name,
        "lower": write_grid(out / "lower.grid", lower).name,
        "upper": write_grid(out / "upper.grid", upper).name,
        "lasry_lions": write_grid(out / "lasry_lions.grid", ll).name,
    }
    results = {
        "lambda": params.lam,
        "mu": params.mu,
        "K": effective_constant(f, params.K),
        "sup_distance_lasry_lions": float(np.max(np.abs(ll.values - f.values)[domain.region])),
    }
    return results, ledger, artifacts


def run_eikonal(config: RunConfig) -> Outcome:
    domain, field = load_grid_field(config)
    out = config.out_dir
    eps = 0.1 if config.eps is None else config.eps
    boundary_data = ScalarField(domain, field.values, mask=domain.boundary, name="u0")
    w, report = almost_classical(
        boundary_data,
        eps,
        rng=np.random.default_rng(config.seed),
        tol=config.tolerance,
        n_jobs=config.parallel,
    )
    artifacts = {
        "u0": write_grid(out / "u0.grid", boundary_data).name,
        "reference": write_grid(out / "reference.grid", report.base).name,
        "v": write_grid(out / "v.grid", report.v).name,
        "w": write_grid(out / "w.grid", w).name,
        "residual": write_grid(out / "residual.grid", report.residual).name,
    }
    return report.as_record(), report.ledger, artifacts


# ============================================
# CASEBOOK
# ============================================

def run_casebook(config: RunConfig) -> Outcome:
    runner = l1_disc_case if config.case == "l1-disc" else linf_image_case
    result = runner(
        n_boundary=config.n_boundary,
        n_axis=config.n_axis,
        rng=np.random.default_rng(config.seed),
        tol=config.tolerance,
        n_jobs=config.parallel,
    )
    profile = write_axis_profile(config.out_dir / "axis_profile.dat", result)
    return result.as_record(), result.ledger, {"axis_profile": profile.name}


RUNNERS: Dict[str, Callable[[RunConfig], Outcome]] = {
    "lip": run_lip,
    "extend": run_extend,
    "local-step": run_local_step,
    "global-approx": run_global_approx,
    "smooth": run_smooth,
    "envelope": run_envelope,
    "eikonal": run_eikonal,
    "casebook": run_casebook,
}


def run(config: RunConfig) -> Outcome:
    """Dispatch a validated config to its runner"""
    config.out_dir.mkdir(parents=True, exist_ok=True)
    logger.info(f"📊 Running {config.command} (seed={config.seed}, width={config.parallel})")
    return RUNNERS[config.command](config)
