"""
LIPSCHITZ TOOLKIT - COMMAND LINE
================================
Exit codes: 0 all checks passed, 2 a certified inequality failed,
1 bad input or parameters outside their domain.
"""

import sys
from functools import wraps
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import click
from loguru import logger
from pydantic import ValidationError

from config import settings
from src.cli.commands import run
from src.cli.reports import write_report
from src.cli.schemas import build_run_config
from src.cli.verify import verify_run
from src.errors import InvariantViolation, LipschitzToolkitError
from src.verification import CheckLedger

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2


def setup_logging(level: Optional[str] = None, log_file: Optional[str] = None):
    """Configure logging"""
    logger.remove()

    # Console logging
    logger.add(
        sys.stderr,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <level>{message}</level>",
        level=level or settings.LOG_LEVEL,
        colorize=True,
    )

    # File logging
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        logger.add(
            log_file,
            rotation="1 day",
            retention="30 days",
            level="DEBUG",
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {message}",
        )


def _exit_code(action: Callable[[], CheckLedger]) -> int:
    try:
        ledger = action()
    except InvariantViolation as e:
        logger.error(f"❌ Invariant violated: {e}")
        return EXIT_INVARIANT
    except ValidationError as e:
        logger.error(f"❌ Invalid parameters: {e}")
        return EXIT_INPUT
    except LipschitzToolkitError as e:
        logger.error(f"❌ {e}")
        return EXIT_INPUT
    if not ledger.passed:
        logger.error(f"❌ Invariant violated: {ledger.failures[0].describe()}")
        return EXIT_INVARIANT
    return EXIT_OK


def _run_command(command: str, overrides: Dict[str, Any], config_path: Optional[str]) -> int:
    def action() -> CheckLedger:
        config = build_run_config(command, overrides, config_path)
        results, ledger, artifacts = run(config)
        write_report(config.out_dir, command, config.recorded(), results, ledger, artifacts)
        return ledger

    return _exit_code(action)


# ============================================
# SHARED OPTIONS
# ============================================

def common_options(func: Callable) -> Callable:
    options = [
        click.option("--input", "input_", default=None, help="Input file, or 'demo' for the seeded demo cloud"),
        click.option("--matrix", default=None, help="Distance-matrix CSV replacing coordinates"),
        click.option("--norm", default=None, help="Norm tag: l1, l2 or linf"),
        click.option("--eps", type=float, default=None),
        click.option("--lambda", "lam", type=float, default=None),
        click.option("--mu", type=float, default=None),
        click.option("--delta", type=float, default=None),
        click.option("--K", "K", type=float, default=None),
        click.option("--out", default=None, help="Output directory"),
        click.option("--tol", type=float, default=None, help="Tolerance override"),
        click.option("--seed", type=int, default=None),
        click.option("--parallel", type=int, default=None, help="Parallelism width"),
        click.option("--config", "config_path", default=None, help="JSON run-config file"),
        click.option("--domain", default=None, help="Built-in grid domain: square, disc or interval"),
        click.option("--n", "n", type=int, default=None, help="Nodes per axis of the built-in grid"),
        click.option("--data", default=None, help="Built-in grid data: linear, tent or zero"),
    ]
    for option in reversed(options):
        func = option(func)

    @wraps(func)
    def wrapper(**kwargs):
        kwargs["input"] = kwargs.pop("input_")
        kwargs["lambda"] = kwargs.pop("lam")
        return func(**kwargs)

    return wrapper


def _make_command(name: str, help_text: str) -> click.Command:
    @common_options
    def command(config_path: Optional[str], **overrides):
        sys.exit(_run_command(name, overrides, config_path))

    return click.command(name=name, help=help_text)(command)


@click.group()
@click.option("--log-level", default=None, help="Console log level")
@click.option("--log-file", default=None, help="Also log to this file (rotated daily)")
def cli(log_level: Optional[str], log_file: Optional[str]):
    """Lipschitz approximation and eikonal toolkit"""
    setup_logging(log_level, log_file)


for _name, _help in (
    ("lip", "Lipschitz constant and set metrics of a point cloud"),
    ("extend", "Extremal Lipschitz extensions of the boundary data"),
    ("local-step", "One boundary-preserving local approximation step"),
    ("global-approx", "Boundary-preserving approximation with constants strictly below K"),
    ("smooth", "Smoothing of a grid field below a Lipschitz constant"),
    ("envelope", "Moreau and Lasry-Lions envelopes of a grid field"),
    ("eikonal", "Almost-classical eikonal solution with the given boundary data"),
):
    cli.add_command(_make_command(_name, _help))


@cli.command("casebook")
@click.argument("case", required=False, default=None, type=click.Choice(["l1-disc", "linf-image"]))
@click.option("--n-boundary", type=int, default=None)
@click.option("--n-axis", type=int, default=None)
@click.option("--out", default=None)
@click.option("--tol", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--parallel", type=int, default=None)
@click.option("--config", "config_path", default=None)
def casebook(case: Optional[str], n_boundary, n_axis, out, tol, seed, parallel, config_path):
    """Limiting-case analysis: l1-disc or its linf image"""
    overrides = {
        "case": case,
        "n_boundary": n_boundary,
        "n_axis": n_axis,
        "out": out,
        "tol": tol,
        "seed": seed,
        "parallel": parallel,
    }
    sys.exit(_run_command("casebook", overrides, config_path))


@cli.command("verify")
@click.option("--out", default="out", help="Directory of a finished run")
@click.option("--tol", type=float, default=None, help="Tolerance override")
def verify(out: str, tol: Optional[float]):
    """Re-check a finished run from its emitted files"""
    sys.exit(_exit_code(lambda: verify_run(out, tol)))


def main():
    # the launcher always keeps a file log; direct `cli` calls only on request
    cli(default_map={"log_file": settings.LOG_FILE})


if __name__ == "__main__":
    main()
