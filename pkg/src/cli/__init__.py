"""
Command-line driver
"""
from .main import cli, main
from .schemas import RunConfig, build_run_config

__all__ = ["cli", "main", "RunConfig", "build_run_config"]
