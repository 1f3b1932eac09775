"""
Run configuration schemas
"""
import json
from pathlib import Path
from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config import settings
from src.errors import InputError
from src.metric import NormTag

COMMANDS = ("lip", "extend", "local-step", "global-approx", "smooth", "envelope", "eikonal", "casebook")

# keys that must not change the report (parallelism, output location)
UNRECORDED = ("out", "parallel")


class RunConfig(BaseModel):
    """One CLI run; numeric parameters are checked before any compute"""

    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    command: Literal["lip", "extend", "local-step", "global-approx", "smooth", "envelope", "eikonal", "casebook"]
    input: Optional[str] = None  # point cloud / grid path, or "demo"
    matrix: Optional[str] = None
    norm: str = "l2"
    eps: Optional[float] = Field(default=None, gt=0)
    lam: Optional[float] = Field(default=None, gt=0, alias="lambda")
    mu: Optional[float] = Field(default=None, ge=0)
    delta: Optional[float] = Field(default=None, ge=0)
    K: Optional[float] = Field(default=None, gt=0)
    out: str = "out"
    tol: Optional[float] = Field(default=None, gt=0)
    seed: int = Field(default=0, ge=0)
    parallel: int = Field(default=1, ge=1)

    # point-cloud demo
    demo_size: int = Field(default=300, ge=10)

    # grid instances
    domain: Literal["square", "disc", "interval"] = "square"
    n: int = Field(default=129, ge=5)
    data: Literal["linear", "tent", "zero"] = "linear"

    # casebook
    case: Literal["l1-disc", "linf-image"] = "l1-disc"
    n_boundary: int = Field(default=1024, ge=64)
    n_axis: int = Field(default=201, ge=5)

    @field_validator("norm")
    @classmethod
    def known_norm(cls, value: str) -> str:
        return NormTag.parse(value).value

    @model_validator(mode="after")
    def check_parameters(self) -> "RunConfig":
        if self.lam is not None and self.mu is not None and not self.mu < self.lam:
            raise ValueError(f"lambda must exceed mu, got lambda={self.lam}, mu={self.mu}")
        if self.command == "local-step" and self.lam is not None and not self.lam < 1.0:
            raise ValueError(f"local-step needs lambda < 1, got {self.lam}")
        if self.command == "envelope" and self.mu is not None and not self.mu > 0:
            raise ValueError("envelope needs mu > 0")
        if self.command == "eikonal" and self.domain == "interval":
            raise ValueError("eikonal runs on 2-D domains (square or disc)")
        if self.n_boundary % 4:
            raise ValueError(f"n_boundary must be a multiple of 4, got {self.n_boundary}")
        if self.n_axis % 2 == 0:
            raise ValueError(f"n_axis must be odd, got {self.n_axis}")
        return self

    @property
    def tolerance(self) -> float:
        return settings.TOLERANCE if self.tol is None else self.tol

    @property
    def out_dir(self) -> Path:
        return Path(self.out)

    def recorded(self) -> Dict[str, Any]:
        """Config as written to the report"""
        return self.model_dump(by_alias=True, exclude=set(UNRECORDED))


def load_config_file(path: Optional[str]) -> Dict[str, Any]:
    """
    Read the JSON run-config file ({"defaults": {...}, "<command>": {...}})

    An explicit path must exist; the default file is optional.
    """
    explicit = path is not None
    path = Path(path) if explicit else Path(settings.RUN_CONFIG_FILE)
    if not path.exists():
        if explicit:
            raise InputError("config file not found", path=str(path))
        return {}
    try:
        content = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise InputError(f"malformed JSON: {e.msg}", path=str(path), line=e.lineno) from e
    if not isinstance(content, dict):
        raise InputError("config file must hold a JSON object", path=str(path), line=1)
    return content


def build_run_config(command: str, overrides: Dict[str, Any], config_path: Optional[str] = None) -> RunConfig:
    """File defaults, then the command section, then explicit flags"""
    content = load_config_file(config_path)
    merged: Dict[str, Any] = {}
    merged.update(content.get("defaults", {}))
    merged.update(content.get(command, {}))
    merged.update({key: value for key, value in overrides.items() if value is not None})
    merged["command"] = command
    return RunConfig.model_validate(merged)
