"""Experiment configuration files (JSON), validated with pydantic."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class InstanceConfig(_Strict):
    family: Literal["box", "cross_polytope", "regular_simplex", "random_hull"] = "box"
    polytope_file: Optional[str] = None
    d: int = Field(2, ge=1, le=16)
    size: Optional[float] = Field(None, gt=0)
    transform: Literal["none", "random_linear"] = "none"
    n_points: Optional[int] = Field(None, ge=2)
    theta: Optional[list[float]] = None
    theta_norm: float = Field(1.0, gt=0, le=1)
    delta_floor: float = Field(0.05, ge=0)
    instance_seed: int = 0

    @model_validator(mode="after")
    def _theta_dim(self):
        if self.theta is not None and self.polytope_file is None and len(self.theta) != self.d:
            raise ValueError(f"theta has {len(self.theta)} entries but d={self.d}")
        return self


class AlgorithmConfig(_Strict):
    name: Literal["sbe", "oful", "etc"] = "sbe"
    zeta: Optional[float] = Field(None, gt=0)
    zeta_scale: float = Field(1.0, gt=0)
    mode: Literal["exact_ellipsoid", "weak_ellipsoid"] = "weak_ellipsoid"
    exploration: Literal["signed", "one_sided"] = "signed"
    lam: float = Field(1.0, gt=0)
    budget_per_axis: int = Field(100, ge=0)


class CorruptionConfig(_Strict):
    kind: Literal["none", "first_k_flip", "target_vertex", "adaptive_gap_mask"] = "none"
    budget: float = Field(0.0, ge=0)
    k: Optional[int] = Field(None, ge=0)
    target: Optional[int] = Field(None, ge=0)
    magnitude: float = Field(1.0, gt=0, le=1)


class ExperimentConfig(_Strict):
    instance: InstanceConfig = InstanceConfig()
    algorithm: AlgorithmConfig = AlgorithmConfig()
    corruption: CorruptionConfig = CorruptionConfig()
    T: int = Field(..., ge=2)
    delta: float = Field(0.1, gt=0, lt=1)
    noise: Literal["gaussian_std", "uniform_pm1", "none"] = "gaussian_std"
    seeds: list[int] = Field(default_factory=lambda: [0], min_length=1)
    out_dir: Optional[str] = None
    check_lemmas: bool = False


class GridConfig(_Strict):
    C: Optional[list[float]] = None
    d: Optional[list[int]] = None
    algorithm: Optional[list[Literal["sbe", "oful", "etc"]]] = None


class SweepConfig(ExperimentConfig):
    grid: GridConfig

    @model_validator(mode="after")
    def _nonempty(self):
        axes = [self.grid.C, self.grid.d, self.grid.algorithm]
        if all(a is None for a in axes) or any(a is not None and len(a) == 0 for a in axes):
            raise ValueError("grid must define at least one axis and no axis may be empty")
        if self.grid.C is not None and any(c < 0 for c in self.grid.C):
            raise ValueError("grid.C entries must be nonnegative")
        if self.grid.d is not None and any(not 1 <= d <= 16 for d in self.grid.d):
            raise ValueError("grid.d entries must lie in [1, 16]")
        return self


def _format_error(exc: ValidationError) -> tuple[str, str]:
    err = exc.errors()[0]
    loc = ".".join(str(p) for p in err["loc"]) or "<root>"
    return loc, f"{loc}: {err['msg']}"


def load_config(path, sweep: bool = False):
    """Parse and validate a config file; raises :class:`ConfigError` naming the bad field.

    A relative ``instance.polytope_file`` is resolved against the config's directory.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}", field="config") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})", field="config") from None
    model = SweepConfig if sweep else ExperimentConfig
    try:
        cfg = model.model_validate(raw)
    except ValidationError as exc:
        loc, msg = _format_error(exc)
        raise ConfigError(msg, field=loc) from None
    pf = cfg.instance.polytope_file
    if pf is not None:
        p = Path(pf)
        if not p.is_absolute() and not p.exists():
            p = path.parent / p
        if not p.exists():
            raise ConfigError(f"instance.polytope_file: no such file {pf}", field="instance.polytope_file")
        cfg = cfg.model_copy(update={"instance": cfg.instance.model_copy(update={"polytope_file": str(p)})})
    return cfg
