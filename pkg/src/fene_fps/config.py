"""Run configuration schema (JSON), validated with pydantic; unknown keys are rejected."""

from __future__ import annotations

import math
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

Mode = Literal["solve", "spectrum", "sweep", "oracle", "compare"]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ModelSection(_Strict):
    n: Literal[2, 3] = 2
    delta: float = Field(8.0, gt=1.0)
    b: float = Field(1.0, gt=0.0)
    mu: float = Field(1.0, ge=0.0)

    @field_validator("n")
    @classmethod
    def _only_planar(cls, v):
        if v != 2:
            raise ValueError("only n = 2 is supported by the disk discretization")
        return v


class NoDrift(_Strict):
    type: Literal["none"]


class LinearDrift(_Strict):
    type: Literal["linear"]
    matrix: list[float]
    wi: float = 1.0

    @field_validator("matrix")
    @classmethod
    def _finite(cls, v):
        if not all(math.isfinite(x) for x in v):
            raise ValueError("matrix entries must be finite")
        if len(v) not in (4, 9):
            raise ValueError("matrix must be a row-major list of 4 (2x2) or 9 (3x3) numbers")
        k = int(round(math.sqrt(len(v))))
        A = np.array(v, dtype=float).reshape(k, k)
        if abs(np.trace(A)) > 1e-12 * max(np.linalg.norm(A), 1.0):
            raise ValueError(f"matrix must be traceless (trace = {np.trace(A):g})")
        return v

    @field_validator("wi")
    @classmethod
    def _finite_wi(cls, v):
        if not math.isfinite(v):
            raise ValueError("wi must be finite")
        return v

    def as_array(self, wi: float | None = None) -> np.ndarray:
        k = int(round(math.sqrt(len(self.matrix))))
        scale = self.wi if wi is None else wi
        return scale * np.array(self.matrix, dtype=float).reshape(k, k)


class Discretization(_Strict):
    degree: int = Field(16, ge=0, le=60)
    quadrature_margin: int = Field(4, ge=0)
    alpha: Optional[float] = Field(None, gt=0.0)


class Solver(_Strict):
    tol: float = Field(1e-10, gt=0.0)
    max_iter: int = Field(20000, ge=1)
    seed: int = Field(0, ge=0)


class Sde(_Strict):
    dt: float = Field(5e-5, gt=0.0)
    n_paths: int = Field(400, ge=1)
    n_steps: int = Field(800_000, ge=1)
    burn_in: int = Field(20_000, ge=0)
    seed: int = Field(0, ge=0)
    max_halvings: int = Field(20, ge=0)
    thin: int = Field(1000, ge=1)
    n_batches: int = Field(20, ge=2)

    @model_validator(mode="after")
    def _burn_in(self):
        if self.burn_in >= self.n_steps:
            raise ValueError("burn_in must be < n_steps")
        if self.n_paths < self.n_batches:
            raise ValueError("n_paths must be >= n_batches")
        return self


class Output(_Strict):
    report_path: str = "report.json"
    field_csv_path: Optional[str] = None
    field_grid: tuple[int, int] = (41, 64)
    sweep_values: list[float] = Field(default_factory=lambda: [0.1, 0.5, 1.0, 2.0, 5.0])
    sweep_csv_path: str = "sweep.csv"
    matrix_dump_dir: Optional[str] = None

    @field_validator("sweep_values")
    @classmethod
    def _positive(cls, v):
        if not v or any(not (x > 0 and math.isfinite(x)) for x in v):
            raise ValueError("sweep values must be finite and > 0")
        return v


class RunConfig(_Strict):
    mode: Mode = "solve"
    model: ModelSection = ModelSection()
    drift: Union[NoDrift, LinearDrift] = Field(default_factory=lambda: NoDrift(type="none"), discriminator="type")
    discretization: Discretization = Discretization()
    solver: Solver = Solver()
    sde: Sde = Sde()
    output: Output = Output()

    @model_validator(mode="after")
    def _dims(self):
        if isinstance(self.drift, LinearDrift):
            k = int(round(math.sqrt(len(self.drift.matrix))))
            if k != self.model.n:
                raise ValueError(f"drift matrix is {k}x{k} but model.n = {self.model.n}")
        if self.mode == "sweep" and not isinstance(self.drift, LinearDrift):
            raise ValueError("sweep mode needs a linear drift")
        return self

    def drift_matrix(self, wi: float | None = None) -> np.ndarray:
        if isinstance(self.drift, NoDrift):
            return np.zeros((self.model.n, self.model.n))
        return self.drift.as_array(wi)


def error_paths(exc: ValidationError) -> list[dict]:
    """Flatten pydantic errors into ``{"field": "a.b", "message": ...}`` records."""
    out = []
    for err in exc.errors():
        loc = [str(p) for p in err["loc"] if p not in ("linear", "none")]
        out.append({"field": ".".join(loc) or "<root>", "message": err["msg"]})
    return out
