"""Kramers stress, viscometric functions, X_beta norms and the macroscopic flow.

Stress convention (rescaled variables, Jacobian absorbed into ``b`` and ``mu``)::

    S = mu * [ 2 delta * int x (x) x / (1 - |x|^2) psi dx  -  (int psi) I ]

The explicit ``2 delta = delta_tilde^2`` makes the equilibrium stress vanish
identically.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .assembly import assemble
from .basis import DistributionField, build_basis, build_quadrature, polar_grid
from .eigen import SolverConfig, principal_eigenpair, ratio_extrema
from .model import DriftField, FeneParams, compute_alpha

STRESS_CONVENTION = "S = mu*[2*delta*int x(x)x/(1-|x|^2) psi dx - (int psi) I], rescaled variables"


@dataclass(frozen=True)
class StressTensor:
    components: np.ndarray
    convention: str = STRESS_CONVENTION

    def to_dict(self) -> dict:
        return {"components": self.components.tolist(), "convention": self.convention}


@dataclass(frozen=True)
class MaterialFunctions:
    wi: float
    eta_p: float
    psi1: float
    psi2: float | None
    stress: StressTensor


def kramers_stress(field: DistributionField, params: FeneParams, margin: int = 4) -> StressTensor:
    if not params.delta > 1.0:
        raise ValueError("stress integrand needs delta > 1")
    spec = field.spec
    n = spec.n
    # the spring force costs one power of (1 - r^2): integrate against weight delta - 1
    quad = build_quadrature(n, spec.degree + 2 + margin, params.delta - 1.0)
    p = spec.evaluate(quad.nodes) @ field.coeffs
    x = quad.nodes
    second = np.einsum("p,pi,pj->ij", quad.weights * p, x, x)
    S = params.mu * (2.0 * params.delta * second - field.mass() * np.eye(n))
    return StressTensor(0.5 * (S + S.T))


def solve_linear_drift(params: FeneParams, A, degree: int = 16, config: SolverConfig = SolverConfig(), margin: int = 4):
    """Assemble and solve for ``k(x) = A x``; returns (field, report, alpha params)."""
    drift = DriftField.linear(A)
    ap = compute_alpha(drift, params.n)
    spec = build_basis(params.n, degree, params.delta)
    mats = assemble(spec, drift, ap.alpha, quadrature_margin=margin)
    field, report = principal_eigenpair(mats, config, b=params.b)
    return field, report, ap


def material_functions(A_base, wi: float, params: FeneParams, degree: int = 16, config: SolverConfig = SolverConfig()):
    """Shear viscosity ``S12/wi`` and normal-stress coefficients for ``k = wi A_base x``."""
    if not wi > 0:
        raise ValueError("wi must be > 0")
    A = wi * np.asarray(A_base, dtype=float)
    field, _, _ = solve_linear_drift(params, A, degree, config)
    S = kramers_stress(field, params).components
    psi2 = (S[1, 1] - S[2, 2]) / wi**2 if params.n == 3 else None
    return MaterialFunctions(
        wi=float(wi),
        eta_p=float(S[0, 1] / wi),
        psi1=float((S[0, 0] - S[1, 1]) / wi**2),
        psi2=psi2,
        stress=StressTensor(S),
    )


def ratio_bounds(field: DistributionField, grid=None):
    """Min and max of ``psi / M`` over ``grid`` (default 200x200 polar, boundary ring included)."""
    return ratio_extrema(field, grid)


def x_beta_norm(field: DistributionField, beta: float, grid=None) -> float:
    """Grid estimate of ``sup |psi| / M^beta``; ``inf`` (with a warning) on overflow."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    pts = polar_grid() if grid is None else np.asarray(grid, dtype=float)
    p = np.abs(field.spec.evaluate(pts) @ field.coeffs)
    M = np.maximum(1.0 - np.sum(pts * pts, axis=1), 0.0) ** field.spec.delta
    expo = 1.0 - beta
    if expo >= 0:
        return float(np.max(p * M**expo))
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.where(p == 0.0, 0.0, p * M**expo)
    if not np.all(np.isfinite(vals)):
        warnings.warn(f"X_beta norm overflows for beta={beta} (ratio nonzero on the boundary)", stacklevel=2)
        return math.inf
    return float(np.max(vals))


@dataclass(frozen=True)
class MacroFlow:
    """Homogeneous steady flow ``u = A y + c`` with its balancing pressure."""

    A: np.ndarray
    c: np.ndarray

    def velocity(self, y):
        return np.asarray(y, dtype=float) @ self.A.T + self.c

    def pressure(self, y):
        y = np.asarray(y, dtype=float)
        A2 = self.A @ self.A
        quad = -0.5 * np.einsum("...i,ij,...j->...", y, A2, y)
        return quad - y @ (self.A @ self.c)

    def divergence(self) -> float:
        return float(np.trace(self.A))

    def momentum_residual(self) -> float:
        """``max |(u.grad)u + grad p|``; zero iff ``A^2`` is symmetric (always for n = 2)."""
        A2 = self.A @ self.A
        return float(np.abs(0.5 * (A2 - A2.T)).max())


def macroscopic_flow(A, c=0.0) -> MacroFlow:
    A = np.array(A, dtype=float)
    if abs(np.trace(A)) > 1e-12 * max(np.linalg.norm(A), 1.0):
        raise ValueError("velocity gradient must be traceless")
    c = np.broadcast_to(np.asarray(c, dtype=float), (A.shape[0],)).copy()
    return MacroFlow(A, c)
