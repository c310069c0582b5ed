"""Galerkin matrices of the shifted Fokker-Planck bilinear form.

With trial ``u = M p_j`` and test ``phi = M p_i`` the form becomes

    a_alpha(u, phi) = int M grad p_j . grad p_i - int M p_j k . grad p_i + alpha int M p_j p_i

so ``A_alpha = S + D + alpha N`` with rows indexed by the test function.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla

from .basis import BasisSpec, build_quadrature
from .model import DriftField

log = logging.getLogger(__name__)

COND_WARN = 1e12


@dataclass(frozen=True)
class OperatorMatrices:
    spec: BasisSpec
    S: np.ndarray
    D: np.ndarray
    N: np.ndarray
    alpha: float
    # relative change of D under a finer rule; exactly 0 for linear drifts
    quadrature_residual: float = 0.0

    @cached_property
    def L(self) -> np.ndarray:
        return self.S + self.D

    @cached_property
    def A_alpha(self) -> np.ndarray:
        return self.S + self.D + self.alpha * self.N

    @cached_property
    def lu(self):
        return sla.lu_factor(self.A_alpha, check_finite=True)

    def condition_number(self) -> float:
        return float(np.linalg.cond(self.A_alpha))


def _drift_matrix(spec: BasisSpec, drift: DriftField, exactness: int) -> np.ndarray:
    quad = build_quadrature(spec.n, exactness, spec.delta)
    V, G = spec.evaluate(quad.nodes, gradient=True)
    k = drift(quad.nodes)
    kg = np.einsum("pd,pid->pi", k, G)
    return -(kg * quad.weights[:, None]).T @ V


def assemble(
    spec: BasisSpec,
    drift: DriftField,
    alpha: float,
    quadrature_margin: int = 4,
) -> OperatorMatrices:
    """Assemble S, D, N and A_alpha for ``spec`` and ``drift``.

    Linear drifts are integrated exactly with a rule of exactness
    ``2 * degree + quadrature_margin``. Custom drifts use the same rule and
    report the change against a rule twice as fine as ``quadrature_residual``.
    """
    if drift.n != spec.n:
        raise ValueError(f"drift dimension {drift.n} != basis dimension {spec.n}")
    exactness = 2 * spec.degree + quadrature_margin
    quad = build_quadrature(spec.n, exactness, spec.delta)
    V, G = spec.evaluate(quad.nodes, gradient=True)
    w = quad.weights
    S = np.einsum("p,pid,pjd->ij", w, G, G)
    S = 0.5 * (S + S.T)
    N = (V * w[:, None]).T @ V
    N = 0.5 * (N + N.T)
    k = drift(quad.nodes)
    kg = np.einsum("pd,pid->pi", k, G)
    D = -(kg * w[:, None]).T @ V

    residual = 0.0
    if not drift.is_linear:
        D_fine = _drift_matrix(spec, drift, 2 * exactness + 2)
        scale = max(np.linalg.norm(D_fine), np.finfo(float).tiny)
        residual = float(np.linalg.norm(D_fine - D) / scale)
        log.info("custom drift quadrature residual %.3e", residual)

    mats = OperatorMatrices(spec=spec, S=S, D=D, N=N, alpha=float(alpha), quadrature_residual=residual)
    cond = mats.condition_number()
    if cond > COND_WARN:
        warnings.warn(f"A_alpha is ill-conditioned (cond ~ {cond:.2e})", stacklevel=2)
    return mats


def apply_L(mats: OperatorMatrices, coeffs) -> np.ndarray:
    """Pairings ``<L u, M p_i>`` for every test function."""
    return mats.L @ np.asarray(coeffs, dtype=float)


def bilinear_a_alpha(mats: OperatorMatrices, u, phi) -> float:
    return float(np.asarray(phi, dtype=float) @ mats.A_alpha @ np.asarray(u, dtype=float))


def coercivity_lower_bound(mats: OperatorMatrices, u, k_sup: float) -> float:
    """Young-inequality bound ``1/2 u.S.u + (alpha - k_sup^2/2 - 1/2) u.N.u``."""
    u = np.asarray(u, dtype=float)
    return float(0.5 * u @ mats.S @ u + (mats.alpha - 0.5 * k_sup**2 - 0.5) * u @ mats.N @ u)


def dump_matrix_market(mats: OperatorMatrices, directory) -> list:
    """Write S, D, N and A_alpha as Matrix Market coordinate files."""
    from pathlib import Path

    import scipy.io
    import scipy.sparse

    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name in ("S", "D", "N", "A_alpha"):
        path = out / f"{name}.mtx"
        scipy.io.mmwrite(str(path), scipy.sparse.coo_matrix(getattr(mats, name)), precision=17)
        paths.append(path)
    return paths
