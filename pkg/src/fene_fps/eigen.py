"""Principal eigenpair of the discrete Fokker-Planck operator.

``B_alpha = A_alpha^{-1} N`` is the discrete inverse of the shifted operator.
Power iteration on it, started from a positive vector, converges to the
Perron eigenvector; the eigenvalue of the unshifted operator is
``1/mu - alpha``.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg as sla

from .assembly import OperatorMatrices
from .basis import DistributionField, polar_grid
from .model import compute_j0

log = logging.getLogger(__name__)

DENSE_MAX_SIZE = 500


class ConvergenceError(RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    max_iter: int = 20000
    seed: int = 0


@dataclass
class EigenReport:
    principal_lambda: float
    eigen_residual: float
    iterations: int
    min_ratio: float
    max_ratio: float
    min_real_part: float | None = None
    spectrum: list = field(default_factory=list)
    mass: float = 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["spectrum"] = [[float(z.real), float(z.imag)] for z in self.spectrum]
        return d


def solve_B_alpha(mats: OperatorMatrices, f) -> np.ndarray:
    """Solve ``A_alpha u = N f``; raises on a singular factorisation."""
    f = np.asarray(f, dtype=float)
    lu, piv = mats.lu
    if np.any(np.diag(lu) == 0.0):
        raise np.linalg.LinAlgError("A_alpha is singular: alpha below the coercivity bound?")
    return sla.lu_solve((lu, piv), mats.N @ f)


def _n_norm(mats, c):
    return float(np.sqrt(c @ mats.N @ c))


def ratio_extrema(field: DistributionField, grid=None, chunk: int = 8000):
    """Min and max of ``psi / M`` over ``grid`` (default: 200x200 polar)."""
    pts = polar_grid() if grid is None else np.asarray(grid, dtype=float)
    lo, hi = np.inf, -np.inf
    for s in range(0, len(pts), chunk):
        vals = field.spec.evaluate(pts[s : s + chunk]) @ field.coeffs
        lo = min(lo, float(vals.min()))
        hi = max(hi, float(vals.max()))
    return lo, hi


def principal_eigenpair(mats: OperatorMatrices, config: SolverConfig = SolverConfig(), b: float = 1.0, grid=None):
    """Power iteration on ``B_alpha`` from a seeded positive start.

    Returns the mass-normalised field (``int psi = b``) and an :class:`EigenReport`.
    Raises :class:`ConvergenceError` if the residual stays above ``config.tol``.
    """
    spec = mats.spec
    rng = np.random.default_rng(config.seed)
    c = np.zeros(spec.size)
    c[0] = 1.0
    c = c + 1e-3 * rng.standard_normal(spec.size)
    c /= _n_norm(mats, c)

    mu = lam = np.nan
    residual = np.inf
    it = 0
    for it in range(1, config.max_iter + 1):
        v = solve_B_alpha(mats, c)
        mu = float(c @ mats.N @ v)  # c is N-normalised
        c = v / _n_norm(mats, v)
        lam = 1.0 / mu - mats.alpha
        Nc = mats.N @ c
        residual = float(np.linalg.norm(mats.L @ c - lam * Nc) / np.linalg.norm(Nc))
        if residual <= config.tol:
            break

    field_ = DistributionField(spec, c)
    mass = field_.mass()
    if mass < 0:
        c = -c
        mass = -mass
    c = c * (b / mass)
    field_ = DistributionField(spec, c)
    lo, hi = ratio_extrema(field_, grid)
    report = EigenReport(
        principal_lambda=float(lam),
        eigen_residual=residual,
        iterations=it,
        min_ratio=lo,
        max_ratio=hi,
        mass=field_.mass(),
    )
    if residual > config.tol:
        raise ConvergenceError(
            f"power iteration did not converge in {config.max_iter} iterations "
            f"(residual {residual:.3e} > tol {config.tol:.1e})",
            report,
        )
    log.debug("converged in %d iterations, lambda=%.3e", it, lam)
    return field_, report


def full_spectrum(mats: OperatorMatrices, max_size: int = DENSE_MAX_SIZE) -> np.ndarray:
    """All eigenvalues of ``(S + D) c = lambda N c``, sorted by real part."""
    if mats.spec.size > max_size:
        raise ValueError(
            f"dense spectrum refused for {mats.spec.size} unknowns (> {max_size}); "
            "use principal_eigenpair instead"
        )
    ev = sla.eigvals(mats.L, mats.N)
    return ev[np.lexsort((ev.imag, ev.real))]


def spectrum_summary(spectrum: np.ndarray) -> dict:
    """Minimum real part and separation of the eigenvalue closest to zero."""
    ev = np.asarray(spectrum)
    i0 = int(np.argmin(np.abs(ev)))
    others = np.delete(ev, i0)
    gap = float(np.min(np.abs(others - ev[i0]))) if len(others) else np.inf
    return {
        "min_real_part": float(ev.real.min()),
        "zero_eigenvalue": [float(ev[i0].real), float(ev[i0].imag)],
        "zero_gap": gap,
    }


class _NormFrame:
    """Maps between coefficient space and the L^2_M-orthonormal frame ``R c``."""

    def __init__(self, mats: OperatorMatrices):
        self.mats = mats
        self.R = sla.cholesky(mats.N, lower=False)
        self.lu = mats.lu

    def apply(self, v, m):
        w = sla.solve_triangular(self.R, v, lower=False)
        for _ in range(m):
            w = sla.lu_solve(self.lu, self.mats.N @ w)
        return self.R @ w

    def apply_adjoint(self, v, m):
        # (R B R^-1)^T = R^-T N A^-T R^T
        w = self.R.T @ v
        for _ in range(m):
            w = self.mats.N @ sla.lu_solve(self.lu, w, trans=1)
        return sla.solve_triangular(self.R, w, trans="T", lower=False)


def spectral_radius_estimate(
    mats: OperatorMatrices,
    m: int,
    n_vectors: int = 3,
    seed: int = 0,
    tol: float = 1e-14,
    max_iter: int = 500,
) -> float:
    """``||B_alpha^m||^{1/m}`` in L^2_M, by power iteration on random vectors.

    Gelfand's formula makes this an upper proxy for ``Spr(B_alpha)`` that
    decreases to it along ``m -> 2m``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    frame = _NormFrame(mats)
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(n_vectors):
        v = rng.standard_normal(mats.spec.size)
        v /= np.linalg.norm(v)
        sigma2 = 0.0
        for _ in range(max_iter):
            w = frame.apply_adjoint(frame.apply(v, m), m)
            new = float(v @ w)
            v = w / np.linalg.norm(w)
            if abs(new - sigma2) <= tol * new:
                sigma2 = new
                break
            sigma2 = new
        best = max(best, sigma2)
    return float(np.sqrt(best) ** (1.0 / m))


def power_eigenvalue(mats: OperatorMatrices, power: int, seed: int = 0, tol: float = 1e-14, max_iter: int = 5000):
    """Principal eigenvalue of ``B_alpha^power`` by power iteration from a positive start."""
    frame = _NormFrame(mats)
    rng = np.random.default_rng(seed)
    c = np.zeros(mats.spec.size)
    c[0] = 1.0
    c = frame.R @ (c + 1e-3 * rng.standard_normal(mats.spec.size))
    c /= np.linalg.norm(c)
    mu = 0.0
    for _ in range(max_iter):
        v = frame.apply(c, power)
        new = float(c @ v)
        c = v / np.linalg.norm(v)
        if abs(new - mu) <= tol * abs(new):
            mu = new
            break
        mu = new
    return mu


def krein_rutman_check(mats: OperatorMatrices, delta: float, multiples=(1, 2, 4), seed: int = 0) -> dict:
    """Compare ``||B^m||^{1/m}`` with ``mu0^{1/(j0+3)}``, mu0 the top eigenvalue of ``B^{j0+3}``."""
    j0 = compute_j0(delta)
    p = j0 + 3
    mu0 = power_eigenvalue(mats, p, seed=seed)
    lower = mu0 ** (1.0 / p)
    estimates = {int(k * p): spectral_radius_estimate(mats, k * p, seed=seed) for k in multiples}
    return {
        "j0": j0,
        "power": p,
        "mu0": mu0,
        "lower_bound": lower,
        "spr_estimates": estimates,
        "holds": all(v >= lower - 1e-10 for v in estimates.values()),
    }
