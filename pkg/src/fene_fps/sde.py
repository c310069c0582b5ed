"""Stochastic dumbbell oracle.

The stationary equation ``-div[M grad(psi/M)] + div(k psi) = 0`` is the
Fokker-Planck equation of

    dX = [k(X) - 2 delta X / (1 - |X|^2)] dt + sqrt(2) dW

(rewrite ``M grad(psi/M) = grad psi - psi grad M / M``). Time averages of
Euler-Maruyama paths therefore estimate moments of ``psi / b`` without touching
the Galerkin machinery. Steps that would leave the ball are retried with a
halved step and eventually rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .basis import DistributionField
from .model import DriftField, FeneParams

# per-path observables accumulated by the kernel
OBS = ("x1", "x2", "r2", "xx11", "xx12", "xx22", "g11", "g12", "g22")
_N_OBS = len(OBS)
BOUNDARY = 1.0 - 1e-12


class StepSizeError(RuntimeError):
    """Too many proposals left the unit ball; reduce dt."""


@dataclass(frozen=True)
class SdeConfig:
    dt: float = 2e-4
    n_paths: int = 200
    n_steps: int = 100_000
    burn_in: int = 5_000
    seed: int = 0
    max_halvings: int = 20
    thin: int = 200
    n_batches: int = 20

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if not 0 <= self.burn_in < self.n_steps:
            raise ValueError("burn_in must satisfy 0 <= burn_in < n_steps")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.max_halvings < 0 or self.thin < 1:
            raise ValueError("max_halvings must be >= 0 and thin >= 1")
        if self.n_batches < 2:
            raise ValueError("n_batches must be >= 2")


@dataclass(frozen=True)
class McEstimate:
    value: np.ndarray | float
    std_error: np.ndarray | float
    n_effective: int

    def to_dict(self) -> dict:
        return {
            "value": np.asarray(self.value).tolist(),
            "std_error": np.asarray(self.std_error).tolist(),
            "n_effective": int(self.n_effective),
        }


@dataclass(frozen=True)
class Ensemble:
    delta: float
    config: SdeConfig
    path_means: np.ndarray  # (n_paths, n_obs) time averages after burn-in
    path_sq_means: np.ndarray  # (n_paths, n_obs) time averages of squares
    samples: np.ndarray  # (n_paths, n_keep, 2) thinned retained states
    proposals: int
    rejected_proposals: int
    rejected_steps: int

    @property
    def rejection_rate(self) -> float:
        return self.rejected_proposals / max(self.proposals, 1)

    def summary(self) -> dict:
        return {
            "proposals": self.proposals,
            "rejected_proposals": self.rejected_proposals,
            "rejected_steps": self.rejected_steps,
            "rejection_rate": self.rejection_rate,
        }


@numba.njit(cache=True)
def _run_paths(A, delta, dt, n_steps, burn_in, max_halvings, thin, seeds, bound2):
    n_paths = seeds.shape[0]
    n_keep = (n_steps - burn_in) // thin
    means = np.zeros((n_paths, 9))
    sq = np.zeros((n_paths, 9))
    samples = np.zeros((n_paths, n_keep, 2))
    obs = np.zeros(9)
    counters = np.zeros(3, dtype=np.int64)  # proposals, rejected proposals, rejected steps
    two_delta = 2.0 * delta
    for i in range(n_paths):
        np.random.seed(seeds[i])
        x = 0.0
        y = 0.0
        kept = 0
        for step in range(n_steps):
            h = dt
            accepted = False
            for _ in range(max_halvings + 1):
                counters[0] += 1
                s = 1.0 - x * x - y * y
                fx = A[0, 0] * x + A[0, 1] * y - two_delta * x / s
                fy = A[1, 0] * x + A[1, 1] * y - two_delta * y / s
                amp = math.sqrt(2.0 * h)
                nx = x + h * fx + amp * np.random.standard_normal()
                ny = y + h * fy + amp * np.random.standard_normal()
                if nx * nx + ny * ny < bound2:
                    x = nx
                    y = ny
                    accepted = True
                    break
                counters[1] += 1
                h *= 0.5
            if not accepted:
                counters[2] += 1
            if step >= burn_in:
                r2 = x * x + y * y
                f = two_delta / (1.0 - r2)
                obs[0] = x
                obs[1] = y
                obs[2] = r2
                obs[3] = x * x
                obs[4] = x * y
                obs[5] = y * y
                obs[6] = f * x * x
                obs[7] = f * x * y
                obs[8] = f * y * y
                for k in range(9):
                    means[i, k] += obs[k]
                    sq[i, k] += obs[k] * obs[k]
                j = step - burn_in
                if j % thin == thin - 1 and kept < n_keep:
                    samples[i, kept, 0] = x
                    samples[i, kept, 1] = y
                    kept += 1
        n_avg = n_steps - burn_in
        for k in range(9):
            means[i, k] /= n_avg
            sq[i, k] /= n_avg
    return means, sq, samples, counters


def path_seeds(seed: int, n_paths: int) -> np.ndarray:
    """Independent per-path seeds from one master seed."""
    return np.random.SeedSequence(seed).generate_state(n_paths).astype(np.int64)


def simulate_stationary(params: FeneParams, drift: DriftField, config: SdeConfig = SdeConfig(), max_rejection: float = 0.01) -> Ensemble:
    """Run ``config.n_paths`` Euler-Maruyama paths from the origin.

    Deterministic for a given seed. Raises :class:`StepSizeError` when more than
    ``max_rejection`` of the proposals leave the ball.
    """
    if params.n != 2 or drift.n != 2:
        raise ValueError("the SDE oracle supports n = 2 only")
    if not drift.is_linear:
        raise ValueError("the SDE oracle supports linear drifts only")
    seeds = path_seeds(config.seed, config.n_paths)
    means, sq, samples, counters = _run_paths(
        np.ascontiguousarray(drift.matrix, dtype=float),
        float(params.delta),
        float(config.dt),
        int(config.n_steps),
        int(config.burn_in),
        int(config.max_halvings),
        int(config.thin),
        seeds,
        BOUNDARY**2,
    )
    ens = Ensemble(
        delta=float(params.delta),
        config=config,
        path_means=means,
        path_sq_means=sq,
        samples=samples,
        proposals=int(counters[0]),
        rejected_proposals=int(counters[1]),
        rejected_steps=int(counters[2]),
    )
    if ens.rejection_rate > max_rejection:
        raise StepSizeError(f"rejection rate {ens.rejection_rate:.3%} exceeds {max_rejection:.0%}; reduce dt")
    return ens


def _batch_means(values: np.ndarray, n_batches: int) -> np.ndarray:
    """Average path-level values over contiguous groups of paths."""
    n = values.shape[0]
    if n < n_batches:
        raise ValueError(f"need at least {n_batches} paths for batch means, got {n}")
    groups = np.array_split(np.arange(n), n_batches)
    return np.stack([values[g].mean(axis=0) for g in groups])


def estimate_observables(ens: Ensemble, names) -> McEstimate:
    """Batch-means estimate of time-averaged observables from :data:`OBS`."""
    idx = [OBS.index(name) for name in names]
    batches = _batch_means(ens.path_means[:, idx], ens.config.n_batches)
    value = batches.mean(axis=0)
    se = batches.std(axis=0, ddof=1) / math.sqrt(len(batches))
    var = ens.path_sq_means[:, idx].mean(axis=0) - ens.path_means[:, idx].mean(axis=0) ** 2
    n_eff = int(np.min(np.where(se > 0, var / np.maximum(se, 1e-300) ** 2, ens.path_means.shape[0])))
    if len(idx) == 1:
        return McEstimate(float(value[0]), float(se[0]), n_eff)
    return McEstimate(value, se, n_eff)


def second_moment(ens: Ensemble) -> McEstimate:
    """``<|X|^2>``; equals ``n / (n + 2 delta + 2)`` at equilibrium (``1/(delta+2)`` for n = 2)."""
    return estimate_observables(ens, ["r2"])


def estimate_stress(ens: Ensemble, params: FeneParams) -> McEstimate:
    """``mu b < 2 delta X (x) X / (1-|X|^2) - I >`` with batch-means errors."""
    if params.mu == 0.0:
        z = np.zeros((2, 2))
        return McEstimate(z, z.copy(), ens.path_means.shape[0])
    est = estimate_observables(ens, ["g11", "g12", "g22"])
    scale = params.mu * params.b
    v, s = est.value, est.std_error
    value = scale * np.array([[v[0] - 1.0, v[1]], [v[1], v[2] - 1.0]])
    se = scale * np.array([[s[0], s[1]], [s[1], s[2]]])
    return McEstimate(value, se, est.n_effective)


@dataclass(frozen=True)
class HistogramEstimate(McEstimate):
    r_edges: np.ndarray | None = None
    theta_edges: np.ndarray | None = None
    chi2: float | None = None
    dof: int | None = None


def _bin_probabilities(field: DistributionField, b: float, r_edges, th_edges, sub: int = 6) -> np.ndarray:
    """Probability of each polar bin under ``psi / b`` (Gauss-Legendre in r and theta)."""
    from .basis import evaluate_field

    gr, gw = np.polynomial.legendre.leggauss(sub)
    probs = np.zeros((len(r_edges) - 1, len(th_edges) - 1))
    for a in range(len(r_edges) - 1):
        r0, r1 = r_edges[a], r_edges[a + 1]
        rr = 0.5 * (r1 - r0) * gr + 0.5 * (r1 + r0)
        wr = 0.5 * (r1 - r0) * gw * rr
        for c in range(len(th_edges) - 1):
            t0, t1 = th_edges[c], th_edges[c + 1]
            tt = 0.5 * (t1 - t0) * gr + 0.5 * (t1 + t0)
            wt = 0.5 * (t1 - t0) * gw
            R, T = np.meshgrid(rr, tt, indexing="ij")
            pts = np.stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()], axis=1)
            psi, _ = evaluate_field(field, pts)
            probs[a, c] = np.sum(np.outer(wr, wt).ravel() * psi) / b
    return probs


def estimate_density_histogram(ens: Ensemble, bins=(10, 16), reference: DistributionField | None = None, b: float = 1.0, min_count: int = 10) -> HistogramEstimate:
    """Polar histogram density of the thinned samples (total mass 1).

    With a ``reference`` field, also returns a chi-square discrepancy against
    the bin probabilities of ``psi / b`` over bins holding at least ``min_count``
    samples.
    """
    n_r, n_th = bins
    pts = ens.samples.reshape(-1, 2)
    r = np.sqrt(np.sum(pts * pts, axis=1))
    th = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2.0 * math.pi)
    r_edges = np.linspace(0.0, 1.0, n_r + 1)
    th_edges = np.linspace(0.0, 2.0 * math.pi, n_th + 1)
    counts, _, _ = np.histogram2d(r, th, bins=[r_edges, th_edges])
    total = counts.sum()
    area = 0.5 * np.outer(np.diff(r_edges**2), np.diff(th_edges))
    density = counts / (total * area)
    se = np.sqrt(counts) / (total * area)
    chi2 = dof = None
    if reference is not None:
        expected = total * _bin_probabilities(reference, b, r_edges, th_edges)
        keep = counts >= min_count
        chi2 = float(np.sum((counts[keep] - expected[keep]) ** 2 / expected[keep]))
        dof = int(keep.sum() - 1)
    return HistogramEstimate(
        value=density,
        std_error=se,
        n_effective=int(total),
        r_edges=r_edges,
        theta_edges=th_edges,
        chi2=chi2,
        dof=dof,
    )


def oracle_summary(ens: Ensemble, params: FeneParams) -> dict:
    """JSON-ready summary: moments, stress, errors and rejection statistics."""
    mom = estimate_observables(ens, ["x1", "x2", "r2"])
    stress = estimate_stress(ens, params)
    return {
        "moments": {
            "mean_x": mom.value[:2].tolist(),
            "mean_x_std_error": mom.std_error[:2].tolist(),
            "mean_r2": float(mom.value[2]),
            "mean_r2_std_error": float(mom.std_error[2]),
        },
        "stress": stress.to_dict(),
        "rejections": ens.summary(),
        "config": {k: getattr(ens.config, k) for k in ens.config.__dataclass_fields__},
    }
