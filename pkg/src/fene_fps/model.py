"""Model parameters, Maxwellian weight, FENE force and the drift field.

Everything here lives in rescaled variables: the connector vector is
``x = x_tilde / delta_tilde`` on the unit ball and ``delta = delta_tilde**2 / 2``.
The Deborah number and the ``2 delta_tilde De`` factor are folded into the
drift matrix (or the custom drift evaluator).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import beta as beta_fn

THEORY_MIN_DELTA = 8.0
TRACE_TOL = 1e-12


class DomainError(ValueError):
    """Raised when a point lies outside the open unit ball (or FENE cutoff)."""


@dataclass(frozen=True)
class FeneParams:
    n: int = 2
    delta: float = 8.0
    b: float = 1.0
    mu: float = 1.0
    outside_theory: bool = field(init=False)

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError(f"n must be 2 or 3, got {self.n}")
        if not self.delta > 1.0:
            raise ValueError(f"delta must be > 1, got {self.delta}")
        if not self.b > 0.0:
            raise ValueError(f"b must be > 0, got {self.b}")
        if not self.mu >= 0.0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")
        outside = self.delta < THEORY_MIN_DELTA
        object.__setattr__(self, "outside_theory", outside)
        if outside:
            warnings.warn(
                f"delta={self.delta} < {THEORY_MIN_DELTA}: outside the existence "
                "theorem hypothesis; results are reported without theory coverage",
                stacklevel=2,
            )

    @property
    def delta_tilde(self) -> float:
        return math.sqrt(2.0 * self.delta)


@dataclass(frozen=True)
class DriftField:
    """Drift ``k(x)`` on the unit ball.

    Build with :meth:`linear` for ``k(x) = A x`` (traceless A) or
    :meth:`custom` for an arbitrary Lipschitz field with user-supplied bounds.
    """

    n: int
    matrix: np.ndarray | None = None
    k: Callable[[np.ndarray], np.ndarray] | None = None
    div_k: Callable[[np.ndarray], np.ndarray] | None = None
    k_sup: float = 0.0
    divk_sup: float = 0.0

    @classmethod
    def linear(cls, A) -> "DriftField":
        A = np.array(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] not in (2, 3):
            raise ValueError(f"drift matrix must be 2x2 or 3x3, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ValueError("drift matrix has non-finite entries")
        scale = np.linalg.norm(A)
        if abs(np.trace(A)) > TRACE_TOL * max(scale, 1.0):
            raise ValueError(f"drift matrix must be traceless, trace = {np.trace(A):g}")
        A.setflags(write=False)
        # sup over the unit ball of |A x| is the spectral norm
        k_sup = float(np.linalg.norm(A, 2)) if scale > 0 else 0.0
        return cls(n=A.shape[0], matrix=A, k_sup=k_sup, divk_sup=0.0)

    @classmethod
    def zero(cls, n: int = 2) -> "DriftField":
        return cls.linear(np.zeros((n, n)))

    @classmethod
    def custom(cls, n, k, div_k, k_sup, divk_sup) -> "DriftField":
        if not (np.isfinite(k_sup) and np.isfinite(divk_sup)):
            raise ValueError("drift bounds must be finite")
        if k_sup < 0 or divk_sup < 0:
            raise ValueError("drift bounds must be non-negative")
        return cls(n=n, k=k, div_k=div_k, k_sup=float(k_sup), divk_sup=float(divk_sup))

    @property
    def is_linear(self) -> bool:
        return self.matrix is not None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Evaluate k at points ``x`` of shape (..., n)."""
        x = np.asarray(x, dtype=float)
        if self.is_linear:
            return x @ self.matrix.T
        return np.asarray(self.k(x), dtype=float)

    def divergence(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.is_linear:
            return np.full(x.shape[:-1], float(np.trace(self.matrix)))
        return np.asarray(self.div_k(x), dtype=float)

    def scaled(self, wi: float) -> "DriftField":
        if not self.is_linear:
            raise ValueError("only linear drifts can be rescaled")
        return DriftField.linear(wi * self.matrix)


@dataclass(frozen=True)
class AlphaParams:
    lambda0: float
    alpha: float


def weight(x, delta: float, *, allow_boundary: bool = False):
    """Maxwellian weight ``M(x) = (1 - |x|^2)^delta``.

    Points on or outside the unit sphere raise :class:`DomainError` unless
    ``allow_boundary`` is set, in which case the continuous extension 0 is
    returned for ``|x| >= 1``.
    """
    x = np.asarray(x, dtype=float)
    s = 1.0 - np.sum(x * x, axis=-1)
    if np.any(s <= 0.0):
        if not allow_boundary:
            raise DomainError("weight requested at |x| >= 1")
        s = np.maximum(s, 0.0)
    return s**delta


def log_weight_gradient(x, delta: float):
    """``grad M / M = -2 delta x / (1 - |x|^2)``; singular on the sphere."""
    x = np.asarray(x, dtype=float)
    s = 1.0 - np.sum(x * x, axis=-1, keepdims=True)
    if np.any(s <= 0.0):
        raise DomainError("log_weight_gradient is singular for |x| >= 1")
    return -2.0 * delta * x / s


def fene_force(x_tilde, delta_tilde: float):
    """Warner spring force ``x / (1 - (|x| / delta_tilde)^2)`` in unscaled units."""
    x_tilde = np.asarray(x_tilde, dtype=float)
    s = 1.0 - np.sum(x_tilde * x_tilde, axis=-1, keepdims=True) / delta_tilde**2
    if np.any(s <= 0.0):
        raise DomainError("FENE force undefined for |x| >= delta_tilde")
    return x_tilde / s


def compute_alpha(drift: DriftField, n: int, override: float | None = None) -> AlphaParams:
    """Minimal shift making the bilinear form coercive.

    ``override`` may only raise alpha above the bound.
    """
    ks, dks = drift.k_sup, drift.divk_sup
    lambda0 = 2.0 * (ks + 1.0)
    alpha = max(0.5 * ks + 1.0, 4.0 * lambda0**2 + lambda0 * n + 2.0 * lambda0 * ks + dks)
    if override is not None:
        if override < alpha:
            raise ValueError(f"alpha override {override} is below the admissible bound {alpha}")
        alpha = float(override)
    return AlphaParams(lambda0=lambda0, alpha=alpha)


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def weight_integral(n: int, gamma: float) -> float:
    """Closed form of the integral of (1 - |x|^2)^gamma over the unit ball."""
    return sphere_area(n) * 0.5 * float(beta_fn(n / 2, gamma + 1.0))


def compute_j0(delta: float) -> int:
    """Largest natural j with ``1/2 + (2j+1)/delta < 1``.

    Equivalently the natural number in ``[delta/4 - 3/2, delta/4 - 1/2)``.
    """
    upper = delta / 4.0 - 0.5
    j0 = math.ceil(upper) - 1
    if j0 < 0:
        raise ValueError(f"no natural number j satisfies 1/2 + (2j+1)/delta < 1 for delta={delta}")
    if delta < THEORY_MIN_DELTA:
        warnings.warn(f"delta={delta} < 8: j0 outside theory coverage", stacklevel=2)
    return j0
