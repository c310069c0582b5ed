"""Weighted disk-polynomial trial space and Jacobi-weighted quadrature.

Trial functions are ``M(x) * p(x)`` with ``p`` drawn from the disk polynomials

    p_{j,m}(r, theta) = c_{j,m} r^m P_j^{(delta, m)}(2 r^2 - 1) {cos, sin}(m theta)

normalised so that ``int M p_a p_b dx = delta_ab``. The ratio ``psi / M`` is then
a plain polynomial, and every Galerkin integrand is (Jacobi weight) x (polynomial).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_jacobi, gammaln, roots_jacobi

from .model import FeneParams, weight_integral

COS, SIN = 0, 1


@dataclass(frozen=True)
class BasisSpec:
    n: int
    degree: int
    delta: float
    # (j, m, kind) per basis function, ordered by total degree 2j+m, then m, then kind
    modes: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.n != 2:
            raise ValueError(f"unsupported dimension n={self.n}; only n=2 is implemented")
        if self.degree < 0:
            raise ValueError("degree must be >= 0")
        if not self.delta > -1.0:
            raise ValueError("delta must be > -1")
        modes = []
        for d in range(self.degree + 1):
            for m in range(d % 2, d + 1, 2):
                j = (d - m) // 2
                modes.append((j, m, COS))
                if m > 0:
                    modes.append((j, m, SIN))
        object.__setattr__(self, "modes", tuple(modes))

    @property
    def size(self) -> int:
        return len(self.modes)

    def total_degrees(self) -> np.ndarray:
        return np.array([2 * j + m for j, m, _ in self.modes])

    def norm_constants(self) -> np.ndarray:
        out = np.empty(self.size)
        a = self.delta
        for i, (j, m, _) in enumerate(self.modes):
            b = float(m)
            log_h = (
                (a + b + 1) * math.log(2.0)
                - math.log(2 * j + a + b + 1)
                + gammaln(j + a + 1)
                + gammaln(j + b + 1)
                - gammaln(j + a + b + 1)
                - gammaln(j + 1)
            )
            # radial measure: r dr = dt/4, 1-r^2 = (1-t)/2, r^2 = (1+t)/2
            log_radial = log_h - (a + b + 2) * math.log(2.0)
            angular = 2 * math.pi if m == 0 else math.pi
            out[i] = math.exp(-0.5 * (log_radial + math.log(angular)))
        return out

    def evaluate(self, points, *, gradient: bool = False):
        """Polynomial parts at ``points`` (shape (P, 2)).

        Returns an array (P, K), plus gradients (P, K, 2) when ``gradient`` is set.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        x, y = pts[:, 0], pts[:, 1]
        t = 2.0 * (x * x + y * y) - 1.0
        z = x + 1j * y
        mmax = self.degree
        zp = np.ones((mmax + 1, len(x)), dtype=complex)
        for m in range(1, mmax + 1):
            zp[m] = zp[m - 1] * z
        consts = self.norm_constants()
        vals = np.empty((len(x), self.size))
        grads = np.empty((len(x), self.size, 2)) if gradient else None
        cache = {}
        for i, (j, m, kind) in enumerate(self.modes):
            if (j, m) not in cache:
                P = eval_jacobi(j, self.delta, m, t)
                if gradient and j > 0:
                    dP = 0.5 * (j + self.delta + m + 1) * eval_jacobi(j - 1, self.delta + 1, m + 1, t)
                else:
                    dP = np.zeros_like(t)
                cache[(j, m)] = (P, dP)
            P, dP = cache[(j, m)]
            ang = zp[m].real if kind == COS else zp[m].imag
            c = consts[i]
            vals[:, i] = c * ang * P
            if gradient:
                if m == 0:
                    gx = gy = 0.0
                else:
                    w = m * zp[m - 1]
                    gx, gy = (w.real, -w.imag) if kind == COS else (w.imag, w.real)
                # grad t = 4 x
                grads[:, i, 0] = c * (gx * P + ang * dP * 4.0 * x)
                grads[:, i, 1] = c * (gy * P + ang * dP * 4.0 * y)
        if gradient:
            return vals, grads
        return vals

    def constant_index(self) -> int:
        return 0

    def constant_value(self) -> float:
        """Value of the (constant) first polynomial."""
        return float(self.norm_constants()[0])


def build_basis(n: int, degree: int, delta: float) -> BasisSpec:
    return BasisSpec(n=n, degree=degree, delta=delta)


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor rule for ``int (1-|x|^2)^gamma q(x) dx`` over the unit disk."""

    nodes: np.ndarray
    weights: np.ndarray
    weight_exponent: float
    exactness_degree: int

    def integrate(self, values) -> np.ndarray:
        """Integrate sampled polynomial values (nodes along axis 0)."""
        return np.tensordot(self.weights, np.asarray(values), axes=(0, 0))


def build_quadrature(n: int, exactness_degree: int, weight_exponent: float) -> QuadratureRule:
    """Gauss-Jacobi in ``t = 2r^2 - 1`` times an equispaced angular rule.

    Exact for ``int (1-r^2)^gamma q`` whenever ``deg q <= exactness_degree``.
    """
    if n != 2:
        raise ValueError(f"unsupported dimension n={n}")
    if exactness_degree < 0:
        raise ValueError("exactness_degree must be >= 0")
    if not weight_exponent > -1.0:
        raise ValueError("weight_exponent must be > -1")
    q = int(exactness_degree)
    # after angular averaging only even radial powers survive: degree q//2 in t
    n_rad = (q // 2) // 2 + 1
    n_ang = q + 1
    t, wt = roots_jacobi(n_rad, weight_exponent, 0.0)
    r = np.sqrt(0.5 * (1.0 + t))
    theta = 2.0 * math.pi * np.arange(n_ang) / n_ang
    rr, th = np.meshgrid(r, theta, indexing="ij")
    nodes = np.stack([(rr * np.cos(th)).ravel(), (rr * np.sin(th)).ravel()], axis=1)
    wr = wt * 2.0 ** (-weight_exponent) / 4.0
    weights = np.repeat(wr, n_ang) * (2.0 * math.pi / n_ang)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights, float(weight_exponent), q)


@dataclass(frozen=True)
class DistributionField:
    """``psi = M * p`` with ``p = sum coeffs[i] * basis[i]``."""

    spec: BasisSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (self.spec.size,):
            raise ValueError(f"expected {self.spec.size} coefficients, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __add__(self, other: "DistributionField") -> "DistributionField":
        return DistributionField(self.spec, self.coeffs + other.coeffs)

    def __rmul__(self, s: float) -> "DistributionField":
        return DistributionField(self.spec, s * self.coeffs)

    def mass(self) -> float:
        # int M p = <p, 1>_M, and 1 is a multiple of the first basis polynomial
        return float(self.coeffs[0] / self.spec.constant_value())

    def l2m_norm(self) -> float:
        """``||psi||_{L^2_M}``; the basis is orthonormal in this norm."""
        return float(np.linalg.norm(self.coeffs))

    def padded(self, spec: BasisSpec) -> "DistributionField":
        """Embed into a higher-degree basis with the same weight exponent."""
        if spec.delta != self.spec.delta or spec.degree < self.spec.degree:
            raise ValueError("can only pad into a larger basis with the same delta")
        c = np.zeros(spec.size)
        c[: self.spec.size] = self.coeffs
        return DistributionField(spec, c)


def evaluate_field(field: DistributionField, points):
    """Return ``(psi, ratio)`` at points of the closed unit disk."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    ratio = field.spec.evaluate(pts) @ field.coeffs
    r2 = np.sum(pts * pts, axis=1)
    if np.any(r2 > 1.0 + 1e-12):
        raise ValueError("evaluation points must lie in the closed unit disk")
    s = 1.0 - r2
    # points within rounding of the sphere are on it
    s[s <= 4.0 * np.finfo(float).eps] = 0.0
    M = s**field.spec.delta
    return M * ratio, ratio


def equilibrium_density(params: FeneParams, spec: BasisSpec) -> DistributionField:
    """``psi_eq = b M / Z`` expressed in the basis ``spec``."""
    if spec.delta != params.delta:
        raise ValueError("basis and parameters disagree on delta")
    Z = weight_integral(params.n, params.delta)
    c = np.zeros(spec.size)
    c[0] = params.b / Z / spec.constant_value()
    return DistributionField(spec, c)


def polar_grid(n_r: int = 200, n_theta: int = 200) -> np.ndarray:
    """Check grid including the centre and the boundary ring ``|x| = 1``."""
    r = np.linspace(0.0, 1.0, n_r)
    th = 2.0 * math.pi * np.arange(n_theta) / n_theta
    rr, tt = np.meshgrid(r, th, indexing="ij")
    return np.stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()], axis=1)
