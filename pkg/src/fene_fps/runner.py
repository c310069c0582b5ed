"""Pipelines behind the CLI modes; each returns a JSON-ready report dict."""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .assembly import assemble, dump_matrix_market
from .basis import build_basis, evaluate_field
from .config import RunConfig
from .eigen import SolverConfig, full_spectrum, krein_rutman_check, principal_eigenpair, spectrum_summary
from .model import DriftField, FeneParams, compute_alpha
from .observables import STRESS_CONVENTION, kramers_stress, material_functions
from .sde import SdeConfig, estimate_stress, oracle_summary, simulate_stationary

log = logging.getLogger(__name__)

FIELD_COLUMNS = ("r", "theta", "psi", "ratio")
SWEEP_COLUMNS = ("wi", "S11", "S12", "S22", "eta_p", "psi1")


def _params(cfg: RunConfig) -> FeneParams:
    m = cfg.model
    return FeneParams(n=m.n, delta=m.delta, b=m.b, mu=m.mu)


def _solver(cfg: RunConfig) -> SolverConfig:
    s = cfg.solver
    return SolverConfig(tol=s.tol, max_iter=s.max_iter, seed=s.seed)


def _sde(cfg: RunConfig) -> SdeConfig:
    return SdeConfig(**cfg.sde.model_dump())


def _header(cfg: RunConfig, params: FeneParams) -> dict:
    return {
        "metadata": {"package": "fene_fps", "version": __version__, "mode": cfg.mode},
        "config": cfg.model_dump(mode="json"),
        "theory_covered": not params.outside_theory,
        "stress_convention": STRESS_CONVENTION,
    }


def _assemble(cfg: RunConfig, params: FeneParams, A):
    drift = DriftField.linear(A)
    ap = compute_alpha(drift, params.n, override=cfg.discretization.alpha)
    spec = build_basis(params.n, cfg.discretization.degree, params.delta)
    mats = assemble(spec, drift, ap.alpha, quadrature_margin=cfg.discretization.quadrature_margin)
    return mats, ap


def _galerkin(cfg: RunConfig, params: FeneParams, A):
    mats, ap = _assemble(cfg, params, A)
    field, report = principal_eigenpair(mats, _solver(cfg), b=params.b)
    return mats, ap, field, report


def write_field_csv(field, path, grid=(41, 64)) -> None:
    n_r, n_th = grid
    r = np.linspace(0.0, 1.0, n_r)
    th = 2.0 * np.pi * np.arange(n_th) / n_th
    R, T = np.meshgrid(r, th, indexing="ij")
    pts = np.stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()], axis=1)
    psi, ratio = evaluate_field(field, pts)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(FIELD_COLUMNS)
        for row in zip(R.ravel(), T.ravel(), psi, ratio):
            w.writerow([repr(float(v)) for v in row])


def run_solve(cfg: RunConfig, out: Path) -> dict:
    params = _params(cfg)
    mats, ap, field, report = _galerkin(cfg, params, cfg.drift_matrix())
    stress = kramers_stress(field, params)
    if cfg.output.field_csv_path:
        write_field_csv(field, out / cfg.output.field_csv_path, cfg.output.field_grid)
    if cfg.output.matrix_dump_dir:
        dump_matrix_market(mats, out / cfg.output.matrix_dump_dir)
    return {
        **_header(cfg, params),
        "alpha": {"lambda0": ap.lambda0, "alpha": ap.alpha},
        "eigen": report.to_dict(),
        "stress": stress.to_dict(),
        "coefficients": field.coeffs.tolist(),
    }


def run_spectrum(cfg: RunConfig, out: Path) -> dict:
    params = _params(cfg)
    mats, ap = _assemble(cfg, params, cfg.drift_matrix())
    ev = full_spectrum(mats)
    summary = spectrum_summary(ev)
    kr = krein_rutman_check(mats, params.delta, seed=cfg.solver.seed)
    kr["spr_estimates"] = {str(k): v for k, v in kr["spr_estimates"].items()}
    return {
        **_header(cfg, params),
        "alpha": {"lambda0": ap.lambda0, "alpha": ap.alpha},
        "spectrum": [[float(z.real), float(z.imag)] for z in ev],
        **summary,
        "min_real_part_over_alpha": summary["min_real_part"] / ap.alpha,
        "krein_rutman": kr,
    }


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("FENE_FPS_THREADS", "1")))
    except ValueError:
        return 1


def run_sweep(cfg: RunConfig, out: Path) -> dict:
    params = _params(cfg)
    base = cfg.drift_matrix(1.0)
    solver = _solver(cfg)

    def point(wi):
        return material_functions(base, wi, params, cfg.discretization.degree, solver)

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(point, cfg.output.sweep_values))
    rows = []
    for mf in results:
        S = mf.stress.components
        rows.append([mf.wi, S[0, 0], S[0, 1], S[1, 1], mf.eta_p, mf.psi1])
    with open(out / cfg.output.sweep_csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for row in rows:
            w.writerow([repr(float(v)) for v in row])
    return {
        **_header(cfg, params),
        "sweep": [dict(zip(SWEEP_COLUMNS, map(float, row))) for row in rows],
    }


def run_oracle(cfg: RunConfig, out: Path) -> dict:
    params = _params(cfg)
    ens = simulate_stationary(params, DriftField.linear(cfg.drift_matrix()), _sde(cfg))
    return {**_header(cfg, params), "oracle": oracle_summary(ens, params)}


def run_compare(cfg: RunConfig, out: Path) -> dict:
    params = _params(cfg)
    A = cfg.drift_matrix()
    _, ap, field, report = _galerkin(cfg, params, A)
    S = kramers_stress(field, params).components
    ens = simulate_stationary(params, DriftField.linear(A), _sde(cfg))
    mc = estimate_stress(ens, params)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(mc.std_error > 0, (S - mc.value) / mc.std_error, 0.0)
    return {
        **_header(cfg, params),
        "alpha": {"lambda0": ap.lambda0, "alpha": ap.alpha},
        "eigen": report.to_dict(),
        "galerkin_stress": S.tolist(),
        "oracle": oracle_summary(ens, params),
        "stress_delta_std_errors": z.tolist(),
        "max_abs_delta_std_errors": float(np.abs(z).max()),
        "agree_within_3_std_errors": bool(np.all(np.abs(z) <= 3.0)),
    }


PIPELINES = {
    "solve": run_solve,
    "spectrum": run_spectrum,
    "sweep": run_sweep,
    "oracle": run_oracle,
    "compare": run_compare,
}


def run_pipeline(cfg: RunConfig, out: Path) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    return PIPELINES[cfg.mode](cfg, out)
