"""Command-line front end.

    fene-fps --config run.json [--mode M] [--degree N] [--seed S] [--out DIR]

Exit codes: 0 success, 2 invalid configuration, 3 solver non-convergence.
Diagnostics go to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from pydantic import ValidationError

from .config import RunConfig, error_paths
from .eigen import ConvergenceError
from .runner import run_pipeline
from .sde import StepSizeError

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 2, 3


def _diag(kind: str, **payload) -> None:
    print(json.dumps({"error": kind, **payload}, sort_keys=True), file=sys.stderr)


def _with_overrides(raw: dict, args) -> dict:
    raw = dict(raw)
    if args.mode:
        raw["mode"] = args.mode
    if args.degree is not None:
        raw["discretization"] = {**raw.get("discretization", {}), "degree": args.degree}
    if args.seed is not None:
        raw["solver"] = {**raw.get("solver", {}), "seed": args.seed}
        raw["sde"] = {**raw.get("sde", {}), "seed": args.seed}
    return raw


def write_report(report: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report, indent=2, allow_nan=True) + "\n")


def run(config: dict | RunConfig, out: str | Path = ".") -> int:
    """Validate ``config``, execute its mode and write the report under ``out``."""
    try:
        cfg = config if isinstance(config, RunConfig) else RunConfig.model_validate(config)
    except ValidationError as exc:
        _diag("validation", fields=error_paths(exc))
        return EXIT_INVALID
    out = Path(out)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            report = run_pipeline(cfg, out)
    except ConvergenceError as exc:
        payload = exc.report.to_dict() if exc.report is not None else None
        _diag("nonconvergence", message=str(exc), report=payload)
        return EXIT_NONCONVERGED
    except StepSizeError as exc:
        _diag("step_size", message=str(exc))
        return EXIT_NONCONVERGED
    except ValueError as exc:
        _diag("validation", fields=[{"field": "<runtime>", "message": str(exc)}])
        return EXIT_INVALID
    write_report(report, out / cfg.output.report_path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fene-fps", description="Steady FENE dumbbell Fokker-Planck solver")
    p.add_argument("--config", type=Path, help="JSON run configuration (defaults apply when omitted)")
    p.add_argument("--mode", choices=["solve", "spectrum", "sweep", "oracle", "compare"])
    p.add_argument("--degree", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, default=Path("."))
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    raw = {}
    if args.config is not None:
        try:
            raw = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            _diag("validation", fields=[{"field": "<config>", "message": str(exc)}])
            return EXIT_INVALID
        if not isinstance(raw, dict):
            _diag("validation", fields=[{"field": "<root>", "message": "config must be a JSON object"}])
            return EXIT_INVALID
    return run(_with_overrides(raw, args), args.out)


if __name__ == "__main__":
    sys.exit(main())
