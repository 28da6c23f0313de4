"""Command line front-end: simulate, transform, reconstruct, poles, verify."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import ConfigError, Diverged, FracwaveError, SignLoss
from ..forward import TimeTrace, solve_trace
from ..laplace import LaplaceSamples, find_poles, transform_trace
from ..model import ExcitationKind, hhat_analytic, validate_model
from ..reconstruction.fulltime import FullTimeOptions, analytic_samples, fulltime_newton, fulltime_system, pack
from ..reconstruction.largetime import LargeTimeOptions, largetime_newton
from ..reconstruction.peel import sequential_peel
from ..reconstruction.report import ReconstructionReport
from ..reconstruction.smalltime import SmallTimeOptions, smalltime_newton, smalltime_preprocess
from .config import ExperimentConfig, LaplaceGrid, load_config
from .io import emit_plot, read_trace, write_atomic, write_report, write_samples, write_trace

log = logging.getLogger("fracwave")

EXIT_OK, EXIT_CONFIG, EXIT_METHOD, EXIT_IO = 0, 2, 3, 4
LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def add_noise(trace: TimeTrace, level: float, seed: int) -> TimeTrace:
    """Multiplicative Gaussian noise h_i (1 + level xi_i) from a seeded generator."""
    if level < 0:
        raise ValueError("noise level must be nonnegative")
    meta = dict(trace.meta, noise_level=float(level), noise_seed=int(seed))
    if level == 0:
        return TimeTrace(trace.times.copy(), trace.values.copy(), meta)
    xi = np.random.default_rng(seed).standard_normal(len(trace))
    return TimeTrace(trace.times.copy(), trace.values * (1.0 + level * xi), meta)


def _out_dir(cfg: ExperimentConfig, out: Optional[str]) -> Path:
    return Path(out if out is not None else cfg.outputs.dir)


def simulate(cfg: ExperimentConfig) -> TimeTrace:
    trace = solve_trace(cfg.model, cfg.excitation, cfg.sampling.times())
    return add_noise(trace, cfg.noise.level, cfg.noise.seed)


def load_or_simulate(cfg: ExperimentConfig) -> TimeTrace:
    if cfg.data_trace is not None:
        return read_trace(cfg.data_trace)
    return simulate(cfg)


def run_simulate(cfg: ExperimentConfig, out: Optional[str] = None) -> Path:
    trace = simulate(cfg)
    path = write_trace(trace, _out_dir(cfg, out) / cfg.outputs.trace)
    log.info("wrote %d samples to %s", len(trace), path)
    return path


def run_transform(cfg: ExperimentConfig, out: Optional[str] = None) -> Path:
    grid = cfg.method.laplace if cfg.method else LaplaceGrid()
    trace = load_or_simulate(cfg)
    samples = transform_trace(trace, grid.abscissae(), cfg.model.big_lambda, grid.scheme)
    path = write_samples(samples, _out_dir(cfg, out) / cfg.outputs.laplace)
    log.info("wrote %d Laplace samples to %s", len(samples), path)
    return path


def reconstruct(cfg: ExperimentConfig, analytic_data: bool = False) -> tuple[ReconstructionReport, Optional[LaplaceSamples]]:
    """Run the configured method; Diverged and SignLoss propagate with their report."""
    if cfg.method is None:
        raise ConfigError("reconstruct needs a 'method' section")
    m = cfg.method
    opts = dict(m.options)
    samples = None
    try:
        if m.name == "fulltime":
            if analytic_data:
                samples = analytic_samples(cfg.model, cfg.excitation, m.laplace.abscissae())
            else:
                trace = load_or_simulate(cfg)
                samples = transform_trace(trace, m.laplace.abscissae(), m.initial.big_lambda, m.laplace.scheme)
            report = fulltime_newton(m.initial, samples, cfg.excitation, FullTimeOptions(**opts))
        elif m.name == "largetime":
            report = largetime_newton(m.initial, load_or_simulate(cfg), cfg.excitation, LargeTimeOptions(**opts))
        elif m.name == "smalltime":
            g = smalltime_preprocess(load_or_simulate(cfg), m.initial.big_lambda)
            report = smalltime_newton(m.initial, g, m.initial.big_lambda, SmallTimeOptions(**opts), cfg.excitation)
        else:
            report = sequential_peel(
                load_or_simulate(cfg),
                big_lambda=m.initial.big_lambda,
                exc=cfg.excitation,
                eigenvalue=m.initial.lam,
                **opts,
            )
    except TypeError as exc:
        raise ConfigError(f"method options: {exc}") from exc
    report.config_digest = cfg.digest
    return report, samples


def run_reconstruct(cfg: ExperimentConfig, out: Optional[str] = None, analytic_data: bool = False) -> ReconstructionReport:
    out_dir = _out_dir(cfg, out)
    o = cfg.outputs
    try:
        report, samples = reconstruct(cfg, analytic_data)
    except (Diverged, SignLoss) as exc:
        if exc.report is not None:
            exc.report.config_digest = cfg.digest
            exc.report.notes.append(f"{type(exc).__name__}: {exc}")
            write_report(exc.report, cfg.name, out_dir / o.report, out_dir / o.table)
        raise
    write_report(report, cfg.name, out_dir / o.report, out_dir / o.table)
    emit_plot(report, out_dir / o.plot, samples, cfg.excitation, o.render)
    print(report.table())
    print(f"status: {report.status.value}")
    return report


def run_poles(cfg: ExperimentConfig, out: Optional[str] = None) -> dict:
    upper, lower = find_poles(cfg.model)
    doc = {
        "poles": [[p.pole.real, p.pole.imag] for p in (upper, lower)],
        "residues": [[p.residue.real, p.residue.imag] for p in (upper, lower)],
        "omega_residual": upper.omega_residual,
        "config_digest": cfg.digest,
    }
    write_atomic(_out_dir(cfg, out) / "poles.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    for p in (upper, lower):
        print(f"pole {p.pole.real:.12g} {p.pole.imag:+.12g}i  residue {p.residue.real:.12g} {p.residue.imag:+.12g}i")
    return doc


def verify_checks(cfg: ExperimentConfig) -> list[tuple[str, bool, str]]:
    """Invariant checks on the configured model.  Returns (name, ok, detail)."""
    checks = []
    model = cfg.model
    try:
        validate_model(model)
        checks.append(("model is valid", True, ""))
    except FracwaveError as exc:
        return [("model is valid", False, str(exc))]
    try:
        upper, _ = find_poles(model)
        checks.append(("poles in the left half plane", upper.pole.real <= 0, f"{upper.pole:.6g}"))
    except FracwaveError as exc:
        checks.append(("poles in the left half plane", False, str(exc)))
    kind = cfg.excitation.kind
    if model.damping_terms and kind in (ExcitationKind.U0, ExcitationKind.U1, ExcitationKind.SOURCE) and not model.higher_terms:
        samples = analytic_samples(model, cfg.excitation)
        r, _ = fulltime_system(pack(model.alphas, model.bs, model.big_lambda), samples, cfg.excitation, model.lam, betas=model.betas)
        err = float(np.max(np.abs(r)))
        checks.append(("full-time residual vanishes at the truth", err < 1e-9 * max(1.0, model.big_lambda), f"{err:.3g}"))
    t = cfg.sampling.times()
    if cfg.sampling.grid == "uniform" and t[0] == 0 and len(t) >= 64:
        trace = solve_trace(model, cfg.excitation, t)
        s = np.array([2.0, 4.0, 8.0])
        if np.exp(-s[0] * t[-1]) < 1e-12:
            num = transform_trace(trace, s, scheme="cubic").values
            ref = np.asarray(hhat_analytic(model, cfg.excitation, s)).real
            err = float(np.max(np.abs(num / ref - 1.0)))
            checks.append(("transform of the solved trace matches the symbol", err < 1e-4, f"{err:.3g}"))
    return checks


def run_verify(cfg: ExperimentConfig, out: Optional[str] = None) -> bool:
    checks = verify_checks(cfg)
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
    return all(ok for _, ok, _ in checks)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracwave", description="Simulate and reconstruct fractionally damped single-mode traces")
    ap.add_argument("command", choices=["simulate", "transform", "reconstruct", "poles", "verify"])
    ap.add_argument("--config", required=True, help="YAML experiment file")
    ap.add_argument("--out", default=None, help="output directory (overrides outputs.dir)")
    ap.add_argument("--seed", type=int, default=None, help="override noise.seed")
    ap.add_argument("--analytic-data", action="store_true", help="full-time: use the exact transform instead of a solved trace")
    return ap


def _setup_logging() -> None:
    name = os.environ.get("FRACWAVE_LOG", "error").lower()
    logging.basicConfig(level=LOG_LEVELS.get(name, logging.ERROR), format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed=args.seed)
        if args.command == "simulate":
            run_simulate(cfg, args.out)
        elif args.command == "transform":
            run_transform(cfg, args.out)
        elif args.command == "reconstruct":
            run_reconstruct(cfg, args.out, args.analytic_data)
        elif args.command == "poles":
            run_poles(cfg, args.out)
        elif not run_verify(cfg, args.out):
            return EXIT_METHOD
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FracwaveError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_METHOD
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_METHOD
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
