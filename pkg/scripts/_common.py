"""Shared helpers for the experiment scripts."""
from __future__ import annotations

import argparse
import time
from pathlib import Path

import numpy as np

from fracwave.harness.cli import reconstruct
from fracwave.harness.config import load_config
from fracwave.harness.io import write_report

CONFIGS = Path(__file__).resolve().parent / "configs"


def run(config_name: str, reference: dict, analytic: bool = False, description: str = ""):
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--out", default=None, help="write report.json / report.txt here")
    ap.add_argument("--analytic-data", action="store_true", default=analytic)
    args = ap.parse_args()
    cfg = load_config(CONFIGS / f"{config_name}.yaml")
    t0 = time.perf_counter()
    report, _ = reconstruct(cfg, args.analytic_data)
    elapsed = time.perf_counter() - t0
    print(report.table())
    print(f"status {report.status.value}, {report.iterations} iterations, {elapsed:.2f} s")
    last = report.history[-1]
    for key, ref in reference.items():
        got = np.asarray(getattr(last, key), dtype=float)
        print(f"{key:>7}: got {np.array2string(got, precision=4)}  reference {np.array2string(np.asarray(ref), precision=4)}")
    if args.out:
        out = Path(args.out)
        write_report(report, cfg.name, out / "report.json", out / "report.txt")
    return report
