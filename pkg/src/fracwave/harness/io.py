"""File formats: traces and Laplace samples as CSV, reports as JSON plus a table."""
from __future__ import annotations

import io
import json
import os
import tempfile
from pathlib import Path
from typing import Optional

import numpy as np

from ..forward import TimeTrace
from ..laplace import LaplaceSamples
from ..model import Excitation, hhat_analytic
from ..reconstruction.report import ReconstructionReport


def write_atomic(path, text: str) -> Path:
    """Write through a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _csv(header: list[str], columns) -> str:
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    buf = io.StringIO()
    np.savetxt(buf, data, fmt="%.17g", delimiter=",", header=",".join(header), comments="")
    return buf.getvalue()


def write_trace(trace: TimeTrace, path) -> Path:
    return write_atomic(path, _csv(["t", "h"], [trace.times, trace.values]))


def read_trace(path) -> TimeTrace:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return TimeTrace(data[:, 0], data[:, 1], {"source": str(path)})


def write_samples(samples: LaplaceSamples, path) -> Path:
    return write_atomic(path, _csv(["s", "hhat"], [samples.abscissae, samples.values]))


def read_samples(path) -> LaplaceSamples:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return LaplaceSamples(data[:, 0], data[:, 1])


def report_document(report: ReconstructionReport, name: str) -> dict:
    doc = {"name": name}
    doc.update(report.as_dict())
    doc["table"] = report.table()
    return doc


def write_report(report: ReconstructionReport, name: str, json_path, table_path) -> None:
    doc = report_document(report, name)
    write_atomic(json_path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    head = [f"# {name}", f"# method: {report.method}", f"# status: {report.status.value}"]
    if report.config_digest:
        head.append(f"# config: {report.config_digest}")
    head += [f"# note: {n}" for n in report.notes]
    write_atomic(table_path, "\n".join(head + [report.table()]) + "\n")


def emit_plot(obj, path, samples: Optional[LaplaceSamples] = None, exc: Optional[Excitation] = None, render: bool = False) -> Path:
    """Plot data as CSV.

    A trace gives columns (t, h).  A full-time report with its Laplace
    samples gives (s, actual, iter_0, iter_1, ...) where iter_k is the
    transform implied by the k-th iterate.  Other reports give the
    iteration history.  With ``render`` an SVG is written next to the CSV
    (needs matplotlib).
    """
    path = Path(path)
    if isinstance(obj, TimeTrace):
        header, cols = ["t", "h"], [obj.times, obj.values]
    elif isinstance(obj, ReconstructionReport) and samples is not None and exc is not None and obj.method == "fulltime":
        s = samples.abscissae
        header, cols = ["s", "actual"], [s, samples.values]
        for rec in obj.history:
            m = obj.recovered.with_damping(rec.alphas, rec.bs, rec.big_lambda)
            header.append(f"iter_{rec.iteration}")
            cols.append(np.asarray(hhat_analytic(m, exc, s)).real)
    elif isinstance(obj, ReconstructionReport):
        n = max(len(r.alphas) for r in obj.history)
        header = ["iteration"] + [f"alpha_{i + 1}" for i in range(n)] + [f"b_{i + 1}" for i in range(n)] + ["residual"]
        rows = []
        for r in obj.history:
            pad = [np.nan] * (n - len(r.alphas))
            res = np.nan if r.residual is None else r.residual
            rows.append([r.iteration, *r.alphas, *pad, *r.bs, *pad, res])
        cols = list(np.array(rows, dtype=float).T)
    else:
        raise TypeError(f"cannot emit plot data for {type(obj).__name__}")
    write_atomic(path, _csv(header, cols))
    if render:
        _render(header, cols, path.with_suffix(".svg"))
    return path


def _render(header, cols, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    x = cols[0]
    for name, y in zip(header[1:], cols[1:]):
        ax.plot(x, y, label=name)
    ax.set_xlabel(header[0])
    if header[0] == "s":
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
