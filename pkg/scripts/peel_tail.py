"""Sequential peel-off on a single-term large-time trace, plus the
pointwise -t h'/h order estimate as a diagnostic."""
import numpy as np

from _common import CONFIGS, run
from fracwave.harness.cli import simulate
from fracwave.harness.config import load_config
from fracwave.reconstruction.peel import lhospital_order

REFERENCE = {"alphas": [0.25], "bs": [0.1]}

if __name__ == "__main__":
    run("peel", REFERENCE, description=__doc__)
    trace = simulate(load_config(CONFIGS / "peel.yaml"))
    est = lhospital_order(trace)
    print(f"-t h'/h at t = {trace.times[-1]:.3g}: {est[-1]:.4f} (range over window {np.min(est):.4f} .. {np.max(est):.4f})")
