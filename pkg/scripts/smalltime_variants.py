"""Small-time fit with the two second-order expansions and several step
truncation levels, on the same differenced data."""
import numpy as np

from _common import CONFIGS
from fracwave.harness.cli import simulate
from fracwave.harness.config import load_config
from fracwave.reconstruction.smalltime import SmallTimeOptions, smalltime_newton, smalltime_preprocess

if __name__ == "__main__":
    cfg = load_config(CONFIGS / "table3.yaml")
    g = smalltime_preprocess(simulate(cfg), cfg.model.big_lambda)
    print(f"{'variant':>9} {'rcond':>7} | alphas            | bs                | residual")
    for variant in ("exact", "flipped"):
        for rcond in (1e-3, 1e-4, 1e-6, None):
            rep = smalltime_newton(cfg.method.initial, g, opts=SmallTimeOptions(variant=variant, rcond=rcond))
            last = rep.history[-1]
            a = np.array2string(last.alphas, precision=4)
            b = np.array2string(last.bs, precision=4)
            print(f"{variant:>9} {str(rcond):>7} | {a:17} | {b:17} | {last.residual:.2e}")
