"""Small-time recovery of two damping terms from samples on [0, 0.1)."""
from _common import run

REFERENCE = {"alphas": [0.2534, 0.2036], "bs": [0.0861, 0.1139]}

if __name__ == "__main__":
    run("table3", REFERENCE, description=__doc__)
