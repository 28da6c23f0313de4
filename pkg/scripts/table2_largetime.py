"""Large-time recovery of three damping terms on the window [5e4, 2e5]."""
from _common import run

REFERENCE = {"alphas": [0.2500, 0.3333, 0.6665], "bs": [0.100, 0.100, 0.094]}

if __name__ == "__main__":
    run("table2", REFERENCE, description=__doc__)
