"""Large-time fit where the two upper orders sit inside the leading remainder.

Only the first pair is recoverable; the report flags the others as masked.
"""
from _common import run

REFERENCE = {"alphas": [0.25, 0.85, 0.9], "bs": [0.1, 0.1, 0.1]}

if __name__ == "__main__":
    report = run("masking", REFERENCE, description=__doc__)
    print("masked terms:", report.extras.get("masked_terms"))
