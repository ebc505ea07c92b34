"""Empirical vs analytic zero densities for the high-SNR Hermite and chirp settings.

Writes one CLI output directory per signal under ``--out``.
"""

import argparse
import sys

from tfzeros.cli import main

RUNS = {
    "hermite_k10": ["--signal", "hermite", "--k", "10", "--gamma", "400", "--domain", "-3,-3,3,3"],
    "hermite_k1": ["--signal", "hermite", "--k", "1", "--gamma", "100", "--domain", "-3,-3,3,3"],
    "chirp": ["--signal", "chirp", "--a", "-5", "--b", "0.4", "--gamma", "100", "--domain", "-3,-3,3,3"],
}

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--threads", type=int, default=4)
    ap.add_argument("--out", default="figures/intensity")
    args = ap.parse_args()
    for name, flags in RUNS.items():
        code = main(["intensity", *flags, "--n", str(args.n), "--seed", str(args.seed),
                     "--threads", str(args.threads), "--out", f"{args.out}/{name}"])
        print(f"{name}: exit {code}")
        if code:
            sys.exit(code)
