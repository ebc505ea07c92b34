"""Zeros of a noisy chirp pair next to the noiseless interference lattice."""

import argparse

import numpy as np

from tfzeros.analytic import pair_zero_lattice
from tfzeros.cli import main
from tfzeros.signals import ChirpPair

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--gamma1", type=float, default=100.0)
    ap.add_argument("--gamma2", type=float, default=40.0)
    ap.add_argument("--out", default="figures/pair")
    args = ap.parse_args()

    flags = ["--signal", "pair", "--a1", "-1", "--a2", "0", "--b", "0.4",
             "--gamma1", str(args.gamma1), "--gamma2", str(args.gamma2), "--domain", "-3,-3,3,3"]
    main(["zeros", *flags, "--seed", str(args.seed), "--out", f"{args.out}/noisy"])
    main(["zeros", *flags, "--noiseless", "--out", f"{args.out}/noiseless"])

    pair = ChirpPair(-1.0, 0.0, 0.4, args.gamma1, args.gamma2)
    lattice = pair_zero_lattice(pair, range(-6, 6))
    lattice = lattice[(np.abs(lattice.real) <= 3) & (np.abs(lattice.imag) <= 3)]
    with open(f"{args.out}/lattice.csv", "w") as fh:
        fh.write("tau,omega\n")
        for z in lattice:
            fh.write(f"{z.real!r},{z.imag!r}\n")
    print(f"{len(lattice)} lattice points written")
