"""Trapping probability of Hermite zeros against SNR, with the analytic lower bound."""

import argparse
import csv
import sys

from tfzeros.experiments import hermite_trapping_setup, trapping_experiment

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--eps", type=float, default=0.05)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--threads", type=int, default=4)
    ap.add_argument("--factors", default="0.25,0.5,1,2")
    args = ap.parse_args()

    signal, region, m_hat = hermite_trapping_setup(args.k, args.eps, 10_000, args.seed, threads=args.threads)
    w = csv.writer(sys.stdout)
    w.writerow(["gamma", "empirical_prob", "std_error", "lower_bound", "verdict"])
    for f in map(float, args.factors.split(",")):
        sig = type(signal)(signal.k, signal.gamma * f)
        rep = trapping_experiment(sig, region, args.k, args.n, args.seed, args.eps, m_hat=m_hat, threads=args.threads)
        w.writerow([sig.gamma, rep.empirical_prob, rep.std_error, rep.analytic_lower_bound.lower_bound, rep.verdict])
