#!/usr/bin/env python3
"""Timing envelope check: full-scale DP fit (T=285, R=3, burn 10,000 /
keep 20,000) and the desk-scale profile (T=100, 1,500 sweeps)."""

import argparse
import time

import numpy as np

from dynconn import sampler, simulate
from dynconn.model import ModelSpec, ml2_hyperparameters


def run(T: int, R: int, burn: int, keep: int, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    data, _ = simulate.simulate_dataset("rwprime", T, R, rng)
    spec = ModelSpec(variant="dp")
    hyper = ml2_hyperparameters(data, spec)
    t0 = time.perf_counter()
    sampler.run_chain(data, spec, hyper, sampler.ChainControls(burn=burn, keep=keep, seed=seed))
    return time.perf_counter() - t0


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--full", action="store_true", help="also run the 30k-sweep profile")
    args = ap.parse_args()

    desk = run(T=100, R=3, burn=500, keep=1000)
    print(f"desk scale  (T=100, 1,500 sweeps): {desk:7.1f} s  (budget 120 s)")
    if args.full:
        full = run(T=285, R=3, burn=10_000, keep=20_000)
        print(f"full scale  (T=285, 30,000 sweeps): {full:7.1f} s  (budget 1800 s)")


if __name__ == "__main__":
    main()
