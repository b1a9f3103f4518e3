"""Noisy synthetic spectrum of the reference device -> refit, over many seeds.

    python3 scripts/spectrum_fit_roundtrip.py [--seeds 100] [--noise-mhz 1]
"""

import argparse
import time

import numpy as np

from fluxnoise.extraction import TransitionPoint, fit_spectrum
from fluxnoise.fluxonium import FluxoniumParams, f01_batch

TRUTH = (1.39, 4.10, 0.85)  # E_C, E_J, E_L in GHz


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--points", type=int, default=25)
    ap.add_argument("--noise-mhz", type=float, default=1.0)
    args = ap.parse_args()

    truth = FluxoniumParams(*TRUTH)
    grid = np.linspace(0.3, 0.7, args.points)
    clean = f01_batch(truth, grid)
    guess = truth.with_energies(1.15 * truth.e_c, 0.85 * truth.e_j, 1.15 * truth.e_l)
    sigma = args.noise_mhz * 1e-3
    t0 = time.time()
    errs = []
    for seed in range(args.seeds):
        noisy = clean + sigma * np.random.default_rng(seed).standard_normal(len(grid))
        fit = fit_spectrum([TransitionPoint(float(p), float(f), sigma) for p, f in zip(grid, noisy)], guess, seed=seed)
        errs.append([a / b - 1 for a, b in zip(fit.params.as_tuple(), truth.as_tuple())])
    errs = np.abs(np.array(errs))
    for name, col in zip(("E_C", "E_J", "E_L"), errs.T):
        print(f"{name}: median |rel err| {np.median(col):.2e}, max {col.max():.2e}")
    print(f"within 1% on all three: {(errs.max(axis=1) < 0.01).sum()}/{args.seeds}  ({time.time() - t0:.1f} s)")


if __name__ == "__main__":
    main()
