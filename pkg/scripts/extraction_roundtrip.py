"""Synthetic devices -> coherence sweeps -> extracted noise amplitudes.

Devices borrow circuit energies and temperatures from the shipped device
table; injected tan(delta_C) and A_Phi (A_T1 = A_T2) are drawn log-uniformly
over the table's ranges.

    python3 scripts/extraction_roundtrip.py [--devices 20] [--seed 0]
"""

import argparse
import time

import numpy as np
from scipy import stats

from fluxnoise.extraction import extract_report
from fluxnoise.fluxonium import FluxoniumParams
from fluxnoise.material import load_device_table
from fluxnoise.noise_models import NoiseChannelSet, ThermalEnv
from fluxnoise.noise_sim import log_frequency_grid, synth_coherence_dataset

TAN_RANGE = (1.7e-6, 1e-5)
AMP_RANGE = (22e-6, 380e-6)
N_BIAS = 40  # per side of the sweet spot
REL_NOISE = 0.1


def roundtrip(n_devices=20, seed=0, rel_noise=REL_NOISE, n_bias=N_BIAS):
    rng = np.random.default_rng(seed)
    rows = load_device_table()
    out = []
    for i in range(n_devices):
        row = rows[i % len(rows)]
        params = FluxoniumParams(row.ec_ghz, row.ej_ghz, row.el_ghz)
        env = ThermalEnv.from_mk(row.teff_mk)
        tan = float(np.exp(rng.uniform(*np.log(TAN_RANGE))))
        amp = float(np.exp(rng.uniform(*np.log(AMP_RANGE))))
        channels = NoiseChannelSet(tan_delta_c=tan, a_phi_t1=amp, a_phi_t2=amp)
        grid = log_frequency_grid(params, n_bias)
        data = synth_coherence_dataset(params, channels, env, grid, rel_noise, seed=seed * 1000 + i,
                                       device_id=f"syn{i}")
        report = extract_report(data, params, env)
        out.append((channels, report))
    return out


def score(results):
    hits, total = 0, 0
    t1_vals, t2_vals = [], []
    lines = []
    for channels, report in results:
        for kind, est in report.estimates().items():
            truth = getattr(channels, kind)
            ok = abs(est.value - truth) <= est.error
            hits += ok
            total += 1
            lines.append(f"{report.device_id:6s} {kind:12s} truth={truth:.3e} got={est.value:.3e}"
                         f" +- {est.error:.1e} {'ok' if ok else 'MISS'}")
        t1_vals.append(report.a_phi_t1.value)
        t2_vals.append(report.a_phi_t2.value)
    r = stats.pearsonr(t1_vals, t2_vals).statistic
    return hits / total, r, lines


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--devices", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rel-noise", type=float, default=REL_NOISE)
    args = ap.parse_args()
    t0 = time.time()
    results = roundtrip(args.devices, args.seed, args.rel_noise)
    frac, r, lines = score(results)
    print("\n".join(lines))
    print(f"within error bar: {frac:.1%}   Pearson r(A_T1, A_T2) = {r:.4f}   ({time.time() - t0:.1f} s)")


if __name__ == "__main__":
    main()
