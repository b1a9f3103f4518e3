"""Dielectric+flux data fitted by each relaxation model; count how often it wins.

    python3 scripts/model_discrimination.py [--seeds 100] [--rel-noise 0.1]
"""

import argparse
from collections import Counter

from fluxnoise.extraction import MODELS, fit_t1_model
from fluxnoise.fluxonium import FluxoniumParams
from fluxnoise.material import load_device_table
from fluxnoise.noise_models import NoiseChannelSet, ThermalEnv
from fluxnoise.noise_sim import log_frequency_grid, synth_coherence_dataset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--rel-noise", type=float, default=0.1)
    ap.add_argument("--bias-points", type=int, default=20, help="per side of the sweet spot")
    args = ap.parse_args()

    rows = load_device_table()
    best = Counter()
    for seed in range(args.seeds):
        row = rows[seed % len(rows)]
        params = FluxoniumParams(row.ec_ghz, row.ej_ghz, row.el_ghz)
        env = ThermalEnv.from_mk(row.teff_mk)
        amp = row.a_t2_uphi0 * 1e-6
        truth = NoiseChannelSet(tan_delta_c=row.tan_delta_e6 * 1e-6, a_phi_t1=amp, a_phi_t2=amp)
        data = synth_coherence_dataset(params, truth, env, log_frequency_grid(params, args.bias_points),
                                       args.rel_noise, seed=seed)
        fits = {name: fit_t1_model(data, params, env, name) for name in MODELS}
        winner = min(fits, key=lambda k: fits[k].chi2)
        best[winner] += 1
        print(f"seed {seed:3d} {row.device:6s} " + "  ".join(f"{k} {v.rms_log:.3f}" for k, v in fits.items())
              + f"  -> {winner}")
    print("lowest residual:", dict(best))


if __name__ == "__main__":
    main()
