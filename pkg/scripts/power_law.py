"""Spin-defect density against resistivity for the shipped device table.

Prints the derived columns and the power-law fit under both aggregations,
plus the subsets that are informative when comparing against alpha ~ 3.

    python3 scripts/power_law.py [--input table.csv]
"""

import argparse

import numpy as np

from fluxnoise.material import derive_row, disorder_power_law, fit_power_law, load_device_table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--input", help="device table CSV (default: shipped table)")
    args = ap.parse_args()

    rows = load_device_table(args.input)
    derived = [derive_row(r) for r in rows]
    print(f"{'device':7s} {'rho (Ohm m)':>12s} {'kFl':>6s} {'sigma (m^-2)':>13s} {'Lk EL/lambda':>13s}")
    for d in derived:
        print(f"{d.device:7s} {d.rho_xx:12.3e} {d.kfl:6.3f} {d.sigma:13.3e} {d.lk_from_el / d.lk_from_lambda:13.2f}")
    for agg in ("device", "wafer"):
        fit = disorder_power_law(rows, agg)
        print(f"{agg:6s}: alpha = {fit.alpha:.3f} +- {fit.alpha_err:.3f}  (R^2 {fit.r2:.3f}, n {fit.n})")
    for t_nm in sorted({r.t_nm for r in rows}):
        sub = [d for r, d in zip(rows, derived) if r.t_nm == t_nm]
        if len(sub) >= 4:
            fit = fit_power_law([d.rho_xx for d in sub], [d.sigma for d in sub])
            print(f"t = {t_nm:g} nm only: alpha = {fit.alpha:.3f} +- {fit.alpha_err:.3f} (n {fit.n})")
    rev = fit_power_law([d.sigma for d in derived], [d.rho_xx for d in derived])
    print(f"reverse regression (rho on sigma): 1/slope = {1 / rev.alpha:.3f}")
    print(f"median L_k(E_L)/L_k(lambda): {np.median([d.lk_from_el / d.lk_from_lambda for d in derived]):.2f}")


if __name__ == "__main__":
    main()
