"""Command-line interface: ``fluxnoise <command> [options]``.

Commands write plot-ready tables (CSV, or JSON with ``--format json``) and
JSON reports into ``--out``. Exit codes: 0 ok, 2 usage, 3 data/parse,
4 numeric, 5 precondition.
"""

import argparse
from dataclasses import dataclass, field
import math
from pathlib import Path
import sys
import warnings

import numpy as np

from . import io
from .errors import FluxnoiseError, PreconditionError
from .extraction import QUANTITIES, extract_report, fit_spectrum
from .fluxonium import DEFAULT_BASIS_SIZE, FluxoniumParams, spectrum_sweep
from .material import derive_row, disorder_power_law, load_device_table
from .noise_models import ThermalEnv
from .noise_sim import fit_psd_powerlaw, run_ramsey_ensemble

EXIT_OK = 0
EXIT_USAGE = 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    out: Path
    seed: int = 0
    fmt: str = "csv"
    input: Path | None = None
    params: FluxoniumParams | None = None
    t_eff: float | None = None  # K
    options: dict = field(default_factory=dict)


# -- argument handling ----------------------------------------------------------

def _common(p):
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv",
                   help="format of tabular output")


def _param_flags(p):
    p.add_argument("--params", type=Path, help="JSON file with EC_GHz, EJ_GHz, EL_GHz[, Teff_mK, basis_size]")
    p.add_argument("--ec", type=float, help="E_C/h in GHz")
    p.add_argument("--ej", type=float, help="E_J/h in GHz")
    p.add_argument("--el", type=float, help="E_L/h in GHz")
    p.add_argument("--basis-size", type=int, help=f"oscillator levels (default {DEFAULT_BASIS_SIZE})")
    p.add_argument("--teff", type=float, help="effective temperature in mK")


def build_parser():
    parser = argparse.ArgumentParser(prog="fluxnoise", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="f01, matrix element and dispersion over a flux grid")
    _common(p)
    _param_flags(p)
    p.add_argument("--phi-min", type=float, default=0.0)
    p.add_argument("--phi-max", type=float, default=1.0)
    p.add_argument("--points", type=int, default=201)

    p = sub.add_parser("fit-spectrum", help="fit E_C, E_J, E_L to measured transitions")
    _common(p)
    _param_flags(p)
    p.add_argument("--input", type=Path, required=True, help="CSV: phi_ext_Phi0, f01_GHz[, sigma_GHz]")
    p.add_argument("--restarts", type=int, default=5)

    p = sub.add_parser("extract", help="noise amplitudes from a coherence sweep")
    _common(p)
    _param_flags(p)
    p.add_argument("--input", type=Path, required=True,
                   help="CSV: phi_ext_Phi0, f01_GHz, T1_s, T2e_s[, T1_err_s, T2e_err_s]")
    p.add_argument("--device", default="device")

    p = sub.add_parser("material", help="derived material columns and the disorder power law")
    _common(p)
    p.add_argument("--input", type=Path, help="device table CSV (default: shipped table)")

    p = sub.add_parser("psd", help="synthetic Ramsey ensemble -> flux-noise PSD")
    _common(p)
    p.add_argument("--amp", type=float, default=43e-6, help="1/f amplitude at 1 Hz, Phi_0")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--traces", type=int, default=1000)
    p.add_argument("--n", type=int, default=10_000, help="samples per trace")
    p.add_argument("--t-s", type=float, default=1e-4, help="sampling interval, s")
    p.add_argument("--tau0", type=float, default=100e-9, help="Ramsey free evolution, s")
    p.add_argument("--dispersion-ghz", type=float, default=2.16,
                   help="d f01 / d phi_ext in GHz per Phi_0")
    p.add_argument("--visibility", type=float, default=0.5, help="2a")
    p.add_argument("--mean-b", type=float, default=0.55)
    p.add_argument("--f-min", type=float)
    p.add_argument("--f-max", type=float)
    return parser


def _params_from(args):
    data = io.read_json(args.params) if getattr(args, "params", None) else {}
    if data and not isinstance(data, dict):
        raise UsageError(f"{args.params}: expected a JSON object")

    def pick(flag, key):
        value = getattr(args, flag, None)
        return value if value is not None else data.get(key)

    energies = {"--ec": pick("ec", "EC_GHz"), "--ej": pick("ej", "EJ_GHz"), "--el": pick("el", "EL_GHz")}
    missing = [k for k, v in energies.items() if v is None]
    if missing:
        raise UsageError(f"missing circuit energies: {', '.join(missing)} (or --params JSON)")
    basis = pick("basis_size", "basis_size") or DEFAULT_BASIS_SIZE
    teff = pick("teff", "Teff_mK")
    params = FluxoniumParams(*(float(v) for v in energies.values()), basis_size=int(basis))
    return params, None if teff is None else float(teff) * 1e-3


def config_from_args(args):
    cfg = RunConfig(command=args.command, out=args.out, seed=args.seed, fmt=args.fmt,
                    input=getattr(args, "input", None))
    if args.seed < 0:
        raise UsageError("--seed must be >= 0")
    if args.command in ("spectrum", "fit-spectrum", "extract"):
        cfg.params, cfg.t_eff = _params_from(args)
    skip = {"command", "out", "seed", "fmt", "input", "params", "ec", "ej", "el", "basis_size", "teff"}
    cfg.options = {k: v for k, v in vars(args).items() if k not in skip}
    return cfg


# -- output helpers ---------------------------------------------------------------

def _table(cfg, stem, header, rows):
    if cfg.fmt == "json":
        records = [dict(zip(header, r)) for r in rows]
        return io.write_json(cfg.out / f"{stem}.json", {"columns": list(header), "rows": records})
    return io.write_csv(cfg.out / f"{stem}.csv", header, rows)


# -- commands -----------------------------------------------------------------------

def cmd_spectrum(cfg):
    o = cfg.options
    if o["points"] < 2:
        raise UsageError("--points must be >= 2")
    grid = np.linspace(o["phi_min"], o["phi_max"], o["points"])
    results = spectrum_sweep(cfg.params, grid)
    rows = [(r.phi_ext, r.f01, r.phi_mat_elem_01, r.dispersion) for r in results]
    out = [_table(cfg, "spectrum",
                  ("phi_ext_Phi0", "f01_GHz", "matelem_01", "dispersion_rad_per_s_Phi0"), rows)]
    levels = [(r.phi_ext, *(e - r.eigenvalues[0] for e in r.eigenvalues)) for r in results]
    header = ("phi_ext_Phi0", *(f"E{k}_minus_E0_GHz" for k in range(len(results[0].eigenvalues))))
    out.append(_table(cfg, "levels", header, levels))
    return out


def cmd_fit_spectrum(cfg):
    points = io.read_transitions(cfg.input)
    fit = fit_spectrum(points, cfg.params, restarts=cfg.options["restarts"], seed=cfg.seed)
    p = fit.params
    report = {
        "EC_GHz": p.e_c, "EJ_GHz": p.e_j, "EL_GHz": p.e_l,
        "EC_err_GHz": fit.errors[0], "EJ_err_GHz": fit.errors[1], "EL_err_GHz": fit.errors[2],
        "basis_size": p.basis_size, "chi2": fit.chi2, "reduced_chi2": fit.reduced_chi2,
        "n_points": len(points), "n_evals": fit.n_evals, "seed": cfg.seed,
    }
    out = [io.write_json(cfg.out / "fit.json", report)]
    rows = [(pt.phi_ext, pt.f01_meas, pt.f01_meas + r * pt.sigma_f, r)
            for pt, r in zip(points, fit.residuals)]
    out.append(_table(cfg, "residuals", ("phi_ext_Phi0", "f01_meas_GHz", "f01_fit_GHz", "residual_sigma"), rows))
    return out


def cmd_extract(cfg):
    if cfg.t_eff is None:
        raise UsageError("extract needs --teff (mK) or Teff_mK in --params")
    env = ThermalEnv(cfg.t_eff)
    dataset = io.read_coherence(cfg.input, env, device_id=cfg.options["device"])
    report = extract_report(dataset, cfg.params, env)
    summary = {"device": report.device_id, "Teff_mK": cfg.t_eff * 1e3}
    units = {"tan_delta_c": "", "a_phi_t1": "_Phi0", "a_phi_t2": "_Phi0"}
    for kind in QUANTITIES:
        est = getattr(report, kind)
        summary[kind] = None if est is None else {
            f"value{units[kind]}": est.value,
            f"error{units[kind]}": est.error,
            "window_indices": est.window.tolist(),
            "kept_indices": est.kept.tolist(),
            "n_window": int(len(est.window)),
            "n_kept": int(len(est.kept)),
        }
    summary["flags"] = {k: {str(i): msg for i, msg in v.items()} for k, v in report.flags.items()}
    out = [io.write_json(cfg.out / "report.json", summary)]
    kept = {k: set() if getattr(report, k) is None else set(getattr(report, k).kept.tolist())
            for k in QUANTITIES}
    rows = []
    for i, p in enumerate(dataset.points):
        rows.append((
            p.phi_ext, p.f01,
            report.bounds["tan_delta_c"][i], report.bounds["a_phi_t1"][i], report.bounds["a_phi_t2"][i],
            int(i in kept["tan_delta_c"]), int(i in kept["a_phi_t1"]), int(i in kept["a_phi_t2"]),
        ))
    header = ("phi_ext_Phi0", "f01_GHz", "tan_delta_c_bound", "a_phi_t1_bound_Phi0", "a_phi_t2_Phi0",
              "kept_tan_delta_c", "kept_a_phi_t1", "kept_a_phi_t2")
    out.append(_table(cfg, "bounds", header, rows))
    return out


def cmd_material(cfg):
    rows = load_device_table(cfg.input)
    if not rows:
        raise PreconditionError("device table is empty")
    derived = [derive_row(r) for r in rows]
    table = [
        (d.device, d.wafer, d.rho_xx, d.kfl, d.n_e, d.lk_from_el, d.lk_from_lambda, d.lk_mismatch,
         d.sigma, "; ".join(d.regime_warnings))
        for d in derived
    ]
    header = ("Device", "wafer", "rho_xx_Ohm_m", "kFl", "n_e_per_m3", "Lk_from_EL_H_per_sq",
              "Lk_from_lambda_H_per_sq", "Lk_rel_mismatch", "sigma_per_m2", "regime_warnings")
    out = [_table(cfg, "derived", header, table)]
    fits = {}
    for agg in ("device", "wafer"):
        fit = disorder_power_law(rows, agg)
        fits[agg] = {"alpha": fit.alpha, "alpha_err": fit.alpha_err,
                     "log_prefactor": fit.log_prefactor, "r2": fit.r2, "n": fit.n}
    out.append(io.write_json(cfg.out / "power_law.json",
                             {"x": "rho_xx_Ohm_m", "y": "sigma_per_m2", "fits": fits}))
    return out


def cmd_psd(cfg):
    o = cfg.options
    if o["traces"] < 1:
        raise UsageError("--traces must be >= 1")
    dispersion = 2 * math.pi * o["dispersion_ghz"] * 1e9
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        psd = run_ramsey_ensemble(o["amp"], o["beta"], o["traces"], dispersion, t_s=o["t_s"], n=o["n"],
                                  tau0=o["tau0"], visibility=o["visibility"], mean_b=o["mean_b"],
                                  seed=cfg.seed)
    truth = o["amp"] ** 2 / psd.freq ** o["beta"]
    rows = zip(psd.freq, psd.s_phi, psd.stderr, truth)
    out = [_table(cfg, "psd", ("f_Hz", "S_phi_Phi0sq_per_Hz", "stderr_Phi0sq_per_Hz", "truth_Phi0sq_per_Hz"),
                  list(rows))]
    fit = fit_psd_powerlaw(psd, o["f_min"], o["f_max"])
    out.append(io.write_json(cfg.out / "psd_fit.json", {
        "injected": {"amp_Phi0": o["amp"], "beta": o["beta"]},
        "fit": {"amp_Phi0": fit.amplitude, "amp_err_Phi0": fit.amplitude_err, "beta": fit.beta,
                "beta_err": fit.beta_err, "offset_Phi0sq_per_Hz": fit.offset,
                "amp_equiv_10Hz_Phi0": fit.equivalent_1f_amplitude(10.0)},
        "n_traces": psd.n_traces, "s_w_per_Hz": psd.s_w, "seed": cfg.seed,
        "warnings": sorted({str(w.message) for w in caught}),
    }))
    return out


COMMANDS = {
    "spectrum": cmd_spectrum,
    "fit-spectrum": cmd_fit_spectrum,
    "extract": cmd_extract,
    "material": cmd_material,
    "psd": cmd_psd,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on bad usage
    try:
        cfg = config_from_args(args)
        cfg.out.mkdir(parents=True, exist_ok=True)
        written = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fluxnoise {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FluxnoiseError as exc:
        print(f"fluxnoise {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"fluxnoise {args.command}: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
