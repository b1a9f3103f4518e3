"""Inverting measurements into circuit parameters and noise amplitudes.

Two jobs live here: fitting a measured f01(phi_ext) curve to the fluxonium
Hamiltonian, and the automated bound/window/outlier protocol that turns a
flux sweep of T1 and echo T2 into tan(delta_C), A_Phi,T1 and A_Phi,T2 with
error bars.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import optimize, stats

from . import noise_models as nm
from .errors import (
    FitError,
    PreconditionError,
    SingularityError,
    UnphysicalPointError,
)
from .fluxonium import FluxoniumParams, _check_converged, diagonalize, f01_batch

TAN_DELTA_C = "tan_delta_c"
A_PHI_T1 = "a_phi_t1"
A_PHI_T2 = "a_phi_t2"
QUANTITIES = (TAN_DELTA_C, A_PHI_T1, A_PHI_T2)

WINDOW_N_LOWEST = 10
WINDOW_REL_WIDTH = 0.2
Q1_MULTIPLE = 5.0
CORE_FRACTION = 0.9
DISPERSION_THRESHOLD = 1e-3 * 2 * math.pi * 1e9  # rad/s per Phi_0

MODELS = {
    "dielectric+flux": ("tan_delta_c", "a_phi_t1"),
    "tls+flux": ("tan_delta_tls", "a_phi_t1"),
    "inductive+flux": ("tan_delta_l", "a_phi_t1"),
}


@dataclass(frozen=True)
class TransitionPoint:
    phi_ext: float
    f01_meas: float  # GHz
    sigma_f: float  # GHz

    def __post_init__(self):
        if not self.sigma_f > 0:
            raise PreconditionError(f"sigma_f must be > 0, got {self.sigma_f}")


@dataclass(frozen=True)
class CoherencePoint:
    """One flux bias of a coherence sweep. Times in seconds."""

    phi_ext: float
    f01: float  # GHz
    t1: float | None = None
    t2_echo: float | None = None
    t1_err: float | None = None
    t2_err: float | None = None

    def __post_init__(self):
        if self.t1 is None and self.t2_echo is None:
            raise PreconditionError("a coherence point needs t1 or t2_echo")
        for name in ("t1", "t2_echo"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise PreconditionError(f"{name} must be > 0, got {value}")


@dataclass(frozen=True)
class CoherenceDataset:
    device_id: str
    points: tuple
    env: nm.ThermalEnv
    wire: object = None

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class SpectrumFit:
    params: FluxoniumParams
    errors: tuple  # (e_c, e_j, e_l) one-sigma, GHz
    chi2: float
    reduced_chi2: float
    residuals: np.ndarray = field(repr=False)  # (model - measured) / sigma
    n_evals: int = 0


@dataclass(frozen=True)
class OutlierResult:
    kept: np.ndarray
    x0: float
    sigma: float


@dataclass(frozen=True)
class QuantityEstimate:
    kind: str
    value: float
    error: float
    window: np.ndarray  # dataset indices inside the frequency window
    kept: np.ndarray  # dataset indices surviving outlier rejection
    x0: float
    sigma: float


@dataclass(frozen=True)
class ExtractionReport:
    device_id: str
    tan_delta_c: QuantityEstimate | None
    a_phi_t1: QuantityEstimate | None
    a_phi_t2: QuantityEstimate | None
    bounds: dict = field(repr=False)  # kind -> per-point values, NaN if undefined
    flags: dict = field(repr=False)  # kind -> {index: reason}

    def estimates(self):
        return {k: getattr(self, k) for k in QUANTITIES if getattr(self, k) is not None}

    def channels(self):
        est = self.estimates()
        return nm.NoiseChannelSet(
            **{k: v.value for k, v in est.items()},
            errors=tuple((k, v.error) for k, v in est.items()),
        )


# -- spectrum fitting -------------------------------------------------------


def _spectrum_residuals(points):
    phis = np.array([p.phi_ext for p in points])
    meas = np.array([p.f01_meas for p in points])
    sig = np.array([p.sigma_f for p in points])
    return phis, meas, sig


def fit_spectrum(points, guess, restarts=5, max_nfev=500, jitter=0.2, seed=0):
    """Least-squares fit of (E_C, E_J, E_L) to measured transition frequencies.

    Runs Levenberg-Marquardt in log-energy coordinates from ``guess`` and from
    ``restarts - 1`` jittered copies of it, and keeps the lowest chi^2.
    Parameter errors come from the inverse of J^T J at the optimum (sigma_f
    taken as absolute).
    """
    points = list(points)
    if len(points) < 6:
        raise PreconditionError(f"spectrum fit needs >= 6 points, got {len(points)}")
    phis, meas, sig = _spectrum_residuals(points)
    if phis.max() - phis.min() <= 0.25:
        raise PreconditionError(
            f"flux span {phis.max() - phis.min():.3f} Phi_0 too small (need > 0.25)"
        )
    n = guess.basis_size

    def model(log_e):
        return guess.with_energies(*np.exp(log_e))

    def resid(log_e):
        return (f01_batch(model(log_e), phis, n) - meas) / sig

    def jac(log_e):
        e = np.exp(log_e)
        _, grad = f01_batch(model(log_e), phis, n, gradient=True)
        return grad * e / sig[:, None]

    rng = np.random.default_rng(seed)
    start = np.log(guess.as_tuple())
    if guess.e_j == 0:
        raise PreconditionError("guess needs e_j > 0 for a log-space fit")
    starts = [start] + [
        start + np.log1p(rng.uniform(-jitter, jitter, 3)) for _ in range(restarts - 1)
    ]
    best = None
    evals = 0
    for x0 in starts:
        sol = optimize.least_squares(resid, x0, jac=jac, method="lm", max_nfev=max_nfev)
        evals += sol.nfev
        if best is None or sol.cost < best.cost:
            best = sol
    if best.status <= 0:
        raise FitError(
            f"spectrum fit did not converge in {max_nfev} evaluations per start; "
            f"best chi2 {2 * best.cost:.4g}",
            best_residual=2 * best.cost,
        )
    params = model(best.x)
    for phi in np.unique(phis):
        _check_converged(params, phi)
    f, grad = f01_batch(params, phis, n, gradient=True)
    weighted = grad / sig[:, None]
    try:
        cov = np.linalg.inv(weighted.T @ weighted)
        errors = tuple(float(v) for v in np.sqrt(np.clip(np.diag(cov), 0, None)))
    except np.linalg.LinAlgError:
        errors = (math.inf,) * 3
    residuals = (f - meas) / sig
    chi2 = float(residuals @ residuals)
    dof = max(len(points) - 3, 1)
    return SpectrumFit(params, errors, chi2, chi2 / dof, residuals, evals)


# -- per-point bounds -------------------------------------------------------


def _spectrum_for(point, params, spec):
    return spec if spec is not None else diagonalize(params, point.phi_ext)


def bound_tan_delta(point, params, env, spec=None):
    """Upper bound on tan(delta_C) if T1 were purely dielectric-limited."""
    if point.t1 is None:
        raise PreconditionError("bound_tan_delta needs t1")
    spec = _spectrum_for(point, params, spec)
    coeff = nm.dielectric_coefficient(spec.f01, spec.phi_mat_elem_01, params.e_c, env.t_eff)
    return float(1.0 / (point.t1 * coeff))


def bound_flux_amp_t1(point, params, env, spec=None):
    """Upper bound on A_Phi,T1 (Phi_0) if T1 were purely flux-noise limited."""
    if point.t1 is None:
        raise PreconditionError("bound_flux_amp_t1 needs t1")
    spec = _spectrum_for(point, params, spec)
    coeff = nm.flux_t1_coefficient(spec.f01, spec.phi_mat_elem_01, params.e_l, env.t_eff)
    return float(math.sqrt(1.0 / (point.t1 * coeff)))


def flux_amp_t2(point, params, spec=None):
    """A_Phi,T2 (Phi_0) from the echo pure-dephasing rate at one point."""
    if point.t1 is None or point.t2_echo is None:
        raise PreconditionError("flux_amp_t2 needs t1 and t2_echo")
    spec = _spectrum_for(point, params, spec)
    if abs(spec.dispersion) <= DISPERSION_THRESHOLD:
        raise SingularityError(
            f"|dispersion| {abs(spec.dispersion):.3g} rad/s/Phi_0 at phi_ext={point.phi_ext} "
            "is below the sweet-spot threshold"
        )
    gamma_phi = nm.pure_dephasing_rate(point.t1, point.t2_echo)
    if gamma_phi <= 0:
        raise UnphysicalPointError(
            f"non-positive pure dephasing rate {gamma_phi:.3g} 1/s at phi_ext={point.phi_ext}"
        )
    return gamma_phi / (abs(spec.dispersion) * math.sqrt(math.log(2)))


# -- window and outlier protocol -------------------------------------------


def select_window(f01, bounds, kind, n_lowest=WINDOW_N_LOWEST, rel_width=WINDOW_REL_WIDTH):
    """Indices of points used for one quantity.

    For the T1-derived quantities the reference frequency f_r is the mean f01
    of the ``n_lowest`` smallest bounds and the window is
    [(1 - rel_width) f_r, (1 + rel_width) f_r]. A_Phi,T2 keeps every point.
    Points with a NaN bound are never selected.
    """
    f01 = np.asarray(f01, dtype=float)
    bounds = np.asarray(bounds, dtype=float)
    valid = np.flatnonzero(np.isfinite(bounds))
    if len(valid) < n_lowest:
        raise PreconditionError(
            f"{kind}: window selection needs >= {n_lowest} valid points, got {len(valid)}"
        )
    if kind == A_PHI_T2:
        return valid
    lowest = valid[np.argsort(bounds[valid], kind="stable")[:n_lowest]]
    f_r = f01[lowest].mean()
    inside = (f01[valid] >= (1 - rel_width) * f_r) & (f01[valid] <= (1 + rel_width) * f_r)
    return valid[inside]


def _truncated_std_ratio(fraction):
    """Std of a unit normal restricted to its central ``fraction``."""
    if fraction >= 1:
        return 1.0
    z = stats.norm.ppf(0.5 + fraction / 2)
    return math.sqrt(1 - 2 * z * stats.norm.pdf(z) / fraction)


def reject_outliers(values, kind):
    """Drop resonant-TLS style outliers from a set of bound values.

    1. discard values above 5x the first quartile;
    2. fit a normal (x0, sigma) to the 90% of the rest closest to the median,
       correcting sigma for the trimming;
    3. keep [x0 - 2 sigma, x0 + 2 sigma], or [x0 - 2 sigma, x0] for
       tan(delta_C).

    Returned indices refer to positions in ``values``.
    """
    v = np.asarray(values, dtype=float)
    if len(v) < 5:
        raise PreconditionError(f"{kind}: outlier rejection needs >= 5 values, got {len(v)}")
    q1 = np.percentile(v, 25)
    stage1 = np.flatnonzero(v <= Q1_MULTIPLE * q1)
    w = v[stage1]
    k = math.ceil(CORE_FRACTION * len(w))
    core = w[np.argsort(np.abs(w - np.median(w)), kind="stable")[:k]]
    x0 = float(core.mean())
    sigma = float(core.std() / _truncated_std_ratio(k / len(w)))
    tol = 1e-12 * abs(x0)
    lo = x0 - 2 * sigma - tol
    hi = (x0 if kind == TAN_DELTA_C else x0 + 2 * sigma) + tol
    keep = stage1[(w >= lo) & (w <= hi)]
    return OutlierResult(kept=keep, x0=x0, sigma=sigma)


def point_bounds(dataset, params, env=None):
    """Per-point bound values for every quantity, NaN where undefined.

    Returns (bounds, flags) where flags maps quantity -> {index: reason}.
    """
    env = env or dataset.env
    n = len(dataset.points)
    bounds = {k: np.full(n, np.nan) for k in QUANTITIES}
    flags = {k: {} for k in QUANTITIES}
    for i, point in enumerate(dataset.points):
        spec = diagonalize(params, point.phi_ext)
        if point.t1 is not None:
            bounds[TAN_DELTA_C][i] = bound_tan_delta(point, params, env, spec)
            bounds[A_PHI_T1][i] = bound_flux_amp_t1(point, params, env, spec)
        if point.t1 is not None and point.t2_echo is not None:
            try:
                bounds[A_PHI_T2][i] = flux_amp_t2(point, params, spec)
            except (SingularityError, UnphysicalPointError) as exc:
                flags[A_PHI_T2][i] = str(exc)
    return bounds, flags


def _estimate(kind, f01, values):
    window = select_window(f01, values, kind)
    out = reject_outliers(values[window], kind)
    kept = window[out.kept]
    kept_values = values[kept]
    error = float(kept_values.std(ddof=1)) if len(kept) > 1 else 0.0
    return QuantityEstimate(kind, float(kept_values.mean()), error, window, kept, out.x0, out.sigma)


def extract_report(dataset, params, env=None):
    """Run bounds -> window -> outlier rejection for each quantity.

    The summary value is the mean of the kept bound values and its error the
    sample standard deviation of the same values. A quantity whose data are
    absent (no T1, or no echo T2) is reported as None.
    """
    env = env or dataset.env
    if len(dataset.points) < WINDOW_N_LOWEST:
        raise PreconditionError(
            f"dataset {dataset.device_id!r} has {len(dataset.points)} points; "
            f"the protocol needs >= {WINDOW_N_LOWEST}"
        )
    bounds, flags = point_bounds(dataset, params, env)
    f01 = np.array([p.f01 for p in dataset.points])
    results = {}
    for kind in QUANTITIES:
        has_data = (
            any(p.t1 is not None for p in dataset.points)
            if kind != A_PHI_T2
            else any(p.t1 is not None and p.t2_echo is not None for p in dataset.points)
        )
        results[kind] = _estimate(kind, f01, bounds[kind]) if has_data else None
    return ExtractionReport(dataset.device_id, bounds=bounds, flags=flags, **results)


# -- relaxation model comparison -------------------------------------------


@dataclass(frozen=True)
class T1ModelFit:
    channels: nm.NoiseChannelSet
    model: tuple
    chi2: float
    dof: int
    rms_log: float
    residuals: np.ndarray = field(repr=False)  # log(G_meas / G_model), per point

    @property
    def reduced_chi2(self):
        return self.chi2 / max(self.dof, 1)


def _channel_coefficients(name, f01, mat, params, env):
    if name == "tan_delta_c":
        return nm.dielectric_coefficient(f01, mat, params.e_c, env.t_eff), 1
    if name == "tan_delta_tls":
        return nm.dielectric_coefficient(f01, mat, params.e_c), 1
    if name == "tan_delta_l":
        return nm.inductive_coefficient(f01, mat, params.e_l, env.t_eff), 1
    if name == "a_phi_t1":
        return nm.flux_t1_coefficient(f01, mat, params.e_l, env.t_eff), 2
    raise PreconditionError(f"unknown relaxation channel {name!r}")


def fit_t1_model(dataset, params, env=None, channels=MODELS["dielectric+flux"], max_nfev=2000):
    """Weighted least squares of log Gamma_1 against a sum of channels.

    ``channels`` is a tuple of channel names or a key of ``MODELS``. Weights
    are T1 / t1_err (the log-rate uncertainty); points without an error bar
    get unit weight.
    """
    env = env or dataset.env
    if isinstance(channels, str):
        channels = MODELS[channels]
    pts = [p for p in dataset.points if p.t1 is not None]
    if len(pts) < 10:
        raise PreconditionError(f"T1 model fit needs >= 10 T1 points, got {len(pts)}")
    specs = [diagonalize(params, p.phi_ext) for p in pts]
    f01 = np.array([s.f01 for s in specs])
    mat = np.array([s.phi_mat_elem_01 for s in specs])
    t1 = np.array([p.t1 for p in pts])
    rel = np.array([p.t1_err / p.t1 if p.t1_err else 1.0 for p in pts])
    log_gamma = -np.log(t1)
    coeffs, powers = zip(*(_channel_coefficients(c, f01, mat, params, env) for c in channels))
    coeffs = np.array(coeffs)
    powers = np.array(powers, dtype=float)

    def model(u):
        return coeffs.T @ np.exp(powers * u)

    def resid(u):
        return (log_gamma - np.log(model(u))) / rel

    def jac(u):
        terms = coeffs * np.exp(powers * u)[:, None]  # (channel, point)
        return -(powers[:, None] * terms / model(u)).T / rel[:, None]

    # start each channel at half its single-channel bound
    u0 = np.array(
        [np.log(np.min(np.exp(log_gamma) / c) ** (1 / p) * 0.5) for c, p in zip(coeffs, powers)]
    )
    sol = optimize.least_squares(resid, u0, jac=jac, method="lm", max_nfev=max_nfev)
    if sol.status <= 0:
        raise FitError(f"T1 model {channels} did not converge", best_residual=2 * sol.cost)
    amps = np.exp(sol.x)
    j = sol.jac
    try:
        cov = np.linalg.inv(j.T @ j)
        errs = amps * np.sqrt(np.clip(np.diag(cov), 0, None))
    except np.linalg.LinAlgError:
        errs = np.full(len(amps), np.inf)
    channel_set = nm.NoiseChannelSet(
        **dict(zip(channels, amps.tolist())),
        errors=tuple(zip(channels, errs.tolist())),
    )
    log_resid = log_gamma - np.log(model(sol.x))
    return T1ModelFit(
        channels=channel_set,
        model=tuple(channels),
        chi2=float(2 * sol.cost),
        dof=len(pts) - len(channels),
        rms_log=float(np.sqrt(np.mean(log_resid**2))),
        residuals=log_resid,
    )
