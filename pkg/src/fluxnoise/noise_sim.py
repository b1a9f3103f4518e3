"""Synthetic noise and measurement data, and flux-noise PSD estimators.

PSDs handed to callers are one-sided, in Phi_0^2/Hz, with the 1/f amplitude
``A`` defined through S_Phi(f) = A^2 / f^beta (A at 1 Hz). Inside
``estimate_psd`` the binary-series spectrum is first formed with the
two-sided normalization |Z_k|^2 t_s / N; the factor of two is applied when
converting to flux units.
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy import optimize

from . import noise_models as nm
from .errors import FitError, PreconditionError, UnphysicalPointError
from .extraction import CoherenceDataset, CoherencePoint
from .fluxonium import diagonalize, f01_batch

MIN_SERIES_LENGTH = 16
SATURATION_LIMIT = 0.01


class SaturationWarning(UserWarning):
    """Ramsey response clipped on too many samples for the linear model."""


def member_rng(seed, index=None):
    """Deterministic generator for ensemble member ``index`` of ``seed``."""
    return np.random.default_rng(seed if index is None else [seed, index])


@dataclass(frozen=True)
class NoiseTrace:
    samples: np.ndarray = field(repr=False)  # Phi_0
    t_s: float
    amplitude: float  # Phi_0 at 1 Hz
    beta: float

    def __len__(self):
        return len(self.samples)

    def psd_truth(self, f):
        return self.amplitude**2 / np.asarray(f, dtype=float) ** self.beta


@dataclass(frozen=True)
class BinarySeries:
    bits: np.ndarray = field(repr=False)
    t_s: float
    tau0: float
    visibility: float  # 2a
    mean_b: float
    saturated_fraction: float = 0.0

    def __len__(self):
        return len(self.bits)


@dataclass(frozen=True)
class PsdEstimate:
    freq: np.ndarray  # Hz
    s_phi: np.ndarray  # one-sided, Phi_0^2/Hz
    stderr: np.ndarray
    s_w: float  # mean white sampling floor (two-sided, 1/Hz)
    excess: np.ndarray = field(repr=False)  # S - S_w, two-sided, per bin
    excess_stderr: np.ndarray = field(repr=False)
    n_traces: int = 1


@dataclass(frozen=True)
class SpinLockPoint:
    rabi: float  # Omega_R, rad/s
    gamma_1rho: float  # 1/s
    gamma_1: float  # 1/s
    dispersion: float  # rad/s per Phi_0


@dataclass(frozen=True)
class PowerLawFit:
    amplitude: float  # Phi_0 at 1 Hz
    beta: float
    amplitude_err: float
    beta_err: float
    offset: float = 0.0  # Phi_0^2/Hz removed with the white floor

    def psd(self, f):
        return self.amplitude**2 / np.asarray(f, dtype=float) ** self.beta

    def equivalent_1f_amplitude(self, f):
        """sqrt(f S(f)): the 1/f amplitude that matches the PSD at ``f``."""
        return math.sqrt(f * float(self.psd(f)))


def _is_power_of_two(n):
    return n >= 2 and n & (n - 1) == 0


def synth_powerlaw_noise(amp_at_1hz, beta, t_s, n, seed=0, index=None):
    """Gaussian flux trace with one-sided PSD A^2/f^beta.

    Spectral synthesis: complex white Gaussian Fourier coefficients are
    scaled by sqrt(S(f_k) n / (2 t_s)), the DC bin is zeroed and the result
    is inverse transformed.
    """
    if not 0 <= beta <= 2:
        raise PreconditionError(f"beta must be in [0, 2], got {beta}")
    if not _is_power_of_two(int(n)) or int(n) != n:
        raise PreconditionError(f"n must be a power of two, got {n}")
    if not t_s > 0 or amp_at_1hz < 0:
        raise PreconditionError("need t_s > 0 and amplitude >= 0")
    n = int(n)
    rng = member_rng(seed, index)
    k = np.arange(n // 2 + 1)
    f = k / (n * t_s)
    scale = np.zeros_like(f)
    scale[1:] = np.sqrt(amp_at_1hz**2 / f[1:] ** beta * n / (2 * t_s))
    coeff = (rng.standard_normal(len(k)) + 1j * rng.standard_normal(len(k))) / math.sqrt(2)
    coeff[-1] = rng.standard_normal()  # Nyquist bin is real
    coeff *= scale
    samples = np.fft.irfft(coeff, n=n)
    return NoiseTrace(samples=samples, t_s=t_s, amplitude=amp_at_1hz, beta=beta)


def simulate_ramsey_series(trace, dispersion, tau0, visibility, mean_b, seed=0, index=None, n=None):
    """Single-shot Ramsey outcomes driven by a flux trace.

    The excited-state probability responds linearly to the accumulated phase,
    p_n = mean_b + (visibility / 2) * dispersion * Phi_n * tau0, and each
    shot is a Bernoulli draw. ``n`` takes the first n samples of the trace.
    """
    if not 0 < visibility <= 1:
        raise PreconditionError(f"visibility must be in (0, 1], got {visibility}")
    if not 0 < tau0 < trace.t_s:
        raise PreconditionError("need 0 < tau0 < t_s")
    if not 0 <= mean_b <= 1:
        raise PreconditionError("mean_b must be in [0, 1]")
    flux = trace.samples if n is None else trace.samples[:n]
    if len(flux) < 2:
        raise PreconditionError("series needs >= 2 samples")
    p = mean_b + 0.5 * visibility * dispersion * flux * tau0
    clipped = (p < 0) | (p > 1)
    frac = float(clipped.mean())
    if frac > SATURATION_LIMIT:
        warnings.warn(
            f"{100 * frac:.1f}% of Ramsey probabilities clipped; noise too large "
            "for the linear response",
            SaturationWarning,
            stacklevel=2,
        )
    rng = member_rng(seed, index)
    bits = (rng.random(len(p)) < np.clip(p, 0, 1)).astype(np.uint8)
    return BinarySeries(bits, trace.t_s, tau0, visibility, mean_b, frac)


def _series_spectrum(series):
    b = series.bits.astype(float)
    n = len(b)
    if n < MIN_SERIES_LENGTH:
        raise PreconditionError(f"series too short for a PSD: {n} < {MIN_SERIES_LENGTH}")
    z = np.fft.rfft(b)[1:]
    s = np.abs(z) ** 2 * series.t_s / n
    mb = b.mean()
    return s, mb * (1 - mb) * series.t_s


def estimate_psd(series, dispersion):
    """Flux-noise PSD from one binary series or an ensemble of them.

    Each periodogram S = |Z_k|^2 / (N / t_s) has the white sampling floor
    S_w = <b>(1 - <b>) t_s removed (with <b> from that series) and is
    converted by (a tau0 dispersion)^2. The ensemble mean is returned with its
    standard error; for a single series the error is the periodogram itself
    (exponential statistics).
    """
    members = [series] if isinstance(series, BinarySeries) else list(series)
    if not members:
        raise PreconditionError("no series given")
    first = members[0]
    n = len(first)
    if any(len(m) != n or m.t_s != first.t_s for m in members):
        raise PreconditionError("ensemble members must share length and t_s")
    excess = np.empty((len(members), n // 2))
    s_w = np.empty(len(members))
    raw = np.empty_like(excess)
    for i, m in enumerate(members):
        raw[i], s_w[i] = _series_spectrum(m)
        excess[i] = raw[i] - s_w[i]
    gain = (0.5 * first.visibility * first.tau0 * dispersion) ** 2
    mean_excess = excess.mean(axis=0)
    if len(members) > 1:
        err = excess.std(axis=0, ddof=1) / math.sqrt(len(members))
    else:
        err = raw[0]
    freq = np.arange(1, n // 2 + 1) / (n * first.t_s)
    return PsdEstimate(
        freq=freq,
        s_phi=2 * mean_excess / gain,
        stderr=2 * err / gain,
        s_w=float(s_w.mean()),
        excess=mean_excess,
        excess_stderr=err,
        n_traces=len(members),
    )


def fit_psd_powerlaw(psd, f_min=None, f_max=None, bins_per_decade=10, offset=True):
    """Fit A^2/f^beta (- c) to a PSD estimate over [f_min, f_max].

    Bins are first averaged on a logarithmic grid. Subtracting S_w built from
    the measured <b> also removes the band-averaged signal (for a binary
    series the mean periodogram over all non-DC bins equals S_w exactly), so
    by default a constant offset c is fitted alongside A and beta. The fit is
    weighted least squares in linear PSD units.
    """
    f = psd.freq
    f_min = f_min or f[0]
    f_max = f_max or f[-1]
    sel = (f >= f_min) & (f <= f_max)
    f, s, e = f[sel], psd.s_phi[sel], psd.stderr[sel]
    n_edges = max(2, int(bins_per_decade * math.log10(f[-1] / f[0])) + 2)
    edges = np.logspace(math.log10(f[0]), math.log10(f[-1]) + 1e-9, n_edges)
    idx = np.digitize(f, edges)
    groups = [idx == g for g in np.unique(idx)]
    ok = np.array([np.sum(e[m] ** 2) > 0 for m in groups])
    groups = [m for m, keep in zip(groups, ok) if keep]
    fg = np.array([np.exp(np.mean(np.log(f[m]))) for m in groups])
    sg = np.array([s[m].mean() for m in groups])
    eg = np.array([math.sqrt(np.sum(e[m] ** 2)) / m.sum() for m in groups])
    # group of every kept bin, so the model is averaged exactly like the data
    member = np.concatenate([np.full(m.sum(), i) for i, m in enumerate(groups)])
    f_all = np.concatenate([f[m] for m in groups])
    counts = np.bincount(member)
    pos = sg > 0
    if pos.sum() < 3:
        raise PreconditionError("too few positive PSD groups for a power-law fit")
    # log-log start on the positive groups
    design = np.column_stack([np.ones(pos.sum()), -np.log(fg[pos])])
    (log_a2, beta0), *_ = np.linalg.lstsq(design, np.log(sg[pos]), rcond=None)
    x0 = [0.5 * log_a2, beta0] + ([0.0] if offset else [])
    scale = float(np.median(np.abs(sg)))

    def resid(p):
        model = np.bincount(member, np.exp(2 * p[0]) / f_all ** p[1]) / counts
        if offset:
            model = model - p[2] * scale
        return (sg - model) / eg

    sol = optimize.least_squares(resid, x0, method="lm")
    if sol.status <= 0:
        raise FitError("PSD power-law fit did not converge")
    try:
        cov = np.linalg.inv(sol.jac.T @ sol.jac)
    except np.linalg.LinAlgError:
        cov = np.full((len(x0), len(x0)), np.inf)
    amp = math.exp(sol.x[0])
    return PowerLawFit(
        amplitude=amp,
        beta=float(sol.x[1]),
        amplitude_err=amp * math.sqrt(cov[0, 0]),
        beta_err=math.sqrt(cov[1, 1]),
        offset=float(sol.x[2] * scale) if offset else 0.0,
    )


def run_ramsey_ensemble(amp, beta, n_traces, dispersion, t_s=1e-4, n=10_000, tau0=100e-9,
                        visibility=0.5, mean_b=0.55, seed=0):
    """synth -> simulate -> estimate for ``n_traces`` independent members.

    Each trace is synthesized at the next power of two >= n and the first n
    samples are used.
    """
    n_synth = 1 << (int(n) - 1).bit_length()
    series = []
    for i in range(n_traces):
        trace = synth_powerlaw_noise(amp, beta, t_s, n_synth, seed=seed, index=2 * i)
        series.append(
            simulate_ramsey_series(trace, dispersion, tau0, visibility, mean_b,
                                   seed=seed, index=2 * i + 1, n=n)
        )
    return estimate_psd(series, dispersion)


def spinlock_to_psd(point):
    """(frequency in Hz, S_Phi in Phi_0^2/Hz) from one spin-locking rate.

    Gamma_nu = Gamma_1rho - Gamma_1 / 2 and S_Phi = 2 Gamma_nu / dispersion^2.
    """
    gamma_nu = point.gamma_1rho - point.gamma_1 / 2
    if gamma_nu < 0:
        raise UnphysicalPointError(
            f"gamma_1rho {point.gamma_1rho:.4g} < gamma_1/2 {point.gamma_1 / 2:.4g}"
        )
    return point.rabi / (2 * math.pi), 2 * gamma_nu / point.dispersion**2


def log_frequency_grid(params, n, phi_lo=0.0, mirror=True, margin=1e-3):
    """Flux biases in [phi_lo, 0.5) whose f01 values are evenly spaced in log f.

    A relative frequency window then holds about the same number of points
    anywhere in the sweep. With ``mirror`` each bias phi is paired with
    1 - phi. Requires f01 to decrease monotonically toward 0.5.
    """
    if n < 2:
        raise PreconditionError("need n >= 2")
    fine = np.linspace(phi_lo, 0.5 - margin, 2001)
    f = f01_batch(params, fine)
    if not np.all(np.diff(f) < 0):
        raise PreconditionError("f01 is not monotone on the requested flux range")
    targets = np.geomspace(f[0], f[-1], n)
    phis = np.interp(np.log(targets), np.log(f[::-1]), fine[::-1])
    return np.concatenate([phis, 1 - phis[::-1]]) if mirror else phis


def synth_coherence_dataset(params, channels, env, flux_grid, rel_noise=0.0, seed=0,
                            device_id="synthetic"):
    """Coherence sweep from the forward model with log-normal scatter.

    T1 and echo T2 are multiplied by exp(rel_noise * z), z ~ N(0, 1), and
    carry rel_noise * value as their error bar.
    """
    if not 0 <= rel_noise <= 0.5:
        raise PreconditionError(f"rel_noise must be in [0, 0.5], got {rel_noise}")
    rng = member_rng(seed)
    points = []
    for phi in flux_grid:
        spec = diagonalize(params, phi)
        pred = nm.predict_coherence(params, phi, channels, env, spec=spec)
        z1, z2 = rng.standard_normal(2)
        t1 = pred.t1 * math.exp(rel_noise * z1) if pred.t1 is not nm.NO_DECAY else None
        t2 = pred.t2_echo * math.exp(rel_noise * z2) if pred.t2_echo is not nm.NO_DECAY else None
        if t1 is None and t2 is None:
            continue
        points.append(CoherencePoint(
            phi_ext=float(phi),
            f01=spec.f01,
            t1=t1,
            t2_echo=t2,
            t1_err=rel_noise * t1 if t1 is not None and rel_noise else None,
            t2_err=rel_noise * t2 if t2 is not None and rel_noise else None,
        ))
    return CoherenceDataset(device_id, points, env)
