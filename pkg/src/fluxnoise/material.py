"""Material conversions for the disordered superinductor wire.

SI units throughout unless a name says otherwise: lengths in m, resistivity
in Ohm m, sheet inductance in H/sq, gap in J, flux-noise amplitudes in Phi_0
at 1 Hz.
"""

from dataclasses import dataclass, field
from importlib import resources
import math

import numpy as np
from scipy import stats

from . import constants as C
from .errors import GapRequiredError, NumericError, PreconditionError, RegimeError
from .io import read_table

BCS_GAP_RATIO = 1.764
WL_WINDOW = (15.0, 30.0)  # K
MIN_POWER_LAW_PAIRS = 4
REGIME_MIN_W_OVER_T = 10.0

DEVICE_TABLE_COLUMNS = (
    "Device", "Ti:Al", "anneal", "t_nm", "kF_per_nm", "l_nm", "lambda_um", "w_um", "p_um",
    "tan_delta_e6", "A_T2_uPhi0", "f01_MHz", "EC_GHz", "EJ_GHz", "EL_GHz", "Teff_mK",
)
DEVICE_TABLE_OPTIONAL = ("tan_delta_err_e6", "A_T2_err_uPhi0")
DEVICE_TABLE_TEXT = ("Device", "Ti:Al", "anneal")


def _positive(**values):
    for name, value in values.items():
        if not np.all(np.asarray(value) > 0):
            raise PreconditionError(f"{name} must be > 0, got {value}")


# -- types -------------------------------------------------------------------

@dataclass(frozen=True)
class WireSample:
    """Inductor-wire geometry and transport properties. Optional fields are None."""

    thickness: float
    width: float
    perimeter: float
    rho_xx: float | None = None
    n_e: float | None = None
    k_f: float | None = None
    mfp: float | None = None
    lam: float | None = None
    delta0: float | None = None

    def __post_init__(self):
        for name, value in vars(self).items():
            if value is not None and not value > 0:
                raise PreconditionError(f"{name} must be > 0, got {value}")

    def regime_violations(self):
        """Reasons the homogeneous-current regime (lambda > w >> t) fails."""
        out = []
        if self.lam is not None and not self.lam > self.width:
            out.append(f"lambda ({self.lam:.3g} m) <= w ({self.width:.3g} m)")
        if not self.width / self.thickness >= REGIME_MIN_W_OVER_T:
            out.append(f"w/t = {self.width / self.thickness:.3g} < {REGIME_MIN_W_OVER_T:g}")
        return tuple(out)


@dataclass(frozen=True)
class TransportCurve:
    temperature: np.ndarray  # K
    r_s: np.ndarray  # Ohm/sq
    field: np.ndarray | None = None  # T, mu_0 H
    r_xy: np.ndarray | None = None  # Ohm

    def __post_init__(self):
        t = np.asarray(self.temperature, dtype=float)
        r = np.asarray(self.r_s, dtype=float)
        if t.shape != r.shape or t.ndim != 1:
            raise PreconditionError("temperature and r_s must be 1-D arrays of equal length")
        if not np.all(np.diff(t) > 0):
            raise PreconditionError("temperature grid must be strictly increasing")
        if not np.all(r > 0):
            raise PreconditionError("sheet resistance must be > 0")
        object.__setattr__(self, "temperature", t)
        object.__setattr__(self, "r_s", r)
        if (self.field is None) != (self.r_xy is None):
            raise PreconditionError("field and r_xy must be given together")
        if self.field is not None:
            h = np.asarray(self.field, dtype=float)
            rxy = np.asarray(self.r_xy, dtype=float)
            if h.shape != rxy.shape or h.ndim != 1:
                raise PreconditionError("field and r_xy must be 1-D arrays of equal length")
            if not np.all(np.diff(h) > 0):
                raise PreconditionError("field grid must be strictly increasing")
            object.__setattr__(self, "field", h)
            object.__setattr__(self, "r_xy", rxy)


@dataclass(frozen=True)
class SpinDefectResult:
    m2_sigma: float  # m^-2, m^2 times the areal density
    m: float = 1.0
    regime_warnings: tuple = ()

    @property
    def sigma(self):
        """Areal density in m^-2."""
        return self.m2_sigma / self.m**2

    @property
    def regime_ok(self):
        return not self.regime_warnings


@dataclass(frozen=True)
class PowerLawResult:
    """log y = log_prefactor + alpha log x (natural logs)."""

    alpha: float
    alpha_err: float
    log_prefactor: float
    r2: float
    n: int

    @property
    def prefactor(self):
        return math.exp(self.log_prefactor)


@dataclass(frozen=True)
class WeakLocalizationResult:
    slope: float
    slope_err: float
    r2: float
    sigma0: float  # S/m
    window: tuple


# -- inductance and penetration depth -----------------------------------------

def lk_from_el(e_l, w, p):
    """Sheet kinetic inductance (H/sq) from E_L (GHz) and wire width/perimeter."""
    _positive(e_l=e_l, w=w, p=p)
    return (w / p) * C.phi_0**2 / C.ghz_to_joule(e_l)


def lambda_from_lk(l_k, t):
    """Penetration depth from L_k ~ mu_0 lambda^2 / t."""
    _positive(l_k=l_k, t=t)
    return np.sqrt(l_k * t / C.mu_0)


def lk_from_lambda(lam, t):
    _positive(lam=lam, t=t)
    return C.mu_0 * lam**2 / t


def bcs_gap(t_c):
    """Delta_0 = 1.764 k_B T_c in J."""
    _positive(t_c=t_c)
    return BCS_GAP_RATIO * C.k_B * t_c


def lk_from_resistivity(rho_xx, t, delta0=None, t_c=None):
    """L_k = hbar rho_xx / (pi Delta_0 t).

    The gap is an explicit input; a critical temperature may be given
    instead, in which case the BCS gap is used.
    """
    if delta0 is None:
        if t_c is None:
            raise GapRequiredError("gap required: pass delta0 (J) or t_c (K)")
        delta0 = bcs_gap(t_c)
    _positive(rho_xx=rho_xx, t=t, delta0=delta0)
    return C.hbar * rho_xx / (math.pi * delta0 * t)


# -- disorder ---------------------------------------------------------------------

def carrier_density_from_kf(k_f):
    """Free-electron n_e = k_F^3 / (3 pi^2)."""
    _positive(k_f=k_f)
    return k_f**3 / (3 * math.pi**2)


def ioffe_regel(rho_xx, n_e):
    """k_F l = hbar (3 pi^2)^(2/3) / (e^2 n_e^(1/3) rho_xx)."""
    _positive(rho_xx=rho_xx, n_e=n_e)
    return C.hbar * (3 * math.pi**2) ** (2 / 3) / (C.e**2 * np.cbrt(n_e) * rho_xx)


def resistivity_from_kfl(k_f, l):
    """rho_xx = 3 pi^2 hbar / (e^2 k_F^2 l)."""
    _positive(k_f=k_f, l=l)
    return 3 * math.pi**2 * C.hbar / (C.e**2 * k_f**2 * l)


def carrier_density_hall(curve, t):
    """n_e from the Hall slope, 1/(e n_e t) = dR_xy / d(mu_0 H).

    Raises NumericError when the slope is not significant (|s| < 2 stderr)
    and RegimeError when it is negative (hole-like sign).
    """
    if curve.field is None:
        raise PreconditionError("transport curve has no Hall data")
    if len(curve.field) < 3:
        raise PreconditionError("need at least 3 (H, R_xy) points")
    _positive(t=t)
    fit = stats.linregress(curve.field, curve.r_xy)
    if not abs(fit.slope) >= 2 * fit.stderr:
        raise NumericError(
            f"Hall slope {fit.slope:.3g} Ohm/T not significant (stderr {fit.stderr:.3g})"
        )
    if fit.slope < 0:
        raise RegimeError(f"negative Hall slope {fit.slope:.3g} Ohm/T: carrier sign not electron-like")
    return 1.0 / (C.e * t * fit.slope)


# -- spin defects -----------------------------------------------------------------

def spin_density(a_phi_t2, w, p, m=1.0, wire=None):
    """m^2 sigma = 24 ln2 A^2 / (mu_0^2 mu_B^2) (w / p), A converted to Wb.

    When ``wire`` is given its regime check is run; violations are recorded
    on the result rather than raised.
    """
    _positive(w=w, p=p, m=m)
    if a_phi_t2 < 0:
        raise PreconditionError(f"a_phi_t2 must be >= 0, got {a_phi_t2}")
    a_wb = a_phi_t2 * C.Phi_0
    m2_sigma = 24 * math.log(2) * a_wb**2 / (C.mu_0**2 * C.mu_B**2) * (w / p)
    warnings = wire.regime_violations() if wire is not None else ()
    return SpinDefectResult(m2_sigma=float(m2_sigma), m=m, regime_warnings=warnings)


def flux_variance_check(sigma, w, p, m=1.0):
    """<Phi^2> = mu_0^2 m_B^2 sigma / 12 (p / w) in Wb^2, with m_B = m mu_B."""
    _positive(w=w, p=p)
    if sigma < 0:
        raise PreconditionError(f"sigma must be >= 0, got {sigma}")
    return C.mu_0**2 * (m * C.mu_B) ** 2 * sigma / 12 * (p / w)


# -- fits ---------------------------------------------------------------------------

def fit_power_law(x, y):
    """OLS of log y on log x. Needs at least four positive pairs."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < MIN_POWER_LAW_PAIRS:
        raise PreconditionError(f"need at least {MIN_POWER_LAW_PAIRS} (x, y) pairs, got {x.size}")
    _positive(x=x, y=y)
    fit = stats.linregress(np.log(x), np.log(y))
    return PowerLawResult(
        alpha=float(fit.slope),
        alpha_err=float(fit.stderr),
        log_prefactor=float(fit.intercept),
        r2=float(fit.rvalue**2),
        n=int(x.size),
    )


def weak_localization_slope(curve, t, window=WL_WINDOW, sigma0=None, extrapolation_window=None):
    """Log-log slope of the conductivity correction against temperature.

    sigma_e = 1 / (R_s t). Unless ``sigma0`` is given (e.g. from a high-field
    measurement), sigma_e(0) is the intercept of a straight line through
    sigma_e(T) over ``extrapolation_window`` (default: the analysis window).
    """
    _positive(t=t)
    lo, hi = window
    temp = curve.temperature
    if temp[0] > lo or temp[-1] < hi:
        raise PreconditionError(f"curve spans [{temp[0]}, {temp[-1]}] K, window is [{lo}, {hi}] K")
    sigma_e = 1.0 / (curve.r_s * t)
    if sigma0 is None:
        elo, ehi = extrapolation_window or window
        sel = (temp >= elo) & (temp <= ehi)
        if sel.sum() < 2:
            raise PreconditionError("fewer than two points in the extrapolation window")
        sigma0 = float(stats.linregress(temp[sel], sigma_e[sel]).intercept)
    sel = (temp >= lo) & (temp <= hi)
    if sel.sum() < 3:
        raise PreconditionError("fewer than three points in the analysis window")
    delta = sigma_e[sel] - sigma0
    if not np.all(delta > 0):
        raise RegimeError("conductivity correction <= 0 inside the window")
    fit = stats.linregress(np.log(temp[sel]), np.log(delta))
    return WeakLocalizationResult(
        slope=float(fit.slope),
        slope_err=float(fit.stderr),
        r2=float(fit.rvalue**2),
        sigma0=sigma0,
        window=(lo, hi),
    )


# -- device table -------------------------------------------------------------------

@dataclass(frozen=True)
class DeviceRow:
    """One device-table row with numbers in the table's own units."""

    device: str
    ti_al: str
    anneal: str
    t_nm: float
    kf_per_nm: float
    l_nm: float
    lambda_um: float
    w_um: float
    p_um: float
    tan_delta_e6: float
    a_t2_uphi0: float
    f01_mhz: float
    ec_ghz: float
    ej_ghz: float
    el_ghz: float
    teff_mk: float
    tan_delta_err_e6: float = math.nan
    a_t2_err_uphi0: float = math.nan
    extra: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def wafer(self):
        return self.device.split("_")[0]

    def wire(self):
        return WireSample(
            thickness=self.t_nm * 1e-9,
            width=self.w_um * 1e-6,
            perimeter=self.p_um * 1e-6,
            k_f=self.kf_per_nm * 1e9,
            mfp=self.l_nm * 1e-9,
            lam=self.lambda_um * 1e-6,
            rho_xx=self.rho_xx,
            n_e=self.n_e,
        )

    @property
    def rho_xx(self):
        return float(resistivity_from_kfl(self.kf_per_nm * 1e9, self.l_nm * 1e-9))

    @property
    def n_e(self):
        return float(carrier_density_from_kf(self.kf_per_nm * 1e9))


_FIELD_OF = dict(zip((*DEVICE_TABLE_COLUMNS, *DEVICE_TABLE_OPTIONAL), (
    "device", "ti_al", "anneal", "t_nm", "kf_per_nm", "l_nm", "lambda_um", "w_um", "p_um",
    "tan_delta_e6", "a_t2_uphi0", "f01_mhz", "ec_ghz", "ej_ghz", "el_ghz", "teff_mk",
    "tan_delta_err_e6", "a_t2_err_uphi0",
)))


def shipped_table_path():
    return resources.files("fluxnoise") / "data" / "device_table.csv"


def load_device_table(path=None):
    """Read a device table (default: the shipped transcription of the device list)."""
    rows = read_table(path or shipped_table_path(), DEVICE_TABLE_COLUMNS, DEVICE_TABLE_OPTIONAL,
                      text_columns=DEVICE_TABLE_TEXT)
    out = []
    for r in rows:
        out.append(DeviceRow(**{_FIELD_OF[k]: v for k, v in r.items() if k in _FIELD_OF}))
    return out


@dataclass(frozen=True)
class DerivedRow:
    device: str
    wafer: str
    rho_xx: float  # Ohm m
    kfl: float
    n_e: float  # m^-3
    lk_from_el: float  # H/sq
    lk_from_lambda: float  # H/sq
    sigma: float  # m^-2
    regime_warnings: tuple = ()

    @property
    def lk_mismatch(self):
        return abs(self.lk_from_el - self.lk_from_lambda) / self.lk_from_lambda


def derive_row(row):
    wire = row.wire()
    spin = spin_density(row.a_t2_uphi0 * 1e-6, wire.width, wire.perimeter, wire=wire)
    return DerivedRow(
        device=row.device,
        wafer=row.wafer,
        rho_xx=row.rho_xx,
        kfl=row.kf_per_nm * row.l_nm,
        n_e=row.n_e,
        lk_from_el=float(lk_from_el(row.el_ghz, wire.width, wire.perimeter)),
        lk_from_lambda=float(lk_from_lambda(wire.lam, wire.thickness)),
        sigma=spin.sigma,
        regime_warnings=spin.regime_warnings,
    )


def power_law_pairs(derived, aggregation="device"):
    """(rho_xx, sigma) pairs, one per device or averaged per wafer.

    Per-wafer aggregation takes the arithmetic mean of rho_xx and sigma over
    the wafer's devices.
    """
    if aggregation == "device":
        return np.array([d.rho_xx for d in derived]), np.array([d.sigma for d in derived])
    if aggregation != "wafer":
        raise PreconditionError(f"aggregation must be 'device' or 'wafer', got {aggregation!r}")
    wafers = {}
    for d in derived:
        wafers.setdefault(d.wafer, []).append(d)
    rho = np.array([np.mean([d.rho_xx for d in g]) for g in wafers.values()])
    sigma = np.array([np.mean([d.sigma for d in g]) for g in wafers.values()])
    return rho, sigma


def disorder_power_law(rows, aggregation="device"):
    """Fit sigma ~ rho_xx^alpha over device-table rows."""
    if not rows:
        raise PreconditionError("device table is empty")
    rho, sigma = power_law_pairs([derive_row(r) for r in rows], aggregation)
    return fit_power_law(rho, sigma)
