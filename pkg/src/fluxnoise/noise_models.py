"""Forward decoherence-rate models for a fluxonium qubit.

Rates are in 1/s. Circuit energies arrive as GHz (E/h) and are converted to
joules here; flux-noise amplitudes are 1/f amplitudes at 1 Hz in units of
Phi_0.
"""

from dataclasses import dataclass, fields
import math

import numpy as np

from . import constants as C
from .errors import PreconditionError
from .fluxonium import diagonalize

CHANNELS = ("tan_delta_c", "a_phi_t1", "a_phi_t2", "tan_delta_tls", "tan_delta_l")


@dataclass(frozen=True)
class ThermalEnv:
    t_eff: float  # K

    def __post_init__(self):
        if not self.t_eff > 0:
            raise PreconditionError(f"t_eff must be > 0 K, got {self.t_eff}")

    @classmethod
    def from_mk(cls, t_mk):
        return cls(t_mk * 1e-3)


@dataclass(frozen=True)
class NoiseChannelSet:
    """Channel amplitudes; an inactive channel is 0.

    ``errors`` optionally maps channel name to a symmetric error bar.
    """

    tan_delta_c: float = 0.0
    a_phi_t1: float = 0.0
    a_phi_t2: float = 0.0
    tan_delta_tls: float = 0.0
    tan_delta_l: float = 0.0
    errors: tuple = ()

    def __post_init__(self):
        for name in CHANNELS:
            value = getattr(self, name)
            if not value >= 0:
                raise PreconditionError(f"{name} must be >= 0, got {value}")

    @property
    def error_map(self):
        return dict(self.errors)

    def active(self):
        return tuple(name for name in CHANNELS if getattr(self, name) > 0)

    def as_dict(self):
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "errors"}
        out.update({f"{k}_err": v for k, v in self.errors})
        return out


class _NoDecay:
    """Marker for a lifetime whose rate is exactly zero."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NO_DECAY"

    def __bool__(self):
        return False


NO_DECAY = _NoDecay()


@dataclass(frozen=True)
class CoherencePrediction:
    gamma1: float
    gamma_phi: float
    t1: object
    t2_echo: object
    t_phi: object


def _x(omega01, t_eff):
    """hbar omega / (k_B T)."""
    return C.hbar * omega01 / (C.k_B * t_eff)


def coth_factor(omega01, t_eff):
    """coth(hbar omega / 2 k_B T)."""
    return 1.0 / np.tanh(0.5 * _x(omega01, t_eff))


def emission_absorption_factor(omega01, t_eff):
    """1 + exp(-hbar omega / k_B T)."""
    return 1.0 + np.exp(-_x(omega01, t_eff))


def _omega(f01_ghz):
    return 2 * math.pi * np.asarray(f01_ghz, dtype=float) * C.GHZ


# Per-unit-amplitude coefficients. These take plain arrays so the fitting code
# can evaluate many flux points at once.

def dielectric_coefficient(f01, mat_elem, e_c, t_eff=None):
    """Gamma_1 per unit dielectric tangent; ``t_eff=None`` drops the coth."""
    omega = _omega(f01)
    coeff = C.hbar * omega**2 / (4 * C.ghz_to_joule(e_c)) * np.asarray(mat_elem) ** 2
    if t_eff is not None:
        coeff = coeff * coth_factor(omega, t_eff)
    return coeff


def flux_t1_coefficient(f01, mat_elem, e_l, t_eff):
    """Gamma_1 per unit A^2 with A in Phi_0."""
    omega = _omega(f01)
    e_l_j = C.ghz_to_joule(e_l)
    pref = 2 * math.pi * e_l_j**2 / (C.hbar**2 * C.phi_0**2)
    return pref * np.asarray(mat_elem) ** 2 * C.Phi_0**2 / omega * emission_absorption_factor(omega, t_eff)


def inductive_coefficient(f01, mat_elem, e_l, t_eff):
    omega = _omega(f01)
    return 2 * C.ghz_to_joule(e_l) / C.hbar * np.asarray(mat_elem) ** 2 * coth_factor(omega, t_eff)


def gamma1_dielectric(spec, params, tan_delta_c, env):
    if tan_delta_c < 0:
        raise PreconditionError("tan_delta_c must be >= 0")
    return float(dielectric_coefficient(spec.f01, spec.phi_mat_elem_01, params.e_c, env.t_eff) * tan_delta_c)


def gamma1_flux(spec, params, a_phi_t1, env):
    if a_phi_t1 < 0:
        raise PreconditionError("a_phi_t1 must be >= 0")
    return float(flux_t1_coefficient(spec.f01, spec.phi_mat_elem_01, params.e_l, env.t_eff) * a_phi_t1**2)


def gamma_phi_flux_echo(dispersion, a_phi_t2):
    """Echo pure-dephasing rate from 1/f flux noise.

    ``dispersion`` in rad/s per Phi_0 and ``a_phi_t2`` in Phi_0, so the
    flux units cancel.
    """
    if a_phi_t2 < 0:
        raise PreconditionError("a_phi_t2 must be >= 0")
    return abs(dispersion) * a_phi_t2 * math.sqrt(math.log(2))


def gamma1_tls(spec, params, tan_delta_tls):
    if tan_delta_tls < 0:
        raise PreconditionError("tan_delta_tls must be >= 0")
    return float(dielectric_coefficient(spec.f01, spec.phi_mat_elem_01, params.e_c) * tan_delta_tls)


def gamma1_inductive(spec, params, tan_delta_l, env):
    if tan_delta_l < 0:
        raise PreconditionError("tan_delta_l must be >= 0")
    return float(inductive_coefficient(spec.f01, spec.phi_mat_elem_01, params.e_l, env.t_eff) * tan_delta_l)


def relaxation_rate(spec, params, channels, env):
    """Sum of all active relaxation channels."""
    return (
        gamma1_dielectric(spec, params, channels.tan_delta_c, env)
        + gamma1_flux(spec, params, channels.a_phi_t1, env)
        + gamma1_tls(spec, params, channels.tan_delta_tls)
        + gamma1_inductive(spec, params, channels.tan_delta_l, env)
    )


def _lifetime(rate):
    return 1.0 / rate if rate > 0 else NO_DECAY


def predict_coherence(params, phi_ext, channels, env, spec=None):
    """T1, echo T2 and T_phi at one flux bias.

    Uses Gamma_2 = Gamma_1 / 2 + Gamma_phi. Lifetimes whose rate is zero are
    returned as ``NO_DECAY``.
    """
    spec = spec or diagonalize(params, phi_ext)
    gamma1 = relaxation_rate(spec, params, channels, env)
    gamma_phi = gamma_phi_flux_echo(spec.dispersion, channels.a_phi_t2)
    return CoherencePrediction(
        gamma1=gamma1,
        gamma_phi=gamma_phi,
        t1=_lifetime(gamma1),
        t2_echo=_lifetime(gamma1 / 2 + gamma_phi),
        t_phi=_lifetime(gamma_phi),
    )


def pure_dephasing_rate(t1, t2_echo):
    """Gamma_phi = 1/T2 - 1/(2 T1)."""
    return 1.0 / t2_echo - 1.0 / (2.0 * t1)
