"""Fluxonium Hamiltonian in a harmonic-oscillator basis.

    H = 4 E_C n^2 + (E_L / 2) (phi + 2 pi phi_ext)^2 - E_J cos(phi)

with ``phi_ext`` the external flux in units of the flux quantum. The flux
stays in the inductive term. The basis is a harmonic-oscillator basis centred
on the minimum of that term, phi_c = -2 pi phi_ext, so that

    phi = phi_c + x,   x = ell (b + b^dag)

and the Hamiltonian reads 4 E_C n^2 + (E_L/2) x^2 - E_J cos(phi_c + x).
The oscillator length ``ell`` is the geometric mean of the inductive length
(2 E_C / E_L)^(1/4) and the junction-well length (2 E_C / (E_L + E_J))^(1/4);
for E_J = 0 the basis is exactly the eigenbasis of the linear circuit.

All energies are frequencies in GHz (E/h).
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, PreconditionError

DEFAULT_BASIS_SIZE = 60
CONVERGENCE_EXTRA_LEVELS = 10
CONVERGENCE_RTOL = 1e-8
DISPERSION_STEP = 1e-5
N_LEVELS = 6


@dataclass(frozen=True)
class FluxoniumParams:
    e_c: float
    e_j: float
    e_l: float
    basis_size: int = DEFAULT_BASIS_SIZE

    def __post_init__(self):
        if not (self.e_c > 0 and self.e_l > 0 and self.e_j >= 0):
            raise PreconditionError(
                f"need e_c > 0, e_l > 0, e_j >= 0; got {self.e_c}, {self.e_l}, {self.e_j}"
            )
        if int(self.basis_size) != self.basis_size or self.basis_size < 10:
            raise PreconditionError(f"basis_size must be an integer >= 10, got {self.basis_size}")

    @property
    def phi_zpf(self):
        """Zero-point phase fluctuation of the linear circuit, (2 E_C / E_L)^(1/4)."""
        return (2 * self.e_c / self.e_l) ** 0.25

    @property
    def oscillator_length(self):
        well = (2 * self.e_c / (self.e_l + self.e_j)) ** 0.25
        return math.sqrt(self.phi_zpf * well)

    @property
    def plasma_frequency(self):
        """sqrt(8 E_C E_L), the E_J = 0 transition frequency in GHz."""
        return math.sqrt(8 * self.e_c * self.e_l)

    def with_energies(self, e_c, e_j, e_l):
        return FluxoniumParams(e_c, e_j, e_l, self.basis_size)

    def as_tuple(self):
        return (self.e_c, self.e_j, self.e_l)


@dataclass(frozen=True)
class SpectrumResult:
    """Qubit properties at one flux bias.

    ``dispersion`` is d(omega_01)/d(phi_ext) in rad/s per flux quantum.
    """

    phi_ext: float
    f01: float
    phi_mat_elem_01: float
    dispersion: float
    eigenvalues: tuple = field(repr=False)

    @property
    def omega01(self):
        return 2 * math.pi * self.f01 * 1e9


@dataclass(frozen=True)
class _Operators:
    x: np.ndarray
    x2: np.ndarray
    n2: np.ndarray
    cos_x: np.ndarray
    sin_x: np.ndarray


@lru_cache(maxsize=256)
def _operators(ell, n):
    sqrt_k = np.sqrt(np.arange(1, n))
    off = ell * sqrt_k
    # x = ell (b + b^dag) is tridiagonal: diagonalize it once and build
    # cos/sin(x) from (e^{ix} +- e^{-ix}) on its eigenvalues.
    vals, vecs = scipy.linalg.eigh_tridiagonal(np.zeros(n), off)
    x = np.diag(off, 1) + np.diag(off, -1)
    b = np.diag(sqrt_k, 1)
    bb = b @ b
    two_n_plus_one = np.diag(2 * np.arange(n) + 1.0)
    ops = _Operators(
        x=x,
        x2=ell**2 * (bb + bb.T + two_n_plus_one),
        n2=(two_n_plus_one - bb - bb.T) / (4 * ell**2),
        cos_x=(vecs * np.cos(vals)) @ vecs.T,
        sin_x=(vecs * np.sin(vals)) @ vecs.T,
    )
    for arr in vars(ops).values():
        arr.setflags(write=False)
    return ops


def _ops(params, n):
    return _operators(params.oscillator_length, n)


def _cos_phi(ops, phi_ext):
    # cos(phi_c + x) with phi_c = -2 pi phi_ext
    c = 2 * math.pi * np.asarray(phi_ext, dtype=float)
    cc = np.cos(c)[..., None, None]
    ss = np.sin(c)[..., None, None]
    return cc * ops.cos_x + ss * ops.sin_x


def hamiltonian(params, phi_ext, basis_size=None):
    """Dense Hamiltonian matrix (GHz) at flux ``phi_ext`` (units of Phi_0)."""
    ops = _ops(params, basis_size or params.basis_size)
    return 4 * params.e_c * ops.n2 + 0.5 * params.e_l * ops.x2 - params.e_j * _cos_phi(ops, phi_ext)


def _f01(params, phi_ext, n):
    evals = scipy.linalg.eigh(
        hamiltonian(params, phi_ext, n), eigvals_only=True, subset_by_index=[0, 1],
        check_finite=False,
    )
    return evals[1] - evals[0]


def convergence_residual(params, phi_ext):
    """Relative f01 shift when the basis grows by ten levels."""
    n = params.basis_size
    f_n = _f01(params, phi_ext, n)
    f_more = _f01(params, phi_ext, n + CONVERGENCE_EXTRA_LEVELS)
    return abs(f_more - f_n) / abs(f_more)


def _check_converged(params, phi_ext, index=None):
    residual = convergence_residual(params, phi_ext)
    if not residual <= CONVERGENCE_RTOL:
        where = f" (grid index {index})" if index is not None else ""
        raise ConvergenceError(
            f"f01 not converged at phi_ext={phi_ext}{where}: relative shift {residual:.3e} "
            f"with basis_size {params.basis_size} -> {params.basis_size + CONVERGENCE_EXTRA_LEVELS}",
            residual=residual,
            index=index,
        )


def _dispersion(params, phi_ext, step):
    n = params.basis_size
    df = _f01(params, phi_ext + step, n) - _f01(params, phi_ext - step, n)
    return 2 * math.pi * 1e9 * df / (2 * step)


def dispersion(params, phi_ext, step=DISPERSION_STEP):
    """d(omega_01)/d(phi_ext) in rad/s per Phi_0, central difference."""
    _check_converged(params, phi_ext)
    return _dispersion(params, phi_ext, step)


@lru_cache(maxsize=8192)
def _diagonalize(params, phi_ext):
    _check_converged(params, phi_ext)
    evals, evecs = scipy.linalg.eigh(
        hamiltonian(params, phi_ext), subset_by_index=[0, N_LEVELS - 1], check_finite=False
    )
    # <0|phi|1> = <0|x|1>: the constant phi_c drops out between orthogonal states
    mat_elem = abs(evecs[:, 0] @ _ops(params, params.basis_size).x @ evecs[:, 1])
    return SpectrumResult(
        phi_ext=phi_ext,
        f01=float(evals[1] - evals[0]),
        phi_mat_elem_01=float(mat_elem),
        dispersion=float(_dispersion(params, phi_ext, DISPERSION_STEP)),
        eigenvalues=tuple(float(v) for v in evals),
    )


def diagonalize(params, phi_ext):
    """Spectrum, |<0|phi|1>| and flux dispersion at one bias point.

    Raises ConvergenceError if f01 moves by more than 1e-8 (relative) when
    ten more oscillator levels are added.
    """
    return _diagonalize(params, float(phi_ext))


def spectrum_sweep(params, grid):
    if len(grid) == 0:
        raise PreconditionError("flux grid is empty")
    out = []
    for i, phi_ext in enumerate(grid):
        try:
            out.append(diagonalize(params, phi_ext))
        except ConvergenceError as exc:
            raise ConvergenceError(
                f"grid index {i}: {exc}", residual=exc.residual, index=i
            ) from exc
    return out


def f01_batch(params, phis, basis_size=None, gradient=False):
    """Vectorized f01 (GHz) over flux points, without the convergence gate.

    With ``gradient=True`` also returns d f01 / d(E_C, E_J, E_L) as an
    (npoints, 3) array from the Hellmann-Feynman theorem.
    """
    n = basis_size or params.basis_size
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    ops = _ops(params, n)
    cos_phi = _cos_phi(ops, phis)
    ham = 4 * params.e_c * ops.n2 + 0.5 * params.e_l * ops.x2 - params.e_j * cos_phi
    if not gradient:
        evals = np.linalg.eigvalsh(ham)
        return evals[:, 1] - evals[:, 0]
    evals, evecs = np.linalg.eigh(ham)
    v = evecs[:, :, :2]
    d_ec = 4 * np.einsum("pik,ij,pjk->pk", v, ops.n2, v)
    d_el = 0.5 * np.einsum("pik,ij,pjk->pk", v, ops.x2, v)
    d_ej = -np.einsum("pik,pij,pjk->pk", v, cos_phi, v)
    grad = np.stack([d_ec, d_ej, d_el], axis=-1)
    return evals[:, 1] - evals[:, 0], grad[:, 1] - grad[:, 0]
