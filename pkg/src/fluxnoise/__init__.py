"""Fluxonium decoherence analysis: spectra, noise models, extraction, noise spectroscopy and material fits."""

from .errors import (
    ConvergenceError,
    DataError,
    FitError,
    FluxnoiseError,
    GapRequiredError,
    NumericError,
    PreconditionError,
    RegimeError,
    SingularityError,
    UnphysicalPointError,
)
from .fluxonium import FluxoniumParams, SpectrumResult, diagonalize, dispersion, spectrum_sweep
from .noise_models import NO_DECAY, NoiseChannelSet, ThermalEnv, predict_coherence
from .extraction import (
    CoherenceDataset,
    CoherencePoint,
    TransitionPoint,
    extract_report,
    fit_spectrum,
    fit_t1_model,
)

__all__ = [
    "ConvergenceError", "DataError", "FitError", "FluxnoiseError", "GapRequiredError",
    "NumericError", "PreconditionError", "RegimeError", "SingularityError", "UnphysicalPointError",
    "FluxoniumParams", "SpectrumResult", "diagonalize", "dispersion", "spectrum_sweep",
    "NO_DECAY", "NoiseChannelSet", "ThermalEnv", "predict_coherence",
    "CoherenceDataset", "CoherencePoint", "TransitionPoint", "extract_report", "fit_spectrum",
    "fit_t1_model",
]
