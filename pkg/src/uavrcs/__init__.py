"""UAV radar cross section toolkit: sphere calibration, chamber post-processing,
statistical RCS models, information-criterion model selection and MAP recognition."""

__version__ = "0.1.0"

from .distributions import Family, FittedModel, GammaParams, digamma, fit_gamma_closed_form, fit_mle, logpdf, sample
from .errors import ConvergenceError, DomainError, EmptyTargetZoneError, FitError, ValidationError
from .recognition import ClassificationResult, Criterion, ModelDatabase, build_database, classify_map, rank_models
from .signature import FrequencySweep, Polarization, RcsSignature, SectorSpec

__all__ = [
    "ClassificationResult", "ConvergenceError", "Criterion", "DomainError", "EmptyTargetZoneError",
    "Family", "FitError", "FittedModel", "FrequencySweep", "GammaParams", "ModelDatabase",
    "Polarization", "RcsSignature", "SectorSpec", "ValidationError", "build_database",
    "classify_map", "digamma", "fit_gamma_closed_form", "fit_mle", "logpdf", "rank_models", "sample",
]
