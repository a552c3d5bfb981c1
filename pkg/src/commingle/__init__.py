"""Blur/sample/quantize forward model for piecewise-constant signals, and
amplitude recovery from two quantized observations by joint parsing of their
difference sequences."""

from .errors import (
    AmplitudeOverflowError,
    CommingleError,
    IdenticalSequencesError,
    InconsistentSequencesError,
    InvalidSignalError,
    RegimeViolation,
    UnsupportedCaseError,
)
from .forward import (
    Observation,
    blurred_value,
    difference_matrix,
    difference_sequence,
    measurement_matrix,
    quantize,
    sample,
    std_normal_cdf,
)
from .labeling import Token, label_from_truth, predict_parse
from .recovery import CountInterval, RecoveryResult, recover
from .regime import nu, regime_profile, segmentation
from .signal import BlurMixture, PiecewiseSignal, SamplingGrid, difference_vector, validate_signal

__version__ = "0.1.0"

__all__ = [
    "AmplitudeOverflowError",
    "BlurMixture",
    "CommingleError",
    "CountInterval",
    "IdenticalSequencesError",
    "InconsistentSequencesError",
    "InvalidSignalError",
    "Observation",
    "PiecewiseSignal",
    "RecoveryResult",
    "RegimeViolation",
    "SamplingGrid",
    "Token",
    "UnsupportedCaseError",
    "blurred_value",
    "difference_matrix",
    "difference_sequence",
    "difference_vector",
    "label_from_truth",
    "measurement_matrix",
    "nu",
    "predict_parse",
    "quantize",
    "recover",
    "regime_profile",
    "sample",
    "segmentation",
    "std_normal_cdf",
    "validate_signal",
]
