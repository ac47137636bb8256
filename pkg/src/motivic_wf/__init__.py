"""Exact motivic Fourier analysis and wave front tests over F_q((t))."""

from .coeff_ring import CoefficientError, CyclotomicInteger, CyclotomicRational, MotivicScalar
from .config import Config, ConfigError
from .local_field import (
    INF,
    BudgetError,
    FieldElement,
    FieldInputError,
    LocalField,
    PrecisionError,
    ResidueField,
    Window,
)
from .schwartz import (
    SBFunction,
    SBTerm,
    convolve,
    fourier,
    fourier_inverse,
    integrate,
    multiply,
    reflect,
    translate,
    twist,
)

__all__ = [
    "INF",
    "BudgetError",
    "CoefficientError",
    "Config",
    "ConfigError",
    "CyclotomicInteger",
    "CyclotomicRational",
    "FieldElement",
    "FieldInputError",
    "LocalField",
    "MotivicScalar",
    "PrecisionError",
    "ResidueField",
    "SBFunction",
    "SBTerm",
    "Window",
    "convolve",
    "fourier",
    "fourier_inverse",
    "integrate",
    "multiply",
    "reflect",
    "translate",
    "twist",
]
