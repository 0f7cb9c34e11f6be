"""Numerical toolkit for BPS structures, simple oscillators and their tau functions."""

from .core import AlgebraElement, BpsStructure, SkewForm
from .errors import BpsoscError, NumericalError, SectorError, ValidationError
from .oscillator import SimpleOscillator

__all__ = [
    "AlgebraElement",
    "BpsStructure",
    "SkewForm",
    "SimpleOscillator",
    "BpsoscError",
    "NumericalError",
    "SectorError",
    "ValidationError",
]
