"""Lindstedt series for hyperbolic tori: recursion, tree expansion, resummation and Borel tools."""

__version__ = "0.1.0"

from .fourier_algebra import EpsSeries, SystemSpec, TrigPoly  # noqa: E402
from .freq_diophantine import FrequencyVector, QuadraticIrrational, ScaleSequence, golden_frequency  # noqa: E402
from .io import load_system  # noqa: E402
from .lindstedt_recursion import ConjugationSeries, residual, solve_up_to  # noqa: E402

__all__ = [
    "ConjugationSeries", "EpsSeries", "FrequencyVector", "QuadraticIrrational", "ScaleSequence", "SystemSpec",
    "TrigPoly", "golden_frequency", "load_system", "residual", "solve_up_to",
]
