"""Vilenkin systems on finite mixed-radix grids and Littlewood-Paley experiments."""

from .cyclic import Arc, KernelSpec, a2_constant_zp, arc_projector, dist_p, kernel, poisson_kernel
from .estimators import SquareFunctionTransformer, VilenkinTransformer
from .intervals import RealInterval, decompose, decompose_family, phi, reindex, whitney
from .maximal import GeneralizedInterval, ap_constant, cz_decompose, maximal, sharp_maximal
from .operators import FrequencySet, expectation, project, square_function
from .radix import IntervalZ, RadixSequence, dotminus, dotplus, from_digits, to_digits
from .transform import GridFunction, Spectrum, forward, inverse, vilenkin_char

__version__ = "0.1.0"

__all__ = [
    "Arc", "KernelSpec", "a2_constant_zp", "arc_projector", "dist_p", "kernel", "poisson_kernel",
    "SquareFunctionTransformer", "VilenkinTransformer",
    "RealInterval", "decompose", "decompose_family", "phi", "reindex", "whitney",
    "GeneralizedInterval", "ap_constant", "cz_decompose", "maximal", "sharp_maximal",
    "FrequencySet", "expectation", "project", "square_function",
    "IntervalZ", "RadixSequence", "dotminus", "dotplus", "from_digits", "to_digits",
    "GridFunction", "Spectrum", "forward", "inverse", "vilenkin_char",
]
