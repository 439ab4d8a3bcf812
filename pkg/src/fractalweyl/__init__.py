"""Numerical experiments on resonance counting for convex cocompact hyperbolic surfaces.

Modules: ``moebius`` (SL(2, C) algebra), ``words``/``groups`` (free groups,
Schottky and octagon groups), ``limitset`` (sampling and dimension
estimates), ``zeta`` (Selberg zeta zeros), ``weyl`` (counting functions and
exponent fits), ``cylinder`` (phase-space flow of the hyperbolic cylinder)
and ``cli``.
"""

__version__ = "0.1.0"

from .groups import (GeneratorSystem, bend, build_octagon_fuchsian, build_symmetric_schottky,
                     group_from_json, group_hash, group_to_json)
from .limitset import PointCloud, box_dimension, poincare_abscissa, sample_limit_set
from .moebius import INF, MoebiusMap, apply, classify, complex_length, compose, fixed_points, inverse
from .weyl import CountTable, check_bound, count_along_axis, fit_exponent
from .zeta import (LengthSpectrum, Region, ZetaParams, count_zeros, delta_from_zeta, find_zeros,
                   length_spectrum, log_zeta, single_geodesic_spectrum)

__all__ = [
    "INF", "MoebiusMap", "apply", "classify", "complex_length", "compose", "fixed_points", "inverse",
    "GeneratorSystem", "bend", "build_octagon_fuchsian", "build_symmetric_schottky",
    "group_from_json", "group_hash", "group_to_json",
    "PointCloud", "box_dimension", "poincare_abscissa", "sample_limit_set",
    "LengthSpectrum", "Region", "ZetaParams", "count_zeros", "delta_from_zeta", "find_zeros",
    "length_spectrum", "log_zeta", "single_geodesic_spectrum",
    "CountTable", "check_bound", "count_along_axis", "fit_exponent",
]
