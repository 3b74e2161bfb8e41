"""Slice regular functions of several variables on weak slice cones.

The package covers complex structures and slice points, the slice and
sigma topologies, the representation formula through the slice inverse
zeta^+, extension of slice-wise data, square-root branches glued across
slices, and power series with star powers and error tails.
"""
from .algebra import (AlgebraSpec, ComplexStructure, SlicePoint, algebra, point_from_element,
                      random_unit_imaginary, standard_structure, unit_structure)
from .branches import branch_psi, example_phi, lacunary_star, psi_phi, psi_phi_function, psi_s
from .calculus import (islice_derivative, islice_derivative_alpha, slice_derivative, slice_derivative_alpha,
                       star_power, taylor_coefficients, taylor_eval)
from .errors import SliceCalcError
from .extension import SliceOpenTuple, derived_sets, extend, hyper_sigma_polydisc
from .paths import PlanePath, SliceFunctionData
from .representation import mp_inverse, represent, slice_inverse, two_slice_inverse
from .topology import metrizability_witness, sigma_ball_contains, sigma_distance, tau_sigma_witness

__version__ = "0.1.0"

__all__ = [
    "AlgebraSpec", "ComplexStructure", "SlicePoint", "algebra", "point_from_element", "random_unit_imaginary",
    "standard_structure", "unit_structure", "branch_psi", "example_phi", "lacunary_star", "psi_phi",
    "psi_phi_function", "psi_s", "islice_derivative", "islice_derivative_alpha", "slice_derivative",
    "slice_derivative_alpha", "star_power", "taylor_coefficients", "taylor_eval", "SliceCalcError",
    "SliceOpenTuple", "derived_sets", "extend", "hyper_sigma_polydisc", "PlanePath", "SliceFunctionData",
    "mp_inverse", "represent", "slice_inverse", "two_slice_inverse", "metrizability_witness",
    "sigma_ball_contains", "sigma_distance", "tau_sigma_witness",
]
