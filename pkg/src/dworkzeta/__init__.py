"""Exponential sums over finite fields and their L-functions via Dwork theory."""

from .gfq import CycInt, SpaceSpec, exp_sum, is_nondegenerate, make_field
from .laurent import LaurentPoly, format_laurent, parse_laurent
from .polytope import NewtonGeometry, build_geometry, normalized_volume
from .zeta import LFunctionReport, l_function_mixed, l_function_torus

__all__ = [
    "CycInt", "SpaceSpec", "exp_sum", "is_nondegenerate", "make_field",
    "LaurentPoly", "format_laurent", "parse_laurent",
    "NewtonGeometry", "build_geometry", "normalized_volume",
    "LFunctionReport", "l_function_mixed", "l_function_torus",
]
__version__ = "0.1.0"
