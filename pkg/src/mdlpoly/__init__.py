"""Exact tools for block-i.i.d. measurement-dependent locality (MDL_N) polytopes."""
from .model import BlockPoint, InputDistribution, Scenario, coarse_grain, product_point
from .numerics import FieldScalar, parse_scalar
from .optimize import (
    LinearFunctional,
    family_lower_bound,
    maximize_functional,
    maximize_functional_uniform,
    membership,
    threshold_scan,
    zero_pattern_feasibility,
)
from .polytope import MdlBounds, count_vertices, extremal_profile
from .reference import block_reference, chsh_functional, hardy_point, ns1_vertices, pr_box, putz_functional
from .strategies import StrategyTable, mismatch_spectrum

__version__ = "0.1.0"
