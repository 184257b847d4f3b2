"""Finite-truncation Hilbert riggings of l^p spaces and M-basis diagnostics."""
from .banach import (
    NormBounds,
    SpaceSpec,
    dist_to_subspace,
    dual_norm,
    duality_map,
    norm,
    operator_norm,
    operator_norm_bounds,
    sbasis_expand,
)
from .kernels import BACKEND
from .mbasis import (
    BiorthogonalSystem,
    auerbach_basis,
    biorthogonal_functionals,
    example31,
    norm_products,
    system_predicates,
    thm31_construct,
)
from .report import VerificationReport, emit
from .rigging import RiggingSeed, build_h1, build_h2, build_t12, build_triple, lax_check
from .suite import RunConfig, parse_config, run_suite

__version__ = "0.1.0"
