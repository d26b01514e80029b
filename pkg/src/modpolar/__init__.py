"""Modular operators on Hilbert C*-modules and their polar decomposition.

Finite-dimensional backend: B is a direct sum of matrix blocks, modules are
submodules of B^n.  Function backend (:mod:`modpolar.function`): modules over
C[0,1] with polynomial data, where complementedness can fail.
"""

from .algebra import (
    DEFAULT_TOL,
    AlgebraElement,
    AlgebraSpec,
    NotPositive,
    Tolerance,
    adjoint,
    is_invertible,
    is_positive,
    norm,
    parse_block_dims,
    psd_sqrt,
    sqrt_positive,
)
from .module import (
    FreeModule,
    ModuleMismatch,
    ModuleVector,
    Submodule,
    inner_product,
    is_complemented,
    orthocomplement,
    submodule_contains,
    submodule_equal,
    submodule_from_generators,
)
from .operators import (
    AdjointOutcome,
    ImageNotContained,
    ModuleMap,
    compose,
    corestrict,
    initial_projection,
    is_coisometry,
    is_isometry,
    is_partial_isometry,
    is_projection_gram,
    kernel,
    range_closure,
    restrict,
    try_adjoint,
)
from .polar import (
    ModularityCertificate,
    ObservationResult,
    PolarReport,
    Refusal,
    build_va,
    kernel_invariants,
    modulus,
    observation_isometry,
    polar_decompose,
    range_module_Ea,
    solve_modularity,
)

__version__ = "0.1.0"
