"""Elliptic R-matrices and numerical certification of their exchange identities."""

from .checks import (
    CHECK_NAMES,
    CheckConfig,
    CheckReport,
    ConfigError,
    RunReport,
    render_json,
    run_check,
)
from .elliptic import (
    DELTA_MIN,
    EllipticContext,
    LatticeIndex,
    PoleProximityError,
    eisenstein_e1,
    eisenstein_e2,
    kronecker_phi,
    lattice_distance,
    omega,
    theta,
    theta_d1,
    theta_d2,
    varphi,
)
from .ncalgebra import (
    Generator,
    LConvention,
    NCSum,
    component_ratio,
    defect_factorization_check,
    l_entry,
    l_operator,
    relation_vectors_reference,
    rll_defect,
    span_equal,
    span_gap,
    span_rank,
)
from .relations import (
    DegenerateRelationError,
    RelationVector,
    SklyaninRelation,
    TVRelation,
    label_reduction_factor,
    sklyanin_coeffs,
    sklyanin_coeffs_eta,
    sklyanin_representation_residual,
    slnm_family_coeffs,
    tv_relations,
)
from .rmatrix import (
    DynamicalParams,
    mixed_scalar,
    r_bb,
    r_felder,
    r_slnm,
)
from .sampling import (
    SampleSpec,
    SamplingError,
    sample_params,
)

__version__ = "0.1.0"

__all__ = [
    "CHECK_NAMES",
    "CheckConfig",
    "CheckReport",
    "ConfigError",
    "DELTA_MIN",
    "DegenerateRelationError",
    "DynamicalParams",
    "EllipticContext",
    "Generator",
    "LConvention",
    "LatticeIndex",
    "NCSum",
    "PoleProximityError",
    "RelationVector",
    "RunReport",
    "SampleSpec",
    "SamplingError",
    "SklyaninRelation",
    "TVRelation",
    "component_ratio",
    "defect_factorization_check",
    "eisenstein_e1",
    "eisenstein_e2",
    "kronecker_phi",
    "l_entry",
    "l_operator",
    "label_reduction_factor",
    "lattice_distance",
    "mixed_scalar",
    "omega",
    "r_bb",
    "r_felder",
    "r_slnm",
    "relation_vectors_reference",
    "render_json",
    "rll_defect",
    "run_check",
    "sample_params",
    "sklyanin_coeffs",
    "sklyanin_coeffs_eta",
    "sklyanin_representation_residual",
    "slnm_family_coeffs",
    "span_equal",
    "span_gap",
    "span_rank",
    "theta",
    "theta_d1",
    "theta_d2",
    "tv_relations",
    "varphi",
    "__version__",
]
