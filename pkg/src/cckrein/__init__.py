"""Krein parameters of fiber-commutative coherent configurations."""

__version__ = "0.1.0"

from .config_model import (
    CoherentConfiguration,
    ColorMeta,
    ConfigurationError,
    FiberCommutativityError,
    ValidationReport,
    fiber_flags,
    from_color_matrix,
    intersection_numbers,
    parse_configuration,
    serialize_configuration,
    validate_axioms,
)
from .decomposition import (
    MatrixUnitBasis,
    build_matrix_units,
    decompose,
    fiber_primitive_idempotents,
    link_ideals,
    multiplicities,
    regauge,
    verify_units,
)
from .krein import (
    KreinTable,
    absolute_bound,
    analyze,
    general_krein_check,
    krein_all,
    krein_condition,
    krein_matrix,
    structural_checks,
)
