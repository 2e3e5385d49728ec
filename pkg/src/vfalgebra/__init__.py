"""Structure constants of gradient, divergence-free and harmonic vector fields on closed surfaces."""

from .geometry import (
    Basis,
    GeometryError,
    ManifoldKind,
    ManifoldSpec,
    ModeId,
    build_basis,
    density,
    eval_scalar,
    gaussian_curvature,
    grad_scalar,
    harmonic_basis,
)
from .oracle import BandOverflowError, DecompositionError, extract_constants, hodge_decompose, lie_bracket
from .tensors import SparseRank3, compute_d, compute_e, compute_g
from .theorems import BracketTable, assemble_bracket_table, compute_family
from .verify import VerificationReport, check_symmetries, cross_validate, jacobi_closed_triples, projector_suite

__all__ = [
    "BandOverflowError",
    "Basis",
    "BracketTable",
    "DecompositionError",
    "GeometryError",
    "ManifoldKind",
    "ManifoldSpec",
    "ModeId",
    "SparseRank3",
    "VerificationReport",
    "assemble_bracket_table",
    "build_basis",
    "check_symmetries",
    "compute_d",
    "compute_e",
    "compute_family",
    "compute_g",
    "cross_validate",
    "density",
    "eval_scalar",
    "extract_constants",
    "gaussian_curvature",
    "grad_scalar",
    "harmonic_basis",
    "hodge_decompose",
    "jacobi_closed_triples",
    "lie_bracket",
    "projector_suite",
]
