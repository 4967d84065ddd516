"""Exact and floating-point toolkit for matrix-weighted cylinder measures.

Build or load a matrix restriction system, validate its two fixed-point
identities, evaluate the induced measure and its conditionals, compute
certified contraction and irreducibility constants, run the process-space
transfer machinery, and generate the triangle-subdivision gasket family.
"""

from .exactnum import Radical, format_exact, parse_exact, sqrt_fraction
from .gasket import build_graph, generate_system
from .linalg import EXACT, FLOAT
from .matsys import (
    MatrixSystem,
    ValidationReport,
    bernoulli_system,
    make_system,
    schatten_norm,
    sg_system,
    system_from_json,
    system_to_json,
    to_float_system,
    validate,
)
from .measure import (
    HState,
    KusuokaMeasure,
    SystemInvalidError,
    conditional,
    correlation_gap,
    correlation_gap_brute,
    g_approx,
    h_state,
    kusuoka_measure,
    mixing_bound_check,
    nu,
    sample,
    sample_many,
    transfer_apply,
)
from .procspace import (
    FiniteProcess,
    MartingaleRep,
    dilation_check,
    embed_phi,
    gamma_norm,
    martingale_decompose,
    process_inner,
    project_Q,
    q_decay_check,
    shift_T,
    transfer_L,
)
from .spectral import c_k, renormalize, spectral_report, theta1, theta1_schatten, theta2
from .symbolic import (
    BudgetError,
    CylinderFunction,
    cylinder_from_json,
    cylinder_from_values,
    cylinder_to_json,
    enumerate_words,
    indicator,
    word_matrix,
)
from .systems import get_builtin

__all__ = [
    "EXACT",
    "FLOAT",
    "Radical",
    "format_exact",
    "parse_exact",
    "sqrt_fraction",
    "MatrixSystem",
    "ValidationReport",
    "make_system",
    "validate",
    "sg_system",
    "bernoulli_system",
    "to_float_system",
    "schatten_norm",
    "system_to_json",
    "system_from_json",
    "BudgetError",
    "CylinderFunction",
    "word_matrix",
    "enumerate_words",
    "indicator",
    "cylinder_from_values",
    "cylinder_to_json",
    "cylinder_from_json",
    "KusuokaMeasure",
    "SystemInvalidError",
    "HState",
    "kusuoka_measure",
    "nu",
    "conditional",
    "g_approx",
    "h_state",
    "correlation_gap",
    "correlation_gap_brute",
    "mixing_bound_check",
    "transfer_apply",
    "sample",
    "sample_many",
    "theta1",
    "theta1_schatten",
    "c_k",
    "theta2",
    "spectral_report",
    "renormalize",
    "FiniteProcess",
    "MartingaleRep",
    "process_inner",
    "shift_T",
    "transfer_L",
    "embed_phi",
    "project_Q",
    "martingale_decompose",
    "gamma_norm",
    "dilation_check",
    "q_decay_check",
    "build_graph",
    "generate_system",
    "get_builtin",
]
