"""Projective Wasserstein distances on finite-dimensional matrix algebras."""

from __future__ import annotations

from . import errors
from .algebra import (
    CommutativeContext,
    ContextDiagram,
    DensityState,
    QuasiState,
    check_quasi_state,
    coarsen,
    diagonal_context,
    embed_state,
    is_refinement,
    linear_extension,
    make_context,
    pauli_contexts,
    restrict_state,
    trivial_context,
)
from .gauge import (
    FiniteMetricGauge,
    LipGauge,
    MultiCommutatorGauge,
    check_axioms,
    check_lattice_inequality,
    eval_gauge,
    induced_point_gauge,
    null_space,
    restrict_gauge,
    solidity_probe,
)
from .metric import context_distance, context_point_metric, diameter, spectral_distance
from .projective import (
    context_wasserstein,
    projective_wasserstein,
    verify_diameter_and_bound,
    verify_inclusion_monotonicity,
    verify_kr_identity,
    verify_p_monotonicity,
    verify_sandwich,
)
from .solver import BallMaximization, LinearProgram, maximize_over_gauge_ball, solve_lp
from .transport import Coupling, FiniteMetricSpace, duality_gap, glue_couplings, kantorovich_dual, wasserstein_p

__version__ = "0.1.0"

__all__ = [
    "errors",
    "CommutativeContext",
    "ContextDiagram",
    "DensityState",
    "QuasiState",
    "check_quasi_state",
    "coarsen",
    "diagonal_context",
    "embed_state",
    "is_refinement",
    "linear_extension",
    "make_context",
    "pauli_contexts",
    "restrict_state",
    "trivial_context",
    "FiniteMetricGauge",
    "LipGauge",
    "MultiCommutatorGauge",
    "check_axioms",
    "check_lattice_inequality",
    "eval_gauge",
    "induced_point_gauge",
    "null_space",
    "restrict_gauge",
    "solidity_probe",
    "context_distance",
    "context_point_metric",
    "diameter",
    "spectral_distance",
    "context_wasserstein",
    "projective_wasserstein",
    "verify_diameter_and_bound",
    "verify_inclusion_monotonicity",
    "verify_kr_identity",
    "verify_p_monotonicity",
    "verify_sandwich",
    "BallMaximization",
    "LinearProgram",
    "maximize_over_gauge_ball",
    "solve_lp",
    "Coupling",
    "FiniteMetricSpace",
    "duality_gap",
    "glue_couplings",
    "kantorovich_dual",
    "wasserstein_p",
]
