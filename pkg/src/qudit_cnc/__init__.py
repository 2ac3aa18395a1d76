"""Classical simulation of qudit magic-state circuits over CNC phase spaces."""

from .field import CapExceeded, Subspace, SymplecticSpace, orthogonal_closure
from .pauli import OutcomeAssignment, PhasedPauli, pauli_matrix, projector
from .cnc import (
    CncSet,
    PhasePoint,
    ValueAssignment,
    classify,
    enumerate_phase_points,
    make_point,
    noncommuting_construction,
    phase_point_operator,
    validate,
    wigner_point,
)
from .clifford import CliffordElement, act_on_phase_point, compose, gate
from .circuit import Circuit, circuit_from_json, circuit_to_json
from .simulate import measure_update_isotropic, measure_update_single, run_cnc, run_wigner
from .oracle import DensityState, joint_distribution, tv_distance

__version__ = "0.1.0"

__all__ = [
    "CapExceeded",
    "Subspace",
    "SymplecticSpace",
    "orthogonal_closure",
    "OutcomeAssignment",
    "PhasedPauli",
    "pauli_matrix",
    "projector",
    "CncSet",
    "PhasePoint",
    "ValueAssignment",
    "classify",
    "enumerate_phase_points",
    "make_point",
    "noncommuting_construction",
    "phase_point_operator",
    "validate",
    "wigner_point",
    "CliffordElement",
    "act_on_phase_point",
    "compose",
    "gate",
    "Circuit",
    "circuit_from_json",
    "circuit_to_json",
    "measure_update_isotropic",
    "measure_update_single",
    "run_cnc",
    "run_wigner",
    "DensityState",
    "joint_distribution",
    "tv_distance",
]
