"""Dyadic partition trees and the two decomposition algorithms."""
from .algorithm1 import run_algorithm1
from .algorithm2 import (
    SYMBOLIC, DeskConstants, InvariantCheck, PhaseParams, PhaseResult, PhasesReport,
    first_phase, next_phase, phase_params, phase_sequence, run_algorithm2, run_phases,
)
from .tree import (
    PartitionTree, SegmentNode, StellarSets, TraceRecord, basic_subtree, classify_stellar,
    format_trace, imbalance, level_mass, parse_trace, potential, stellar_energy,
    stellar_energy_by_subtree, telescoping_check,
)

__all__ = [
    "run_algorithm1", "SYMBOLIC", "DeskConstants", "InvariantCheck", "PhaseParams",
    "PhaseResult", "PhasesReport", "first_phase", "next_phase", "phase_params", "phase_sequence", "run_algorithm2",
    "run_phases", "PartitionTree", "SegmentNode", "StellarSets", "TraceRecord",
    "basic_subtree", "classify_stellar", "format_trace", "imbalance", "level_mass",
    "parse_trace", "potential", "stellar_energy", "stellar_energy_by_subtree",
    "telescoping_check",
]
