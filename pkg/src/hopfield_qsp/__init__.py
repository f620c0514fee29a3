"""Programmable superpositions of stored bit strings on a parity-encoded quantum annealer.

Pipeline: design a k-local spin glass whose ground states are the chosen bit
strings (``designer``), parity-encode it (``lhz``), simulate the transverse-field
sweep (``quantum``, ``sw``) and tune the constraint strengths until the sweep
ends in the requested superposition (``optimizer``).
"""

__version__ = "0.1.0"

from .designer import DesignParams, DesignReport, SpectralMetrics, design_ground_states, spectral_metrics
from .hopfield import PatternSet, hebbian_couplings, is_local_minimum
from .lhz import (
    LhzLayout,
    Plaquette,
    build_layout,
    find_constraints,
    fixture_plaquettes,
    map_config,
    validate_constraints,
)
from .optimizer import OptimizationResult, OptimizerOptions, TargetDistribution, cost, optimize_constraints
from .quantum import (
    SweepProblem,
    SweepSchedule,
    adiabaticity_metrics,
    evolve_sweep,
    final_amplitudes,
)
from .spinmodel import SpinConfiguration, SpinGlassHamiltonian, energy, restricted_spectrum
from .sw import BlockPartition, EffectiveModel, effective_evolve, effective_terms

__all__ = [
    "BlockPartition", "DesignParams", "DesignReport", "EffectiveModel", "LhzLayout",
    "OptimizationResult", "OptimizerOptions", "PatternSet", "Plaquette", "SpectralMetrics",
    "SpinConfiguration", "SpinGlassHamiltonian", "SweepProblem", "SweepSchedule",
    "TargetDistribution", "adiabaticity_metrics", "build_layout", "cost", "design_ground_states",
    "effective_evolve", "effective_terms", "energy", "evolve_sweep", "final_amplitudes",
    "find_constraints", "fixture_plaquettes", "hebbian_couplings", "is_local_minimum",
    "map_config", "optimize_constraints", "restricted_spectrum", "spectral_metrics",
    "validate_constraints",
]
