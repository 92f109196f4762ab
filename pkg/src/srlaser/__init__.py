"""Superradiant lasing from an interacting spin ensemble in a lossy cavity."""

from .model import (
    CooperativityBranches,
    DerivedRates,
    ModelParams,
    Phase,
    classify_phase,
    cooperativity_branches,
    derive_rates,
    effective_cooperativity,
    effective_detuning,
)

__all__ = [
    "CooperativityBranches",
    "DerivedRates",
    "ModelParams",
    "Phase",
    "classify_phase",
    "cooperativity_branches",
    "derive_rates",
    "effective_cooperativity",
    "effective_detuning",
]
__version__ = "0.1.0"
