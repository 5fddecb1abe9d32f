"""Harmonic-oscillator superradiance in waveguide arrays.

Exact coupled-mode propagation of system guides attached to a truncated
bath array, closed-form collective-decay predictions, and tools to compare
the two.
"""
__version__ = "0.1.0"

from .model import (
    CollectiveQuantities,
    Fidelity,
    MomentState,
    SpecError,
    StateError,
    SystemSpec,
    ValidatedSpec,
    collective,
    collective_coupling,
    collective_moments,
    effective_decay_rate,
    validate,
)
from .coupling import paper_preset

__all__ = [
    "CollectiveQuantities", "Fidelity", "MomentState", "SpecError", "StateError",
    "SystemSpec", "ValidatedSpec", "collective", "collective_coupling",
    "collective_moments", "effective_decay_rate", "paper_preset", "validate",
]
