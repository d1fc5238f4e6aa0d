"""Shortcut-assisted multistate STIRAP simulation."""

from .hermitian import EigenFrame, eig_hermitian, gauge_align, unitary_step
from .propagator import PropagationConfig, TrajectoryResult, adiabatic_frame_hamiltonian, propagate
from .schemes import GaussianDrive, LevelScheme, get_scheme
from .shortcuts import ShortcutFields, ShortcutScheme, assemble_total

__all__ = [
    "EigenFrame",
    "GaussianDrive",
    "LevelScheme",
    "PropagationConfig",
    "ShortcutFields",
    "ShortcutScheme",
    "TrajectoryResult",
    "adiabatic_frame_hamiltonian",
    "assemble_total",
    "eig_hermitian",
    "gauge_align",
    "get_scheme",
    "propagate",
    "unitary_step",
]

__version__ = "0.1.0"
