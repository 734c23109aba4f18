"""Finite-rank (separable) approximation for bound states of the 3D anharmonic oscillator."""

from .basis import BasisTable, QuantumNumbers, build_basis_table, energy
from .potential import PotentialSpec, build_coupling, radial_moment
from .solver import SolverConfig, SpectrumResult, partition_sectors, solve_spectrum
from .spectrum import StateExpansion, evaluate_psi, recover_states

__all__ = [
    "BasisTable",
    "PotentialSpec",
    "QuantumNumbers",
    "SolverConfig",
    "SpectrumResult",
    "StateExpansion",
    "build_basis_table",
    "build_coupling",
    "energy",
    "evaluate_psi",
    "partition_sectors",
    "radial_moment",
    "recover_states",
    "solve_spectrum",
]
