"""Eigenstate recovery from the roots of the secular equation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .basis import build_basis_table, legendre, radial_wavefunction
from .potential import PotentialSpec
from .solver import (
    FiniteRankError,
    Sector,
    SolverConfig,
    _a_matrix,
    _operators,
    _sector_blocks,
    build_A,
    partition_sectors,
)

NULL_SEPARATION = 1e-4


class AmbiguousNullSpaceError(FiniteRankError):
    """A(E) has more than one (near-)null direction; both are attached."""

    def __init__(self, message, directions):
        super().__init__(message)
        self.directions = directions


class SingularCoefficientError(FiniteRankError):
    """The root coincides with an unperturbed energy eps_n."""


@dataclass(frozen=True)
class StateExpansion:
    """Approximate eigenstate as coefficients over oscillator states.

    ``coefficients[j]`` multiplies the basis state with ordinal ``j + 1``.
    """

    energy: float
    sector_l: int
    coefficients: np.ndarray
    form: Literal["truncated", "full"]

    def normalized(self) -> "StateExpansion":
        """Unit norm, largest-magnitude coefficient positive."""
        coeffs = _sign_fix(self.coefficients / np.linalg.norm(self.coefficients))
        return StateExpansion(self.energy, self.sector_l, coeffs, self.form)


def _sign_fix(v: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(v))
    return -v if v[idx] < 0 else v


def _sector_of(l: int, config: SolverConfig) -> Sector:
    for sector in partition_sectors(config.n_rank, config.r_rank):
        if sector.l == l:
            return sector
    raise ValueError(f"no sector with l={l} for N={config.n_rank}, R={config.r_rank}")


def _null_vector(a: np.ndarray) -> np.ndarray:
    _, s, vt = np.linalg.svd(a)
    if len(s) > 1 and s[-1] > NULL_SEPARATION * s[-2]:
        raise AmbiguousNullSpaceError(
            f"smallest singular values {s[-1]:.3e}, {s[-2]:.3e} are not separated",
            [_sign_fix(vt[-1]), _sign_fix(vt[-2])],
        )
    return _sign_fix(vt[-1])


def amplitudes(
    root: float, config: SolverConfig, spec: PotentialSpec, sector_l: int | None = None
) -> np.ndarray:
    """Unit null vector b of A(E_i), length N, largest entry positive.

    With ``sector_l`` the null vector is taken from that sector's block and
    embedded with exact zeros elsewhere, which keeps roots of different
    sectors at the same energy apart.
    """
    if sector_l is None:
        return _null_vector(build_A(root, config, spec))
    sector = _sector_of(sector_l, config)
    if sector.inert:
        raise ValueError(f"sector l={sector_l} is inert")
    eps, w, d = _sector_blocks(sector, _operators(config.n_rank, config.r_rank, spec))
    build_A(root, config, spec)  # pole and conditioning guards
    local = _null_vector(_a_matrix(root, eps, w, d))
    b = np.zeros(config.n_rank)
    b[np.array(sector.n_indices) - 1] = local
    return b


def _denominators(root: float, count: int) -> np.ndarray:
    eps = build_basis_table(count).energy_array()
    gap = eps - root
    if np.any(gap == 0.0):
        raise SingularCoefficientError(f"root {root!r} equals an unperturbed energy")
    return gap


def _infer_sector(b: np.ndarray, config: SolverConfig) -> int:
    table = build_basis_table(config.n_rank)
    return table.states[int(np.argmax(np.abs(b)))].l


def reconstruct_truncated(
    root: float, b: np.ndarray, config: SolverConfig, spec: PotentialSpec
) -> StateExpansion:
    """Coupled-channel form: c_n = b_n / (eps_n - E) for n <= N, normalized."""
    b = np.asarray(b, dtype=float)
    coeffs = b / _denominators(root, config.n_rank)
    return StateExpansion(root, _infer_sector(b, config), coeffs, "truncated").normalized()


def reconstruct_full(
    root: float, b: np.ndarray, config: SolverConfig, spec: PotentialSpec
) -> StateExpansion:
    """c_r = (W D^-1 b)_r / (eps_r - E) over all r <= R, normalized."""
    b = np.asarray(b, dtype=float)
    ops = _operators(config.n_rank, config.r_rank, spec)
    coeffs = (ops.coupling @ np.linalg.solve(ops.d, b)) / _denominators(root, config.r_rank)
    return StateExpansion(root, _infer_sector(b, config), coeffs, "full").normalized()


def lippmann_schwinger_residual(expansion: StateExpansion, config: SolverConfig, spec: PotentialSpec) -> float:
    """|| c + G_R(E) V_N c || in the size-R coefficient space."""
    ops = _operators(config.n_rank, config.r_rank, spec)
    c = np.zeros(config.r_rank)
    c[: len(expansion.coefficients)] = expansion.coefficients
    v_n = ops.coupling @ np.linalg.solve(ops.d, ops.coupling.T)
    g = 1.0 / (ops.eps - expansion.energy)
    return float(np.linalg.norm(c + g * (v_n @ c)))


def evaluate_psi(expansion: StateExpansion, rho, costheta):
    """psi(rho, theta) in units of r0**(-3/2), azimuth-independent (m = 0)."""
    costheta = np.asarray(costheta, dtype=float)
    if np.any(np.abs(costheta) > 1):
        raise ValueError("costheta must lie in [-1, 1]")
    table = build_basis_table(len(expansion.coefficients))
    total = 0.0
    for qn, c in zip(table.states, expansion.coefficients):
        if c == 0.0:
            continue
        angular = math.sqrt((2 * qn.l + 1) / (4 * math.pi)) * legendre(qn.l, costheta)
        total = total + c * radial_wavefunction(qn, rho) * angular
    return total


def recover_states(result, form: Literal["truncated", "full"] = "full") -> list[StateExpansion]:
    """One normalized expansion per root of a :class:`SpectrumResult`."""
    rebuild = reconstruct_full if form == "full" else reconstruct_truncated
    states = []
    for root in result.roots:
        b = amplitudes(root.energy, result.config, result.spec, sector_l=root.sector_l)
        state = rebuild(root.energy, b, result.config, result.spec)
        states.append(StateExpansion(state.energy, root.sector_l, state.coefficients, state.form))
    return states
