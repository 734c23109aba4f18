"""Oscillator eigenbasis of the 3D isotropic harmonic oscillator (m = 0).

Energies are in units of hbar*omega/2 and lengths in units of the oscillator
length r0 = sqrt(hbar / (mu * omega)), so no physical constants appear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, order=True)
class QuantumNumbers:
    """Labels (k, l, m) of an oscillator eigenstate; only m = 0 is supported."""

    k: int
    l: int
    m: int = 0

    def __post_init__(self):
        if self.k < 0 or self.l < 0:
            raise ValueError(f"quantum numbers must be non-negative, got k={self.k}, l={self.l}")
        if self.m != 0:
            raise ValueError("only m = 0 states are supported")

    @property
    def shell(self) -> int:
        return 2 * self.k + self.l


@dataclass(frozen=True)
class BasisTable:
    """Ordered oscillator states; ``states[n - 1]`` is the state with ordinal n."""

    states: tuple[QuantumNumbers, ...]
    energies: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, ordinal: int) -> QuantumNumbers:
        """Return the state with 1-based ordinal ``ordinal``."""
        if ordinal < 1 or ordinal > len(self.states):
            raise IndexError(f"ordinal {ordinal} outside 1..{len(self.states)}")
        return self.states[ordinal - 1]

    @property
    def l_values(self) -> np.ndarray:
        return np.array([qn.l for qn in self.states], dtype=int)

    def energy_array(self) -> np.ndarray:
        return np.array(self.energies, dtype=float)


def energy(qn: QuantumNumbers) -> int:
    """Oscillator energy 2(2k + l) + 3 in units of hbar*omega/2."""
    return 2 * (2 * qn.k + qn.l) + 3


def iter_states():
    """Yield states shell by shell; inside a shell k increases (l decreases)."""
    shell = 0
    while True:
        for k in range(shell // 2 + 1):
            yield QuantumNumbers(k, shell - 2 * k)
        shell += 1


def build_basis_table(count: int) -> BasisTable:
    """First ``count`` oscillator states in shell-major order.

    Within a shell of fixed 2k + l the states run (0, s), (1, s - 2), ...,
    so ordinal 12 is (k, l) = (2, 1).
    """
    if count < 1:
        raise ValueError(f"basis size must be positive, got {count}")
    states = []
    for qn in iter_states():
        if len(states) == count:
            break
        states.append(qn)
    return BasisTable(tuple(states), tuple(energy(qn) for qn in states))


def laguerre(k: int, alpha: float, x):
    """Generalized Laguerre polynomial L_k^(alpha)(x) by upward recurrence.

    Works elementwise on arrays.
    """
    if k < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if k == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + alpha - x
    for j in range(1, k):
        prev, cur = cur, ((2 * j + 1 + alpha - x) * cur - (j + alpha) * prev) / (j + 1)
    return cur if cur.ndim else float(cur)


def legendre(l: int, x):
    """Legendre polynomial P_l(x) by Bonnet's recurrence."""
    if l < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if l == 0:
        return prev if prev.ndim else float(prev)
    cur = x.copy()
    for j in range(1, l):
        prev, cur = cur, ((2 * j + 1) * x * cur - j * prev) / (j + 1)
    return cur if cur.ndim else float(cur)


def normalization(k: int, l: int) -> float:
    """Radial normalization constant N_kl = sqrt(2 k! / Gamma(k + l + 3/2)).

    This is the closed form of the inverse square root of
    int_0^inf rho^(2l+2) [L_k^(l+1/2)(rho^2)]^2 exp(-rho^2) drho.
    """
    return math.exp(0.5 * (math.log(2.0) + math.lgamma(k + 1) - math.lgamma(k + l + 1.5)))


def radial_wavefunction(qn: QuantumNumbers, rho):
    """Dimensionless radial factor N_kl rho^l L_k^(l+1/2)(rho^2) exp(-rho^2/2)."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("rho must be non-negative")
    value = (
        normalization(qn.k, qn.l)
        * rho**qn.l
        * laguerre(qn.k, qn.l + 0.5, rho**2)
        * np.exp(-0.5 * rho**2)
    )
    return value if np.ndim(value) else float(value)
