"""Independent reference computations used to cross-check the solver.

Nothing here goes through the solver's factorizations: the Galerkin matrix is
assembled from quadrature moments and diagonalized with a cyclic Jacobi
sweep written out below.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .basis import QuantumNumbers, build_basis_table, energy
from .potential import PotentialSpec, build_coupling, quadrature_moment, radial_moment


@dataclass(frozen=True)
class OracleReport:
    method: Literal["galerkin", "pt1", "quadrature"]
    reference: tuple[float, ...]
    target: tuple[float, ...]
    max_deviation: float

    def passed(self, tol: float) -> bool:
        return self.max_deviation <= tol


def jacobi_eigenvalues(matrix: np.ndarray, tol: float = 1e-15, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations."""
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    scale = np.linalg.norm(a) or 1.0
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) <= 1e-20 * scale:
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                elif theta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    return np.sort(np.diag(a))


def galerkin_matrix(size: int, spec: PotentialSpec) -> np.ndarray:
    """diag(eps_n) + D over the first ``size`` states, D from quadrature."""
    table = build_basis_table(size)
    coupling = build_coupling(size, size, spec, moment=quadrature_moment).entries
    return np.diag(table.energy_array()) + coupling


def galerkin_diagonalize(size: int, spec: PotentialSpec) -> np.ndarray:
    """Rayleigh-Ritz energies in the first ``size`` oscillator states, ascending."""
    if size < 1:
        raise ValueError("size must be positive")
    return jacobi_eigenvalues(galerkin_matrix(size, spec))


def first_order_pt(qn: QuantumNumbers, spec: PotentialSpec | None) -> float:
    """eps + lambda <rho**P>; ``spec=None`` stands for lambda = 0."""
    if spec is None:
        return float(energy(qn))
    return energy(qn) + spec.coupling * radial_moment(qn.k, qn.k, qn.l, spec.power)


def galerkin_report(energies: Sequence[float], size: int, spec: PotentialSpec) -> OracleReport:
    ref = galerkin_diagonalize(size, spec)
    target = np.asarray(energies, dtype=float)
    if len(target) != len(ref):
        dev = float("inf")
    else:
        dev = float(np.max(np.abs(ref - target)))
    return OracleReport("galerkin", tuple(ref), tuple(target), dev)


def pt1_report(ground_energy: float, spec: PotentialSpec) -> OracleReport:
    ref = first_order_pt(QuantumNumbers(0, 0), spec)
    return OracleReport("pt1", (ref,), (ground_energy,), abs(ref - ground_energy))


def quadrature_report(max_k: int = 6, max_l: int = 5, powers=(3, 4)) -> OracleReport:
    """Largest relative gap between analytic and quadrature radial moments.

    Moments that vanish identically (|k1 - k2| > P/2 for even P) are measured
    against the geometric mean of the two diagonal moments instead.
    """
    ref, target, worst = [], [], 0.0
    for p in powers:
        for l in range(max_l + 1):
            for k1 in range(max_k + 1):
                for k2 in range(k1, max_k + 1):
                    a = radial_moment(k1, k2, l, p)
                    q = quadrature_moment(k1, k2, l, p)
                    scale = np.sqrt(radial_moment(k1, k1, l, p) * radial_moment(k2, k2, l, p))
                    ref.append(q)
                    target.append(a)
                    worst = max(worst, abs(a - q) / max(abs(q), scale))
    return OracleReport("quadrature", tuple(ref), tuple(target), worst)
