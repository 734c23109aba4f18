"""Matrix elements of the anharmonic term lambda * rho**P in the oscillator basis."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.special import eval_genlaguerre, roots_genlaguerre

from .basis import BasisTable, QuantumNumbers, build_basis_table, normalization

SUPPORTED_POWERS = (3, 4)


@dataclass(frozen=True)
class PotentialSpec:
    """Anharmonicity lambda * rho**power, lambda in units of hbar*omega/2."""

    power: int
    coupling: float

    def __post_init__(self):
        if self.power not in SUPPORTED_POWERS:
            raise ValueError(f"power must be one of {SUPPORTED_POWERS}, got {self.power}")
        if not self.coupling > 0:
            raise ValueError(f"coupling must be positive, got {self.coupling}")


@dataclass(frozen=True)
class CouplingMatrix:
    """Dense block <phi_p|V|phi_q> for p <= rows, q <= cols (Table ordering)."""

    entries: np.ndarray
    table: BasisTable

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


def _rising(x: Fraction, n: int) -> Fraction:
    out = Fraction(1)
    for j in range(n):
        out *= x + j
    return out


def _laguerre_coefficients(k: int, alpha: Fraction) -> list[Fraction]:
    # L_k^a(u) = sum_j (-1)^j (a+1)_k / ((a+1)_j (k-j)! j!) u^j, exact for rational a
    top = _rising(alpha + 1, k)
    return [
        (-1) ** j * top / (_rising(alpha + 1, j) * math.factorial(k - j) * math.factorial(j))
        for j in range(k + 1)
    ]


def radial_moment(k1: int, k2: int, l: int, power: int) -> float:
    """int_0^inf R_{k1 l}(rho) rho**power R_{k2 l}(rho) rho**2 drho, exactly.

    In u = rho**2 the integrand is a polynomial times u**s exp(-u), so the
    integral is a finite sum of Gamma functions. Every ratio involved is
    rational except Gamma(a + 1 + power/2) / Gamma(a + 1) with a = l + 1/2,
    so the alternating sum is done in exact arithmetic and only that one
    ratio (and a square root) is rounded.
    """
    alpha = Fraction(2 * l + 1, 2)
    shift = alpha + 1 + Fraction(power, 2)
    series = Fraction(0)
    first = _laguerre_coefficients(k1, alpha)
    second = _laguerre_coefficients(k2, alpha)
    for i, a in enumerate(first):
        for j, b in enumerate(second):
            series += a * b * _rising(shift, i + j)
    norm_sq = Fraction(math.factorial(k1) * math.factorial(k2)) / (
        _rising(alpha + 1, k1) * _rising(alpha + 1, k2)
    )
    if power % 2 == 0:
        gamma_ratio = float(_rising(alpha + 1, power // 2))
    else:
        gamma_ratio = math.exp(math.lgamma(float(shift)) - math.lgamma(float(alpha + 1)))
    return gamma_ratio * math.sqrt(norm_sq) * float(series)


def quadrature_moment(k1: int, k2: int, l: int, power: int, nodes: int | None = None) -> float:
    """Same integral as :func:`radial_moment` by generalized Gauss-Laguerre.

    The weight u**(l + 1/2 + power/2) exp(-u) absorbs everything except the
    two Laguerre polynomials, whose product has degree k1 + k2, so
    ``nodes >= (k1 + k2 + 1) / 2`` makes the rule exact.
    """
    needed = (k1 + k2) // 2 + 1
    if nodes is None:
        nodes = needed + 2
    if nodes < needed:
        raise ValueError(f"{nodes} nodes cannot integrate degree {k1 + k2} exactly; need {needed}")
    alpha = l + 0.5
    x, w = roots_genlaguerre(nodes, alpha + 0.5 * power)
    integrand = eval_genlaguerre(k1, alpha, x) * eval_genlaguerre(k2, alpha, x)
    return 0.5 * normalization(k1, l) * normalization(k2, l) * float(np.dot(w, integrand))


def matrix_element(
    qn1: QuantumNumbers,
    qn2: QuantumNumbers,
    spec: PotentialSpec,
    moment: Callable[[int, int, int, int], float] = radial_moment,
) -> float:
    """<qn1|V|qn2>; the angular integral forces l1 == l2."""
    if qn1.l != qn2.l:
        return 0.0
    return spec.coupling * moment(qn1.k, qn2.k, qn1.l, spec.power)


def build_coupling(
    rows: int,
    cols: int,
    spec: PotentialSpec,
    moment: Callable[[int, int, int, int], float] = radial_moment,
) -> CouplingMatrix:
    """Rectangular coupling block; rows = cols = N gives the matrix D."""
    if rows < 1 or cols < 1:
        raise ValueError("coupling block dimensions must be positive")
    table = build_basis_table(max(rows, cols))
    entries = np.zeros((rows, cols))
    cache: dict[tuple[int, int, int], float] = {}
    for p in range(rows):
        for q in range(cols):
            a, b = table.states[p], table.states[q]
            if a.l != b.l:
                continue
            key = (min(a.k, b.k), max(a.k, b.k), a.l)
            if key not in cache:
                cache[key] = spec.coupling * moment(key[0], key[1], key[2], spec.power)
            entries[p, q] = cache[key]
    return CouplingMatrix(entries, table)
