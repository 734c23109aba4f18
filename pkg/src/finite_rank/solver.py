"""Secular problem of the finite-rank potential with a rank-R Green's function.

Two independent routes to the energies are provided and must agree:

* the production route diagonalizes, per l-sector, the symmetric matrix
  ``diag(eps_r) + W D^-1 W^T`` (W is the R x N coupling block, D the N x N one);
* the verification route scans ``det A(E)`` between the sector's poles,
  brackets sign changes and bisects.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .basis import build_basis_table
from .potential import PotentialSpec, build_coupling

log = logging.getLogger(__name__)

MAX_CONDITION = 1e12
PATH_AGREEMENT = 1e-8
DEGENERACY_GAP = 1e-9
WINDOW_MARGIN = 10.0


class FiniteRankError(Exception):
    """Base class for solver failures."""


class PoleProximityError(FiniteRankError):
    """Energy falls inside the exclusion zone of a Green's-function pole."""


class IllConditionedError(FiniteRankError):
    """The potential matrix D is numerically singular."""


class PathDisagreementError(FiniteRankError):
    """Eigen route and determinant-scan route found different roots."""


@dataclass(frozen=True)
class SolverConfig:
    """Ranks and numerical knobs.

    Parameters
    ----------
    n_rank : int
        Rank N of the separable potential.
    r_rank : int
        Rank R of the truncated Green's function, R >= N.
    window : tuple of float, optional
        Energy search window (lo, hi) in units of hbar*omega/2. Defaults to
        [0, Gershgorin bound + 10].
    root_tol : float
        Absolute bisection tolerance.
    pole_exclusion : float
        Half-width of the band around each pole that is never evaluated.
    scan_points_per_interval : int
        Grid points between consecutive poles in the determinant scan.
    """

    n_rank: int
    r_rank: int
    window: tuple[float, float] | None = None
    root_tol: float = 1e-10
    pole_exclusion: float = 1e-6
    scan_points_per_interval: int = 64

    def __post_init__(self):
        if self.n_rank < 1:
            raise ValueError(f"n_rank must be >= 1, got {self.n_rank}")
        if self.r_rank < self.n_rank:
            raise ValueError(
                f"r_rank must satisfy R >= N (got N={self.n_rank}, R={self.r_rank}); "
                "a Green's-function rank below N reduces to N = R"
            )
        if not self.root_tol > 0:
            raise ValueError("root_tol must be positive")
        if not self.pole_exclusion > 0:
            raise ValueError("pole_exclusion must be positive")
        if self.scan_points_per_interval < 2:
            raise ValueError("scan_points_per_interval must be at least 2")
        if self.window is not None:
            lo, hi = self.window
            if not lo < hi:
                raise ValueError(f"window must satisfy lo < hi, got {self.window}")


@dataclass(frozen=True)
class Sector:
    """Basis ordinals (1-based) sharing orbital quantum number ``l``."""

    l: int
    n_indices: tuple[int, ...]
    r_indices: tuple[int, ...]

    @property
    def inert(self) -> bool:
        return not self.n_indices


@dataclass(frozen=True)
class Root:
    energy: float
    sector_l: int
    scan_energy: float
    residual: float
    degenerate: bool = False


@dataclass
class SpectrumResult:
    config: SolverConfig
    spec: PotentialSpec
    window: tuple[float, float]
    roots: list[Root] = field(default_factory=list)

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.roots])

    @property
    def scan_energies(self) -> np.ndarray:
        return np.array([r.scan_energy for r in self.roots])

    @property
    def sectors(self) -> list[int]:
        return [r.sector_l for r in self.roots]


def partition_sectors(n_rank: int, r_rank: int) -> list[Sector]:
    """Group ordinals 1..R by l; sectors without any n <= N are inert."""
    if r_rank < n_rank:
        raise ValueError("R >= N required")
    table = build_basis_table(r_rank)
    groups: dict[int, list[int]] = {}
    for ordinal, qn in enumerate(table.states, start=1):
        groups.setdefault(qn.l, []).append(ordinal)
    return [
        Sector(l, tuple(o for o in ords if o <= n_rank), tuple(ords))
        for l, ords in sorted(groups.items())
    ]


@dataclass(frozen=True)
class _Operators:
    eps: np.ndarray  # (R,)
    coupling: np.ndarray  # (R, N)
    square: np.ndarray  # (R, R), only for the window bound

    @property
    def d(self) -> np.ndarray:
        n = self.coupling.shape[1]
        return self.coupling[:n]


@lru_cache(maxsize=256)
def _operators(n_rank: int, r_rank: int, spec: PotentialSpec) -> _Operators:
    square = build_coupling(r_rank, r_rank, spec).entries
    square.setflags(write=False)
    eps = build_basis_table(r_rank).energy_array()
    eps.setflags(write=False)
    return _Operators(eps, square[:, :n_rank], square)


def _check_conditioning(d: np.ndarray) -> None:
    cond = np.linalg.cond(d)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise IllConditionedError(f"potential matrix D has condition number {cond:.3e}")


def _check_poles(energy: float, poles: np.ndarray, exclusion: float) -> None:
    hit = np.abs(poles - energy) < exclusion
    if np.any(hit):
        raise PoleProximityError(
            f"E={energy!r} lies within {exclusion} of pole(s) {poles[hit].tolist()}"
        )


def _a_matrix(energy: float, eps: np.ndarray, w: np.ndarray, d: np.ndarray) -> np.ndarray:
    # A = I + W^T G W D^-1 with D symmetric, so X D^-1 = (D^-1 X)^T for symmetric X
    g = 1.0 / (eps - energy)
    x = w.T @ (g[:, None] * w)
    return np.eye(d.shape[0]) + np.linalg.solve(d, x).T


def build_A(energy: float, config: SolverConfig, spec: PotentialSpec) -> np.ndarray:
    """N x N secular matrix A(E) with the rank-R Green's function."""
    ops = _operators(config.n_rank, config.r_rank, spec)
    _check_poles(energy, ops.eps, config.pole_exclusion)
    _check_conditioning(ops.d)
    return _a_matrix(energy, ops.eps, ops.coupling, ops.d)


def det_A(energy: float, config: SolverConfig, spec: PotentialSpec) -> float:
    """det A(E) from an LU factorization of the full N x N matrix."""
    return float(np.linalg.det(build_A(energy, config, spec)))


def _sector_blocks(sector: Sector, ops: _Operators):
    r = np.array(sector.r_indices) - 1
    n = np.array(sector.n_indices) - 1
    w = ops.coupling[np.ix_(r, n)]
    d = ops.d[np.ix_(n, n)]
    return ops.eps[r], w, d


def sector_det(energy: float, sector: Sector, config: SolverConfig, spec: PotentialSpec) -> float:
    """Determinant of the diagonal block of A(E) belonging to ``sector``."""
    if sector.inert:
        return 1.0
    eps, w, d = _sector_blocks(sector, _operators(config.n_rank, config.r_rank, spec))
    _check_poles(energy, eps, config.pole_exclusion)
    return float(np.linalg.det(_a_matrix(energy, eps, w, d)))


def reduced_matrix(sector: Sector, config: SolverConfig, spec: PotentialSpec) -> np.ndarray:
    """Symmetric matrix diag(eps_r) + W D^-1 W^T over the sector's r-states.

    Its eigenvalues are exactly the zeros of the sector determinant; when all
    r-states are also n-states the correction collapses to D itself.
    """
    if sector.inert:
        raise ValueError(f"sector l={sector.l} is inert and has no roots")
    eps, w, d = _sector_blocks(sector, _operators(config.n_rank, config.r_rank, spec))
    _check_conditioning(d)
    k = w @ np.linalg.solve(d, w.T)
    m = np.diag(eps) + k
    return 0.5 * (m + m.T)


def default_window(config: SolverConfig, spec: PotentialSpec) -> tuple[float, float]:
    """[0, Gershgorin bound of diag(eps) + |V_RR| + margin].

    V is a positive operator, so W D^-1 W^T is dominated by V_RR and the
    reduced spectrum sits between min(eps) > 0 and this bound.
    """
    if config.window is not None:
        return config.window
    ops = _operators(config.n_rank, config.r_rank, spec)
    bound = float(np.max(ops.eps + np.abs(ops.square).sum(axis=1)))
    return 0.0, bound + WINDOW_MARGIN


def _bisect(f, lo: float, hi: float, f_lo: float, tol: float) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _scan_interval(f, lo: float, hi: float, points: int, tol: float, depth: int = 0) -> list[float]:
    grid = np.linspace(lo, hi, points)
    values = np.array([f(e) for e in grid])
    roots = []
    for i in range(len(grid) - 1):
        a, b = values[i], values[i + 1]
        if a == 0.0:
            roots.append(float(grid[i]))
        elif (a > 0) != (b > 0) and b != 0.0:
            roots.append(_bisect(f, float(grid[i]), float(grid[i + 1]), float(a), tol))
    if values[-1] == 0.0:
        roots.append(float(grid[-1]))
    # a dip of |f| without a sign change may hide a close pair of roots
    if depth < 4:
        mags = np.abs(values)
        for i in range(1, len(grid) - 1):
            if mags[i] < mags[i - 1] and mags[i] < mags[i + 1] and (values[i - 1] > 0) == (values[i + 1] > 0):
                if (values[i] > 0) == (values[i - 1] > 0):
                    roots.extend(
                        _scan_interval(f, float(grid[i - 1]), float(grid[i + 1]), points, tol, depth + 1)
                    )
    return sorted(set(roots))


def scan_sector(sector: Sector, config: SolverConfig, spec: PotentialSpec, window=None) -> list[float]:
    """Zeros of the sector determinant inside the window, by bracketing and bisection."""
    if sector.inert:
        return []
    lo, hi = window if window is not None else default_window(config, spec)
    eps, w, d = _sector_blocks(sector, _operators(config.n_rank, config.r_rank, spec))
    _check_conditioning(d)
    ex = config.pole_exclusion

    def f(e):
        return float(np.linalg.det(_a_matrix(e, eps, w, d)))

    edges = [lo]
    for pole in np.sort(eps):
        if lo < pole < hi:
            edges.extend([pole - ex, pole + ex])
    edges.append(hi)
    roots: list[float] = []
    for a, b in zip(edges[::2], edges[1::2]):
        if b - a > 0:
            roots.extend(_scan_interval(f, a, b, config.scan_points_per_interval, config.root_tol))
    return roots


def eigen_sector(sector: Sector, config: SolverConfig, spec: PotentialSpec, window=None) -> list[float]:
    """Eigenvalues of the reduced matrix of ``sector`` inside the window."""
    if sector.inert:
        return []
    lo, hi = window if window is not None else default_window(config, spec)
    values = np.linalg.eigvalsh(reduced_matrix(sector, config, spec))
    return [float(v) for v in values if lo <= v <= hi]


def solve_spectrum(config: SolverConfig, spec: PotentialSpec) -> SpectrumResult:
    """All roots of det A(E) = 0 in the window, sorted ascending.

    Raises
    ------
    PathDisagreementError
        If the eigen route and the determinant scan disagree in count or by
        more than 1e-8 on any root.
    """
    window = default_window(config, spec)
    found: list[tuple[float, int, float, float]] = []
    for sector in partition_sectors(config.n_rank, config.r_rank):
        if sector.inert:
            continue
        eig = eigen_sector(sector, config, spec, window)
        scan = scan_sector(sector, config, spec, window)
        if len(eig) != len(scan):
            raise PathDisagreementError(
                f"sector l={sector.l}: eigen route found {len(eig)} roots, scan found {len(scan)} "
                f"(N={config.n_rank}, R={config.r_rank}, {spec})"
            )
        for e, s in zip(eig, scan):
            if abs(e - s) > PATH_AGREEMENT:
                raise PathDisagreementError(
                    f"sector l={sector.l}: eigen root {e!r} vs scan root {s!r} "
                    f"(N={config.n_rank}, R={config.r_rank}, {spec})"
                )
            try:
                residual = abs(sector_det(e, sector, config, spec))
            except PoleProximityError:
                residual = float("nan")
            found.append((e, sector.l, s, residual))
    found.sort(key=lambda t: (t[0], t[1]))
    roots = []
    for i, (e, l, s, res) in enumerate(found):
        degenerate = any(
            abs(e - other[0]) < DEGENERACY_GAP and other[1] != l
            for j, other in enumerate(found)
            if j != i
        )
        roots.append(Root(e, l, s, res, degenerate))
    log.debug("N=%d R=%d %s: %d roots", config.n_rank, config.r_rank, spec, len(roots))
    return SpectrumResult(config, spec, window, roots)
