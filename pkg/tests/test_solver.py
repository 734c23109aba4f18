import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from finite_rank.oracle import galerkin_diagonalize
from finite_rank.potential import PotentialSpec, build_coupling
from finite_rank.solver import (
    IllConditionedError,
    PathDisagreementError,
    PoleProximityError,
    SolverConfig,
    build_A,
    det_A,
    partition_sectors,
    reduced_matrix,
    sector_det,
    solve_spectrum,
)

COUPLINGS = (0.01, 0.1, 1.0)


def _sector_map(sectors):
    return {s.l: (s.n_indices, s.r_indices) for s in sectors}


def test_config_rejects_r_below_n():
    with pytest.raises(ValueError, match="R >= N"):
        SolverConfig(4, 2)
    with pytest.raises(ValueError):
        SolverConfig(0, 2)
    with pytest.raises(ValueError):
        SolverConfig(2, 2, window=(5.0, 1.0))


def test_partition_n4_r8():
    sectors = partition_sectors(4, 8)
    assert _sector_map(sectors) == {
        0: ((1, 4), (1, 4)),
        1: ((2,), (2, 6)),
        2: ((3,), (3, 8)),
        3: ((), (5,)),
        4: ((), (7,)),
    }
    assert [s.inert for s in sectors] == [False, False, False, True, True]


def test_partition_single():
    (sector,) = partition_sectors(1, 1)
    assert sector.l == 0 and not sector.inert


def test_partition_n12():
    sectors = partition_sectors(12, 12)
    assert [len(s.r_indices) for s in sectors] == [3, 3, 2, 2, 1, 1]
    assert not any(s.inert for s in sectors)


def test_rank_one_matrix():
    a = build_A(0.0, SolverConfig(1, 1), PotentialSpec(4, 1.0))
    assert a.shape == (1, 1)
    assert a[0, 0] == pytest.approx(2.25, rel=1e-14)
    assert det_A(6.75, SolverConfig(1, 1), PotentialSpec(4, 1.0)) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("n, r", [(1, 1), (4, 4), (4, 12), (12, 12)])
def test_far_negative_energy_limit(n, r):
    cfg, spec = SolverConfig(n, r), PotentialSpec(4, 1.0)
    assert np.max(np.abs(build_A(-1e9, cfg, spec) - np.eye(n))) <= 1e-6
    assert det_A(-1e9, cfg, spec) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("n", range(1, 13))
def test_galerkin_reduction_of_A(n):
    spec = PotentialSpec(3, 0.1)
    d = build_coupling(n, n, spec).entries
    eps = np.array([2 * (2 * q.k + q.l) + 3 for q in build_coupling(n, n, spec).table.states], float)
    for e in (-3.0, 4.0, 8.5, 20.0):
        expected = np.eye(n) + d / (eps - e)[None, :]
        assert np.max(np.abs(build_A(e, SolverConfig(n, n), spec) - expected)) <= 1e-12


def test_A_block_diagonal():
    cfg, spec = SolverConfig(4, 8), PotentialSpec(3, 0.1)
    a = build_A(4.0, cfg, spec)
    l = np.array([0, 1, 2, 0])
    assert np.all(a[l[:, None] != l[None, :]] == 0.0)


def test_pole_guard():
    with pytest.raises(PoleProximityError):
        build_A(7.0 + 1e-8, SolverConfig(4, 8), PotentialSpec(3, 0.1))


def test_ill_conditioned_guard(monkeypatch):
    import finite_rank.solver as solver

    monkeypatch.setattr(solver, "MAX_CONDITION", 1.0)
    with pytest.raises(IllConditionedError):
        build_A(0.0, SolverConfig(4, 4), PotentialSpec(3, 0.1))


def test_sign_change_brackets_table_value():
    cfg, spec = SolverConfig(4, 4), PotentialSpec(3, 0.01)
    assert det_A(3.021, cfg, spec) * det_A(3.023, cfg, spec) < 0


@settings(max_examples=100, deadline=None)
@given(
    st.sampled_from([(4, 4), (4, 8), (4, 12), (8, 8), (8, 12), (12, 12)]),
    st.sampled_from([3, 4]),
    st.sampled_from(COUPLINGS),
    st.floats(-20.0, 120.0),
)
def test_block_determinant_identity(ranks, power, coupling, energy):
    cfg, spec = SolverConfig(*ranks), PotentialSpec(power, coupling)
    eps = np.arange(3, 2 * 12 + 4, 2)
    if np.min(np.abs(eps - energy)) < 1e-3:
        return
    full = det_A(energy, cfg, spec)
    product = np.prod([sector_det(energy, s, cfg, spec) for s in partition_sectors(*ranks)])
    assert abs(full - product) <= 1e-10 * max(abs(full), abs(product), 1e-300)


def test_reduced_matrix_examples():
    (sector,) = partition_sectors(1, 1)
    assert np.allclose(reduced_matrix(sector, SolverConfig(1, 1), PotentialSpec(4, 1.0)), [[6.75]], atol=1e-14)
    spec = PotentialSpec(3, 0.1)
    d = build_coupling(8, 8, spec).entries
    for s in partition_sectors(8, 8):
        idx = np.array(s.r_indices) - 1
        eps = np.array([3, 5, 7, 7, 9, 9, 11, 11])[idx]
        assert np.allclose(reduced_matrix(s, SolverConfig(8, 8), spec), np.diag(eps) + d[np.ix_(idx, idx)],
                           rtol=0, atol=1e-13)
    inert = partition_sectors(4, 8)[-1]
    with pytest.raises(ValueError):
        reduced_matrix(inert, SolverConfig(4, 8), spec)


def test_table2_first_column():
    result = solve_spectrum(SolverConfig(4, 4), PotentialSpec(3, 0.01))
    assert np.allclose(result.energies, [3.022, 5.045, 7.072, 7.079], atol=5e-4)


def test_table7_ground_state():
    result = solve_spectrum(SolverConfig(4, 4), PotentialSpec(4, 1.0))
    assert result.energies[0] == pytest.approx(4.947, abs=5e-4)


def test_rank_one_root():
    result = solve_spectrum(SolverConfig(1, 1), PotentialSpec(4, 0.01))
    assert len(result.roots) == 1
    assert result.energies[0] == pytest.approx(3.0375, abs=1e-12)
    assert result.roots[0].scan_energy == pytest.approx(3.0375, abs=1e-9)


@pytest.mark.parametrize("power", [3, 4])
@pytest.mark.parametrize("coupling", COUPLINGS)
@pytest.mark.parametrize("n", range(1, 13))
def test_galerkin_equivalence(power, coupling, n):
    spec = PotentialSpec(power, coupling)
    result = solve_spectrum(SolverConfig(n, n), spec)
    assert np.max(np.abs(result.energies - galerkin_diagonalize(n, spec))) <= 1e-10


@pytest.mark.parametrize("ranks, count", [((4, 4), 4), ((4, 8), 6), ((4, 12), 8), ((8, 8), 8), ((8, 12), 11), ((12, 12), 12)])
@pytest.mark.parametrize("power", [3, 4])
@pytest.mark.parametrize("coupling", COUPLINGS)
def test_root_counts_and_path_agreement(ranks, count, power, coupling):
    result = solve_spectrum(SolverConfig(*ranks), PotentialSpec(power, coupling))
    expected = sum(len(s.r_indices) for s in partition_sectors(*ranks) if not s.inert)
    assert len(result.roots) == expected == count
    assert np.max(np.abs(result.energies - result.scan_energies)) <= 1e-8
    assert np.all(np.diff(result.energies) >= 0)
    lo, hi = result.window
    assert np.all((result.energies > lo) & (result.energies < hi))
    eps = np.arange(3, 30, 2)
    assert np.min(np.abs(result.energies[:, None] - eps[None, :])) > result.config.pole_exclusion


@pytest.mark.parametrize("ranks", [(4, 4), (4, 8), (4, 12), (8, 8), (8, 12), (12, 12)])
@pytest.mark.parametrize("power", [3, 4])
def test_monotone_in_coupling(ranks, power):
    levels = [solve_spectrum(SolverConfig(*ranks), PotentialSpec(power, c)).energies for c in COUPLINGS]
    assert np.all(levels[1] > levels[0]) and np.all(levels[2] > levels[1])


@pytest.mark.parametrize("power", [3, 4])
@pytest.mark.parametrize("coupling", COUPLINGS)
def test_variational_monotonicity(power, coupling):
    spec = PotentialSpec(power, coupling)
    previous = None
    for n in range(1, 13):
        current = solve_spectrum(SolverConfig(n, n), spec).energies
        if previous is not None:
            assert np.all(current[: len(previous)] <= previous + 1e-12)
        previous = current


def test_user_window_filters_roots():
    spec = PotentialSpec(4, 1.0)
    full = solve_spectrum(SolverConfig(12, 12), spec).energies
    part = solve_spectrum(SolverConfig(12, 12, window=(10.0, 50.0)), spec)
    assert np.allclose(part.energies, full[(full >= 10) & (full <= 50)], atol=1e-12)
    assert np.max(np.abs(part.energies - part.scan_energies)) <= 1e-8


def test_path_disagreement_is_fatal(monkeypatch):
    import finite_rank.solver as solver

    monkeypatch.setattr(solver, "scan_sector", lambda *a, **k: [])
    with pytest.raises(PathDisagreementError):
        solve_spectrum(SolverConfig(4, 4), PotentialSpec(3, 0.1))


@pytest.mark.parametrize("ranks", [(4, 12), (8, 12), (12, 12)])
@pytest.mark.parametrize("power", [3, 4])
@pytest.mark.parametrize("coupling", COUPLINGS)
def test_coarse_scan_still_finds_every_root(ranks, power, coupling):
    # a handful of grid points leaves close root pairs to the |det| dip refinement
    cfg = SolverConfig(*ranks, scan_points_per_interval=4)
    result = solve_spectrum(cfg, PotentialSpec(power, coupling))
    assert len(result.roots) == sum(len(s.r_indices) for s in partition_sectors(*ranks) if not s.inert)


def test_convergence_in_r_by_sector():
    # pair roots by (sector, position within sector) rather than by global index
    def by_sector(n, r, spec):
        out = {}
        for root in solve_spectrum(SolverConfig(n, r), spec).roots:
            out.setdefault(root.sector_l, []).append(root.energy)
        return out

    closer = total = 0
    for coupling in COUPLINGS:
        for power in (3, 4):
            spec = PotentialSpec(power, coupling)
            accurate = by_sector(12, 12, spec)
            for n in (4, 8):
                at_n, at_12 = by_sector(n, n, spec), by_sector(n, 12, spec)
                for l, values in at_n.items():
                    for j, value in enumerate(values):
                        total += 1
                        closer += abs(at_12[l][j] - accurate[l][j]) <= abs(value - accurate[l][j]) + 1e-12
    assert closer / total >= 0.9
