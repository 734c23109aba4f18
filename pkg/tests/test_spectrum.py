import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from finite_rank.basis import build_basis_table
from finite_rank.oracle import galerkin_matrix
from finite_rank.potential import PotentialSpec
from finite_rank.solver import SolverConfig, build_A, solve_spectrum
from finite_rank.spectrum import (
    AmbiguousNullSpaceError,
    SingularCoefficientError,
    StateExpansion,
    amplitudes,
    evaluate_psi,
    lippmann_schwinger_residual,
    reconstruct_full,
    reconstruct_truncated,
    recover_states,
)

COLUMNS = [(4, 4), (4, 8), (4, 12), (8, 8), (8, 12), (12, 12)]
PSI_ORIGIN_GROUND = 0.42377720812375763  # 2 pi**-0.25 / sqrt(4 pi)


def _solved(ranks, power=3, coupling=0.1):
    return solve_spectrum(SolverConfig(*ranks), PotentialSpec(power, coupling))


def test_rank_one_amplitude_and_expansion():
    cfg, spec = SolverConfig(1, 1), PotentialSpec(4, 0.01)
    b = amplitudes(3.0375, cfg, spec)
    assert np.allclose(b, [1.0])
    state = reconstruct_truncated(3.0375, b, cfg, spec)
    assert np.allclose(state.coefficients, [1.0])


@pytest.mark.parametrize("ranks", COLUMNS)
def test_amplitudes_are_null_vectors(ranks):
    result = _solved(ranks, 4, 1.0)
    l_of = build_basis_table(ranks[0]).l_values
    for root in result.roots:
        b = amplitudes(root.energy, result.config, result.spec, sector_l=root.sector_l)
        a = build_A(root.energy, result.config, result.spec)
        assert np.linalg.norm(a @ b) <= 1e-8 * np.linalg.norm(a)
        assert np.linalg.norm(b) == pytest.approx(1.0, abs=1e-14)
        assert b[np.argmax(np.abs(b))] > 0
        assert np.all(np.abs(b[l_of != root.sector_l]) <= 1e-10)


@pytest.mark.parametrize("n", [2, 4, 8, 12])
def test_amplitudes_match_galerkin_vectors(n):
    spec = PotentialSpec(3, 1.0)
    result = solve_spectrum(SolverConfig(n, n), spec)
    eps = build_basis_table(n).energy_array()
    values, vectors = np.linalg.eigh(galerkin_matrix(n, spec))
    for root, v in zip(result.roots, vectors.T):
        b = amplitudes(root.energy, result.config, spec, sector_l=root.sector_l)
        expected = (eps - root.energy) * v
        expected /= np.linalg.norm(expected)
        assert min(np.linalg.norm(b - expected), np.linalg.norm(b + expected)) <= 1e-8
        state = reconstruct_truncated(root.energy, b, result.config, spec)
        assert min(np.linalg.norm(state.coefficients - v), np.linalg.norm(state.coefficients + v)) <= 1e-8


def test_ambiguous_null_space_reports_both_directions():
    # at a cross-sector degeneracy the full matrix has a two-dimensional null space
    cfg, spec = SolverConfig(2, 2), PotentialSpec(4, 0.5)
    with pytest.raises(AmbiguousNullSpaceError) as info:
        amplitudes(-1e7, cfg, spec)
    assert len(info.value.directions) == 2


def test_singular_coefficient():
    cfg, spec = SolverConfig(2, 2), PotentialSpec(4, 0.5)
    with pytest.raises(SingularCoefficientError):
        reconstruct_truncated(5.0, np.array([0.0, 1.0]), cfg, spec)


@pytest.mark.parametrize("ranks", COLUMNS)
@pytest.mark.parametrize("form", ["truncated", "full"])
def test_expansions_normalized_and_sector_confined(ranks, form):
    result = _solved(ranks, 4, 0.1)
    size = ranks[0] if form == "truncated" else ranks[1]
    l_of = build_basis_table(size).l_values
    for state in recover_states(result, form):
        assert len(state.coefficients) == size
        assert np.sum(state.coefficients**2) == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.abs(state.coefficients[l_of != state.sector_l]) <= 1e-10)


@pytest.mark.parametrize("n", [1, 4, 8, 12])
def test_full_equals_truncated_at_r_equal_n(n):
    result = _solved((n, n), 3, 1.0)
    for full, trunc in zip(recover_states(result, "full"), recover_states(result, "truncated")):
        assert np.max(np.abs(full.coefficients - trunc.coefficients)) <= 1e-12


@pytest.mark.parametrize("ranks", [(4, 8), (4, 12), (8, 12)])
def test_full_form_head_matches_channel_coefficients(ranks):
    result = _solved(ranks, 4, 1.0)
    n = ranks[0]
    eps = build_basis_table(n).energy_array()
    for root in result.roots:
        b = amplitudes(root.energy, result.config, result.spec, sector_l=root.sector_l)
        full = reconstruct_full(root.energy, b, result.config, result.spec).coefficients
        head = b / (eps - root.energy)
        # same vector up to the common normalization factor
        ratio = np.dot(full[:n], head) / np.dot(head, head)
        assert np.max(np.abs(full[:n] - ratio * head)) <= 1e-10


@pytest.mark.parametrize("ranks", COLUMNS)
@pytest.mark.parametrize("power", [3, 4])
@pytest.mark.parametrize("coupling", [0.01, 0.1, 1.0])
def test_lippmann_schwinger_residual(ranks, power, coupling):
    result = _solved(ranks, power, coupling)
    for state in recover_states(result, "full"):
        assert lippmann_schwinger_residual(state, result.config, result.spec) <= 1e-7


@pytest.mark.parametrize("n", [4, 8, 12])
def test_orthogonality_within_sector(n):
    states = recover_states(_solved((n, n), 4, 1.0), "full")
    for i, a in enumerate(states):
        for b in states[i + 1:]:
            assert abs(np.dot(a.coefficients, b.coefficients)) <= 1e-8


def test_truncated_vs_full_distance_is_finite_for_r_above_n():
    result = _solved((4, 12), 4, 1.0)
    for full, trunc in zip(recover_states(result, "full"), recover_states(result, "truncated")):
        padded = np.zeros_like(full.coefficients)
        padded[: len(trunc.coefficients)] = trunc.coefficients
        assert np.isfinite(np.linalg.norm(full.coefficients - padded))


def test_evaluate_psi_ground_state():
    pure = StateExpansion(3.0, 0, np.array([1.0]), "truncated")
    assert evaluate_psi(pure, 0.0, 0.3) == pytest.approx(PSI_ORIGIN_GROUND, rel=1e-14)
    assert evaluate_psi(pure, 0.0, -1.0) == pytest.approx(PSI_ORIGIN_GROUND, rel=1e-14)


def test_evaluate_psi_vanishes_at_origin_for_l_positive():
    p_state = StateExpansion(5.0, 1, np.array([0.0, 1.0]), "truncated")
    assert evaluate_psi(p_state, 0.0, 0.7) == 0.0


@settings(deadline=None)
@given(st.integers(2, 11), st.floats(0, 5), st.floats(-1, 1))
def test_parity_of_pure_l_expansion(ordinal, rho, c):
    coeffs = np.zeros(12)
    coeffs[ordinal - 1] = 1.0
    l = build_basis_table(12)[ordinal].l
    state = StateExpansion(0.0, l, coeffs, "truncated")
    assert evaluate_psi(state, rho, -c) == pytest.approx((-1) ** l * evaluate_psi(state, rho, c), abs=1e-14)


def test_wavefunction_norm_in_position_space():
    # integrate |psi|^2 over rho and cos(theta); 2 pi from the azimuth
    state = recover_states(_solved((8, 8), 4, 1.0), "full")[2]
    rho = np.linspace(0, 9, 1801)
    x, wx = np.polynomial.legendre.leggauss(24)
    values = np.array([evaluate_psi(state, rho, xi) ** 2 for xi in x])
    radial = np.trapezoid(values * rho**2, rho, axis=1)
    assert 2 * math.pi * np.dot(wx, radial) == pytest.approx(1.0, abs=1e-8)
