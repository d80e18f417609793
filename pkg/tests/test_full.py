from fractions import Fraction

import numpy as np
import pytest

from conftest import board_states, dense_full_matrix, hamming, vec_mat
from rookmix.core import ChainParams, DomainError, ResourceLimitError, stationary_lumped, tv_vectors
from rookmix.full import (
    CAP_ENV,
    full_from_shells,
    full_point_mass,
    full_step_distribution,
    full_tv_to_uniform,
    full_uniform,
    mc_shell_histogram,
    resolve_cap,
    shell_projection,
    simulate_states,
    translation,
    verify_lumping,
    verify_transitivity,
)
from rookmix.lumped import build_kernel, evolve

F = Fraction


def test_point_mass_one_step():
    p = ChainParams(3, 2)
    out = full_step_distribution(full_point_mass(p))
    for state in board_states(3, 2):
        expected = F(1, 4) if hamming(state, (1, 1)) == 1 else 0
        assert out.weights[tuple(c - 1 for c in state)] == expected


def test_uniform_is_stationary():
    p = ChainParams(4, 3)
    u = full_uniform(p)
    assert (full_step_distribution(u).weights == u.weights).all()


@pytest.mark.parametrize("n, d", [(3, 2), (3, 3), (4, 2)])
def test_matrix_free_step_matches_dense_matrix(n, d):
    p = ChainParams(n, d)
    states, mat = dense_full_matrix(n, d)
    rng = np.random.default_rng(1)
    raw = rng.integers(0, 9, size=len(states))
    raw[0] += 1
    v = [F(int(r), int(raw.sum())) for r in raw]
    w = np.empty((n,) * d, dtype=object)
    for s, val in zip(states, v):
        w[tuple(c - 1 for c in s)] = val
    from rookmix.full import FullDistribution

    got = full_step_distribution(FullDistribution(p, w))
    expected = vec_mat(v, mat)
    for s, val in zip(states, expected):
        assert got.weights[tuple(c - 1 for c in s)] == val


def test_dense_kernel_symmetric_doubly_stochastic():
    _, mat = dense_full_matrix(3, 3)
    size = len(mat)
    for i in range(size):
        assert sum(mat[i]) == 1
        assert sum(mat[j][i] for j in range(size)) == 1
        for j in range(size):
            assert mat[i][j] == mat[j][i]


def test_two_steps_projection():
    p = ChainParams(3, 2)
    dist = full_step_distribution(full_step_distribution(full_point_mass(p)))
    assert shell_projection(dist).to_list() == [F(1, 4), F(1, 4), F(1, 2)]


def test_projection_examples():
    p = ChainParams(4, 3)
    assert shell_projection(full_point_mass(p)).to_list() == [1, 0, 0, 0]
    assert shell_projection(full_uniform(p)) == stationary_lumped(p)
    rng = np.random.default_rng(3)
    w = rng.random((4, 4, 4))
    w /= w.sum()
    from rookmix.full import FullDistribution

    assert abs(shell_projection(FullDistribution(p, w)).total() - 1) < 1e-14


@pytest.mark.parametrize("n, d", [(3, 2), (3, 3), (4, 3)])
def test_projection_commutes_for_shell_uniform(n, d):
    p = ChainParams(n, d)
    kernel = build_kernel(p)
    rng = np.random.default_rng(n * 10 + d)
    raw = [int(v) + 1 for v in rng.integers(0, 7, size=d + 1)]
    shells = np.array([F(v, sum(raw)) for v in raw], dtype=object)
    full = full_from_shells(shells, p)
    assert shell_projection(full).to_list() == list(shells)
    lhs = shell_projection(full_step_distribution(full)).to_list()
    assert lhs == list(kernel.push(shells))


def test_projection_commutes_for_any_distribution():
    # strong lumpability: shell uniformity is not needed
    p = ChainParams(3, 2)
    full = full_point_mass(p, (2, 1))
    lhs = shell_projection(full_step_distribution(full)).to_list()
    assert lhs == list(build_kernel(p).push(shell_projection(full).weights))
    full = full_from_shells(np.array([F(0), F(1, 2), F(1, 2)], dtype=object), p)
    w = full.weights.copy()
    w[1, 0], w[0, 1] = w[1, 0] + w[0, 1], F(0)
    from rookmix.full import FullDistribution

    skew = FullDistribution(p, w)
    stepped = shell_projection(full_step_distribution(skew)).to_list()
    assert stepped == list(build_kernel(p).push(shell_projection(skew).weights))


def test_verify_lumping_small():
    rep = verify_lumping(ChainParams(3, 2), 1)
    assert rep.rows[1] == (1, F(5, 9), F(5, 9))
    assert verify_lumping(ChainParams(3, 3), 0).rows[0][1:] == (F(26, 27), F(26, 27))
    rep = verify_lumping(ChainParams(4, 2), 5)
    assert rep.passed
    assert rep.rows[5][1] == rep.rows[5][2] == F(5, 648)


def test_verify_lumping_float():
    rep = verify_lumping(ChainParams(4, 4), 20, "float")
    assert rep.passed and rep.max_gap < 1e-12


def test_full_tv_matches_dense_matrix_power():
    n, d = 3, 3
    states, mat = dense_full_matrix(n, d)
    v = [F(1)] + [F(0)] * (len(states) - 1)
    dist = full_point_mass(ChainParams(n, d))
    for _ in range(4):
        v = vec_mat(v, mat)
        dist = full_step_distribution(dist)
    u = F(1, n**d)
    assert full_tv_to_uniform(dist) == sum(abs(a - u) for a in v) / 2


def test_transitivity_example_start():
    rep = verify_transitivity(ChainParams(3, 2), 3, 0, starts=[(2, 3)])
    assert rep.passed
    assert rep.start_tvs[0][1] == rep.reference_tv


def test_transitivity_t0():
    rep = verify_transitivity(ChainParams(3, 2), 0, 4, rng_seed=5)
    assert all(tv == F(8, 9) for _, tv in rep.start_tvs)
    assert rep.reference_tv == F(8, 9)


def test_transitivity_random_starts():
    rep = verify_transitivity(ChainParams(4, 3), 4, 6, rng_seed=11)
    assert rep.passed
    assert rep.xi_pairs_checked == 100 and rep.xi_failures == 0


def test_translation_map():
    xi = translation((1, 3, 2), (2, 1, 2), 3)
    assert xi((1, 3, 2)) == (2, 1, 2)
    assert sorted(xi(s) for s in board_states(3, 3)) == board_states(3, 3)


def test_transitivity_requires_d2():
    with pytest.raises(DomainError):
        verify_transitivity(ChainParams(3, 1), 1, 1)


def test_cap(monkeypatch):
    with pytest.raises(ResourceLimitError):
        full_point_mass(ChainParams(3, 13))
    with pytest.raises(ResourceLimitError):
        verify_lumping(ChainParams(3, 5), 2, cap=100)
    monkeypatch.setenv(CAP_ENV, "50")
    assert resolve_cap() == 50
    assert resolve_cap(500) == 500
    with pytest.raises(ResourceLimitError):
        full_uniform(ChainParams(4, 3))
    full_uniform(ChainParams(4, 3), cap=64)


def test_mc_shell_one_forced():
    h = mc_shell_histogram(ChainParams(3, 2), 1, 500, rng_seed=9)
    assert list(h.counts) == [0, 500, 0]


def test_mc_reproducible_and_seed_sensitive():
    p = ChainParams(4, 6)
    a = mc_shell_histogram(p, 7, 9000, 3)
    b = mc_shell_histogram(p, 7, 9000, 3)
    c = mc_shell_histogram(p, 7, 9000, 4)
    assert (a.counts == b.counts).all()
    assert not (a.counts == c.counts).all()


def test_mc_blocks_are_prefix_stable():
    # block streams depend only on (seed, block), so a longer run extends a shorter one
    p = ChainParams(3, 5)
    short = simulate_states(p, 6, 4096, 2)
    long = simulate_states(p, 6, 3 * 4096, 2)
    assert (long[:4096] == short).all()


def test_mc_moves_one_coordinate_to_a_new_value():
    p = ChainParams(5, 4)
    one = simulate_states(p, 1, 2000, 0)
    assert ((one != 1).sum(axis=1) == 1).all()
    assert one.min() >= 1 and one.max() <= 5


def test_mc_matches_exact_law():
    p = ChainParams(3, 10)
    h = mc_shell_histogram(p, 20, 100_000, 7)
    for t, w in evolve(p, "float"):
        if t == 20:
            break
    sigma = np.sqrt(w * (1 - w) / 100_000)
    assert (np.abs(h.frequencies - w) <= 4 * sigma + 1e-15).all()


def test_mc_convergence_trend():
    p = ChainParams(3, 8)
    for t, w in evolve(p, "float"):
        if t == 10:
            break
    devs = [np.abs(mc_shell_histogram(p, 10, n, 21).frequencies - w).max()
            for n in (1_000, 10_000, 100_000)]
    assert devs[0] > devs[1] > devs[2]
    assert tv_vectors(w, stationary_lumped(p, "float").weights) > 0
