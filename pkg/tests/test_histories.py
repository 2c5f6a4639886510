"""Two-branch measurement-history statistics.

Aggregated quantities are cross-checked against raw enumeration over all
2^n histories at small n, and the explicit apparatus readout is the oracle
for the closed-form weights.
"""

import itertools
import math

import numpy as np
import pytest

from spinlab.entropy import binary_entropy, von_neumann
from spinlab.histories import (
    BranchEntropies, History, ImpossibleHistoryError, MeasurementModel,
    apparatus_branch_state, apparatus_simulate, finite_collapse_average,
    history_table, history_weight, mean_entropy_average, posterior_martingale,
    purification_schedule, purification_stats, svd_spectrum_check,
    weight_normalization,
)
from spinlab.pauli import random_density_matrix

LOG2 = math.log(2.0)


def random_model(rng, n):
    return MeasurementModel(mu=float(rng.uniform(0.05, 0.95)),
                            p1=float(rng.uniform()), p2=float(rng.uniform()), n=n)


def test_model_validation():
    MeasurementModel(0.5, 0.0, 1.0, 0)
    with pytest.raises(ValueError):
        MeasurementModel(0.0, 0.5, 0.5, 1)
    with pytest.raises(ValueError):
        MeasurementModel(1.0, 0.5, 0.5, 1)
    with pytest.raises(ValueError):
        MeasurementModel(0.5, 1.2, 0.5, 1)
    with pytest.raises(ValueError):
        MeasurementModel(0.5, 0.5, -0.1, 1)
    with pytest.raises(ValueError):
        MeasurementModel(0.5, 0.5, 0.5, -1)


def test_weight_hand_example():
    m = MeasurementModel(0.5, 0.9, 0.2, 2)
    w, post = history_weight(m, (0, 0))
    assert abs(w - 0.425) < 1e-15
    assert abs(post - 0.405 / 0.425) < 1e-15


def test_identical_branches_leave_posterior_at_mu():
    m = MeasurementModel(0.37, 0.6, 0.6, 3)
    for bits in itertools.product((0, 1), repeat=3):
        _, post = history_weight(m, bits)
        assert abs(post - 0.37) < 1e-14


def test_perfectly_distinguishing_step():
    m = MeasurementModel(0.3, 1.0, 0.0, 1)
    w, post = history_weight(m, (0,))
    assert (w, post) == (0.3, 1.0)
    w, post = history_weight(m, (1,))
    assert abs(w - 0.7) < 1e-15 and post == 0.0


def test_impossible_history_raises():
    m = MeasurementModel(0.5, 1.0, 1.0, 2)
    with pytest.raises(ImpossibleHistoryError):
        history_weight(m, (0, 1))
    # and in the log-space regime
    m = MeasurementModel(0.5, 1.0, 1.0, 60)
    with pytest.raises(ImpossibleHistoryError):
        history_weight(m, (0,) * 59 + (1,))


def test_history_validation():
    m = MeasurementModel(0.5, 0.4, 0.7, 3)
    with pytest.raises(ValueError):
        history_weight(m, (0, 1))
    with pytest.raises(ValueError):
        history_weight(m, (0, 1, 2))


def test_log_space_matches_direct_formula():
    mu, p1, p2, n, zeros = 0.41, 0.8, 0.35, 60, 27
    m = MeasurementModel(mu, p1, p2, n)
    bits = (0,) * zeros + (1,) * (n - zeros)
    w, post = history_weight(m, bits)
    w1 = mu * p1 ** zeros * (1 - p1) ** (n - zeros)
    w2 = (1 - mu) * p2 ** zeros * (1 - p2) ** (n - zeros)
    assert abs(w - (w1 + w2)) < 1e-10 * (w1 + w2)
    assert abs(post - w1 / (w1 + w2)) < 1e-12


def test_normalization_random_models():
    rng = np.random.default_rng(11)
    for n in (0, 1, 2, 5, 17, 100, 1000):
        for _ in range(15):
            assert abs(weight_normalization(random_model(rng, n)) - 1.0) < 1e-12


def test_enumeration_agrees_with_aggregation():
    rng = np.random.default_rng(12)
    for n in (1, 3, 6):
        m = random_model(rng, n)
        table = history_table(m)
        assert len(table) == 2 ** n
        assert abs(sum(h.weight for h in table) - 1.0) < 1e-12
        assert abs(sum(h.weight * h.posterior for h in table) - m.mu) < 1e-12
        assert abs(posterior_martingale(m) - m.mu) < 1e-12
        for h in table:
            w, post = history_weight(m, h.bits)
            assert h == History(h.bits, h.bits.count(0), w, post)
    with pytest.raises(ValueError):
        history_table(MeasurementModel(0.5, 0.5, 0.4, 21))


def test_martingale_at_large_n():
    for n in (5, 500, 10_000):
        m = MeasurementModel(0.3141, 0.8, 0.3, n)
        assert abs(posterior_martingale(m) - m.mu) < 1e-12


def test_mean_entropy_average():
    m = MeasurementModel(0.3, 0.9, 0.2, 7)
    s_av, s0 = mean_entropy_average(m, BranchEntropies(0.0, 0.0))
    assert s_av == s0 == 0.0
    s_av, s0 = mean_entropy_average(m, BranchEntropies(LOG2, 0.0))
    assert abs(s_av - 0.3 * LOG2) < 1e-12
    assert abs(s_av - s0) < 1e-12
    rng = np.random.default_rng(13)
    for n in (0, 4, 300, 10_000):
        m = random_model(rng, n)
        s = BranchEntropies(float(rng.uniform(0, LOG2)), float(rng.uniform(0, LOG2)))
        s_av, s0 = mean_entropy_average(m, s)
        assert abs(s_av - s0) < 1e-12
    with pytest.raises(ValueError):
        BranchEntropies(-0.1, 0.0)
    with pytest.raises(ValueError):
        BranchEntropies(0.0, LOG2 + 0.1)


def test_purification_trivial_and_errors():
    rep = purification_stats(MeasurementModel(0.5, 1.0, 0.0, 1), eps=0.3)
    assert rep.undecided_mass == 0.0
    assert rep.mean_l_over_n_branch1 == 1.0
    assert rep.mean_l_over_n_branch2 == 0.0
    with pytest.raises(ValueError, match="purify"):
        purification_stats(MeasurementModel(0.5, 0.4, 0.4, 5), eps=0.05)
    with pytest.raises(ValueError):
        purification_stats(MeasurementModel(0.5, 0.8, 0.3, 5), eps=0.7)


def test_purification_mass_decays_with_record_length():
    reports = purification_schedule(0.5, 0.8, 0.3, 0.05, (5, 10, 20, 40, 80))
    masses = [r.undecided_mass for r in reports]
    for before, after in zip(masses, masses[1:]):
        assert after < before
    assert masses[-1] < 0.01
    for r in reports:
        assert abs(r.mean_l_over_n_branch1 - 0.8) < 1e-12
        assert abs(r.mean_l_over_n_branch2 - 0.3) < 1e-12


def test_apparatus_single_perfect_step():
    weights = apparatus_simulate(MeasurementModel(0.5, 1.0, 0.0, 1))
    assert abs(weights[(0,)] - 0.5) < 1e-15
    assert abs(weights[(1,)] - 0.5) < 1e-15


def test_apparatus_matches_weights_generic_two_step():
    m = MeasurementModel(0.5, 0.9, 0.2, 2)
    weights = apparatus_simulate(m)
    for bits, w in weights.items():
        assert abs(w - history_weight(m, bits)[0]) < 1e-12


def test_apparatus_matches_weights_probability_grid():
    for p1 in (0.2, 0.5, 0.9):
        for p2 in (0.2, 0.5, 0.9):
            m = MeasurementModel(0.35, p1, p2, 3)
            weights = apparatus_simulate(m)
            assert abs(sum(weights.values()) - 1.0) < 1e-12
            for bits, w in weights.items():
                assert abs(w - history_weight(m, bits)[0]) < 1e-12


def test_apparatus_branch_assigns_unit_mass_to_own_pointer():
    n = 3
    state = apparatus_branch_state(0.7, n)
    blocks = state.reshape(1 << n, 1 << n)
    for config in range(1 << n):
        branch = blocks[:, config]
        norm2 = float(np.vdot(branch, branch).real)
        assert norm2 > 0
        # all amplitude sits on the matching system configuration
        assert abs(abs(branch[config]) ** 2 - norm2) < 1e-14


def test_apparatus_rejects_oversized_model():
    with pytest.raises(ValueError):
        apparatus_simulate(MeasurementModel(0.5, 0.5, 0.4, 11))
    with pytest.raises(ValueError):
        apparatus_branch_state(0.5, 0)


def test_collapse_two_level_example():
    s_av, s = finite_collapse_average(np.diag([0.5, 0.5]),
                                      [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    assert abs(s - LOG2) < 1e-12
    assert abs(s_av) < 1e-12


def test_collapse_single_block_is_lossless():
    rng = np.random.default_rng(21)
    block = random_density_matrix(rng, 2)
    rho = np.zeros((4, 4), dtype=complex)
    rho[:2, :2] = block
    p0 = np.diag([1.0, 1.0, 0.0, 0.0]).astype(complex)
    p1 = np.eye(4) - p0
    s_av, s = finite_collapse_average(rho, [p0, p1])
    assert abs(s_av - s) < 1e-12


def test_collapse_strictly_reduces_entropy():
    rng = np.random.default_rng(22)
    p0 = np.diag([1.0, 1.0, 0.0, 0.0]).astype(complex)
    p1 = np.eye(4) - p0
    for _ in range(100):
        w = float(rng.uniform(0.2, 0.8))
        rho = np.zeros((4, 4), dtype=complex)
        rho[:2, :2] = w * random_density_matrix(rng, 2)
        rho[2:, 2:] = (1.0 - w) * random_density_matrix(rng, 2)
        s_av, s = finite_collapse_average(rho, [p0, p1])
        assert s_av < s - 1e-6
        # the drop is exactly the mixing entropy of the block weights
        assert abs((s - s_av) - binary_entropy(w)) < 1e-10


def test_collapse_rejections():
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.eye(2) - p0
    coherent = np.full((2, 2), 0.5, dtype=complex)
    with pytest.raises(ValueError, match="decoherent"):
        finite_collapse_average(coherent, [p0, p1])
    with pytest.raises(ValueError, match="identity"):
        finite_collapse_average(np.diag([0.5, 0.5]), [p0, p0])
    with pytest.raises(ValueError, match="projector"):
        finite_collapse_average(np.diag([0.5, 0.5]), [np.full((2, 2), 0.5) * 2, p1])


def test_spectrum_pairing():
    rng = np.random.default_rng(23)
    rep = svd_spectrum_check(np.zeros((3, 3)))
    assert rep.max_gap == 0.0 and rep.left == (0.0, 0.0, 0.0)
    q, _ = np.linalg.qr(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
    rep = svd_spectrum_check(q)
    assert np.allclose(rep.left, 1.0) and np.allclose(rep.right, 1.0)
    for _ in range(50):
        a = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        assert svd_spectrum_check(a).max_gap < 1e-10
    # projector times square root of a state, the collapse configuration
    for _ in range(20):
        rho = random_density_matrix(rng, 8)
        vals, vecs = np.linalg.eigh(rho)
        root = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T
        proj = np.zeros((8, 8), dtype=complex)
        proj[:3, :3] = np.eye(3)
        assert svd_spectrum_check(proj @ root).max_gap < 1e-10
    with pytest.raises(ValueError):
        svd_spectrum_check(np.zeros((2, 3)))


def test_conservation_and_finite_contrast_on_matched_parameters():
    # infinite-ensemble mean entropy is conserved on average while the
    # finite mixture of the same two branch weights strictly drops
    m = MeasurementModel(0.5, 0.8, 0.3, 10)
    s_av, s0 = mean_entropy_average(m, BranchEntropies(0.2, 0.6))
    assert abs(s_av - s0) < 1e-12
    rho = np.diag([0.5 * 0.8, 0.5 * 0.2, 0.5 * 0.3, 0.5 * 0.7]).astype(complex)
    p0 = np.diag([1.0, 1.0, 0.0, 0.0]).astype(complex)
    s_after, s_before = finite_collapse_average(rho, [p0, np.eye(4) - p0])
    assert s_after < s_before - 1e-6
