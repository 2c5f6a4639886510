"""Mean-field rotation integrator and baker-map coarse graining."""

import math

import numpy as np
import pytest

from spinlab.flows import (
    GridDensity, MagnetizationState, baker_coarse_grain, baker_step,
    coarse_average, max_deviation, meanfield_flow,
)


def test_state_validation():
    MagnetizationState(2.0, 0.0, -2.0)
    with pytest.raises(ValueError):
        MagnetizationState(2.1, 0.0, 0.0)
    with pytest.raises(ValueError):
        MagnetizationState(0.0, 0.0, -2.5)


def test_equal_couplings_freeze_the_motion():
    m0 = MagnetizationState(1.2, -0.7, 0.5)
    traj = meanfield_flow(0.8, 0.8, m0, t_end=5.0, dt=1e-2)
    assert np.all(traj.m1 == m0.m1)
    assert np.all(traj.m2 == m0.m2)
    assert traj.m3 == m0.m3


def test_saturated_transverse_state_stays_constant():
    traj = meanfield_flow(0.9, 0.1, MagnetizationState(2.0, 0.0, 0.0),
                          t_end=20.0, dt=1e-3)
    assert np.max(np.abs(traj.m1 - 2.0)) < 1e-8
    assert np.max(np.abs(traj.m2)) < 1e-8
    assert traj.m3 == 0.0


def test_rotation_matches_closed_form():
    # rate 2(a-c)m3 = 1: m1 = cos t, m2 = -sin t
    traj = meanfield_flow(0.75, 0.25, MagnetizationState(1.0, 0.0, 1.0),
                          t_end=10.0, dt=1e-3)
    assert abs(traj.times[-1] - 10.0) < 1e-12
    assert np.max(np.abs(traj.m1 - np.cos(traj.times))) < 1e-7
    assert np.max(np.abs(traj.m2 + np.sin(traj.times))) < 1e-7


def test_planar_radius_drift_is_tiny():
    traj = meanfield_flow(0.7, 0.2, MagnetizationState(1.2, -0.5, 0.8),
                          t_end=20.0, dt=1e-3)
    assert traj.planar_radius_drift < 1e-8


def test_time_reversal_returns_to_start():
    m0 = MagnetizationState(0.9, 0.4, -1.1)
    forward = meanfield_flow(0.3, 0.9, m0, t_end=7.3, dt=1e-3)
    back = meanfield_flow(0.3, 0.9, forward.final(), t_end=-7.3, dt=1e-3)
    assert abs(back.m1[-1] - m0.m1) < 1e-7
    assert abs(back.m2[-1] - m0.m2) < 1e-7
    assert abs(back.times[-1] - m0.t) < 1e-12


def test_partial_final_step_lands_on_t_end():
    traj = meanfield_flow(0.75, 0.25, MagnetizationState(1.0, 0.0, 1.0),
                          t_end=0.0015, dt=1e-3)
    assert len(traj.times) == 3
    assert abs(traj.times[-1] - 0.0015) < 1e-15
    assert abs(traj.m1[-1] - math.cos(0.0015)) < 1e-12
    assert abs(traj.m2[-1] + math.sin(0.0015)) < 1e-12


def test_flow_rejects_bad_step():
    with pytest.raises(ValueError):
        meanfield_flow(0.5, 0.1, MagnetizationState(1.0, 0.0, 1.0),
                       t_end=1.0, dt=0.0)


def test_trajectory_rows():
    traj = meanfield_flow(0.5, 0.5, MagnetizationState(1.0, 0.0, 0.5),
                          t_end=0.002, dt=1e-3)
    rows = traj.rows()
    assert len(rows) == 3
    assert rows[0] == (0.0, 1.0, 0.0, 0.5)


def test_density_validation():
    with pytest.raises(ValueError, match="non-negative"):
        GridDensity(np.array([[1.5, 1.5], [1.5, -0.5]]))
    with pytest.raises(ValueError, match="unit mean"):
        GridDensity(np.full((2, 2), 0.7))
    with pytest.raises(ValueError, match="power-of-two"):
        GridDensity(np.ones((3, 4)))
    with pytest.raises(ValueError, match="zero density"):
        GridDensity.normalized(np.zeros((2, 2)))
    d = GridDensity.normalized(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert abs(float(np.mean(d.values)) - 1.0) < 1e-15


def test_uniform_density_is_a_fixed_point():
    rho = GridDensity.uniform(4)
    for coarse in baker_coarse_grain(rho, steps=2, k=2):
        assert np.array_equal(coarse, np.ones((4, 4)))


def test_transport_is_a_permutation_of_cell_values():
    rng = np.random.default_rng(31)
    rho = GridDensity.normalized(rng.uniform(0.0, 2.0, size=(16, 16)))
    stepped = baker_step(rho)
    assert stepped.values.shape == (8, 32)
    assert np.array_equal(np.sort(stepped.values.ravel()),
                          np.sort(rho.values.ravel()))


def test_half_plane_coarse_deviations():
    coarse = baker_coarse_grain(GridDensity.left_half(5), steps=3, k=2)
    devs = [max_deviation(c) for c in coarse]
    assert devs[0] == 1.0
    for before, after in zip(devs, devs[1:]):
        assert after <= before + 1e-12
    assert devs[-1] < 0.05


def test_half_plane_at_report_scale():
    coarse = baker_coarse_grain(GridDensity.left_half(10), steps=6, k=4)
    devs = [max_deviation(c) for c in coarse]
    for before, after in zip(devs, devs[1:]):
        assert after <= before + 1e-12
    assert devs[-1] < 0.05
    # mixing is exact once stripes subdivide the coarse cells
    assert devs[-1] == 0.0 and devs[-2] == 0.0


def test_resolution_validity_enforced():
    rho = GridDensity.left_half(5)
    with pytest.raises(ValueError, match="exhaust"):
        baker_coarse_grain(rho, steps=4, k=2)
    with pytest.raises(ValueError, match="cannot be averaged"):
        coarse_average(rho, 6)
    with pytest.raises(ValueError, match="finer grid"):
        baker_step(GridDensity(np.ones((1, 16))))
