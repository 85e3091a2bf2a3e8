"""Second-order reduction: exact discrete roots, the bootstrap step, the
psi2 reconstruction, and the residual diagnostics."""

import numpy as np
import pytest

from diracfluid.dynamics import DiracState, evolve
from diracfluid.errors import GridError, NumericalInstabilityError
from diracfluid.lattice import make_grid
from diracfluid.params import PhysParams
from diracfluid.reduction import (build_W, compare_trajectories,
                                  equivalence_report, evolve_reduced,
                                  initial_time_derivative, initialize_reduced,
                                  integral_residual, kg_residual_norm,
                                  reconstruct_psi2, reduced_step,
                                  residual_series, unhat_trajectory)
from diracfluid.scenarios import build_initial, scenario_from_dict


def _uniform_state(grid, amp=1.0):
    pair = amp * np.array([np.cos(0.3), np.exp(0.7j) * np.sin(0.3)])
    psi1 = np.broadcast_to(pair[:, None], (2,) + grid.shape).astype(complex).copy()
    return DiracState(psi1=psi1, psi2=np.zeros_like(psi1), x0=0.0, grid=grid)


def _gaussian_scenario(duration=1.0, pipeline="reduced"):
    return scenario_from_dict({
        "name": "t",
        "grid": {"extents": [20.0], "points": [256], "cfl_factor": 0.25},
        "initial_data": {"recipe": "gaussian_packet", "k": [0.5], "width": 2.0,
                         "spin_angle": 0.35, "relative_phase": 0.2},
        "duration": duration,
        "pipeline": pipeline,
    })


def test_initialize_requires_time_zero():
    grid = make_grid([2.0 * np.pi], [8])
    state = _uniform_state(grid)
    state.x0 = 0.1
    with pytest.raises(GridError):
        initialize_reduced(state, PhysParams())


def test_first_step_needs_slope():
    grid = make_grid([2.0 * np.pi], [8])
    reduced = initialize_reduced(_uniform_state(grid), PhysParams())
    with pytest.raises(GridError):
        reduced_step(reduced, grid.dt, PhysParams())


def test_initial_slope_forms_differ_by_mass_term():
    grid = make_grid([8.0 * np.pi], [64])
    params = PhysParams()
    rng = np.random.default_rng(9)
    psi10 = rng.normal(size=(2, 64)) + 1j * rng.normal(size=(2, 64))
    psi20 = rng.normal(size=(2, 64)) + 1j * rng.normal(size=(2, 64))
    hat = initial_time_derivative(psi10, psi20, grid, params, form="hatted")
    kg = initial_time_derivative(psi10, psi20, grid, params, form="kg")
    mu = params.mass_wavenumber
    np.testing.assert_allclose(kg - hat, 1j * mu * psi10, rtol=0, atol=1e-13)
    with pytest.raises(ValueError):
        initial_time_derivative(psi10, psi20, grid, params, form="plain")


def test_uniform_mode_exact_discrete_root():
    # with psi1hat_prev seeded on the physical root g = (1-i mu h)/(1+i mu h)
    # one step must land exactly on g * psi1hat
    grid = make_grid([2.0 * np.pi], [8], dt=0.05)
    params = PhysParams()
    h = params.c * grid.dt
    mu = params.mass_wavenumber
    g = (1.0 - 1j * mu * h) / (1.0 + 1j * mu * h)
    state = initialize_reduced(_uniform_state(grid), params)
    state.psi1hat_prev = state.psi1hat / g
    stepped = reduced_step(state, grid.dt, params)
    np.testing.assert_allclose(stepped.psi1hat, g * state.psi1hat,
                               rtol=1e-14, atol=1e-14)
    assert abs(abs(g) - 1.0) < 1e-15
    assert np.angle(g) == pytest.approx(-2.0 * np.arctan(mu * h), abs=1e-15)


def test_plane_wave_discrete_root_matches_quadratic():
    # growth factors solve (1+i mu h) g^2 - (2 - h^2 k2t) g + (1-i mu h) = 0
    # with k2t the second-difference symbol; np.roots is the oracle
    grid = make_grid([8.0 * np.pi], [64], dt=0.05)
    params = PhysParams()
    h = params.c * grid.dt
    mu = params.mass_wavenumber
    k = 0.5
    dx = grid.dx[0]
    k2t = 2.0 * (1.0 - np.cos(k * dx)) / dx ** 2
    roots = np.roots([1.0 + 1j * mu * h, -(2.0 - h * h * k2t), 1.0 - 1j * mu * h])
    assert np.allclose(np.abs(roots), 1.0, atol=1e-12)
    g = roots[np.argmin(np.abs(roots - np.exp(-2j * np.arctan(mu * h))))]

    x = grid.axis_coordinates(0)
    wave = np.exp(1j * k * x)
    psi1 = np.stack([wave, np.zeros_like(wave)])
    state = initialize_reduced(
        DiracState(psi1=psi1, psi2=np.zeros_like(psi1), x0=0.0, grid=grid), params)
    state.psi1hat_prev = psi1 / g
    stepped = reduced_step(state, grid.dt, params)
    np.testing.assert_allclose(stepped.psi1hat, g * psi1, rtol=1e-13, atol=1e-13)


def test_bootstrap_is_third_order_accurate():
    # Taylor start against the exact rest rotation exp(-2i mu h)
    grid = make_grid([2.0 * np.pi], [8], dt=0.01)
    params = PhysParams()
    state = initialize_reduced(_uniform_state(grid), params)
    slope = initial_time_derivative(state.psi1hat, state.psi2hat0, grid, params,
                                    form="hatted")
    stepped = reduced_step(state, grid.dt, params, initial_slope=slope)
    exact = state.psi1hat * np.exp(-2j * params.mass_wavenumber * 0.01)
    err = float(np.max(np.abs(stepped.psi1hat - exact)))
    assert err < 3e-6  # (4/3) mu^3 h^3 ~ 1.3e-6 at h = 0.01


def test_reconstruct_psi2_exact_at_start():
    grid = make_grid([8.0 * np.pi], [64])
    params = PhysParams()
    rng = np.random.default_rng(13)
    psi1 = rng.normal(size=(2, 64)) + 1j * rng.normal(size=(2, 64))
    psi2 = rng.normal(size=(2, 64)) + 1j * rng.normal(size=(2, 64))
    state = initialize_reduced(DiracState(psi1=psi1, psi2=psi2, x0=0.0, grid=grid), params)
    np.testing.assert_array_equal(reconstruct_psi2(state), psi2)
    np.testing.assert_array_equal(state.W, build_W(psi2, grid))


def test_kg_residual_small_on_evolved_field():
    scenario = _gaussian_scenario()
    params = scenario.params
    traj = evolve_reduced(build_initial(scenario), scenario.duration, params)
    recon = unhat_trajectory(traj)
    h = recon.record_step
    mid = len(recon.x0) // 2
    res = kg_residual_norm(recon.psi1[mid - 1], recon.psi1[mid], recon.psi1[mid + 1],
                           h, scenario.grid, params)
    assert res < 2e-3  # truncation level of the second-order scheme
    # negative control: the wrong mass term must show an O(1) residual
    res_bad = kg_residual_norm(recon.psi1[mid - 1], recon.psi1[mid], recon.psi1[mid + 1],
                               h, scenario.grid, PhysParams(m=3.0))
    assert res_bad > 0.1
    with pytest.raises(ValueError):
        kg_residual_norm(recon.psi1[mid - 1], recon.psi1[mid], recon.psi1[mid + 1],
                         h, scenario.grid, params, kind="other")


def test_integral_accumulates_psi1hat():
    scenario = _gaussian_scenario()
    params = scenario.params
    traj = evolve_reduced(build_initial(scenario), scenario.duration, params)
    h = traj.record_step
    mid = len(traj.x0) // 2
    # central difference of the trapezoid accumulation returns the midpoint
    # field up to O(h^2)
    d0_int = (traj.int_psi1hat[mid + 1] - traj.int_psi1hat[mid - 1]) / (2.0 * h)
    assert float(np.max(np.abs(d0_int - traj.psi1hat[mid]))) < 2e-3
    res = integral_residual(traj.int_psi1hat[mid - 1], traj.int_psi1hat[mid],
                            traj.int_psi1hat[mid + 1], h, scenario.grid, params,
                            traj.W)
    rel = float(np.max(np.abs(res)) / np.max(np.abs(traj.W)))
    assert rel < 2e-2


def test_residual_series_layout():
    scenario = _gaussian_scenario(duration=0.5)
    traj = evolve_reduced(build_initial(scenario), scenario.duration, scenario.params,
                          record_every=5)
    recon = unhat_trajectory(traj)
    series = residual_series(recon.psi1, recon.x0, scenario.grid, scenario.params)
    assert np.isnan(series[0]) and np.isnan(series[-1])
    assert np.all(np.isfinite(series[1:-1]))


def test_unhat_first_level_is_initial_data():
    scenario = _gaussian_scenario(duration=0.2)
    initial = build_initial(scenario)
    traj = evolve_reduced(initial, scenario.duration, scenario.params)
    recon = unhat_trajectory(traj)
    np.testing.assert_array_equal(recon.psi1[0], initial.psi1)
    np.testing.assert_allclose(recon.psi2[0], initial.psi2, rtol=0, atol=1e-15)


def test_rest_state_equivalence_near_round_off():
    scenario = scenario_from_dict({
        "name": "rest",
        "grid": {"extents": [6.283185307179586], "points": [8], "dt": 5e-5},
        "initial_data": {"recipe": "rest_state", "spin_angle": 0.3,
                         "relative_phase": 0.7},
        "duration": 0.5,
        "pipeline": "both",
    })
    report = equivalence_report(build_initial(scenario), scenario.duration,
                                scenario.params, record_every=1000)
    # both routes reproduce the uniform rotation; only round-off separates them
    assert report.max_sup < 1e-8
    assert report.rows().shape == (len(report.x0), 4)


def test_compare_trajectories_rejects_mismatch():
    params = PhysParams()
    grid_a = make_grid([2.0 * np.pi], [8], dt=0.05)
    grid_b = make_grid([4.0 * np.pi], [8], dt=0.05)
    ta = evolve(_uniform_state(grid_a), 0.2, params)
    tb = evolve(_uniform_state(grid_b), 0.2, params)
    with pytest.raises(GridError):
        compare_trajectories(ta, tb)


def test_reduced_one_step_detector():
    grid = make_grid([2.0 * np.pi], [64])
    spike = np.zeros((2, 64), dtype=complex)
    spike[0, 32] = 1.0
    state = initialize_reduced(
        DiracState(psi1=spike, psi2=np.zeros_like(spike), x0=0.0, grid=grid),
        PhysParams())
    state.psi1hat_prev = spike.copy()
    with pytest.raises(NumericalInstabilityError):
        reduced_step(state, 3.0 * grid.dx[0], PhysParams())
