import numpy as np
import pytest

from magrelax import (AngleState, LimitRunConfig, PeriodicGrid, cn_step,
                      radius_step, run_limit, run_phi_system, scheme_velocity,
                      velocity_from_angle)
from magrelax.harness import angle_datum

TWO_PI = 2.0 * np.pi


def test_scheme_velocity_matches_field_route():
    # the literal staggered-sum form and the cumulative-integral form are
    # independent routes to the same velocity; they must agree to rounding
    g = PeriodicGrid(128)
    zeta = 0.7 * np.sin(TWO_PI * g.nodes) - 0.2 * np.cos(2 * TWO_PI * g.nodes)
    th = AngleState(g, zeta, 1)
    u_scheme = scheme_velocity(th)
    u_fields = velocity_from_angle(th).u
    assert np.abs(u_scheme - u_fields).max() < 1e-12


def test_scheme_velocity_zero_for_pure_winding():
    g = PeriodicGrid(400)
    u = scheme_velocity(AngleState(g, np.zeros(400), 1))
    assert np.abs(u).max() < 1e-12


def test_cn_amplification_exact_on_discrete_modes():
    # with the advection switched off the step acts diagonally on sampled
    # modes: rho = (1 + dt lam / 2) / (1 - dt lam / 2),
    # lam = -(4/dx^2) sin^2(pi k dx)
    m = 64
    g = PeriodicGrid(m)
    cfg = LimitRunConfig(m_x=m, dt=1e-4, t_end=1e-3)
    for k in (1, 5, 11):
        zeta = np.sin(TWO_PI * k * g.nodes)
        th = AngleState(g, zeta, 0)
        stepped = cn_step(th, cfg, u=np.zeros(m))
        lam = -(4.0 / g.delta_x**2) * np.sin(np.pi * k * g.delta_x) ** 2
        rho = (1.0 + 0.5 * cfg.dt * lam) / (1.0 - 0.5 * cfg.dt * lam)
        assert np.abs(stepped.zeta - rho * zeta).max() < 1e-12


def test_radius_exact_exponential():
    g = PeriodicGrid(128)
    th = AngleState(g, np.zeros(128), 1)  # (d1 theta)^2 = 4 pi^2 exactly
    r1 = radius_step(1.0, th, 0.01)
    assert r1 == pytest.approx(np.exp(-0.01 * 4 * np.pi**2), rel=1e-12)
    assert r1 == pytest.approx(0.6738, abs=5e-5)
    assert radius_step(0.5, AngleState(g, np.zeros(128), 0), 1.0) == 0.5


def test_oscillation_nonincreasing_zero_winding():
    g = PeriodicGrid(200)
    th0 = angle_datum("moffatt_blowup", g, scale=1.0 / 3.0)
    cfg = LimitRunConfig(m_x=200, dt=2.5e-6, t_end=5e-4, record_every=1)
    traj, _ = run_limit(th0, cfg)
    osc = traj.oscillation
    assert np.all(np.diff(osc) <= 1e-10)


def test_winding_constant_and_slope_carried():
    g = PeriodicGrid(128)
    th0 = AngleState(g, 0.3 * np.sin(TWO_PI * g.nodes), 2)
    cfg = LimitRunConfig(m_x=128, dt=1e-5, t_end=2e-3, record_every=20)
    traj, report = run_limit(th0, cfg)
    assert not report.detected
    for s in traj.states:
        assert s.n_turns == 2
        assert np.all(np.isfinite(s.zeta))
    # the winding slope forces int (d1 theta)^2 >= (2 pi N)^2 at all times
    assert np.all(traj.dxtheta_l2sq >= (TWO_PI * 2) ** 2 - 1e-9)


def test_radius_series_positive_nonincreasing():
    g = PeriodicGrid(128)
    th0 = AngleState(g, 0.5 * np.sin(TWO_PI * g.nodes), 0)
    cfg = LimitRunConfig(m_x=128, dt=1e-5, t_end=1e-3, record_every=10)
    traj, _ = run_limit(th0, cfg)
    r = traj.radius
    assert np.all(r > 0)
    assert np.all(np.diff(r) <= 0)


def test_l4_accumulator_monotone():
    g = PeriodicGrid(128)
    th0 = AngleState(g, 0.5 * np.sin(TWO_PI * g.nodes), 0)
    traj, _ = run_limit(th0, LimitRunConfig(m_x=128, dt=1e-5, t_end=5e-4))
    assert np.all(np.diff(traj.l4_accumulator) >= 0)


def test_self_convergence_second_order():
    # halving dx with dt -> dt/4 must shrink the solution change by ~4
    datum = lambda g: AngleState(
        g, 0.8 * np.sin(TWO_PI * g.nodes) + 0.3 * np.cos(2 * TWO_PI * g.nodes), 0)

    def final_theta(m, dt):
        g = PeriodicGrid(m)
        n = int(round(1e-3 / dt))
        cfg = LimitRunConfig(m_x=m, dt=1e-3 / n, t_end=1e-3, record_every=n)
        traj, _ = run_limit(datum(g), cfg)
        return traj.states[-1].theta

    th_a = final_theta(100, 1e-5)
    th_b = final_theta(200, 2.5e-6)
    th_c = final_theta(400, 6.25e-7)
    change_coarse = np.abs(th_a - th_b[::2]).max()
    change_fine = np.abs(th_b - th_c[::2]).max()
    assert change_coarse / change_fine == pytest.approx(4.0, rel=0.25)


def test_default_threshold_matches_config_contract():
    assert LimitRunConfig(m_x=64, dt=1e-5, t_end=1e-3).blowup_threshold == 1e6


def test_blowup_detection_stops_and_reports():
    g = PeriodicGrid(400)
    th0 = angle_datum("moffatt_blowup", g)
    cfg = LimitRunConfig(m_x=400, dt=6.25e-7, t_end=1e-3,
                         blowup_threshold=1e3, record_every=50)
    traj, report = run_limit(th0, cfg)
    assert report.detected
    assert report.threshold == 1e3
    assert traj.step_times[-1] == pytest.approx(report.t_detect)
    # the estimate extrapolates the (T - t)^{-1/2} growth; near detection
    # the two times nearly coincide
    assert report.t_star_estimate == pytest.approx(report.t_detect, rel=0.05)
    assert report.l4_at_detect > 0
    d = report.to_dict()
    assert d["detected"] is True and "t_detect" in d


def test_run_without_blowup_reports_clean():
    g = PeriodicGrid(64)
    th0 = AngleState(g, 0.2 * np.sin(TWO_PI * g.nodes), 0)
    _, report = run_limit(th0, LimitRunConfig(m_x=64, dt=1e-5, t_end=1e-4))
    assert not report.detected
    assert report.t_detect is None


def test_phi_system_carries_mass_exactly():
    g = PeriodicGrid(256)
    phi0 = 1.0 + 0.8 * np.cos(TWO_PI * g.nodes)
    cfg = LimitRunConfig(m_x=256, dt=2e-6, t_end=2e-4, record_every=10)
    traj, report = run_phi_system(phi0, g, cfg)
    assert not report.detected
    assert traj.mass == pytest.approx(g.integral(phi0), rel=1e-12)
    # reconstructed gradients keep the mean at the analytic mass
    for phi in traj.phis:
        assert g.integral(phi) == pytest.approx(traj.mass, abs=1e-8)


def test_phi_system_decays_supnorm_smooth_data():
    g = PeriodicGrid(256)
    phi0 = 0.5 + 0.2 * np.cos(TWO_PI * g.nodes)
    cfg = LimitRunConfig(m_x=256, dt=2e-6, t_end=1e-3, record_every=50)
    traj, _ = run_phi_system(phi0, g, cfg)
    spread0 = np.abs(traj.phis[0] - traj.mass).max()
    spread1 = np.abs(traj.phis[-1] - traj.mass).max()
    assert spread1 < spread0


def test_record_every_thins_snapshots_not_observables():
    g = PeriodicGrid(64)
    th0 = AngleState(g, 0.3 * np.sin(TWO_PI * g.nodes), 0)
    cfg = LimitRunConfig(m_x=64, dt=1e-5, t_end=1e-3, record_every=25)
    traj, _ = run_limit(th0, cfg)
    n_steps = int(round(1e-3 / 1e-5))
    assert len(traj.step_times) == n_steps + 1  # per-step series keep all
    assert len(traj.times) < len(traj.step_times)
    assert traj.times[-1] == pytest.approx(1e-3)


def test_config_rejects_bad_inputs():
    with pytest.raises(ValueError):
        LimitRunConfig(m_x=64, dt=-1e-5, t_end=1e-3)
    with pytest.raises(ValueError):
        LimitRunConfig(m_x=64, dt=1e-5, t_end=0.0)
