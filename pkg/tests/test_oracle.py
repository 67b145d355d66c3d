import numpy as np
import pytest

from magrelax import (AngleState, FullRunConfig, LimitRunConfig, MagneticState,
                      PeriodicGrid, StabilityViolated, galerkin_rhs, run_full,
                      run_limit, run_limit_explicit, run_spectral)
from magrelax.oracle import (coefficients_from_state, sample_state,
                             spectral_dt_limit)
from magrelax.harness import magnetic_datum

TWO_PI = 2.0 * np.pi


def test_coefficient_roundtrip(grid64):
    b0 = magnetic_datum("two_scale", grid64)
    state = coefficients_from_state(b0, n_modes=21)
    back = sample_state(state, grid64, 0.05)
    assert np.abs(back.b1 - b0.b1).max() < 1e-12
    with pytest.raises(ValueError):
        coefficients_from_state(b0, n_modes=64)


def test_constant_field_is_a_fixed_point():
    # |b| constant: psi = 0 identically, and diffusion kills nothing
    g = PeriodicGrid(64)
    b0 = MagneticState(g, np.full(64, 0.7), np.full(64, -0.2))
    traj = run_spectral(b0, epsilon=0.1, t_end=1e-2, n_modes=5, out_grid=g)
    bT = traj.states[-1]
    assert np.abs(bT.b1 - 0.7).max() < 1e-13
    assert np.abs(bT.b2 + 0.2).max() < 1e-13


def test_rhs_decays_single_harmonic_like_heat():
    # a mean-free single harmonic on top of nothing: |b|^2 has only even
    # harmonics, and the leading linear action on the coefficient is the
    # diffusion symbol -eps (2 pi k)^2
    n = 8
    coeff = np.zeros(2 * n + 1, dtype=complex)
    coeff[3] = 1e-6  # tiny amplitude: nonlinearity negligible at 1e-12
    rhs = galerkin_rhs(coeff, n, epsilon=0.2)
    expect = -0.2 * (TWO_PI * 3) ** 2 * coeff[3]
    assert rhs[3] == pytest.approx(expect, rel=1e-5)


def test_dt_limit_enforced():
    g = PeriodicGrid(64)
    b0 = magnetic_datum("two_scale", g)
    cap = spectral_dt_limit(n_modes=21, epsilon=0.5)
    with pytest.raises(StabilityViolated):
        run_spectral(b0, epsilon=0.5, t_end=1.0, n_modes=21, out_grid=g,
                     dt=cap * 3.0)


def test_out_grid_must_resolve_modes():
    g = PeriodicGrid(16)
    b0 = magnetic_datum("two_scale", g)
    with pytest.raises(ValueError):
        run_spectral(b0, epsilon=0.1, t_end=1e-3, n_modes=21, out_grid=g)


def test_full_matches_spectral_with_refinement():
    # independent discretizations agree and the gap closes at second order
    eps = 0.05
    errs = {}
    for m in (64, 128):
        g = PeriodicGrid(m)
        b0 = magnetic_datum("two_scale", g)
        n = int(np.ceil(1e-3 * m**2 / 0.1))
        cfg = FullRunConfig(epsilon=eps, m_x=m, t_end=1e-3, dt=1e-3 / n,
                            record_every=n)
        bT = run_full(b0, cfg).states[-1]
        ref = run_spectral(b0, eps, 1e-3, n_modes=21, out_grid=g).states[-1]
        errs[m] = max(np.abs(bT.b1 - ref.b1).max(),
                      np.abs(bT.b2 - ref.b2).max())
    assert errs[64] < 2e-5
    assert errs[64] / errs[128] == pytest.approx(4.0, rel=0.25)


def test_limit_cn_matches_explicit_with_refinement():
    # CN at (dx, dt) against the one-step-method on a 4x finer grid;
    # the coarse nodes are an exact subset of the fine ones
    def resample(zeta, mf):
        return np.fft.irfft(np.fft.rfft(zeta), mf) * (mf / len(zeta))

    errs = {}
    for m in (100, 200):
        g = PeriodicGrid(m)
        zeta0 = 0.5 * np.sin(TWO_PI * g.nodes) + 0.2 * np.cos(2 * TWO_PI * g.nodes)
        dt = 0.1 * g.delta_x**2
        n = int(np.ceil(1e-3 / dt))
        cfg = LimitRunConfig(m_x=m, dt=1e-3 / n, t_end=1e-3, record_every=n)
        traj, _ = run_limit(AngleState(g, zeta0, 0), cfg)
        gf = PeriodicGrid(4 * m)
        ex = run_limit_explicit(AngleState(gf, resample(zeta0, 4 * m), 0),
                                t_end=1e-3)
        errs[m] = np.abs(traj.states[-1].theta - ex.states[-1].theta[::4]).max()
    assert errs[100] < 1e-4
    assert errs[100] / errs[200] == pytest.approx(4.0, rel=0.25)


def test_explicit_limit_reproduces_blowup_timing():
    # the independent integrator sees the same steepening burst the CN
    # solver detects: its gradient sup crosses 1e3 inside the same window
    from magrelax.harness import angle_datum
    g = PeriodicGrid(400)
    th0 = angle_datum("moffatt_blowup", g)
    ex = run_limit_explicit(th0, t_end=7.5e-4, dt=6.25e-7, record_every=8)
    crossing = ex.times[np.nonzero(ex.dxtheta_inf > 1e3)[0]]
    assert len(crossing) > 0
    assert 5.5e-4 <= crossing[0] <= 7.5e-4
