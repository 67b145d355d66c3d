"""Acceptance gate: one test per criterion, most expensive runs shared.

``pytest -v tests/test_acceptance.py`` yields one PASS/FAIL line per
criterion; each test also prints a one-line verdict with the measured
numbers (visible with -s or on failure).
"""

import json
import os
import time

import numpy as np
import pytest

import magrelax as mx
from magrelax import (AngleState, FullRunConfig, LimitRunConfig, PeriodicGrid,
                      run_experiment, run_full, run_limit, run_limit_explicit,
                      run_spectral)
from magrelax.harness import (RELAXATION_SUITE, SMALL_OSC_SUITE, angle_datum,
                              magnetic_datum)
from magrelax.hyperbolic import from_magnetic, step_hyperbolic

TWO_PI = 2.0 * np.pi


def _verdict(num: int, ok: bool, detail: str) -> None:
    tag = "PASS" if ok else "FAIL"
    print(f"criterion {num:02d}: {tag} -- {detail}")
    assert ok, f"criterion {num:02d} FAIL -- {detail}"


@pytest.fixture(scope="module")
def blowup_run(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("blowup"))
    t0 = time.perf_counter()
    run_experiment("blowup_fig4", out)
    wall = time.perf_counter() - t0
    with open(os.path.join(out, "blowup_report.json")) as f:
        return json.load(f), wall


@pytest.fixture(scope="module")
def two_timescale_run(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("two_ts"))
    t0 = time.perf_counter()
    run_experiment("two_timescale", out)
    wall = time.perf_counter() - t0
    with open(os.path.join(out, "report.json")) as f:
        report = json.load(f)
    rows = np.loadtxt(os.path.join(out, "distances.csv"),
                      delimiter=",", skiprows=1)
    return report, rows, wall


def test_criterion_01_blowup_detection_time(blowup_run):
    report, wall = blowup_run
    t_detect = report["t_detect"]
    ok = (report["detected"] and 5.5e-4 <= t_detect <= 7.5e-4 and wall < 60.0)
    _verdict(1, ok, f"detected at t = {t_detect:.4e} "
                    f"(window [5.5e-4, 7.5e-4]), wall {wall:.1f}s < 60s")
    assert t_detect == pytest.approx(6.6625e-4, rel=1e-3)


def test_criterion_02_blowup_heuristic_scaling(blowup_run):
    report, _ = blowup_run
    ratio = report["detect_over_heuristic"]
    ok = ratio is not None and (1.0 / 3.0) <= ratio <= 3.0
    _verdict(2, ok, f"t_detect / heuristic = {ratio:.4f} in [1/3, 3] "
                    f"(sup slope {report['phi0_inf']:.4f})")
    assert report["phi0_inf"] == pytest.approx(38.5744, rel=1e-3)
    assert ratio == pytest.approx(1.9827, rel=1e-3)


def test_criterion_03_global_small_data_run(tmp_path):
    out = str(tmp_path / "glob")
    run_experiment("global_fig5_6", out)
    with open(os.path.join(out, "report.json")) as f:
        report = json.load(f)
    ok = (not report["blowup_detected"]) and report["strictly_decreasing"]
    _verdict(3, ok, "no blow-up flag, slope energy strictly decreasing "
                    f"after t = 1e-4 (L2 {report['dxtheta_l2_initial']:.3f} "
                    f"-> {report['dxtheta_l2_final']:.3f})")


def test_criterion_04_small_oscillation_inequality():
    g = PeriodicGrid(200)
    worst = -np.inf
    ok = True
    for name in SMALL_OSC_SUITE:
        th0 = angle_datum(name, g)
        assert th0.theta.max() - th0.theta.min() <= 1.0 / np.sqrt(3.0)
        traj, report = run_limit(
            th0, LimitRunConfig(m_x=200, dt=2e-5, t_end=0.01, record_every=10))
        assert not report.detected
        chk = mx.check_small_oscillation(traj)
        worst = max(worst, chk.worst_residual)
        ok = ok and chk.ok
    _verdict(4, ok, f"5-datum suite, worst residual {worst:.2f} <= slack "
                    "at every recorded interval")
    assert worst < 0.0


def test_criterion_05_conservation_suite():
    # deterministic sweep of the five invariants; the randomized version
    # lives in test_properties.py
    g = PeriodicGrid(64)
    details = []

    s = from_magnetic(magnetic_datum("two_scale", g))
    mass0 = g.integral(np.hypot(s.z1, s.z2) * s.jac)
    energy_prev = g.integral((s.z1 ** 2 + s.z2 ** 2) * s.jac)
    drift = 0.0
    energy_ok = True
    for _ in range(200):
        s = step_hyperbolic(s, 1.5e-3)
        mass = g.integral(np.hypot(s.z1, s.z2) * s.jac)
        drift = max(drift, abs(mass - mass0))
        energy = g.integral((s.z1 ** 2 + s.z2 ** 2) * s.jac)
        energy_ok = energy_ok and energy <= energy_prev + 1e-12
        energy_prev = energy
    details.append(f"mass drift {drift:.1e}")
    assert drift <= 1e-8

    traj = run_full(magnetic_datum("two_scale", g),
                    FullRunConfig(epsilon=0.05, m_x=64, t_end=5e-3))
    energies = [g.integral(u.b1 ** 2 + u.b2 ** 2) for u in traj.states]
    viscous_ok = bool(np.all(np.diff(energies) <= 1e-12))
    details.append("viscous energy monotone")

    th0 = AngleState(g, 0.4 * np.sin(TWO_PI * g.nodes), 0)
    lim, _ = run_limit(th0, LimitRunConfig(m_x=64, dt=2e-5, t_end=2e-3))
    osc_ok = bool(np.all(np.diff(lim.oscillation) <= 1e-10))
    radius_ok = bool(np.all(lim.radius > 0.0)
                     and np.all(np.diff(lim.radius) <= 1e-12))
    th1 = AngleState(g, 0.4 * np.sin(TWO_PI * g.nodes), 2)
    lim1, _ = run_limit(th1, LimitRunConfig(m_x=64, dt=2e-5, t_end=2e-3,
                                            record_every=25))
    wind_ok = all(
        mx.winding_number(TWO_PI * 2 * g.nodes + u.zeta) == 2
        for u in lim1.states)
    details.append("oscillation/radius/winding invariants hold")

    ok = energy_ok and viscous_ok and osc_ok and radius_ok and wind_ok
    _verdict(5, ok, "; ".join(details))


def test_criterion_06_oracle_equivalence():
    eps = 0.05
    errs_full = {}
    for m in (64, 128):
        g = PeriodicGrid(m)
        b0 = magnetic_datum("two_scale", g)
        n = int(np.ceil(1e-3 * m**2 / 0.1))
        cfg = FullRunConfig(epsilon=eps, m_x=m, t_end=1e-3, dt=1e-3 / n,
                            record_every=n)
        bT = run_full(b0, cfg).states[-1]
        ref = run_spectral(b0, eps, 1e-3, n_modes=21, out_grid=g).states[-1]
        errs_full[m] = max(np.abs(bT.b1 - ref.b1).max(),
                           np.abs(bT.b2 - ref.b2).max())
    factor_full = errs_full[64] / errs_full[128]

    def resample(zeta, mf):
        return np.fft.irfft(np.fft.rfft(zeta), mf) * (mf / len(zeta))

    errs_lim = {}
    for m in (100, 200):
        g = PeriodicGrid(m)
        zeta0 = (0.5 * np.sin(TWO_PI * g.nodes)
                 + 0.2 * np.cos(2 * TWO_PI * g.nodes))
        dt = 0.1 * g.delta_x**2
        n = int(np.ceil(1e-3 / dt))
        cfg = LimitRunConfig(m_x=m, dt=1e-3 / n, t_end=1e-3, record_every=n)
        traj, _ = run_limit(AngleState(g, zeta0, 0), cfg)
        gf = PeriodicGrid(4 * m)
        ex = run_limit_explicit(AngleState(gf, resample(zeta0, 4 * m), 0),
                                t_end=1e-3)
        errs_lim[m] = np.abs(traj.states[-1].theta
                             - ex.states[-1].theta[::4]).max()
    factor_lim = errs_lim[100] / errs_lim[200]

    ok = (errs_full[64] < 2e-5 and 3.0 <= factor_full <= 5.0
          and errs_lim[100] < 1e-4 and 3.0 <= factor_lim <= 5.0)
    _verdict(6, ok, f"viscous vs spectral err {errs_full[64]:.3e}, "
                    f"refinement factor {factor_full:.3f}; semi-implicit vs "
                    f"explicit err {errs_lim[100]:.3e}, factor "
                    f"{factor_lim:.3f} (both in 4 +- 25%)")
    assert errs_full[64] == pytest.approx(8.8783e-6, rel=1e-3)
    assert errs_lim[100] == pytest.approx(4.3988e-5, rel=1e-3)


def test_criterion_07_relaxation_operator():
    g = PeriodicGrid(200)
    worst_dev = 0.0
    worst_mass = 0.0
    ok = True
    for name in RELAXATION_SUITE:
        b0 = magnetic_datum(name, g)
        mod0 = np.hypot(b0.b1, b0.b2)
        assert mod0.min() >= 0.5
        mass = float(g.integral(mod0))
        c0 = float(b0.mod_sq.min())
        relaxed, fit, _ = mx.relax(b0, tol=1e-8)
        mod = np.hypot(relaxed.b1, relaxed.b2)
        dev = float((mod.max() - mod.min()) / mod.mean())
        mass_err = float(abs(mod.mean() - mass) / mass)
        worst_dev = max(worst_dev, dev)
        worst_mass = max(worst_mass, mass_err)
        ok = ok and dev <= 1e-4 and mass_err <= 1e-4
        ok = ok and fit["rate"] >= 0.8 * c0
    _verdict(7, ok, f"relaxed modulus constant to {worst_dev:.2e} rel, "
                    f"mass match to {worst_mass:.2e} rel, decay exponents "
                    ">= 0.8 c0 on all five datums")


def test_criterion_08_two_timescale_convergence(two_timescale_run):
    report, rows, wall = two_timescale_run
    taus = rows[:, 0]
    window = taus >= 0.02 - 1e-12
    sups = [float(rows[window, 1 + 2 * k].max()) for k in range(3)]
    monotone = report["angle_monotone"]
    ordered = sups[0] >= sups[1] >= sups[2]
    ok = monotone and ordered and wall < 600.0
    _verdict(8, ok, "sup angle distance "
                    f"{sups[0]:.4f} >= {sups[1]:.4f} >= {sups[2]:.4f} "
                    f"for epsilon 1e-1, 3e-2, 1e-2; wall {wall:.0f}s < 600s")
    assert sups[0] == pytest.approx(0.0222, abs=2e-3)
    assert sups[2] == pytest.approx(0.0169, abs=2e-3)


def test_criterion_09_velocity_gradient_floor_scaling(tmp_path):
    out = str(tmp_path / "fast")
    run_experiment("fast_relaxation", out)
    with open(os.path.join(out, "report.json")) as f:
        report = json.load(f)
    ratio = report["floor_ratio"]
    rates = report["rates"]
    c0 = report["c0"]
    ok = 5.0 <= ratio <= 20.0 and all(r >= 0.25 * c0 for r in rates)
    _verdict(9, ok, f"floor ratio {ratio:.3f} in [5, 20] for eps 1e-2/1e-3 "
                    f"(linear-in-eps within factor 2), fitted rates "
                    f"{rates[0]:.3f}, {rates[1]:.3f}")
    assert ratio == pytest.approx(6.9139, rel=5e-2)


def test_criterion_10_determinism(tmp_path):
    out_a = str(tmp_path / "a")
    out_b = str(tmp_path / "b")
    run_experiment("oscillation_fig7", out_a)
    run_experiment("oscillation_fig7", out_b)
    csvs = sorted(n for n in os.listdir(out_a) if n.endswith(".csv"))
    identical = True
    for name in csvs:
        with open(os.path.join(out_a, name), "rb") as f:
            first = f.read()
        with open(os.path.join(out_b, name), "rb") as f:
            second = f.read()
        identical = identical and first == second
    ok = identical and len(csvs) > 0
    _verdict(10, ok, f"{len(csvs)} CSVs byte-identical across repeated runs")
