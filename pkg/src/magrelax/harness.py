"""Command line, configuration, named experiments, and file emission.

Experiments reproduce the model's headline phenomena at desk scale: gradient
blow-up of the angle dynamics, global decay for small data, fast dissipation
of high-frequency oscillations, the two-time-scale split between viscous
relaxation and resistive angle motion, the resistive floor under the velocity
gradient, and the second-moment (virial) blow-up boundary.

Everything written to disk is deterministic: float formatting is shortest
round-trip repr, line endings are LF, JSON keys are sorted, manifests record
parameters but never timestamps or hostnames. Running the same experiment
twice produces byte-identical files.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics as diag
from . import full as full_mod
from . import hyperbolic as hyp
from . import limit as limit_mod
from .errors import ConfigError, MagrelaxError, WindowTooShort
from .fields import TWO_PI, AngleState, Gauge, MagneticState, to_angle
from .grid import PeriodicGrid

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# deterministic text emission


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return repr(float(v))


def write_csv(path, header: list, rows) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def write_profile_csv(path, t: float, values: np.ndarray, prefix: str) -> None:
    """Single-row CSV: time, then one column per node."""
    header = ["t"] + [f"{prefix}_{j:04d}" for j in range(len(values))]
    write_csv(path, header, [[t, *values]])


def write_trajectory_csv(path, times, profiles, prefix: str) -> None:
    """One row per recorded time: t, then nodal values."""
    profiles = list(profiles)
    width = len(profiles[0])
    header = ["t"] + [f"{prefix}_{j:04d}" for j in range(width)]
    write_csv(path, header, ([t, *p] for t, p in zip(times, profiles)))


def write_series_csv(path, times, values, name: str) -> None:
    write_csv(path, ["t", name], zip(times, values))


def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        json.dump(payload, f, sort_keys=True, indent=2)
        f.write("\n")


# ---------------------------------------------------------------------------
# built-in initial data


def _moffatt_blowup_theta(x: np.ndarray) -> np.ndarray:
    two = TWO_PI * x
    return (0.6 * np.sin(two) * np.cos(3 * two) * np.cos(two)
            - 2.4 * np.cos(2 * two) * np.cos(two)
            + 3.0 * np.sin(two))


ANGLE_DATUMS = {
    "moffatt_blowup": lambda x: _moffatt_blowup_theta(x),
    "single_mode": lambda x: np.sin(TWO_PI * x),
    "two_mode": lambda x: np.sin(TWO_PI * x) + 0.5 * np.cos(2 * TWO_PI * x),
    "small_osc": lambda x: 0.25 * np.sin(TWO_PI * x),
    "tilted_small": lambda x: 0.2 * np.sin(TWO_PI * x) + 0.1 * np.cos(2 * TWO_PI * x),
}

# oscillation bound suite: every datum has range below 1/sqrt(3) ~ 0.577
SMALL_OSC_SUITE = {
    "osc_a": lambda x: 0.25 * np.sin(TWO_PI * x),
    "osc_b": lambda x: 0.15 * np.sin(TWO_PI * x) + 0.10 * np.cos(2 * TWO_PI * x),
    "osc_c": lambda x: 0.28 * np.cos(TWO_PI * x),
    "osc_d": lambda x: 0.20 * np.sin(2 * TWO_PI * x) + 0.05 * np.sin(3 * TWO_PI * x),
    "osc_e": lambda x: 0.10 * np.sin(TWO_PI * x) + 0.12 * np.cos(3 * TWO_PI * x),
}


def angle_datum(name: str, grid: PeriodicGrid, scale: float = 1.0,
                n_turns: int = 0, radius: float = 1.0) -> AngleState:
    table = dict(ANGLE_DATUMS)
    table.update(SMALL_OSC_SUITE)
    if name == "winding_one":
        return AngleState(grid, 0.3 * np.sin(TWO_PI * grid.nodes), 1, radius)
    if name not in table:
        raise ConfigError(f"unknown angle datum {name!r}; "
                          f"known: {sorted(table)} + ['winding_one']")
    zeta = scale * table[name](grid.nodes)
    return AngleState(grid, zeta, n_turns, radius)


def _modulated(mod, ang):
    return lambda x: (mod(x) * np.cos(ang(x)), mod(x) * np.sin(ang(x)))


MAGNETIC_DATUMS = {
    # min modulus >= 0.5 everywhere (relaxation suite requirement)
    "two_scale": _modulated(lambda x: 1.0 + 0.3 * np.cos(TWO_PI * x),
                            lambda x: 0.7 * np.sin(TWO_PI * x)),
    "high_contrast": _modulated(lambda x: 1.2 + 0.5 * np.cos(TWO_PI * x),
                                lambda x: 0.5 * np.sin(TWO_PI * x)),
    "twin_hump": _modulated(lambda x: 1.0 + 0.25 * np.cos(2 * TWO_PI * x),
                            lambda x: 0.4 * np.cos(TWO_PI * x)),
    "phase_rich": _modulated(lambda x: 0.9 + 0.2 * np.sin(TWO_PI * x),
                             lambda x: 0.6 * np.sin(2 * TWO_PI * x)),
    "near_flat": _modulated(lambda x: 1.0 + 0.1 * np.cos(TWO_PI * x),
                            lambda x: 0.9 * np.sin(TWO_PI * x)),
    "constant_modulus": _modulated(lambda x: np.ones_like(x),
                                   lambda x: 0.5 * np.sin(TWO_PI * x)),
}

RELAXATION_SUITE = ("two_scale", "high_contrast", "twin_hump", "phase_rich",
                    "near_flat")


def magnetic_datum(name: str, grid: PeriodicGrid, epsilon: float = 0.0
                   ) -> MagneticState:
    if name not in MAGNETIC_DATUMS:
        raise ConfigError(f"unknown magnetic datum {name!r}; "
                          f"known: {sorted(MAGNETIC_DATUMS)}")
    b1, b2 = MAGNETIC_DATUMS[name](grid.nodes)
    return MagneticState(grid, np.asarray(b1, dtype=float),
                         np.asarray(b2, dtype=float), 0.0, epsilon)


# ---------------------------------------------------------------------------
# CSV initial data


def _read_table(path) -> tuple[list, np.ndarray]:
    try:
        with open(path, "r", encoding="ascii") as f:
            header = f.readline().strip().split(",")
            data = np.loadtxt(f, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read CSV {path}: {exc}") from exc
    if data.shape[1] != len(header):
        raise ConfigError(f"{path}: header has {len(header)} columns, "
                          f"rows have {data.shape[1]}")
    return header, data


def _periodic_resample(x: np.ndarray, y: np.ndarray, nodes: np.ndarray
                       ) -> np.ndarray:
    order = np.argsort(x)
    x, y = x[order], y[order]
    x_ext = np.concatenate([[x[-1] - 1.0], x, [x[0] + 1.0]])
    y_ext = np.concatenate([[y[-1]], y, [y[0]]])
    return np.interp(nodes, x_ext, y_ext)


def load_theta_csv(path, grid: PeriodicGrid) -> AngleState:
    """Angle datum from a two-column CSV (x, theta), x in [0, 1).

    theta must be a real (already continuous) sample; the winding is read
    off the overall slope and the periodic remainder is resampled by
    periodic linear interpolation.
    """
    header, data = _read_table(path)
    if header[:2] != ["x", "theta"]:
        raise ConfigError(f"{path}: expected columns x,theta")
    x, theta = data[:, 0], data[:, 1]
    if len(x) < 4:
        raise ConfigError(f"{path}: need at least 4 samples")
    span = (theta[-1] - theta[0]) / max(x[-1] - x[0], 1e-12)
    n_turns = int(round(span / TWO_PI))
    zeta = theta - TWO_PI * n_turns * x
    return AngleState(grid, _periodic_resample(x, zeta, grid.nodes), n_turns)


def load_magnetic_csv(path, grid: PeriodicGrid, epsilon: float) -> MagneticState:
    header, data = _read_table(path)
    if header[:3] != ["x", "b1", "b2"]:
        raise ConfigError(f"{path}: expected columns x,b1,b2")
    x = data[:, 0]
    b1 = _periodic_resample(x, data[:, 1], grid.nodes)
    b2 = _periodic_resample(x, data[:, 2], grid.nodes)
    return MagneticState(grid, b1, b2, 0.0, epsilon)


# ---------------------------------------------------------------------------
# configuration


_CONFIG_KEYS = {
    ("meta", "schema_version"): int,
    ("run", "output_dir"): str,
    ("run", "workers"): int,
    ("grid", "m_x"): int,
    ("full", "epsilon"): float,
    ("full", "dt"): float,
    ("full", "t_end"): float,
    ("full", "record_every"): int,
    ("full", "gauge"): str,
    ("full", "b0"): str,
    ("hyperbolic", "tol"): float,
    ("hyperbolic", "t_max"): float,
    ("hyperbolic", "dt"): float,
    ("hyperbolic", "record_every"): int,
    ("hyperbolic", "b0"): str,
    ("limit", "dt"): float,
    ("limit", "t_end"): float,
    ("limit", "blowup_threshold"): float,
    ("limit", "record_every"): int,
    ("limit", "theta0"): str,
}
# [experiment] keys are validated against the selected experiment's table


def _find_line(path, section: str, key: str) -> int | None:
    try:
        with open(path, "r", encoding="ascii") as f:
            in_section = False
            for lineno, line in enumerate(f, 1):
                stripped = line.strip()
                if stripped.startswith("["):
                    in_section = stripped == f"[{section}]"
                elif in_section and stripped.split("=")[0].strip() == key:
                    return lineno
    except OSError:
        pass
    return None


def load_config(path) -> dict:
    """Parse the INI-style config into {(section, key): typed value}."""
    parser = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="ascii") as f:
            parser.read_file(f, source=str(path))
    except OSError as exc:
        raise ConfigError(f"cannot open config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    out: dict = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            where = _find_line(path, section, key)
            loc = f"{path}:{where}" if where else str(path)
            if section == "experiment":
                try:
                    out[(section, key)] = float(raw)
                except ValueError as exc:
                    raise ConfigError(
                        f"{loc}: experiment override {key!r} must be numeric"
                    ) from exc
                continue
            typ = _CONFIG_KEYS.get((section, key))
            if typ is None:
                raise ConfigError(f"{loc}: unknown config key [{section}] {key}")
            try:
                out[(section, key)] = typ(raw)
            except ValueError as exc:
                raise ConfigError(
                    f"{loc}: cannot parse {key!r} as {typ.__name__}") from exc
    version = out.get(("meta", "schema_version"))
    if version is None:
        raise ConfigError(f"{path}: missing [meta] schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"{path}: unsupported schema_version {version} "
                          f"(this build reads {SCHEMA_VERSION})")
    return out


def apply_overrides(cfg: dict, pairs: list) -> dict:
    out = dict(cfg)
    for pair in pairs:
        if "=" not in pair or "." not in pair.split("=", 1)[0]:
            raise ConfigError(f"override {pair!r} must look like section.key=value")
        target, raw = pair.split("=", 1)
        section, key = target.split(".", 1)
        if section == "experiment":
            try:
                out[(section, key)] = float(raw)
            except ValueError as exc:
                raise ConfigError(
                    f"experiment override {key!r} must be numeric") from exc
            continue
        typ = _CONFIG_KEYS.get((section, key))
        if typ is None:
            raise ConfigError(f"unknown config key [{section}] {key}")
        try:
            out[(section, key)] = typ(raw)
        except ValueError as exc:
            raise ConfigError(f"cannot parse {key!r} as {typ.__name__}") from exc
    return out


def _gauge_of(name: str) -> Gauge:
    try:
        return Gauge(name)
    except ValueError as exc:
        raise ConfigError(f"unknown gauge {name!r}; use zero_at_origin "
                          "or zero_mean") from exc


# ---------------------------------------------------------------------------
# experiments


@dataclass
class ExperimentSpec:
    name: str
    output_dir: str
    overrides: dict = field(default_factory=dict)
    workers: int = 1

    def param(self, key: str, default: float) -> float:
        return self.overrides.get(key, default)


def _manifest(spec: ExperimentSpec, params: dict, outputs: list) -> dict:
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "experiment": spec.name,
        "parameters": params,
        "outputs": sorted(outputs),
    }
    write_json(os.path.join(spec.output_dir, "manifest.json"), manifest)
    return manifest


def _check_override_keys(spec: ExperimentSpec, allowed: set) -> None:
    unknown = set(spec.overrides) - allowed
    if unknown:
        raise ConfigError(
            f"experiment {spec.name!r} does not document overrides "
            f"{sorted(unknown)}; allowed: {sorted(allowed)}")


def experiment_blowup(spec: ExperimentSpec) -> dict:
    """Gradient blow-up of the angle dynamics on the reference mesh, with
    the three profile snapshots and the detection report."""
    _check_override_keys(spec, {"m_x", "dt", "t_end", "blowup_threshold",
                                "record_every", "datum_scale"})
    m_x = int(spec.param("m_x", 400))
    dt = spec.param("dt", 6.25e-7)
    t_end = spec.param("t_end", 1e-3)
    scale = spec.param("datum_scale", 1.0)
    # Detection level must be reachable on this mesh: centered differences of
    # a bounded-oscillation angle cannot exceed osc(theta0)/(2 dx) ~ 1.3e3 at
    # m_x = 400, so the config-level default of 1e6 would never fire here.
    # 1e3 sits just under the saturation cap and is crossed only during the
    # final steepening burst.
    cfg = limit_mod.LimitRunConfig(
        m_x=m_x, dt=dt, t_end=t_end,
        blowup_threshold=spec.param("blowup_threshold", 1e3),
        record_every=int(spec.param("record_every", 20)))
    grid = PeriodicGrid(m_x)
    theta0 = angle_datum("moffatt_blowup", grid, scale=scale)
    traj, report = limit_mod.run_limit(theta0, cfg)

    snapshot_targets = [0.0, 5.625e-4, 6.619e-4]
    outputs = []
    for k, target in enumerate(snapshot_targets):
        idx = int(np.argmin(np.abs(traj.times - target)))
        name = f"fig4_t{k}.csv"
        write_profile_csv(os.path.join(spec.output_dir, name),
                          traj.times[idx], traj.states[idx].theta, "theta")
        outputs.append(name)

    write_trajectory_csv(os.path.join(spec.output_dir, "trajectory.csv"),
                         traj.times, (s.theta for s in traj.states), "theta")
    write_series_csv(os.path.join(spec.output_dir, "dxtheta_inf.csv"),
                     traj.step_times, traj.dxtheta_inf, "dxtheta_inf")
    outputs += ["trajectory.csv", "dxtheta_inf.csv"]

    phi0_inf = float(traj.dxtheta_inf[0])
    heuristic = 1.0 / (2.0 * phi0_inf**2)
    payload = report.to_dict()
    payload.update({
        "phi0_inf": phi0_inf,
        "heuristic_t_star": heuristic,
        "detect_over_heuristic": (report.t_detect / heuristic
                                  if report.t_detect else None),
        "snapshot_times": [float(traj.times[int(np.argmin(np.abs(traj.times - t)))])
                           for t in snapshot_targets],
    })
    write_json(os.path.join(spec.output_dir, "blowup_report.json"), payload)
    diag.monitor(traj).save(os.path.join(spec.output_dir, "diagnostics.json"))
    outputs += ["blowup_report.json", "diagnostics.json"]
    params = {"m_x": m_x, "dt": dt, "t_end": t_end, "datum": "moffatt_blowup",
              "datum_scale": scale, "blowup_threshold": cfg.blowup_threshold,
              "record_every": cfg.record_every}
    return _manifest(spec, params, outputs)


def experiment_global(spec: ExperimentSpec) -> dict:
    """Small-data run: one third of the blow-up datum relaxes globally."""
    _check_override_keys(spec, {"m_x", "dt", "t_end", "record_every",
                                "datum_scale"})
    m_x = int(spec.param("m_x", 200))
    dt = spec.param("dt", 2.5e-6)
    t_end = spec.param("t_end", 1e-2)
    scale = spec.param("datum_scale", 1.0 / 3.0)
    cfg = limit_mod.LimitRunConfig(m_x=m_x, dt=dt, t_end=t_end,
                                   record_every=int(spec.param("record_every", 10)))
    grid = PeriodicGrid(m_x)
    theta0 = angle_datum("moffatt_blowup", grid, scale=scale)
    traj, report = limit_mod.run_limit(theta0, cfg)

    outputs = ["trajectory.csv", "dxtheta_l2.csv", "diagnostics.json",
               "report.json"]
    write_trajectory_csv(os.path.join(spec.output_dir, "trajectory.csv"),
                         traj.times, (s.theta for s in traj.states), "theta")
    write_series_csv(os.path.join(spec.output_dir, "dxtheta_l2.csv"),
                     traj.step_times, np.sqrt(traj.dxtheta_l2sq), "dxtheta_l2")
    diag.monitor(traj).save(os.path.join(spec.output_dir, "diagnostics.json"))

    after = traj.step_times >= 1e-4
    l2 = traj.dxtheta_l2sq[after]
    strictly_decreasing = bool(np.all(np.diff(l2) < 0.0))
    write_json(os.path.join(spec.output_dir, "report.json"), {
        "blowup_detected": report.detected,
        "strictly_decreasing_after": 1e-4,
        "strictly_decreasing": strictly_decreasing,
        "dxtheta_l2_initial": float(np.sqrt(traj.dxtheta_l2sq[0])),
        "dxtheta_l2_final": float(np.sqrt(traj.dxtheta_l2sq[-1])),
    })
    params = {"m_x": m_x, "dt": dt, "t_end": t_end, "datum": "moffatt_blowup",
              "datum_scale": scale, "record_every": cfg.record_every}
    return _manifest(spec, params, outputs)


def experiment_oscillation(spec: ExperimentSpec) -> dict:
    """Scaled datum plus a mode-20 ripple: the ripple dissipates fast."""
    _check_override_keys(spec, {"m_x", "dt", "t_end", "record_every",
                                "datum_scale", "mode", "ripple_amp",
                                "probe_time"})
    m_x = int(spec.param("m_x", 400))
    dt = spec.param("dt", 6.25e-7)
    t_end = spec.param("t_end", 5e-4)
    scale = spec.param("datum_scale", 1.0 / 3.0)
    mode = int(spec.param("mode", 20))
    amp = spec.param("ripple_amp", 1.0)
    cfg = limit_mod.LimitRunConfig(m_x=m_x, dt=dt, t_end=t_end,
                                   record_every=int(spec.param("record_every", 8)))
    grid = PeriodicGrid(m_x)
    base = angle_datum("moffatt_blowup", grid, scale=scale)
    zeta0 = base.zeta + amp * np.sin(TWO_PI * mode * grid.nodes)
    theta0 = AngleState(grid, zeta0, 0)
    traj, report = limit_mod.run_limit(theta0, cfg)

    def mode_amp(state: AngleState) -> float:
        coeff = np.fft.rfft(state.zeta) / grid.m_x
        return float(2.0 * np.abs(coeff[mode]))

    amps = [mode_amp(s) for s in traj.states]
    probe_time = spec.param("probe_time", 5e-5)
    probe_idx = int(np.argmin(np.abs(traj.times - probe_time)))
    outputs = ["mode_amplitude.csv", "trajectory.csv", "diagnostics.json",
               "report.json"]
    write_series_csv(os.path.join(spec.output_dir, "mode_amplitude.csv"),
                     traj.times, amps, f"amp_mode_{mode}")
    write_trajectory_csv(os.path.join(spec.output_dir, "trajectory.csv"),
                         traj.times, (s.theta for s in traj.states), "theta")
    diag.monitor(traj).save(os.path.join(spec.output_dir, "diagnostics.json"))
    write_json(os.path.join(spec.output_dir, "report.json"), {
        "blowup_detected": report.detected,
        "mode": mode,
        "initial_amplitude": amps[0],
        "probe_time": float(traj.times[probe_idx]),
        "probe_amplitude": amps[probe_idx],
        "drop_factor_at_probe": (amps[0] / amps[probe_idx]
                                 if amps[probe_idx] > 0 else None),
        "final_amplitude": amps[-1],
        "drop_factor": amps[0] / amps[-1] if amps[-1] > 0 else None,
    })
    params = {"m_x": m_x, "dt": dt, "t_end": t_end, "datum_scale": scale,
              "mode": mode, "ripple_amp": amp, "record_every": cfg.record_every}
    return _manifest(spec, params, outputs)


def _wrap_angle_distance(a: np.ndarray, b: np.ndarray) -> float:
    d = a - b
    w = (d + np.pi) % TWO_PI - np.pi
    return float(np.abs(w).max())


def experiment_two_timescale(spec: ExperimentSpec) -> dict:
    """Rescaled resistive runs against the angle dynamics started from the
    relaxed state; sup-distances must shrink as the resistivity drops."""
    _check_override_keys(spec, {"m_x", "dt_full", "tau_bar", "n_checkpoints",
                                "relax_tol", "limit_steps_per_checkpoint"})
    m_x = int(spec.param("m_x", 200))
    dt_full_nominal = spec.param("dt_full", 2e-4)
    tau_bar = spec.param("tau_bar", 0.2)
    n_ck = int(spec.param("n_checkpoints", 10))
    relax_tol = spec.param("relax_tol", 1e-8)
    lim_steps = int(spec.param("limit_steps_per_checkpoint", 2000))
    epsilons = [1e-1, 3e-2, 1e-2]

    grid = PeriodicGrid(m_x)
    b0 = magnetic_datum("two_scale", grid)
    mass0 = float(grid.integral(np.hypot(b0.b1, b0.b2)))

    s_state, relax_fit, _ = hyp.relax(b0, tol=relax_tol)
    s_mod = np.hypot(s_state.b1, s_state.b2)
    s_rel_const = float((s_mod.max() - s_mod.min()) / s_mod.mean())
    s_mass_err = float(abs(s_mod.mean() - mass0) / mass0)
    theta_s = to_angle(s_state)

    d_tau = tau_bar / n_ck
    lim_cfg = limit_mod.LimitRunConfig(m_x=m_x, dt=d_tau / lim_steps,
                                       t_end=tau_bar, record_every=lim_steps)
    lim_traj, lim_report = limit_mod.run_limit(theta_s, lim_cfg)
    if lim_report.detected and lim_report.t_detect < tau_bar:
        raise WindowTooShort(
            f"angle dynamics blew up at tau = {lim_report.t_detect:g} "
            f"before the comparison horizon {tau_bar:g}")

    taus = [j * d_tau for j in range(1, n_ck + 1)]
    rows = {tau: [] for tau in taus}
    for eps in epsilons:
        n_seg = max(1, int(round(d_tau / (eps * dt_full_nominal))))
        dt_eps = d_tau / (eps * n_seg)
        state = b0.copy()
        state.epsilon = eps
        for j, tau in enumerate(taus, start=1):
            seg_cfg = full_mod.FullRunConfig(
                epsilon=eps, m_x=m_x, t_end=n_seg * dt_eps, dt=dt_eps,
                record_every=n_seg)
            seg = full_mod.run_full(state, seg_cfg)
            state = seg.states[-1]
            angle_eps = to_angle(state)
            lim_state = lim_traj.states[j] if j < len(lim_traj.states) else lim_traj.states[-1]
            d_angle = _wrap_angle_distance(angle_eps.theta, lim_state.theta)
            d_mod = float(np.abs(np.hypot(state.b1, state.b2)
                                 - lim_state.radius).max())
            rows[tau].append((d_angle, d_mod))

    header = ["tau"]
    for eps in epsilons:
        header += [f"angle_{_fmt(eps)}", f"mod_{_fmt(eps)}"]
    table = []
    for tau in taus:
        row = [tau]
        for d_angle, d_mod in rows[tau]:
            row += [d_angle, d_mod]
        table.append(row)
    write_csv(os.path.join(spec.output_dir, "distances.csv"), header, table)

    window = [tau for tau in taus if tau >= 0.1 * tau_bar - 1e-12]
    def monotone(which: int) -> bool:
        ok = True
        for tau in window:
            vals = [pair[which] for pair in rows[tau]]
            ok = ok and all(b <= a for a, b in zip(vals, vals[1:]))
        return ok

    outputs = ["distances.csv", "limit_theta.csv", "report.json"]
    write_trajectory_csv(os.path.join(spec.output_dir, "limit_theta.csv"),
                         lim_traj.times, (s.theta for s in lim_traj.states),
                         "theta")
    write_json(os.path.join(spec.output_dir, "report.json"), {
        "epsilons": epsilons,
        "tau_checkpoints": taus,
        "comparison_window": [0.1 * tau_bar, tau_bar],
        "angle_monotone": monotone(0),
        "mod_monotone": monotone(1),
        "s_modulus_rel_constancy": s_rel_const,
        "s_mass_rel_error": s_mass_err,
        "relax_decay_rate": relax_fit["rate"],
    })
    params = {"m_x": m_x, "dt_full": dt_full_nominal, "tau_bar": tau_bar,
              "n_checkpoints": n_ck, "relax_tol": relax_tol,
              "datum": "two_scale", "limit_steps_per_checkpoint": lim_steps}
    return _manifest(spec, params, outputs)


def experiment_fast_relaxation(spec: ExperimentSpec) -> dict:
    """Velocity-gradient decay to a resistive floor; floors read in a fixed
    window of rescaled time so the ratio across epsilon is meaningful."""
    _check_override_keys(spec, {"m_x", "dt", "tau_floor_lo", "tau_floor_hi",
                                "record_target"})
    m_x = int(spec.param("m_x", 200))
    dt = spec.param("dt", 0.01)
    tau_lo = spec.param("tau_floor_lo", 0.2)
    tau_hi = spec.param("tau_floor_hi", 0.3)
    record_target = int(spec.param("record_target", 2000))
    epsilons = [1e-2, 1e-3]

    grid = PeriodicGrid(m_x)
    b0 = magnetic_datum("high_contrast", grid)
    c0 = float(b0.mod_sq.min())

    outputs = []
    fit_rows = []
    fits = {}
    for eps in epsilons:
        t_default = (8.0 / c0) * np.log(1.0 / eps)
        t_end = max(t_default, tau_hi / eps)
        n_steps = int(round(t_end / dt))
        cfg = full_mod.FullRunConfig(
            epsilon=eps, m_x=m_x, t_end=t_end, dt=dt,
            record_every=max(1, n_steps // record_target))
        state = b0.copy()
        state.epsilon = eps
        traj = full_mod.run_full(state, cfg)
        fit = diag.check_psi_decay(traj, c0, eps,
                                   floor_window=(tau_lo / eps, tau_hi / eps))
        fits[eps] = fit
        tag = _fmt(eps)
        name = f"psi_inf_{tag}.csv"
        report = diag.monitor(traj)
        write_series_csv(os.path.join(spec.output_dir, name),
                         report.series["t"], report.series["psi_inf"],
                         "psi_inf")
        outputs.append(name)
        fit_rows.append([eps, fit.rate, fit.floor, fit.amplitude,
                         fit.floor_window[0], fit.floor_window[1]])

    write_csv(os.path.join(spec.output_dir, "fits.csv"),
              ["epsilon", "rate", "floor", "amplitude",
               "floor_window_lo", "floor_window_hi"], fit_rows)
    floors = [fits[e].floor for e in epsilons]
    ratio = floors[0] / floors[1] if floors[1] > 0 else float("inf")
    slope = float(np.polyfit(np.log(epsilons), np.log(floors), 1)[0]) \
        if min(floors) > 0 else None
    write_json(os.path.join(spec.output_dir, "report.json"), {
        "epsilons": epsilons,
        "c0": c0,
        "rates": [fits[e].rate for e in epsilons],
        "floors": floors,
        "floor_ratio": ratio,
        "floor_loglog_slope": slope,
        "tau_floor_window": [tau_lo, tau_hi],
    })
    outputs += ["fits.csv", "report.json"]
    params = {"m_x": m_x, "dt": dt, "tau_floor_lo": tau_lo,
              "tau_floor_hi": tau_hi, "datum": "high_contrast",
              "record_target": record_target}
    return _manifest(spec, params, outputs)


def _virial_one(args):
    m_x, dt, t_end, base, power, amp, threshold = args
    grid = PeriodicGrid(m_x)
    bump = (0.5 + 0.5 * np.cos(TWO_PI * grid.nodes)) ** power
    phi0 = base + amp * bump
    cfg = limit_mod.LimitRunConfig(m_x=m_x, dt=dt, t_end=t_end,
                                   blowup_threshold=threshold,
                                   record_every=max(1, int(round(t_end / dt)) // 400))
    traj, report = limit_mod.run_phi_system(phi0, grid, cfg)
    check = diag.check_virial(traj)
    v0 = check.v[0]
    return {
        "amplitude": amp,
        "mass": traj.mass,
        "v0": float(v0),
        "m_over_v0": float(traj.mass / v0),
        "blowup": report.detected,
        "t_detect": report.t_detect,
        "t_v_negative": check.t_v_negative,
        "virial_ok": check.ok,
        "max_evenness_drift": check.max_evenness_drift,
    }


def experiment_virial_sweep(spec: ExperimentSpec) -> dict:
    """Map the blow-up boundary in the mass / second-moment plane for even
    non-negative gradient bumps."""
    _check_override_keys(spec, {"m_x", "dt", "t_end", "base_level",
                                "bump_power", "amp_min", "amp_max",
                                "n_amplitudes", "blowup_threshold"})
    m_x = int(spec.param("m_x", 400))
    dt = spec.param("dt", 1e-6)
    t_end = spec.param("t_end", 2e-3)
    base = spec.param("base_level", 0.5)
    power = int(spec.param("bump_power", 8))
    amp_min = spec.param("amp_min", 2.0)
    amp_max = spec.param("amp_max", 40.0)
    n_amp = int(spec.param("n_amplitudes", 5))
    # Same mesh-aware detection level as the reference blow-up run: centered
    # differences saturate near osc/(2 dx), far below the config default.
    threshold = spec.param("blowup_threshold", 1e3)
    amps = np.geomspace(amp_min, amp_max, n_amp)

    tasks = [(m_x, dt, t_end, base, power, float(a), threshold) for a in amps]
    if spec.workers > 1:
        import concurrent.futures as cf
        with cf.ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_virial_one, tasks))
    else:
        results = [_virial_one(t) for t in tasks]

    keys = ["amplitude", "mass", "v0", "m_over_v0", "blowup", "t_detect",
            "t_v_negative", "virial_ok", "max_evenness_drift"]
    write_csv(os.path.join(spec.output_dir, "sweep.csv"), keys,
              ([r[k] for k in keys] for r in results))

    no_blow = [r["m_over_v0"] for r in results if not r["blowup"]]
    blow = [r["m_over_v0"] for r in results if r["blowup"]]
    write_json(os.path.join(spec.output_dir, "report.json"), {
        "n_runs": len(results),
        "boundary_below": max(no_blow) if no_blow else None,
        "boundary_above": min(blow) if blow else None,
        "all_virial_ok": all(r["virial_ok"] for r in results),
        "t_end": t_end,
    })
    params = {"m_x": m_x, "dt": dt, "t_end": t_end, "base_level": base,
              "bump_power": power, "amp_min": amp_min, "amp_max": amp_max,
              "n_amplitudes": n_amp}
    return _manifest(spec, params, ["sweep.csv", "report.json"])


EXPERIMENTS = {
    "blowup_fig4": experiment_blowup,
    "global_fig5_6": experiment_global,
    "oscillation_fig7": experiment_oscillation,
    "two_timescale": experiment_two_timescale,
    "fast_relaxation": experiment_fast_relaxation,
    "virial_sweep": experiment_virial_sweep,
}


def run_experiment(name: str, output_dir: str, overrides: dict | None = None,
                   workers: int = 1) -> dict:
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; "
                          f"known: {sorted(EXPERIMENTS)}")
    os.makedirs(output_dir, exist_ok=True)
    spec = ExperimentSpec(name, output_dir, dict(overrides or {}), workers)
    return EXPERIMENTS[name](spec)


# ---------------------------------------------------------------------------
# CLI


class _Parser(argparse.ArgumentParser):
    def error(self, message):          # argparse would exit(2); we map to 1
        raise ConfigError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="magrelax", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="INI config file")
    p.add_argument("--set", action="append", default=[], metavar="SEC.KEY=V",
                   help="override a config value")
    sub = p.add_subparsers(dest="command", required=True)

    rf = sub.add_parser("run-full", help="resistive solver run")
    rf.add_argument("--epsilon", type=float)
    rf.add_argument("--m-x", type=int)
    rf.add_argument("--dt", type=float)
    rf.add_argument("--t-end", type=float)
    rf.add_argument("--b0", help="datum name or CSV path")
    rf.add_argument("--gauge", choices=[g.value for g in Gauge])
    rf.add_argument("--record-every", type=int)
    rf.add_argument("--out", help="output directory")

    rh = sub.add_parser("run-hyperbolic", help="inviscid relaxation run")
    rh.add_argument("--b0")
    rh.add_argument("--m-x", type=int)
    rh.add_argument("--tol", type=float)
    rh.add_argument("--t-max", type=float)
    rh.add_argument("--dt", type=float)
    rh.add_argument("--record-every", type=int)
    rh.add_argument("--out")

    rl = sub.add_parser("run-limit", help="angle dynamics run")
    rl.add_argument("--theta0", help="datum name or CSV path")
    rl.add_argument("--m-x", type=int)
    rl.add_argument("--dt", type=float)
    rl.add_argument("--t-end", type=float)
    rl.add_argument("--blowup-threshold", type=float)
    rl.add_argument("--record-every", type=int)
    rl.add_argument("--out")

    ex = sub.add_parser("experiment", help="named experiment")
    ex.add_argument("name")
    ex.add_argument("--out")
    ex.add_argument("--workers", type=int)

    ck = sub.add_parser("check", help="validate a saved diagnostics report")
    ck.add_argument("report")
    return p


def _resolve(flag, cfg, section, key, default):
    if flag is not None:
        return flag
    return cfg.get((section, key), default)


def _cmd_run_full(args, cfg) -> int:
    m_x = _resolve(args.m_x, cfg, "grid", "m_x", 200)
    epsilon = _resolve(args.epsilon, cfg, "full", "epsilon", None)
    t_end = _resolve(args.t_end, cfg, "full", "t_end", None)
    if epsilon is None or t_end is None:
        raise ConfigError("run-full needs --epsilon and --t-end "
                          "(or [full] epsilon / t_end in the config)")
    dt = _resolve(args.dt, cfg, "full", "dt", None)
    gauge = _gauge_of(_resolve(args.gauge, cfg, "full", "gauge",
                               Gauge.ZERO_AT_ORIGIN.value))
    record_every = _resolve(args.record_every, cfg, "full", "record_every", 1)
    b0_name = _resolve(args.b0, cfg, "full", "b0", "two_scale")
    out = _resolve(args.out, cfg, "run", "output_dir", "out_run_full")
    os.makedirs(out, exist_ok=True)

    grid = PeriodicGrid(m_x)
    if b0_name.endswith(".csv"):
        b0 = load_magnetic_csv(b0_name, grid, epsilon)
    else:
        b0 = magnetic_datum(b0_name, grid, epsilon)
    run_cfg = full_mod.FullRunConfig(epsilon=epsilon, m_x=m_x, t_end=t_end,
                                     dt=dt, gauge=gauge,
                                     record_every=record_every)
    traj = full_mod.run_full(b0, run_cfg)
    write_trajectory_csv(os.path.join(out, "b1.csv"), traj.times,
                         (s.b1 for s in traj.states), "b1")
    write_trajectory_csv(os.path.join(out, "b2.csv"), traj.times,
                         (s.b2 for s in traj.states), "b2")
    diag.monitor(traj).save(os.path.join(out, "diagnostics.json"))
    write_json(os.path.join(out, "manifest.json"), {
        "schema_version": SCHEMA_VERSION,
        "command": "run-full",
        "parameters": {"epsilon": epsilon, "m_x": m_x, "dt": run_cfg.dt,
                       "t_end": t_end, "gauge": gauge.value, "b0": b0_name,
                       "record_every": record_every},
        "outputs": ["b1.csv", "b2.csv", "diagnostics.json"],
    })
    return 0


def _cmd_run_hyperbolic(args, cfg) -> int:
    m_x = _resolve(args.m_x, cfg, "grid", "m_x", 200)
    tol = _resolve(args.tol, cfg, "hyperbolic", "tol", 1e-8)
    t_max = _resolve(args.t_max, cfg, "hyperbolic", "t_max", 200.0)
    dt = _resolve(args.dt, cfg, "hyperbolic", "dt", None)
    record_every = _resolve(args.record_every, cfg, "hyperbolic",
                            "record_every", 10)
    b0_name = _resolve(args.b0, cfg, "hyperbolic", "b0", "two_scale")
    out = _resolve(args.out, cfg, "run", "output_dir", "out_run_hyperbolic")
    os.makedirs(out, exist_ok=True)

    grid = PeriodicGrid(m_x)
    if b0_name.endswith(".csv"):
        b0 = load_magnetic_csv(b0_name, grid, 0.0)
    else:
        b0 = magnetic_datum(b0_name, grid)
    mass0 = float(grid.integral(np.hypot(b0.b1, b0.b2)))
    s_state, fit, traj = hyp.relax(b0, tol=tol, t_max=t_max, dt=dt,
                                   record_every=record_every)
    write_profile_csv(os.path.join(out, "relaxed_b1.csv"), s_state.t,
                      s_state.b1, "b1")
    write_profile_csv(os.path.join(out, "relaxed_b2.csv"), s_state.t,
                      s_state.b2, "b2")
    psi_series = [hyp.psi_inf(s) for s in traj.states]
    write_series_csv(os.path.join(out, "psi_inf.csv"),
                     [s.t for s in traj.states], psi_series, "psi_inf")
    diag.monitor(traj).save(os.path.join(out, "diagnostics.json"))
    s_mod = np.hypot(s_state.b1, s_state.b2)
    write_json(os.path.join(out, "report.json"), {
        "mass_l1_initial": mass0,
        "relaxed_modulus_mean": float(s_mod.mean()),
        "relaxed_modulus_rel_spread": float((s_mod.max() - s_mod.min())
                                            / s_mod.mean()),
        "mass_rel_error": float(abs(s_mod.mean() - mass0) / mass0),
        "decay_rate": fit["rate"],
        "t_reached": s_state.t,
    })
    write_json(os.path.join(out, "manifest.json"), {
        "schema_version": SCHEMA_VERSION,
        "command": "run-hyperbolic",
        "parameters": {"m_x": m_x, "tol": tol, "t_max": t_max,
                       "b0": b0_name, "record_every": record_every},
        "outputs": ["relaxed_b1.csv", "relaxed_b2.csv", "psi_inf.csv",
                    "diagnostics.json", "report.json"],
    })
    return 0


def _cmd_run_limit(args, cfg) -> int:
    m_x = _resolve(args.m_x, cfg, "grid", "m_x", 400)
    dt = _resolve(args.dt, cfg, "limit", "dt", None)
    if dt is None:
        raise ConfigError("run-limit needs --dt (or [limit] dt in the config)")
    t_end = _resolve(args.t_end, cfg, "limit", "t_end", 1e-3)
    threshold = _resolve(args.blowup_threshold, cfg, "limit",
                         "blowup_threshold", 1e6)
    record_every = _resolve(args.record_every, cfg, "limit", "record_every", 1)
    theta0_name = _resolve(args.theta0, cfg, "limit", "theta0",
                           "moffatt_blowup")
    out = _resolve(args.out, cfg, "run", "output_dir", "out_run_limit")
    os.makedirs(out, exist_ok=True)

    grid = PeriodicGrid(m_x)
    if theta0_name.endswith(".csv"):
        theta0 = load_theta_csv(theta0_name, grid)
    else:
        theta0 = angle_datum(theta0_name, grid)
    run_cfg = limit_mod.LimitRunConfig(m_x=m_x, dt=dt, t_end=t_end,
                                       blowup_threshold=threshold,
                                       record_every=record_every)
    traj, report = limit_mod.run_limit(theta0, run_cfg)
    write_trajectory_csv(os.path.join(out, "trajectory.csv"), traj.times,
                         (s.theta for s in traj.states), "theta")
    write_json(os.path.join(out, "blowup_report.json"), report.to_dict())
    diag.monitor(traj).save(os.path.join(out, "diagnostics.json"))
    write_json(os.path.join(out, "manifest.json"), {
        "schema_version": SCHEMA_VERSION,
        "command": "run-limit",
        "parameters": {"m_x": m_x, "dt": dt, "t_end": t_end,
                       "theta0": theta0_name, "blowup_threshold": threshold,
                       "record_every": record_every},
        "outputs": ["trajectory.csv", "blowup_report.json",
                    "diagnostics.json"],
    })
    return 0


def _cmd_check(args) -> int:
    try:
        report = diag.DiagnosticsReport.load(args.report)
        report.validate()
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read report {args.report}: {exc}") from exc
    failed = [name for name, value in sorted(report.checks.items())
              if value is False]
    for name, value in sorted(report.checks.items()):
        state = {True: "ok", False: "FAIL", None: "n/a"}.get(value, value)
        print(f"{name}: {state}")
    if failed:
        print(f"FAILED: {', '.join(failed)}")
        return 2
    print("all checks passed")
    return 0


def run_cli(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config) if args.config else {}
        cfg = apply_overrides(cfg, args.set)

        if args.command == "run-full":
            return _cmd_run_full(args, cfg)
        if args.command == "run-hyperbolic":
            return _cmd_run_hyperbolic(args, cfg)
        if args.command == "run-limit":
            return _cmd_run_limit(args, cfg)
        if args.command == "experiment":
            out = args.out or cfg.get(("run", "output_dir"),
                                      f"out_{args.name}")
            workers = args.workers or cfg.get(("run", "workers"), 1)
            overrides = {key: val for (sec, key), val in cfg.items()
                         if sec == "experiment"}
            run_experiment(args.name, out, overrides, workers)
            return 0
        if args.command == "check":
            return _cmd_check(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except MagrelaxError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
