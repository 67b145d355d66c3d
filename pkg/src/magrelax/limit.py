"""Effective angle dynamics on the slow time scale, with blow-up detection.

The angle theta(tau, x) = zeta + 2 pi N x obeys

    d/dtau theta + U d/dx theta = d2 theta,
    d/dx U = -(d/dx theta)^2 + int_T (d/dx theta)^2,     U(0) = 0,

and the diagnostic radius follows R'(tau) = -R int_T (d/dx theta)^2. The
unknown actually advanced is the periodic part zeta: the winding slope
contributes the exact constant 2 pi N to the gradient, so every linear solve
stays periodic and the winding number is conserved structurally.

Scheme: the velocity is assembled by trapezoidal summation of the average of
two staggered centered-difference stencils (empty sum u_0 = 0, periodic
closure); the step is a semi-implicit average of both time levels with the
velocity frozen explicitly, one cyclic tridiagonal solve per step,
unconditionally stable.

Solutions can steepen to a finite-time singularity; the run stops when
||d1 theta||_inf crosses the configured threshold (or goes non-finite) and
reports the crossing together with a blow-up time extrapolated from the
gradient-cubed growth heuristic phi_max ~ (2 (T* - t))^{-1/2}.

``run_phi_system`` drives the same core in gradient form phi = d/dx theta,
where the mean of phi is an arbitrary real mass M (not quantized to
2 pi N); it exists for the second-moment (virial) studies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fields import TWO_PI, AngleState
from .grid import PeriodicGrid
from .tridiag import solve_cyclic


@dataclass
class LimitRunConfig:
    m_x: int
    dt: float
    t_end: float
    n_turns: int | None = None   # validated against the datum when given
    blowup_threshold: float = 1e6
    record_every: int = 1

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.blowup_threshold <= 0:
            raise ValueError("blowup_threshold must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")


@dataclass
class BlowupReport:
    detected: bool
    t_detect: float | None
    threshold: float
    t_star_estimate: float | None
    l4_at_detect: float | None
    l4_flag: bool

    def to_dict(self) -> dict:
        return {
            "detected": self.detected,
            "t_detect": self.t_detect,
            "threshold": self.threshold,
            "t_star_estimate": self.t_star_estimate,
            "l4_at_detect": self.l4_at_detect,
            "l4_flag": self.l4_flag,
        }


@dataclass
class LimitTrajectory:
    grid: PeriodicGrid
    cfg: LimitRunConfig
    times: np.ndarray            # snapshot times
    states: list                 # AngleState snapshots
    # dense per-step scalar series (index 0 = initial state)
    step_times: np.ndarray
    dxtheta_inf: np.ndarray
    dxtheta_l2sq: np.ndarray
    l4_accumulator: np.ndarray
    oscillation: np.ndarray
    radius: np.ndarray
    report: "BlowupReport | None" = None


@dataclass
class PhiTrajectory:
    grid: PeriodicGrid
    cfg: LimitRunConfig
    mass: float                  # int phi, carried analytically (constant)
    times: np.ndarray
    phis: list                   # gradient snapshots (ndarrays)
    step_times: np.ndarray
    phi_inf: np.ndarray
    phi_l2sq: np.ndarray
    l4_accumulator: np.ndarray | None = None
    report: "BlowupReport | None" = None


def _gradient(grid: PeriodicGrid, zeta: np.ndarray, slope: float) -> np.ndarray:
    return grid.d1(zeta) + slope


def _velocity_from_gradient(grid: PeriodicGrid, dtheta: np.ndarray) -> np.ndarray:
    """Literal trapezoidal summation of the two-stencil velocity.

    With A_k the squared centered difference at node k and B_k = A_{k-1} the
    same stencil shifted one node, the increments dx*(A_k + B_k)/2 are summed
    from the origin (empty sum: u_0 = 0) and closed by the linear counter-term
    x_j times the full-circle sum, so that u_{m} = u_0 around the torus.
    """
    a = dtheta * dtheta
    inc = 0.5 * (a + np.roll(a, 1)) * grid.delta_x
    partial = np.empty(grid.m_x)
    partial[0] = 0.0
    np.cumsum(inc[1:], out=partial[1:])
    total = partial[-1] + inc[0]
    return -partial + grid.nodes * total


def scheme_velocity(theta: AngleState) -> np.ndarray:
    """Velocity u^n of the scheme, zero at the origin by construction."""
    return _velocity_from_gradient(theta.grid, theta.dx_theta)


def _cn_core(grid: PeriodicGrid, zeta: np.ndarray, slope: float,
             u: np.ndarray, dt: float) -> np.ndarray:
    """One semi-implicit step of d/dt zeta + u (d1 zeta + slope) = d2 zeta."""
    dx = grid.delta_x
    adv = dt / (4.0 * dx)
    dif = dt / (2.0 * dx**2)

    sub = -adv * u - dif
    diag = np.full(grid.m_x, 1.0 + 2.0 * dif)
    sup = adv * u - dif

    rhs = (zeta
           - 0.5 * dt * u * grid.d1(zeta)
           - dt * slope * u
           + 0.5 * dt * grid.d2(zeta))
    return solve_cyclic(sub, diag, sup, rhs)


def cn_step(theta: AngleState, cfg: LimitRunConfig,
            u: np.ndarray | None = None) -> AngleState:
    """One step of the angle scheme. The velocity defaults to
    scheme_velocity(theta); passing u overrides it (testing hook)."""
    if u is None:
        u = scheme_velocity(theta)
    zeta_next = _cn_core(theta.grid, theta.zeta, TWO_PI * theta.n_turns, u, cfg.dt)
    return AngleState(theta.grid, zeta_next, theta.n_turns, theta.radius,
                      theta.t + cfg.dt)


def radius_step(r: float, theta: AngleState, dt: float) -> float:
    """Exact exponential update of R' = -R int (d1 theta)^2; positivity is
    structural."""
    if r <= 0:
        raise ValueError("radius must be positive")
    g = theta.dx_theta
    return r * float(np.exp(-dt * theta.grid.integral(g * g)))


def _estimate_t_star(step_times: np.ndarray, phi_inf: np.ndarray) -> float | None:
    """Extrapolated singular time from phi_max ~ (2 (T* - t))^{-1/2}.

    Each sample in the steep-growth tail yields t + 1/(2 phi^2); the median
    is robust against the first and last few samples being off-regime.
    """
    if len(step_times) < 3:
        return None
    cut = max(20.0 * phi_inf[0], 1e3)
    mask = phi_inf >= cut
    if mask.sum() < 3:
        mask = np.zeros_like(mask)
        mask[-3:] = True
    est = step_times[mask] + 0.5 / phi_inf[mask] ** 2
    return float(np.median(est))


class _CoreRun:
    """Shared stepping loop for the angle and gradient forms."""

    def __init__(self, grid: PeriodicGrid, zeta0: np.ndarray, slope: float,
                 cfg: LimitRunConfig):
        self.grid = grid
        self.cfg = cfg
        self.slope = slope
        self.zeta = zeta0.copy()
        self.t = 0.0
        self.snap_times: list[float] = []
        self.snaps: list[np.ndarray] = []
        self.step_times: list[float] = []
        self.inf_series: list[float] = []
        self.l2sq_series: list[float] = []
        self.l4_series: list[float] = []
        self.osc_series: list[float] = []
        self.l4 = 0.0

    def _observe(self, snapshot: bool) -> tuple[float, np.ndarray]:
        dtheta = _gradient(self.grid, self.zeta, self.slope)
        inf = float(np.abs(dtheta).max())
        l2sq = float((dtheta * dtheta).mean())
        theta = self.zeta + self.slope * self.grid.nodes
        self.step_times.append(self.t)
        self.inf_series.append(inf)
        self.l2sq_series.append(l2sq)
        self.l4_series.append(self.l4)
        self.osc_series.append(float(theta.max() - theta.min()))
        if snapshot:
            self.snap_times.append(self.t)
            self.snaps.append(self.zeta.copy())
        return inf, dtheta

    def run(self) -> BlowupReport:
        cfg = self.cfg
        n_steps = int(round(cfg.t_end / cfg.dt))
        inf, dtheta = self._observe(snapshot=True)
        detected = False
        t_detect = None
        for n in range(1, n_steps + 1):
            u = _velocity_from_gradient(self.grid, dtheta)
            self.zeta = _cn_core(self.grid, self.zeta, self.slope, u, cfg.dt)
            self.t = n * cfg.dt
            # running integral of ||d1 theta||_{L^2}^4 (left endpoint rule;
            # the integrand is what diverges at blow-up, so the rule's order
            # is immaterial for the detection flag)
            self.l4 += cfg.dt * self.l2sq_series[-1] ** 2
            if not np.isfinite(self.zeta).all():
                # backstop behind the threshold check; stop on the last good
                # sample rather than recording a non-finite state
                detected = True
                t_detect = self.t
                break
            snapshot = (n % cfg.record_every == 0) or n == n_steps
            inf, dtheta = self._observe(snapshot=snapshot)
            if inf > cfg.blowup_threshold:
                detected = True
                t_detect = self.t
                if not snapshot:
                    self.snap_times.append(self.t)
                    self.snaps.append(self.zeta.copy())
                break

        step_times = np.asarray(self.step_times)
        inf_arr = np.asarray(self.inf_series)
        t_star = _estimate_t_star(step_times, inf_arr) if detected else None
        l4_flag = False
        l4_at_detect = None
        if detected and t_detect is not None:
            l4_at_detect = self.l4
            ref_idx = int(np.searchsorted(step_times, 0.9 * t_detect))
            ref_idx = min(ref_idx, len(self.l4_series) - 1)
            ref = self.l4_series[ref_idx]
            l4_flag = ref > 0 and l4_at_detect > 1e3 * ref
        return BlowupReport(detected, t_detect, cfg.blowup_threshold,
                            t_star, l4_at_detect, l4_flag)


def run_limit(theta0: AngleState, cfg: LimitRunConfig,
              r0: float | None = None) -> tuple[LimitTrajectory, BlowupReport]:
    """Advance the angle system until t_end or gradient-threshold crossing.

    Blow-up is a finding: it is carried in the report, never raised.
    """
    if theta0.grid.m_x != cfg.m_x:
        raise ValueError("datum grid does not match config")
    if cfg.n_turns is not None and cfg.n_turns != theta0.n_turns:
        raise ValueError("config n_turns contradicts the datum's winding")
    if r0 is None:
        r0 = theta0.radius

    core = _CoreRun(theta0.grid, theta0.zeta, TWO_PI * theta0.n_turns, cfg)
    report = core.run()

    # radius: exact exponential of the recorded gradient energy (left rule,
    # matching the per-step update radius_step applies)
    l2sq = np.asarray(core.l2sq_series)
    step_times = np.asarray(core.step_times)
    log_decay = -np.concatenate([[0.0], np.cumsum(cfg.dt * l2sq[:-1])])
    radius = r0 * np.exp(log_decay)

    states = []
    for t, zeta in zip(core.snap_times, core.snaps):
        idx = int(np.searchsorted(step_times, t))
        states.append(AngleState(theta0.grid, zeta, theta0.n_turns,
                                 float(radius[min(idx, len(radius) - 1)]), t))
    traj = LimitTrajectory(
        grid=theta0.grid, cfg=cfg,
        times=np.asarray(core.snap_times), states=states,
        step_times=step_times,
        dxtheta_inf=np.asarray(core.inf_series),
        dxtheta_l2sq=l2sq,
        l4_accumulator=np.asarray(core.l4_series),
        oscillation=np.asarray(core.osc_series),
        radius=radius,
        report=report,
    )
    return traj, report


def run_phi_system(phi0: np.ndarray, grid: PeriodicGrid, cfg: LimitRunConfig
                   ) -> tuple[PhiTrajectory, BlowupReport]:
    """Advance the gradient form phi = d/dx theta with arbitrary real mass.

    phi is represented as d1(zeta) + M with zeta the running integral of the
    mean-free part of phi0, so mass conservation is structural. Initialising
    through the running integral and differencing back applies one pass of
    the (1, 2, 1)/4 stencil to phi0; every reported quantity (including the
    initial record) refers to the represented field, so the run is
    self-consistent.
    """
    phi0 = np.asarray(phi0, dtype=float)
    mass = float(grid.integral(phi0))
    zeta0 = grid.cumulative(phi0 - mass)

    core = _CoreRun(grid, zeta0, mass, cfg)
    report = core.run()

    phis = [_gradient(grid, z, mass) for z in core.snaps]
    traj = PhiTrajectory(
        grid=grid, cfg=cfg, mass=mass,
        times=np.asarray(core.snap_times), phis=phis,
        step_times=np.asarray(core.step_times),
        phi_inf=np.asarray(core.inf_series),
        phi_l2sq=np.asarray(core.l2sq_series),
        l4_accumulator=np.asarray(core.l4_series),
        report=report,
    )
    return traj, report
