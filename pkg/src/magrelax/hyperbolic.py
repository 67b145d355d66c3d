"""Perfectly conducting system (epsilon = 0) solved along characteristics.

Centered Eulerian stencils are dispersive for pure advection, so the solver
follows the characteristic map instead. With labels xi on the unit torus,

    d/dt Phi(t, xi) = u(t, Phi(t, xi))
    d/dt Z(t, xi)   = -psi(t, Phi(t, xi)) Z          psi = d/dx u
    d/dt J(t, xi)   = +psi(t, Phi(t, xi)) J          J = d Phi / d xi > 0

where psi on labels is (|Z|^2 - int |Z|^2 J dxi)/2 and u on labels is the
running integral of (psi o Phi) J in xi plus the gauge constant. |Z| J is
pointwise conserved, which is the Lagrangian form of L^1 mass conservation.

Fields of constant modulus are fixed points. For strictly nonvanishing data
the velocity gradient decays exponentially and the field relaxes to a
constant-modulus limit; ``relax`` integrates to that limit and resamples it
back to the Eulerian grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import JacobianCollapse, ModulusVanishes, NoConvergence
from .fields import Gauge, MagneticState, MODULUS_FLOOR
from .grid import PeriodicGrid

JACOBIAN_FLOOR = 1e-6


@dataclass
class LagrangianState:
    """Characteristic positions, carried field, and Jacobian on label nodes."""

    grid: PeriodicGrid          # label grid (xi)
    phi: np.ndarray             # positions on the covering line
    z1: np.ndarray
    z2: np.ndarray
    jac: np.ndarray
    t: float = 0.0

    @property
    def mod_sq(self) -> np.ndarray:
        return self.z1 * self.z1 + self.z2 * self.z2

    def copy(self) -> "LagrangianState":
        return LagrangianState(self.grid, self.phi.copy(), self.z1.copy(),
                               self.z2.copy(), self.jac.copy(), self.t)


def from_magnetic(b: MagneticState) -> LagrangianState:
    """Initial characteristics: identity map, unit Jacobian, Z = b."""
    grid = b.grid
    return LagrangianState(grid, grid.nodes.copy(), b.b1.copy(), b.b2.copy(),
                           np.ones(grid.m_x), t=b.t)


def _u_at_origin(phi: np.ndarray, c: np.ndarray) -> float:
    """Interpolate the running integral at the Eulerian point x = 0.

    Phi is monotone on the covering line and covers exactly one period, so
    exactly one integer K lies in [phi[0], phi[0] + 1); u(K) = u(0) on the
    torus. Linear interpolation between the bracketing labels.
    """
    k = np.ceil(phi[0])
    if k >= phi[0] + 1.0:  # phi[0] is itself an integer
        k -= 1.0
    phi_ext = np.append(phi, phi[0] + 1.0)
    c_ext = np.append(c, c[0])
    j = int(np.searchsorted(phi_ext, k, side="right") - 1)
    j = max(0, min(j, len(phi) - 1))
    w = (k - phi_ext[j]) / (phi_ext[j + 1] - phi_ext[j])
    return float(c_ext[j] + w * (c_ext[j + 1] - c_ext[j]))


def lagrangian_rhs(s: LagrangianState, gauge: Gauge = Gauge.ZERO_AT_ORIGIN):
    """Time derivatives (d phi, d z1, d z2, d jac).

    Raises JacobianCollapse when the characteristic map stops being a
    diffeomorphism (min J under the floor).
    """
    if s.jac.min() < JACOBIAN_FLOOR:
        raise JacobianCollapse(f"min J = {s.jac.min():.3e}")
    grid = s.grid
    mod_sq = s.mod_sq
    energy = grid.integral(mod_sq * s.jac)
    psi = 0.5 * (mod_sq - energy)
    flux = psi * s.jac
    u_raw = grid.cumulative(flux)
    if gauge is Gauge.ZERO_MEAN:
        u = u_raw - grid.integral(u_raw * s.jac)
    else:
        u = u_raw - _u_at_origin(s.phi, u_raw)
    return u, -psi * s.z1, -psi * s.z2, psi * s.jac


def step_hyperbolic(s: LagrangianState, dt: float,
                    gauge: Gauge = Gauge.ZERO_AT_ORIGIN) -> LagrangianState:
    """One classical RK4 step of the characteristic system."""
    if dt <= 0:
        raise ValueError("dt must be positive")

    def rhs(phi, z1, z2, jac):
        probe = LagrangianState(s.grid, phi, z1, z2, jac, s.t)
        return lagrangian_rhs(probe, gauge)

    k1 = rhs(s.phi, s.z1, s.z2, s.jac)
    k2 = rhs(s.phi + 0.5 * dt * k1[0], s.z1 + 0.5 * dt * k1[1],
             s.z2 + 0.5 * dt * k1[2], s.jac + 0.5 * dt * k1[3])
    k3 = rhs(s.phi + 0.5 * dt * k2[0], s.z1 + 0.5 * dt * k2[1],
             s.z2 + 0.5 * dt * k2[2], s.jac + 0.5 * dt * k2[3])
    k4 = rhs(s.phi + dt * k3[0], s.z1 + dt * k3[1],
             s.z2 + dt * k3[2], s.jac + dt * k3[3])

    sixth = dt / 6.0
    return LagrangianState(
        s.grid,
        s.phi + sixth * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        s.z1 + sixth * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
        s.z2 + sixth * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]),
        s.jac + sixth * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3]),
        s.t + dt,
    )


def psi_inf(s: LagrangianState) -> float:
    """Sup norm of the velocity gradient (identical on labels and in space)."""
    mod_sq = s.mod_sq
    energy = s.grid.integral(mod_sq * s.jac)
    return float(np.abs(0.5 * (mod_sq - energy)).max())


@dataclass
class HyperbolicTrajectory:
    grid: PeriodicGrid
    gauge: Gauge
    times: np.ndarray
    states: list  # LagrangianState snapshots


def resample_to_grid(s: LagrangianState) -> MagneticState:
    """Eulerian samples of Z o Phi^{-1} by monotone cubic interpolation.

    Phi is monotone (J > 0), so interpolating the (Phi, Z) graph extended
    one period to each side is well posed at every Eulerian node.
    """
    from scipy.interpolate import PchipInterpolator

    grid = s.grid
    base = np.floor(s.phi[0])
    phi = s.phi - base  # range within [0, 2)
    phi_ext = np.concatenate([phi - 1.0, phi, phi + 1.0])
    b_out = []
    for z in (s.z1, s.z2):
        z_ext = np.concatenate([z, z, z])
        b_out.append(PchipInterpolator(phi_ext, z_ext)(grid.nodes))
    return MagneticState(grid, b_out[0], b_out[1], t=s.t, epsilon=0.0)


def default_dt(grid: PeriodicGrid, b0_sup_sq: float) -> float:
    """Fixed RK4 step: resolves both the advection sweep and the modulus ODE."""
    return min(0.1 * grid.delta_x, 0.01 / b0_sup_sq)


def relax(b0: MagneticState, tol: float = 1e-8, t_max: float = 200.0,
          gauge: Gauge = Gauge.ZERO_AT_ORIGIN, dt: float | None = None,
          record_every: int = 10):
    """Integrate to the relaxed (constant-modulus) state.

    Returns (relaxed MagneticState, decay fit dict, HyperbolicTrajectory).
    The decay rate is an ordinary least squares fit of log ||psi||_inf over
    the final half of the recorded samples. Raises ModulusVanishes when the
    initial modulus is not strictly positive and NoConvergence when t_max is
    reached above tolerance.
    """
    if np.hypot(b0.b1, b0.b2).min() <= MODULUS_FLOOR:
        raise ModulusVanishes("relaxation hypothesis needs min |b0| > 0")

    s = from_magnetic(b0)
    if dt is None:
        dt = default_dt(b0.grid, float(b0.mod_sq.max()))

    cur = psi_inf(s)
    times = [s.t]
    psi_series = [cur]
    states = [s.copy()]
    n = 0
    while cur >= tol:
        if s.t >= t_max:
            raise NoConvergence(
                f"||psi||_inf = {cur:.3e} >= tol {tol:.1e} at t_max {t_max}")
        s = step_hyperbolic(s, dt, gauge)
        n += 1
        cur = psi_inf(s)
        if n % record_every == 0:
            times.append(s.t)
            psi_series.append(cur)
            states.append(s.copy())
    if times[-1] != s.t:
        times.append(s.t)
        psi_series.append(cur)
        states.append(s.copy())

    traj = HyperbolicTrajectory(b0.grid, gauge, np.asarray(times), states)
    fit = _fit_decay(np.asarray(times), np.asarray(psi_series))
    return resample_to_grid(s), fit, traj


def _fit_decay(times: np.ndarray, psi_series: np.ndarray) -> dict:
    """OLS of log ||psi||_inf on the final half of the run."""
    half = len(times) // 2
    t = times[half:]
    y = psi_series[half:]
    mask = y > 0
    t, y = t[mask], np.log(y[mask])
    if len(t) < 2 or t[-1] == t[0]:
        return {"rate": float("nan"), "log_intercept": float("nan")}
    slope, intercept = np.polyfit(t, y, 1)
    return {"rate": float(-slope), "log_intercept": float(intercept)}
