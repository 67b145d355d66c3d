"""Independent reference solvers used to cross-check the production schemes.

Two deliberately different discretizations live here:

* a Fourier-Galerkin solver for the resistive system, advanced by classical
  RK4 in coefficient space, with all products evaluated pseudo-spectrally on
  a grid padded far enough that no aliased mode can fold back into the kept
  band (padding >= 4 n + 1 for the quadratic-then-quadratic nonlinearity,
  which is stricter than the usual 3/2 rule);

* an explicit RK4 integrator for the angle dynamics on the same
  finite-difference stencils as the production stepper but with the velocity
  assembled through the cumulative-integral route and the nonlinearity
  re-evaluated at every stage.

Neither route shares time-stepping code with the production solvers, so
agreement between the two is evidence, not tautology.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalInstability, StabilityViolated
from .fields import TWO_PI, AngleState, Gauge, MagneticState, velocity_from_angle
from .grid import PeriodicGrid

# RK4's real-axis stability interval is about 2.78 / lambda; keep a margin
RK4_DIFFUSION_LIMIT = 2.5
# explicit heat step cap on dt / delta_x^2 for the angle oracle
EXPLICIT_PARABOLIC_CAP = 0.25


@dataclass
class SpectralState:
    """Fourier coefficients of b1 + i b2, modes -n..n in FFT layout."""
    n_modes: int
    coeff: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        if len(self.coeff) != 2 * self.n_modes + 1:
            raise ValueError("coefficient array must hold 2 n + 1 modes")

    def copy(self) -> "SpectralState":
        return SpectralState(self.n_modes, self.coeff.copy(), self.t)


@dataclass
class SpectralTrajectory:
    n_modes: int
    epsilon: float
    gauge: Gauge
    times: np.ndarray
    states: list              # MagneticState samples on the output grid
    coeffs: list              # SpectralState snapshots at the same times


@dataclass
class ExplicitLimitTrajectory:
    grid: PeriodicGrid
    times: np.ndarray
    states: list              # AngleState snapshots
    dxtheta_inf: np.ndarray


def _padded_length(n_modes: int) -> int:
    return 4 * n_modes + 1


def _embed(coeff: np.ndarray, length: int) -> np.ndarray:
    """Zero-pad FFT-layout coefficients (2n+1 modes) into a longer layout."""
    n = (len(coeff) - 1) // 2
    out = np.zeros(length, dtype=complex)
    out[: n + 1] = coeff[: n + 1]
    out[length - n:] = coeff[n + 1:]
    return out


def _extract(coeff_long: np.ndarray, n_modes: int) -> np.ndarray:
    length = len(coeff_long)
    out = np.empty(2 * n_modes + 1, dtype=complex)
    out[: n_modes + 1] = coeff_long[: n_modes + 1]
    out[n_modes + 1:] = coeff_long[length - n_modes:]
    return out


def _values(coeff: np.ndarray, length: int) -> np.ndarray:
    """Evaluate the trigonometric polynomial on `length` equispaced nodes."""
    return np.fft.ifft(_embed(coeff, length)) * length


def _wavenumbers(n_modes: int) -> np.ndarray:
    k = np.fft.fftfreq(2 * n_modes + 1, d=1.0 / (2 * n_modes + 1))
    return k  # integer wavenumbers in FFT layout


def coefficients_from_state(b: MagneticState, n_modes: int) -> SpectralState:
    """Trigonometric interpolation of nodal data, truncated to n modes."""
    m = b.grid.m_x
    if 2 * n_modes + 1 > m:
        raise ValueError("grid too coarse to carry the requested modes")
    full = np.fft.fft(b.as_complex) / m
    return SpectralState(n_modes, _extract(full, n_modes), b.t)


def coefficients_from_callable(f, n_modes: int) -> SpectralState:
    """Sample x -> complex b on the padded grid and transform. Exact for
    band-limited data of degree <= 2 n."""
    length = _padded_length(n_modes)
    x = np.arange(length) / length
    vals = np.asarray(f(x), dtype=complex)
    full = np.fft.fft(vals) / length
    return SpectralState(n_modes, _extract(full, n_modes), 0.0)


def sample_state(s: SpectralState, grid: PeriodicGrid, epsilon: float) -> MagneticState:
    if grid.m_x < 2 * s.n_modes + 1:
        raise ValueError("output grid cannot represent the spectral solution")
    w = _values(s.coeff, grid.m_x)
    return MagneticState(grid, w.real.copy(), w.imag.copy(), s.t, epsilon)


def galerkin_rhs(coeff: np.ndarray, n_modes: int, epsilon: float,
                 gauge: Gauge = Gauge.ZERO_AT_ORIGIN) -> np.ndarray:
    """Time derivative of the coefficients of b under

        d/dt b + d/dx (u b) = epsilon d2 b,   d/dx u = (|b|^2 - int |b|^2)/2.

    All products are formed on the padded grid; the padded length 4n+1
    resolves |b|^2 (degree 2n) exactly, and no mode of u*b (degree 3n) can
    alias back into |k| <= n.
    """
    m_pad = _padded_length(n_modes)
    w = _values(coeff, m_pad)

    mod_sq = w.real * w.real + w.imag * w.imag
    psi = 0.5 * (mod_sq - mod_sq.mean())

    psi_hat = np.fft.fft(psi) / m_pad
    k_pad = np.fft.fftfreq(m_pad, d=1.0 / m_pad)
    u_hat = np.zeros(m_pad, dtype=complex)
    nz = k_pad != 0
    u_hat[nz] = psi_hat[nz] / (TWO_PI * 1j * k_pad[nz])
    # psi has degree <= 2n exactly; anything beyond is roundoff
    u_hat[np.abs(k_pad) > 2 * n_modes] = 0.0

    u = np.fft.ifft(u_hat).real * m_pad
    if gauge is Gauge.ZERO_AT_ORIGIN:
        u = u - u[0]          # node 0 of the padded grid is x = 0

    flux_hat = np.fft.fft(u * w) / m_pad
    k = _wavenumbers(n_modes)
    flux = _extract(flux_hat, n_modes)
    return -TWO_PI * 1j * k * flux - epsilon * (TWO_PI * k) ** 2 * coeff


def spectral_dt_limit(n_modes: int, epsilon: float) -> float:
    return RK4_DIFFUSION_LIMIT / (epsilon * (TWO_PI * n_modes) ** 2)


def run_spectral(b0, epsilon: float, t_end: float, n_modes: int,
                 out_grid: PeriodicGrid, dt: float | None = None,
                 gauge: Gauge = Gauge.ZERO_AT_ORIGIN,
                 record_every: int = 0) -> SpectralTrajectory:
    """Reference run of the resistive system.

    b0 may be a MagneticState (trig-interpolated) or a callable x -> complex.
    The step count is rounded so the run lands on t_end exactly. With
    record_every = 0 only the initial and final states are kept.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if isinstance(b0, MagneticState):
        state = coefficients_from_state(b0, n_modes)
    else:
        state = coefficients_from_callable(b0, n_modes)

    dt_max = spectral_dt_limit(n_modes, epsilon)
    if dt is None:
        dt = min(0.4 * dt_max, t_end)
    elif dt > dt_max * (1 + 1e-12):
        raise StabilityViolated(
            f"dt = {dt:g} exceeds the RK4 diffusion limit {dt_max:g} "
            f"for {n_modes} modes at epsilon = {epsilon:g}")
    n_steps = max(1, int(round(t_end / dt)))
    dt = t_end / n_steps

    times = [0.0]
    coeffs = [state.copy()]
    c = state.coeff.copy()
    for n in range(1, n_steps + 1):
        k1 = galerkin_rhs(c, n_modes, epsilon, gauge)
        k2 = galerkin_rhs(c + 0.5 * dt * k1, n_modes, epsilon, gauge)
        k3 = galerkin_rhs(c + 0.5 * dt * k2, n_modes, epsilon, gauge)
        k4 = galerkin_rhs(c + dt * k3, n_modes, epsilon, gauge)
        c = c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(c).all():
            raise NumericalInstability(
                f"spectral reference went non-finite at step {n}")
        if (record_every and n % record_every == 0) or n == n_steps:
            times.append(n * dt)
            coeffs.append(SpectralState(n_modes, c.copy(), n * dt))

    states = [sample_state(s, out_grid, epsilon) for s in coeffs]
    return SpectralTrajectory(n_modes, epsilon, gauge,
                              np.asarray(times), states, coeffs)


def _angle_rhs(grid: PeriodicGrid, zeta: np.ndarray, n_turns: int
               ) -> tuple[np.ndarray, float]:
    state = AngleState(grid, zeta, n_turns)
    dtheta = state.dx_theta
    u = velocity_from_angle(state).u
    dzeta = -u * dtheta + grid.d2(zeta)
    g = dtheta * dtheta
    return dzeta, -float(grid.integral(g))


def run_limit_explicit(theta0: AngleState, t_end: float,
                       dt: float | None = None,
                       record_every: int = 0) -> ExplicitLimitTrajectory:
    """Explicit RK4 reference for the angle dynamics.

    Every stage re-evaluates velocity and nonlinearity (no frozen-velocity
    splitting), and the velocity comes from the cumulative-integral route.
    The radius rides along as log R inside the same integrator.
    """
    grid = theta0.grid
    dt_cap = EXPLICIT_PARABOLIC_CAP * grid.delta_x**2
    if dt is None:
        dt = 0.2 * grid.delta_x**2
    elif dt > dt_cap * (1 + 1e-12):
        raise StabilityViolated(
            f"dt = {dt:g} exceeds the explicit parabolic cap {dt_cap:g}")
    n_steps = max(1, int(round(t_end / dt)))
    dt = t_end / n_steps

    slope = TWO_PI * theta0.n_turns
    zeta = theta0.zeta.copy()
    log_r = float(np.log(theta0.radius))

    def rhs(z):
        return _angle_rhs(grid, z, theta0.n_turns)

    times = [0.0]
    states = [theta0.copy()]
    inf_series = [float(np.abs(grid.d1(zeta) + slope).max())]
    for n in range(1, n_steps + 1):
        kz1, kr1 = rhs(zeta)
        kz2, kr2 = rhs(zeta + 0.5 * dt * kz1)
        kz3, kr3 = rhs(zeta + 0.5 * dt * kz2)
        kz4, kr4 = rhs(zeta + dt * kz3)
        zeta = zeta + (dt / 6.0) * (kz1 + 2.0 * kz2 + 2.0 * kz3 + kz4)
        log_r = log_r + (dt / 6.0) * (kr1 + 2.0 * kr2 + 2.0 * kr3 + kr4)
        if not np.isfinite(zeta).all():
            raise NumericalInstability(
                f"explicit angle reference went non-finite at step {n}")
        if (record_every and n % record_every == 0) or n == n_steps:
            t = n * dt
            times.append(t)
            states.append(AngleState(grid, zeta.copy(), theta0.n_turns,
                                     float(np.exp(log_r)), t))
            inf_series.append(float(np.abs(grid.d1(zeta) + slope).max()))

    return ExplicitLimitTrajectory(grid, np.asarray(times), states,
                                   np.asarray(inf_series))
