"""State types and field utilities shared by the three solvers.

The magnetic field b maps the torus to R^2 and is stored as two real nodal
vectors (b1, b2). The velocity is recovered from b through

    d/dx u = psi := (|b|^2 - integral(|b|^2)) / 2,

which determines u only up to a constant; the two supported gauges are
u(x_0) = 0 (ZERO_AT_ORIGIN) and integral(u) = 0 (ZERO_MEAN). Solutions in the
two gauges differ by a change of reference frame, so runs record which gauge
was active instead of fixing one globally.

Constant-modulus fields are written R e^{i theta} with theta(x) =
zeta(x) + 2 pi N x: zeta periodic, N the integer winding. AngleState stores
(zeta, N, R); N is conserved by the dynamics and R only enters as a
diagnostic radius.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import UnwrapAmbiguous, ZeroModulus
from .grid import PeriodicGrid

TWO_PI = 2.0 * np.pi

# Below this pointwise modulus the polar decomposition is refused.
MODULUS_FLOOR = 1e-8


class Gauge(enum.Enum):
    ZERO_AT_ORIGIN = "zero_at_origin"
    ZERO_MEAN = "zero_mean"


@dataclass
class MagneticState:
    """Sampled 2-component magnetic field with its time and resistivity."""

    grid: PeriodicGrid
    b1: np.ndarray
    b2: np.ndarray
    t: float = 0.0
    epsilon: float = 0.0

    @property
    def as_complex(self) -> np.ndarray:
        return self.b1 + 1j * self.b2

    @property
    def mod_sq(self) -> np.ndarray:
        return self.b1 * self.b1 + self.b2 * self.b2

    def copy(self) -> "MagneticState":
        return MagneticState(self.grid, self.b1.copy(), self.b2.copy(),
                             self.t, self.epsilon)


@dataclass
class VelocityField:
    grid: PeriodicGrid
    u: np.ndarray
    gauge: Gauge


@dataclass
class AngleState:
    """Angle representation theta = zeta + 2 pi N x with diagnostic radius R."""

    grid: PeriodicGrid
    zeta: np.ndarray
    n_turns: int
    radius: float = 1.0
    t: float = 0.0

    @property
    def theta(self) -> np.ndarray:
        return self.zeta + TWO_PI * self.n_turns * self.grid.nodes

    @property
    def dx_theta(self) -> np.ndarray:
        """d1 theta, with the winding part differentiated analytically."""
        return self.grid.d1(self.zeta) + TWO_PI * self.n_turns

    def copy(self) -> "AngleState":
        return AngleState(self.grid, self.zeta.copy(), self.n_turns,
                          self.radius, self.t)


def psi_from_state(b: MagneticState) -> np.ndarray:
    """Velocity gradient psi = (|b|^2 - integral(|b|^2)) / 2. Mean-free."""
    mod_sq = b.mod_sq
    return 0.5 * (mod_sq - b.grid.integral(mod_sq))


def apply_gauge(grid: PeriodicGrid, u_raw: np.ndarray, gauge: Gauge) -> np.ndarray:
    """Shift an antiderivative anchored at x_0 into the requested gauge."""
    if gauge is Gauge.ZERO_AT_ORIGIN:
        return u_raw - u_raw[0]
    return u_raw - grid.integral(u_raw)


def reconstruct_velocity(b: MagneticState, gauge: Gauge = Gauge.ZERO_AT_ORIGIN) -> VelocityField:
    """Antiderivative of psi in the requested gauge.

    psi has zero mean by construction, so the running trapezoid closes
    around the torus and u is genuinely periodic.
    """
    u_raw = b.grid.cumulative(psi_from_state(b))
    return VelocityField(b.grid, apply_gauge(b.grid, u_raw, gauge), gauge)


def velocity_from_angle(theta: AngleState, gauge: Gauge = Gauge.ZERO_AT_ORIGIN) -> VelocityField:
    """Velocity of the effective angle dynamics,

        u(x) = -int_0^x (d theta)^2 + x * int_T (d theta)^2,

    computed through the grid's cumulative/integral operators. Zero at the
    origin by construction; shifted afterwards if ZERO_MEAN is requested.
    """
    g = theta.dx_theta**2
    grid = theta.grid
    u_raw = -grid.cumulative(g) + grid.nodes * grid.integral(g)
    return VelocityField(grid, apply_gauge(grid, u_raw, gauge), gauge)


def _principal_branch(d: np.ndarray) -> np.ndarray:
    """Map angle increments into (-pi, pi]."""
    return d - TWO_PI * np.ceil((d - np.pi) / TWO_PI)


def winding_number(theta_samples: np.ndarray) -> int:
    """Integer turn count of an angle sampled once around the torus.

    Uses the discrete degree: the sum of principal-branch increments around
    the closed loop is an exact multiple of 2 pi. An increment within 1e-9
    of +-pi means the branch choice is ambiguous (under-resolved input).
    """
    theta_samples = np.asarray(theta_samples, dtype=float)
    d = _principal_branch(np.roll(theta_samples, -1) - theta_samples)
    if np.any(np.abs(d) >= np.pi - 1e-9):
        raise UnwrapAmbiguous(
            "adjacent angle samples jump by ~pi; refine the sampling")
    return int(round(d.sum() / TWO_PI))


def unwrap_angle(theta_samples: np.ndarray) -> np.ndarray:
    """Continuous representative of a wrapped angle, anchored at sample 0."""
    theta_samples = np.asarray(theta_samples, dtype=float)
    d = _principal_branch(np.diff(theta_samples))
    out = np.empty_like(theta_samples)
    out[0] = theta_samples[0]
    np.cumsum(d, out=out[1:])
    out[1:] += theta_samples[0]
    return out


def to_angle(b: MagneticState, modulus_floor: float = MODULUS_FLOOR) -> AngleState:
    """Polar decomposition b ~ R e^{i theta}.

    R is the mean of |b| over the torus; on fields whose modulus is not
    constant this is a projection and from_angle(to_angle(b)) will not
    reproduce b (documented lossy behavior). Refuses fields whose modulus
    dips below the floor: near a zero the angle is meaningless and blow-up
    studies need the hard signal.
    """
    mod = np.hypot(b.b1, b.b2)
    if mod.min() <= modulus_floor:
        raise ZeroModulus(
            f"min |b| = {mod.min():.3e} at or below floor {modulus_floor:.1e}")
    theta = unwrap_angle(np.arctan2(b.b2, b.b1))
    closure = _principal_branch(theta[0] - theta[-1])
    n = int(round((theta[-1] - theta[0] + closure) / TWO_PI))
    zeta = theta - TWO_PI * n * b.grid.nodes
    return AngleState(b.grid, zeta, n, radius=float(mod.mean()), t=b.t)


def from_angle(theta: AngleState, epsilon: float = 0.0) -> MagneticState:
    """Constant-modulus field R e^{i theta}."""
    ang = theta.theta
    return MagneticState(theta.grid, theta.radius * np.cos(ang),
                         theta.radius * np.sin(ang), t=theta.t, epsilon=epsilon)
