"""Uniform periodic grid on the unit torus and its discrete calculus.

All solvers share these four operators:

    d1(f)_j       = (f_{j+1} - f_{j-1}) / (2 dx)          centered first difference
    d2(f)_j       = (f_{j+1} + f_{j-1} - 2 f_j) / dx^2    3-point Laplacian
    integral(f)   = mean(f)                               trapezoid on a uniform
                                                          periodic grid over [0, 1)
    cumulative(f) = running trapezoid from x_0 = 0        increments (f_j + f_{j+1})/2 dx

Index arithmetic is modulo m_x everywhere. Adding the wrap increment
dx*(f_{m-1} + f_0)/2 to cumulative(f)[-1] recovers integral(f) exactly, so the
running integral closes consistently around the torus.

d2 is not d1 applied twice (different stencil widths); its discrete
eigenvalue on sin(2 pi k x) is -(2 - 2 cos(2 pi k dx))/dx^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform partition of the unit torus with m_x nodes x_j = j/m_x."""

    m_x: int
    delta_x: float = field(init=False)

    def __post_init__(self) -> None:
        if self.m_x < 8:
            raise ValueError(f"m_x must be >= 8, got {self.m_x}")
        object.__setattr__(self, "delta_x", 1.0 / self.m_x)

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.m_x) * self.delta_x

    def _check(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f)
        if f.shape != (self.m_x,):
            raise ValueError(f"field shape {f.shape} does not match grid ({self.m_x},)")
        return f

    def d1(self, f: np.ndarray) -> np.ndarray:
        """Centered first difference with periodic wrap."""
        f = self._check(f)
        return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * self.delta_x)

    def d2(self, f: np.ndarray) -> np.ndarray:
        """3-point periodic Laplacian."""
        f = self._check(f)
        return (np.roll(f, -1) + np.roll(f, 1) - 2.0 * f) / self.delta_x**2

    def integral(self, f: np.ndarray) -> float | complex:
        """Integral over the torus: trapezoid = node mean on a uniform periodic grid."""
        f = self._check(f)
        val = f.mean()
        return complex(val) if np.iscomplexobj(f) else float(val)

    def cumulative(self, f: np.ndarray) -> np.ndarray:
        """Running trapezoid integral g with g(x_0) = 0, g(x_j) = int_0^{x_j} f."""
        f = self._check(f)
        g = np.empty_like(f, dtype=complex if np.iscomplexobj(f) else float)
        g[0] = 0.0
        np.cumsum(0.5 * (f[:-1] + f[1:]) * self.delta_x, out=g[1:])
        return g
