"""Cyclic (periodically wrapped) tridiagonal solver with two backends.

Row j of the system reads

    sub[j] x[j-1] + diag[j] x[j] + sup[j] x[j+1] = rhs[j]   (indices mod m)

so the matrix carries corner entries A[0, m-1] = sub[0] and A[m-1, 0] =
sup[m-1]. Both backends remove the corners with the same rank-one
Sherman-Morrison correction and then solve two strictly tridiagonal systems:

  * compiled: hand-written Thomas sweeps in the Cython module ``_kernels``
    (built at install time when a C toolchain is available);
  * fallback: LAPACK banded LU via scipy.linalg.solve_banded.

The active backend is chosen once at import; ``USING_COMPILED`` records the
choice and the benchmark in benchmarks/bench_tridiag.py compares the two.
"""

from __future__ import annotations

import numpy as np

from .errors import SolverSingular

try:
    from . import _kernels

    USING_COMPILED = True
except ImportError:  # pragma: no cover - exercised only on builds without gcc
    _kernels = None
    USING_COMPILED = False


def _solve_cyclic_fallback(sub: np.ndarray, diag: np.ndarray, sup: np.ndarray,
                           rhs: np.ndarray) -> np.ndarray:
    from scipy.linalg import solve_banded

    m = diag.shape[0]
    gamma = -diag[0]
    alpha = sub[0]
    beta = sup[m - 1]

    bb = diag.copy()
    bb[0] = diag[0] - gamma
    bb[m - 1] = diag[m - 1] - alpha * beta / gamma

    ab = np.zeros((3, m))
    ab[0, 1:] = sup[:-1]
    ab[1, :] = bb
    ab[2, :-1] = sub[1:]

    u = np.zeros(m)
    u[0] = gamma
    u[m - 1] = beta

    try:
        y = solve_banded((1, 1), ab, rhs)
        z = solve_banded((1, 1), ab, u)
    except np.linalg.LinAlgError as exc:
        raise SolverSingular(str(exc)) from exc

    fac = alpha / gamma
    denom = 1.0 + z[0] + fac * z[m - 1]
    if abs(denom) < 1e-300:
        raise SolverSingular("vanishing Sherman-Morrison denominator")
    return y - ((y[0] + fac * y[m - 1]) / denom) * z


def solve_cyclic(sub: np.ndarray, diag: np.ndarray, sup: np.ndarray,
                 rhs: np.ndarray) -> np.ndarray:
    """Solve the cyclic tridiagonal system; real coefficients, real or
    complex right-hand side. Raises SolverSingular on a vanishing pivot."""
    sub = np.ascontiguousarray(sub, dtype=np.float64)
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    sup = np.ascontiguousarray(sup, dtype=np.float64)
    if not (sub.shape == diag.shape == sup.shape == rhs.shape):
        raise ValueError("band and rhs shapes differ")
    if diag.shape[0] < 3:
        raise ValueError("cyclic solve needs at least 3 unknowns")

    if _kernels is not None:
        try:
            if np.iscomplexobj(rhs):
                return _kernels.solve_cyclic_z(
                    sub, diag, sup, np.ascontiguousarray(rhs, dtype=np.complex128))
            return _kernels.solve_cyclic_d(
                sub, diag, sup, np.ascontiguousarray(rhs, dtype=np.float64))
        except ZeroDivisionError as exc:
            raise SolverSingular(str(exc)) from exc

    if np.iscomplexobj(rhs):
        rhs = np.ascontiguousarray(rhs, dtype=np.complex128)
        real = _solve_cyclic_fallback(sub, diag, sup, rhs.real)
        imag = _solve_cyclic_fallback(sub, diag, sup, rhs.imag)
        return real + 1j * imag
    return _solve_cyclic_fallback(sub, diag, sup,
                                  np.ascontiguousarray(rhs, dtype=np.float64))
