import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magrelax import USING_COMPILED, solve_cyclic
from magrelax.tridiag import _solve_cyclic_fallback


def _dense(sub, diag, sup):
    n = len(diag)
    a = np.zeros((n, n), dtype=complex)
    for i in range(n):
        a[i, i] = diag[i]
        a[i, (i - 1) % n] = sub[i]
        a[i, (i + 1) % n] = sup[i]
    return a


def _random_system(rng, n, complex_rhs=False):
    sub = rng.uniform(-1, 1, n)
    sup = rng.uniform(-1, 1, n)
    # make it strictly diagonally dominant so the solve is well posed
    diag = np.abs(sub) + np.abs(sup) + rng.uniform(1.0, 2.0, n)
    if complex_rhs:
        rhs = rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)
    else:
        rhs = rng.uniform(-1, 1, n)
    return sub, diag, sup, rhs


def test_matches_dense_solve(rng):
    sub, diag, sup, rhs = _random_system(rng, 50)
    x = solve_cyclic(sub, diag, sup, rhs)
    ref = np.linalg.solve(_dense(sub, diag, sup).real, rhs)
    assert np.abs(x - ref).max() < 1e-12


def test_complex_rhs(rng):
    sub, diag, sup, rhs = _random_system(rng, 33, complex_rhs=True)
    x = solve_cyclic(sub, diag, sup, rhs)
    ref = np.linalg.solve(_dense(sub, diag, sup), rhs.astype(complex))
    assert np.abs(x - ref).max() < 1e-12


def test_residual_near_machine(rng):
    sub, diag, sup, rhs = _random_system(rng, 400)
    x = solve_cyclic(sub, diag, sup, rhs)
    resid = diag * x + sub * np.roll(x, 1) + sup * np.roll(x, -1) - rhs
    assert np.abs(resid).max() < 1e-13


def test_fallback_agrees_with_active_backend(rng):
    sub, diag, sup, rhs = _random_system(rng, 120)
    a = solve_cyclic(sub, diag, sup, rhs)
    b = _solve_cyclic_fallback(sub, diag, sup, rhs.astype(complex))
    assert np.abs(a - b).max() < 1e-12


def test_backend_flag_is_bool():
    assert isinstance(USING_COMPILED, bool)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(min_value=4, max_value=200), seed=st.integers(0, 2**31))
def test_property_dominant_systems_solve(n, seed):
    rng = np.random.default_rng(seed)
    sub, diag, sup, rhs = _random_system(rng, n)
    x = solve_cyclic(sub, diag, sup, rhs)
    resid = diag * x + sub * np.roll(x, 1) + sup * np.roll(x, -1) - rhs
    assert np.abs(resid).max() < 1e-11


def test_rejects_mismatched_lengths():
    with pytest.raises(ValueError):
        solve_cyclic(np.ones(4), np.ones(5), np.ones(5), np.ones(5))
