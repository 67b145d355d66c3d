import numpy as np
import pytest

from magrelax import PeriodicGrid

TWO_PI = 2.0 * np.pi


def test_nodes_span_unit_torus():
    g = PeriodicGrid(10)
    assert g.delta_x == 0.1
    assert np.allclose(g.nodes, np.arange(10) / 10.0)
    # half-open: the right endpoint is not a node
    assert g.nodes[-1] < 1.0


def test_rejects_tiny_grids():
    with pytest.raises(ValueError):
        PeriodicGrid(3)


def test_d1_second_order_on_smooth_mode():
    errs = []
    for m in (64, 128):
        g = PeriodicGrid(m)
        f = np.sin(TWO_PI * g.nodes)
        exact = TWO_PI * np.cos(TWO_PI * g.nodes)
        errs.append(np.abs(g.d1(f) - exact).max())
    ratio = errs[0] / errs[1]
    assert 3.0 < ratio < 5.0


def test_d1_wraps_periodically():
    g = PeriodicGrid(8)
    f = np.zeros(8)
    f[0] = 1.0
    d = g.d1(f)
    # the spike is seen by both neighbours across the seam
    assert d[1] == pytest.approx(-1.0 / (2 * g.delta_x))
    assert d[-1] == pytest.approx(1.0 / (2 * g.delta_x))


def test_d2_discrete_eigenvalue_exact():
    # on a sampled Fourier mode the three-point stencil has the closed-form
    # symbol -(4/dx^2) sin^2(pi k dx)
    g = PeriodicGrid(40)
    for k in (1, 3, 7):
        f = np.cos(TWO_PI * k * g.nodes)
        lam = -(4.0 / g.delta_x**2) * np.sin(np.pi * k * g.delta_x) ** 2
        assert np.abs(g.d2(f) - lam * f).max() < 1e-11 * abs(lam)


def test_integral_left_rule_exact_for_constants_and_modes():
    g = PeriodicGrid(37)
    assert g.integral(np.ones(37)) == pytest.approx(1.0)
    # mean-free modes integrate to zero to rounding
    assert abs(g.integral(np.sin(TWO_PI * g.nodes))) < 1e-14


def test_cumulative_starts_at_zero_and_telescopes():
    g = PeriodicGrid(16)
    f = np.cos(TWO_PI * g.nodes) + 0.5
    c = g.cumulative(f)
    assert c[0] == 0.0
    # running trapezoid rule
    assert c[5] == pytest.approx(np.sum(0.5 * (f[:5] + f[1:6])) * g.delta_x)


def test_shape_mismatch_raises():
    g = PeriodicGrid(8)
    with pytest.raises(ValueError):
        g.d1(np.zeros(9))
