# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license

import math

import numpy as np
import pytest

from utils.general import unit_ball_volume
from utils.quadrature import (InsufficientRange, composite_gauss, fit_power_law, gauss_legendre, panel_edges,
                              richardson_limit, sphere_quadrature)


@pytest.mark.parametrize('n', [3, 4, 5])
def test_sphere_quadrature_area(n):
    x, w = sphere_quadrature(n, 24)
    assert np.sum(w) == pytest.approx(n * unit_ball_volume(n), rel=1e-12)
    np.testing.assert_allclose(np.linalg.norm(x, axis=-1), 1.0, rtol=1e-14)


def test_sphere_quadrature_moments():
    x, w = sphere_quadrature(4, 24)
    area = 4 * unit_ball_volume(4)
    assert abs(np.sum(w * x[:, 0])) < 1e-12
    assert np.sum(w * x[:, 2] ** 2) == pytest.approx(area / 4, rel=1e-12)


def test_sphere_quadrature_node_cap():
    x, _ = sphere_quadrature(5, 64, max_nodes=10_000)
    assert len(x) <= 10_000


def test_gauss_legendre_read_only():
    x, w = gauss_legendre(8)
    with pytest.raises(ValueError):
        x[0] = 0.0
    assert np.sum(w) == pytest.approx(2.0)


def test_composite_gauss_with_breakpoint():
    x, w = composite_gauss(0.0, 2.0, panels=4, order=8, breakpoints=(1.3,))
    assert np.sum(w * np.abs(x - 1.3)) == pytest.approx(0.5 * 1.3 ** 2 + 0.5 * 0.7 ** 2, rel=1e-13)


def test_geometric_panel_edges():
    e = panel_edges(0.0, 1.0, 4, kind='geometric', ratio=2.0)
    np.testing.assert_allclose(e, [0.0, 1 / 15, 3 / 15, 7 / 15, 1.0], rtol=1e-14)
    with pytest.raises(ValueError):
        panel_edges(0.0, 1.0, 4, kind='chebyshev')


def test_richardson_limit():
    lam = 8.0 * 2.0 ** np.arange(4)
    y_inf, p, err = richardson_limit(lam, math.pi - 0.5 / lam)
    assert y_inf == pytest.approx(math.pi, abs=1e-12)
    assert p == pytest.approx(1.0, rel=1e-8)
    assert err == pytest.approx(0.5 / 32 - 0.5 / 64)


def test_richardson_non_monotone_tail():
    y_inf, p, _ = richardson_limit([1.0, 2.0, 3.0], [1.0, 2.0, 1.5])
    assert y_inf == 1.5 and math.isnan(p)
    with pytest.raises(InsufficientRange):
        richardson_limit([1.0, 2.0], [1.0, 2.0])


def test_fit_power_law():
    x = np.array([10.0, 20.0, 40.0, 80.0])
    k, A, rms = fit_power_law(x, -5.0 * x ** -1.5)
    assert k == pytest.approx(-1.5) and A == pytest.approx(5.0) and rms < 1e-12
    with pytest.raises(InsufficientRange):
        fit_power_law([1.0, 2.0], [0.0, 1.0])
