# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license

import numpy as np
import pytest

from models.ambient import (ConformallyPerturbedMetric, FlatMetric, HatLocalizedMetric, PointOutsideDomain,
                            PowerLawMetric, SchwarzschildMetric, SlabMetric, StepCutoff, build_metric, fd_factor)
from utils.general import ConfigError


def random_points(n, count, lo, hi, seed=0):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((count, n))
    u /= np.linalg.norm(u, axis=-1, keepdims=True)
    return rng.uniform(lo, hi, count)[:, None] * u


@pytest.mark.parametrize('metric', [SchwarzschildMetric(4), SchwarzschildMetric(5), HatLocalizedMetric(4),
                                    PowerLawMetric(4)], ids=repr)
def test_factor_matches_finite_differences(metric):
    x = random_points(metric.n, 32, max(1.5 * metric.inner_radius, 0.6), 12.0, seed=1)
    w, g, H = metric.factor(x)
    wf, gf, Hf = fd_factor(metric.value, x)
    np.testing.assert_allclose(w, wf, rtol=1e-14)
    np.testing.assert_allclose(g, gf, rtol=1e-6, atol=1e-6)
    np.testing.assert_allclose(H, Hf, rtol=1e-5, atol=1e-6)


def test_schwarzschild_gradient_at_two():
    metric = SchwarzschildMetric(4)
    x = np.array([2.0, 0.0, 0.0, 0.0])
    _, g, _ = metric.factor(x)
    _, gf, _ = fd_factor(metric.value, x)
    assert g[0] == pytest.approx(gf[0], rel=1e-6)
    assert np.all(g[1:] == 0)


@pytest.mark.parametrize('n', [3, 4, 5, 6, 7])
def test_schwarzschild_horizon(n):
    metric = SchwarzschildMetric(n, m=2.0)
    assert metric.horizon == pytest.approx(1.0)
    assert metric.inner_radius == pytest.approx(1.0)
    assert SchwarzschildMetric(n, m=2.0, horizon=False).inner_radius == 0.0
    with pytest.raises(PointOutsideDomain):
        metric.value(np.eye(n)[0] * 0.5)


def test_slab_flat_below_plane():
    metric = SlabMetric(4, delta=0.5)
    x = random_points(4, 64, 0.1, 50.0, seed=2)
    x[:, -1] = -np.abs(x[:, -1])
    w, g, H = metric.factor(x)
    assert np.all(w == 1.0)
    assert np.all(g == 0.0) and np.all(H == 0.0)
    assert np.all(metric.value(x) == 1.0)


def test_slab_dip_above_plane():
    metric = SlabMetric(4, delta=0.5)
    w = metric.value(np.array([0.0, 0.0, 0.0, 2.0]))
    assert 0.5 < w < 1.0


def test_step_cutoff():
    eta = StepCutoff(0.5, 1.0)
    assert eta(0.2) == 0.0 and eta(1.3) == 1.0
    assert eta(0.75) == pytest.approx(0.5)
    t = np.linspace(0.3, 1.4, 23)
    h = 1e-6
    np.testing.assert_allclose((eta.antiderivative(t + h) - eta.antiderivative(t - h)) / (2 * h), eta(t), atol=1e-8)
    np.testing.assert_allclose((eta(t + h) - eta(t - h)) / (2 * h), eta(t, 1), atol=1e-6)
    assert eta.antiderivative(3.0) == pytest.approx(3.0 - 0.75)


def test_power_law_radial():
    metric = PowerLawMetric(4, amplitude=2.0, tau=3.0, r_min=0.5)
    W, W1, W2 = metric.radial(np.array([2.0]))
    assert W[0] == pytest.approx(1 + 2.0 / 8)
    assert W1[0] == pytest.approx(-3 * 2.0 / 16)
    assert W2[0] == pytest.approx(12 * 2.0 / 32)


def test_log_gradient_rz():
    metric = SchwarzschildMetric(4)
    dt, dz = metric.log_gradient_rz(3.0, 4.0)
    w, g, _ = metric.factor(metric.embed(3.0, 4.0))
    assert dt == pytest.approx(g[0] / w)
    assert dz == pytest.approx(g[-1] / w)


def test_perturbed_metric_with_zero_field():
    base = SchwarzschildMetric(4)
    metric = ConformallyPerturbedMetric(base, lambda x: np.zeros(np.shape(x)[:-1]), t=0.5, delta=0.1)
    x = random_points(4, 8, 2.0, 10.0)
    np.testing.assert_allclose(metric.value(x), base.value(x), rtol=1e-15)
    assert metric.horizon == base.horizon


def test_build_metric():
    metric = build_metric({'family': 'schwarzschild', 'm': 2.0}, 5)
    assert isinstance(metric, SchwarzschildMetric) and metric.n == 5
    assert isinstance(build_metric(None, 4), FlatMetric)
    slab = build_metric({'family': 'slab', 'delta': 0.3, 'cutoff': {'kind': 'quintic', 'lo': 0.4, 'hi': 0.9}}, 4)
    assert slab.cutoff.lo == 0.4 and slab.describe()['delta'] == 0.3


@pytest.mark.parametrize('d, n', [({'family': 'kerr'}, 4),
                                  ({'family': 'schwarzschild', 'mass': 2.0}, 4),
                                  ({'family': 'schwarzschild', 'm': -1.0}, 4),
                                  ({'family': 'slab', 'delta': 1.5}, 4),
                                  ({'family': 'flat'}, 8)])
def test_build_metric_errors(d, n):
    with pytest.raises(ConfigError):
        build_metric(d, n)


def test_slab_factor_matches_finite_differences():
    # points inside the cutoff ramp and above it, away from the ramp ends
    metric = SlabMetric(4, delta=0.5)
    x = np.array([[1.0, 0.0, 0.0, 2.0], [1.0, 1.0, 0.0, 1.0], [0.5, -0.3, 0.2, 0.8], [3.0, 1.0, -2.0, 6.0]])
    w, g, H = metric.factor(x)
    wf, gf, Hf = fd_factor(metric.value, x)
    np.testing.assert_allclose(w, wf, rtol=1e-14)
    np.testing.assert_allclose(g, gf, rtol=1e-6, atol=1e-7)
    np.testing.assert_allclose(H, Hf, rtol=1e-5, atol=1e-6)
