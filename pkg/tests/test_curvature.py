# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license

import numpy as np
import pytest

from models.ambient import FlatMetric, HatLocalizedMetric, PowerLawMetric, SchwarzschildMetric
from utils.curvature import (NonUnitNormal, QuadratureDivergence, adm_mass, adm_mass_check, check_flux_sequence,
                             curvature_paths_check, mean_curvature_from_euclidean, ricci_normal, ricci_tensor,
                             sample_points, scalar_curvature, vanishing_scalar_check)

RADII = [8.0 * 2 ** k for k in range(7)]


@pytest.mark.parametrize('n', [4, 5])
def test_schwarzschild_scalar_curvature_vanishes(n):
    r = vanishing_scalar_check(SchwarzschildMetric(n), samples=100, seed=0)
    assert r.passed, r.value


def test_scalar_curvature_paths_agree():
    metric = HatLocalizedMetric(4)
    x = sample_points(metric, 20, seed=3, r_max=4.0)
    R_phi, R_log = scalar_curvature(metric, x, path='phi'), scalar_curvature(metric, x, path='log')
    np.testing.assert_allclose(R_log, R_phi, rtol=1e-8, atol=1e-12)
    assert np.all(R_phi > 0)  # φ superharmonic


@pytest.mark.parametrize('metric', [SchwarzschildMetric(4), HatLocalizedMetric(4)], ids=repr)
def test_scalar_curvature_oracle(metric):
    r = curvature_paths_check(metric, samples=20, seed=0)
    assert r.passed, r.value


def test_ricci_trace_is_scalar_curvature():
    metric = HatLocalizedMetric(5)
    x = sample_points(metric, 16, seed=4, r_max=5.0)
    w = metric.value(x)
    frame = np.eye(5)[None] / np.sqrt(w)[:, None, None]  # g-orthonormal
    trace = sum(ricci_normal(metric, x, frame[:, i]) for i in range(5))
    np.testing.assert_allclose(trace, scalar_curvature(metric, x), rtol=1e-6, atol=1e-10)


def test_ricci_normal_matches_oracle():
    metric = SchwarzschildMetric(4)
    x = np.array([[2.0, 0.0, 0.0, 0.0]])
    nu = np.array([[1.0, 0.0, 0.0, 0.0]]) / np.sqrt(metric.value(x))[:, None]
    a, b = ricci_normal(metric, x, nu), ricci_normal(metric, x, nu, path='fd')
    assert a[0] == pytest.approx(b[0], rel=1e-5)
    assert abs(np.trace(ricci_tensor(metric, x)[0])) < 1e-10  # R = 0


def test_ricci_normal_rejects_euclidean_normal():
    metric = SchwarzschildMetric(4)
    with pytest.raises(NonUnitNormal):
        ricci_normal(metric, np.array([[2.0, 0.0, 0.0, 0.0]]), np.array([[1.0, 0.0, 0.0, 0.0]]))


@pytest.mark.parametrize('n', [3, 4, 5, 7])
def test_horizon_is_minimal(n):
    metric = SchwarzschildMetric(n)
    x = sample_points(FlatMetric(n), 12, seed=5)
    x /= np.linalg.norm(x, axis=-1, keepdims=True)  # unit sphere, outward normal x, H̄ = n - 1
    H = mean_curvature_from_euclidean(metric, x, np.full(len(x), n - 1.0), x)
    assert np.max(np.abs(H)) < 1e-10


@pytest.mark.parametrize('n', [4, 5])
def test_schwarzschild_mass(n):
    est = adm_mass(SchwarzschildMetric(n), RADII)
    assert est.limit == pytest.approx(2.0, rel=0.01)
    np.testing.assert_allclose(est.values, est.closed_form, rtol=1e-10)
    r = adm_mass_check(est, 2.0)
    assert r.passed and r.name == 'adm_mass'


def test_flat_mass_vanishes():
    est = adm_mass(FlatMetric(4), RADII)
    assert np.all(np.abs(est.values) < 1e-10) and abs(est.limit) < 1e-10


def test_fast_decay_has_no_mass():
    est = adm_mass(PowerLawMetric(4, amplitude=1.0, tau=3.0), RADII)
    assert est.values[0] > est.values[-1] > 0
    assert abs(est.limit) < 1e-6
    assert est.consistent_with(0.0, atol=1e-6)


def test_flux_sequence_divergence():
    check_flux_sequence([2.0, 1.5, 1.25, 1.2])
    with pytest.raises(QuadratureDivergence):
        check_flux_sequence([0.0, 1.0, 3.0])
