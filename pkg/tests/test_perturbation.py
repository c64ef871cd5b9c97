# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license

import numpy as np
import pytest

from models.ambient import FlatMetric, SchwarzschildMetric
from utils.perturbation import (BumpField, OverlapViolation, PositivityViolation, SteepnessTooLow, build_chain,
                                chain_centers, check_overlap, curvature_oracle_check, make_bump, perturbed_scalar_curvature,
                                ray_distance, unit_directions, verify_perturbed_metric)

R, LAM = 0.5, 20.0


@pytest.fixture(scope='module')
def flat4():
    return FlatMetric(4)


@pytest.fixture(scope='module')
def chain(flat4):
    centers = chain_centers(flat4, [5.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], 2, R)
    return build_chain(flat4, centers, R, LAM)


def test_bump_profile(flat4):
    bump = BumpField(flat4, np.zeros(4), R, LAM)
    p0, p1, p2 = bump.profile(np.array([0.0, 0.2, 6 * R, 7 * R]))
    assert p0[0] == pytest.approx(-1.0) and p0[1] == pytest.approx(-1.0)
    assert p1[0] == 0.0 and p2[0] == 0.0
    assert p0[2] == 0.0 and p0[3] == 0.0
    assert np.all(bump.profile(np.linspace(0.0, 6 * R - 1e-9, 200))[0] < 0)
    assert bump.radius == 6 * R


def test_make_bump(flat4):
    bump = make_bump(flat4, np.zeros(4), R, LAM)
    m = bump.margins
    assert m['max_laplacian'] < 0 and m['max_inside'] < 0 and m['max_outside'] == 0
    assert m['annulus_samples'] > 0


def test_bump_laplacian_paths(flat4):
    bump = BumpField(flat4, np.array([1.0, 0.0, 0.0, 0.0]), R, LAM)
    u = unit_directions(4, 6, seed=1)
    d = np.linspace(1.2 * R, 5 * R, 7)
    x = bump.q + (d[:, None, None] * u[None]).reshape(-1, 4)
    closed, fd = bump.laplacian(x, path='closed'), bump.laplacian(x, path='fd')
    np.testing.assert_allclose(fd, closed, rtol=1e-4)
    assert np.all(closed < 0)


def test_steepness_too_low(flat4):
    with pytest.raises(SteepnessTooLow):
        make_bump(flat4, np.zeros(4), R, 10.0)


def test_chain_centers(flat4):
    q1, q2 = chain_centers(flat4, [5.0, 0.0, 0.0, 0.0], [2.0, 0.0, 0.0, 0.0], 2, R)
    np.testing.assert_allclose(q2, [7.0, 0.0, 0.0, 0.0], atol=1e-10)
    assert ray_distance(flat4, q1, q2) == pytest.approx(4 * R)


def test_chain(chain):
    assert chain.a[0] == 1.0 and chain.a[1] >= 1.0
    assert chain.a[1] > 1e6 and chain.scale == pytest.approx(1 / chain.a[1], rel=0.1)
    assert np.min(chain(chain.grid())) == pytest.approx(-1.0)
    m = chain.margins
    assert m['max_laplacian'] < 0 and m['max_inside'] < 0 and m['max_outside'] == 0
    assert chain.describe()['centers'][0] == [5.0, 0.0, 0.0, 0.0]


def test_verify_perturbed_metric(flat4, chain):
    for r in verify_perturbed_metric(flat4, chain, 0.5, 0.1):
        assert r.passed, (r.name, r.value)


def test_perturbed_metric_stays_close(flat4, chain):
    x = chain.grid()
    assert np.min(1 + 0.5 * 0.1 * chain(x)) == pytest.approx(0.95)
    reports = {r.name: r for r in verify_perturbed_metric(flat4, chain, 0.5, 0.1)}
    assert reports['perturbed_linear_in_t'].measured['ratio'] == pytest.approx(2.0, rel=0.05)


def test_schwarzschild_chain():
    metric = SchwarzschildMetric(4)
    centers = chain_centers(metric, [5.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], 2, R)
    chain = build_chain(metric, centers, R, LAM)
    assert np.min(chain(chain.grid())) == pytest.approx(-1.0)
    for r in verify_perturbed_metric(metric, chain, 0.5, 0.1):
        assert r.passed, (r.name, r.value)
    assert curvature_oracle_check(metric, chain, 0.5, 0.1, samples=20).passed


def test_perturbed_scalar_curvature_positive(flat4, chain):
    x = chain.bumps[1].shell([1.5 * R, 3 * R], unit_directions(4, 8))
    assert np.all(perturbed_scalar_curvature(flat4, chain, 0.5, 0.1, x) > 0)


def test_curvature_oracle(flat4, chain):
    r = curvature_oracle_check(flat4, chain, 0.5, 0.1, samples=20)
    assert r.passed, r.value


def test_positivity_violation(flat4, chain):
    with pytest.raises(PositivityViolation):
        verify_perturbed_metric(flat4, chain, 0.9, 20.0)


def test_overlap_violation(flat4):
    bumps = [BumpField(flat4, np.zeros(4), R, LAM), BumpField(flat4, np.array([0.5, 0.0, 0.0, 0.0]), R, LAM)]
    with pytest.raises(OverlapViolation):
        check_overlap(bumps)
