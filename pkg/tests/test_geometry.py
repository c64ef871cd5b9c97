# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license

import math

import numpy as np
import pytest

from models.ambient import FlatMetric, SchwarzschildMetric
from utils.general import unit_ball_volume
from utils.geometry import (acv_expansion_check, acv_functional, area_convergence, area_functional,
                            euclidean_ibp_check, first_variation_check, gauss_trace_check, graded_edges,
                            intrinsic_scalar_curvature, second_fundamental_form, second_fundamental_form_fd,
                            second_variation, second_variation_check, sphere_second_variation)
from utils.surfaces import (CatenoidCurve, InvalidTestFunction, PlaneCurve, SphereCurve, VariationTestFunction,
                            as_curve, build_test_function)


@pytest.mark.parametrize('n', [3, 4, 5])
def test_flat_disk_area(n):
    assert area_functional(PlaneCurve(1.0, 3.0), FlatMetric(n)) == pytest.approx(unit_ball_volume(n - 1) * 3.0 ** (n - 1),
                                                                                 rel=1e-12)


@pytest.mark.parametrize('n', [3, 4, 5])
def test_flat_sphere_area(n):
    assert area_functional(SphereCurve(2.0), FlatMetric(n)) == pytest.approx(n * unit_ball_volume(n) * 2.0 ** (n - 1),
                                                                             rel=1e-12)


def test_area_convergence(plateau4):
    assert area_convergence(plateau4, plateau4.metric).passed


@pytest.mark.parametrize('n', [3, 4, 5])
def test_sphere_second_variation(n):
    sv = second_variation(SphereCurve(1.5), FlatMetric(n), VariationTestFunction.constant())
    assert sv == pytest.approx(sphere_second_variation(n, 1.5), rel=1e-10)


def test_second_variation_catenoid():
    r = second_variation_check(CatenoidCurve(4, 1.0, 0.0, 10.0), FlatMetric(4), VariationTestFunction.bump(-1.0, 1.5))
    assert r.passed, r.measured


def test_second_variation_plane_in_schwarzschild(schwarzschild4):
    r = second_variation_check(PlaneCurve(1.0, 20.0), schwarzschild4, VariationTestFunction.bump(2.0, 10.0))
    assert r.passed, r.measured


def test_first_variation_sphere(schwarzschild4):
    r = first_variation_check(SphereCurve(3.0, 1.0), schwarzschild4, VariationTestFunction.bump(0.5, 2.0))
    assert r.passed, r.measured


@pytest.mark.parametrize('curve, n', [(PlaneCurve(0.5, 5.0), 4), (CatenoidCurve(4, 1.0, 0.0, 6.0), None),
                                      (CatenoidCurve(5, 0.5, 1.0, 4.0), None), (SphereCurve(1.0, 0.0, 2.0), 4)],
                         ids=['plane', 'catenoid4', 'catenoid5', 'cap'])
def test_euclidean_integration_by_parts(curve, n):
    r = euclidean_ibp_check(curve, n)
    assert r.passed, r.measured


def test_gauss_trace_sphere(schwarzschild4):
    assert gauss_trace_check(SphereCurve(3.0, 1.0), schwarzschild4).passed


def test_gauss_trace_leaf(leaf4, schwarzschild4):
    r = gauss_trace_check(leaf4, schwarzschild4, sigma=np.geomspace(0.5, 500.0, 40))
    assert r.passed, r.value


@pytest.mark.parametrize('curve', [SphereCurve(3.0, 1.0), PlaneCurve(2.0, 10.0)], ids=['sphere', 'plane'])
def test_second_fundamental_form_oracle(curve, schwarzschild4):
    sigma = np.linspace(*curve.interval, 9)[1:-1]
    h2, H, (k1, k2) = second_fundamental_form(curve, schwarzschild4, sigma)
    h2f, Hf, (k1f, k2f) = second_fundamental_form_fd(curve, schwarzschild4, sigma)
    np.testing.assert_allclose(k1, k1f, rtol=1e-5, atol=1e-8)
    np.testing.assert_allclose(k2, k2f, rtol=1e-5, atol=1e-8)
    np.testing.assert_allclose(H, Hf, rtol=1e-5, atol=1e-8)


@pytest.mark.parametrize('n', [3, 4, 5])
def test_round_sphere_intrinsic_curvature(n):
    R = intrinsic_scalar_curvature(SphereCurve(2.0), FlatMetric(n), np.linspace(0.3, 2.8, 7))
    np.testing.assert_allclose(R, (n - 1) * (n - 2) / 4.0, rtol=1e-12, atol=1e-12)


def test_horizon_sphere_is_minimal(schwarzschild4):
    _, H, _ = second_fundamental_form(SphereCurve(1.0), schwarzschild4, np.linspace(0.2, 3.0, 8))
    assert np.max(np.abs(H)) < 1e-10


def test_catenoid_is_minimal():
    curve = CatenoidCurve(4, 1.0, 0.0, 10.0)
    _, H, (k1, _) = second_fundamental_form(curve, FlatMetric(4), np.linspace(-2.5, 2.5, 11))
    assert np.max(np.abs(H)) < 1e-10 and np.max(np.abs(k1)) > 0.1
    t = np.linspace(2.0, 9.0, 8)
    np.testing.assert_allclose(curve.graph_check(t), curve.height(np.sqrt(t - 1.0)), atol=1e-9)


def test_acv_expansion(leaf4, schwarzschild4):
    test = VariationTestFunction.bump(2.0, 8.0)
    terms = acv_functional(leaf4, schwarzschild4, test)
    assert terms.A > 0
    assert terms.tail_exponent < -1
    r = acv_expansion_check(terms, acv_functional(leaf4, schwarzschild4, test.scaled(2.0)))
    assert r.passed, r.measured


def test_bump():
    u = VariationTestFunction.bump(2.0, 8.0, height=1.5)
    np.testing.assert_allclose(u([1.0, 2.0, 5.0, 8.0, 9.0]), [0.0, 0.0, 1.5, 0.0, 0.0], atol=1e-15)
    assert u(5.0, 1)[0] == pytest.approx(0.0, abs=1e-14)
    assert u.compact and u.support == (2.0, 8.0)
    assert np.all(u.accel([3.0, 5.0]) == 0.0)
    assert u.scaled(2.0)(5.0)[0] == pytest.approx(3.0)


def test_build_test_function():
    u = build_test_function({'kind': 'bump', 'a': 1.0, 'b': 3.0, 'accel': 0.5})
    assert u.accel(2.0)[0] == pytest.approx(0.5)
    assert build_test_function({'kind': 'constant', 'value': 2.0})(7.0)[0] == 2.0
    for d in ({'kind': 'wave'}, {'kind': 'bump', 'a': 3.0, 'b': 1.0}, {'kind': 'constant', 'height': 1.0}, [1.0, 2.0]):
        with pytest.raises(InvalidTestFunction):
            build_test_function(d)


def test_acv_needs_compact_support(leaf4, schwarzschild4):
    with pytest.raises(InvalidTestFunction):
        acv_functional(leaf4, schwarzschild4, VariationTestFunction.bump(2.0, 2 * leaf4.resolved_range))


def test_as_curve(plateau4, leaf4):
    assert as_curve(plateau4).interval == (0.0, 100.0)
    assert as_curve(leaf4).interval == (0.0, leaf4.resolved_range)
    with pytest.raises(TypeError):
        as_curve(3.0)


def test_cap_boundary_ends():
    assert SphereCurve(1.0, 0.0, 2.0).boundary_ends() == [2.0]
    assert SphereCurve(1.0).boundary_ends() == []
    assert CatenoidCurve(4, 1.0, 0.0, 5.0).boundary_ends() == [-2.0, 2.0]
    assert math.isclose(CatenoidCurve(4, 1.0, 0.0, 5.0).describe()['t_max'], 5.0)


def test_graded_edges():
    e = graded_edges(0.0, 1000.0, 96, 1.0)
    assert e[0] == 0.0 and e[-1] == 1000.0 and np.all(np.diff(e) > 0)
    assert np.diff(e)[-1] > 10 * np.diff(e)[0]
    e = graded_edges(-14.1, 14.1, 96, 0.1)  # long curve through σ = 0
    assert np.all(np.isfinite(e)) and np.all(np.diff(e) > 0)
    np.testing.assert_allclose(np.diff(e), 28.2 / 96)


def test_long_catenoid_quadrature():
    curve = CatenoidCurve(4, 1.0, 0.0, 200.0)
    a = area_functional(curve, FlatMetric(4))
    assert np.isfinite(a) and a > 0
