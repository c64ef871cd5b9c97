# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license

import copy
import math

import numpy as np
import pytest

from models.ambient import FlatMetric, SlabMetric
from utils.general import ConfigError
from utils.shooting import (NoBracket, ShootingProblem, area_hessian, check_nesting, closed_form_profile_check,
                            direct_minimization, direct_minimization_check, discrete_area, flat_plane_check, graded_nodes,
                            height_bound_constant, mean_curvature_residual, slab_flatness_check, slab_threshold,
                            slope_lower_bound, small_z_scan, solve_batch, solve_plateau, verify_solution)


@pytest.mark.parametrize('n', [4, 5, 6])
def test_height_bound_constant(n):
    assert height_bound_constant(n) == pytest.approx(height_bound_constant(n, method='quad'), rel=1e-10)


def test_height_bound_constant_n4():
    assert height_bound_constant(4) == pytest.approx(math.log(12) + 2, rel=1e-14)
    assert height_bound_constant(4) == pytest.approx(4.4849066498, abs=1e-9)
    with pytest.raises(ValueError):
        height_bound_constant(4, method='series')


def test_slope_lower_bound():
    assert slope_lower_bound(12.0, 4) == pytest.approx(-12 / 144 * (math.log(12) + 1))


@pytest.mark.parametrize('kwargs', [{'r': 2.0, 'z': 1.0}, {'r': 1.0, 'z': 0.0},
                                    {'r': 50.0, 'z': 1.0, 'shoot_tol': -1e-9},
                                    {'r': 50.0, 'z': 1.0, 'method': 'newton'}])
def test_problem_validation(kwargs):
    with pytest.raises(ConfigError):
        ShootingProblem(FlatMetric(4), **kwargs)


def test_problem_defaults():
    pb = ShootingProblem(FlatMetric(4), 100, -3)
    assert pb.shoot_tol == pytest.approx(3e-9) and pb.t_start == pytest.approx(1e-4)


def test_schwarzschild_plateau(plateau4):
    assert plateau4.r == 100.0 and plateau4.z == 1.0
    assert abs(plateau4(100.0)[0] - 1.0) < 1e-9
    assert plateau4.stats['max_residual'] < 1e-9
    assert plateau4.f0 > 1.0
    assert plateau4.f0 - 1.0 < height_bound_constant(4) + 1
    for r in verify_solution(plateau4):
        assert r.passed, (r.name, r.value)


def _corrupted(profile, column, i, value):
    bad = copy.copy(profile)
    bad.samples = profile.samples.copy()
    bad.samples.iloc[i, bad.samples.columns.get_loc(column)] = value
    return bad


def test_corrupted_slope_fails_monotone(plateau4):
    p = plateau4.samples['p'].to_numpy()
    i = int(np.argmin(p))
    reports = verify_solution(_corrupted(plateau4, 'p', i, -p[i]))
    assert [r.name for r in reports if not r.passed] == ['monotone_profile']


def test_above_boundary_plane(plateau4):
    r = {r.name: r for r in verify_solution(plateau4)}['above_boundary_plane']
    assert r.passed and r.measured['strict'] and not r.measured['plane'] and r.tolerance == 0.0
    i = len(plateau4.samples) // 2
    r = {r.name: r for r in verify_solution(_corrupted(plateau4, 'f', i, 1.0 - 1e-9))}['above_boundary_plane']
    assert not r.passed and r.value < 0
    plane = solve_plateau(ShootingProblem(FlatMetric(4), 20.0, 1.0))
    r = {r.name: r for r in verify_solution(plane)}['above_boundary_plane']
    assert r.passed and r.measured['plane']


def test_mean_curvature_residual(plateau4):
    t, H = mean_curvature_residual(plateau4)
    assert len(t) == 400 and np.max(H) < 1e-6
    wrong = copy.copy(plateau4)
    wrong.metric = FlatMetric(4)  # the Schwarzschild solution is not minimal in Euclidean space
    assert np.max(mean_curvature_residual(wrong)[1]) > 1e-3


def test_schwarzschild_plateau_brentq(schwarzschild4, plateau4):
    pr = solve_plateau(ShootingProblem(schwarzschild4, 100.0, 1.0, method='brentq'))
    assert pr.f0 == pytest.approx(plateau4.f0, abs=1e-6)


def test_flat_planes():
    r = flat_plane_check(4, count=2)
    assert r.passed, r.value
    assert len(r.measured['problems']) == 2


def test_closed_form_profile_check():
    assert closed_form_profile_check(n=5, a=2.0, t_range=(2.0, 50.0)).passed


def test_nesting(schwarzschild4, plateau4):
    low = solve_plateau(ShootingProblem(schwarzschild4, 100.0, 0.5))
    r = check_nesting([plateau4, low])
    assert r.passed and r.measured['z'] == [0.5, 1.0]
    assert low.f0 < plateau4.f0


def test_profiles_increase_with_radius(schwarzschild4, plateau4):
    # a larger boundary circle at the same height lifts the whole graph
    wide = solve_plateau(ShootingProblem(schwarzschild4, 200.0, 1.0))
    t = np.linspace(0.0, 100.0, 101)
    assert np.all(wide(t) > plateau4(t))


def test_small_z_ratios(schwarzschild4):
    r = small_z_scan(schwarzschild4, [0.5, 0.3, 0.2], 100.0)
    assert r.measured['min_ratio_minus_one'] >= -1e-6
    assert len(r.measured['ratio']) == 3


def test_small_z_ratios_decrease(schwarzschild4):
    r = small_z_scan(schwarzschild4, [0.2, 0.1, 0.05], 1600.0)
    assert r.passed, r.measured
    assert r.measured['decreasing'] and np.all(np.diff(r.measured['ratio']) < 0)


def test_discrete_area_gradient(schwarzschild4):
    t = graded_nodes(20.0, 30)
    f = 2.0 + 0.5 * np.cos(t / 7)
    A, g = discrete_area(schwarzschild4, t, f, grad=True)
    h = 1e-6
    fd = np.array([(discrete_area(schwarzschild4, t, f + h * e) - discrete_area(schwarzschild4, t, f - h * e)) / (2 * h)
                   for e in np.eye(len(f))])
    np.testing.assert_allclose(g, fd, rtol=1e-5, atol=1e-6 * np.max(np.abs(fd)))
    assert A > 0


def test_discrete_area_flat_disk():
    t = graded_nodes(7.0, 40)
    assert discrete_area(FlatMetric(3), t, np.full_like(t, 2.0)) == pytest.approx(math.pi * 49, rel=1e-12)


def test_direct_minimization_flat():
    res = direct_minimization(FlatMetric(3), 10.0, 1.5, nodes=50)
    assert res.f[-1] == 1.5
    assert np.max(np.abs(res.f - 1.5)) < 1e-4
    assert res.area == pytest.approx(math.pi * 100, rel=1e-6)


def test_area_hessian(schwarzschild4):
    t = graded_nodes(20.0, 30)
    f = 2.0 + 0.5 * np.cos(t / 7)
    d, o = area_hessian(schwarzschild4, t, f)
    h = 1e-6
    cols = np.array([(discrete_area(schwarzschild4, t, f + h * e, grad=True)[1] -
                      discrete_area(schwarzschild4, t, f - h * e, grad=True)[1]) / (2 * h) for e in np.eye(len(f))])
    scale = np.max(np.abs(cols))
    np.testing.assert_allclose(np.diag(cols), d, rtol=1e-5, atol=1e-7 * scale)
    np.testing.assert_allclose(np.diag(cols, 1), o, rtol=1e-5, atol=1e-7 * scale)
    assert np.max(np.abs(np.triu(cols, 2))) < 1e-7 * scale


def test_direct_minimization_check(plateau4):
    reports = {r.name: r for r in direct_minimization_check(plateau4)}
    for r in reports.values():
        assert r.passed, (r.name, r.value)
    assert reports['direct_min_profile'].value < 1e-4
    assert reports['direct_min_profile'].measured['converged']


def test_no_bracket():
    pb = ShootingProblem(FlatMetric(4), 50.0, 1.0, bracket=(11.0, 12.0), max_expand=0)
    with pytest.raises(NoBracket):
        solve_plateau(pb)


def test_slab_below_plane_is_flat():
    pr = solve_plateau(ShootingProblem(SlabMetric(4), 50.0, -1.0))
    assert np.max(np.abs(pr.samples['f'] + 1.0)) < 1e-12


def test_slab_flatness():
    metric = SlabMetric(4)
    thr = slab_threshold(metric, z_sweep=(0.5,), r=60.0)
    assert thr.z_star < -thr.c0 and thr.c0 >= 1.0
    assert thr.to_dict()['empirical']
    assert slab_flatness_check(metric, thr, r=60.0).passed


def test_solve_batch_keeps_order():
    problems = [ShootingProblem(FlatMetric(4), 20.0, z) for z in (3.0, 1.0, 2.0)]
    assert [pr.z for pr in solve_batch(problems)] == [3.0, 1.0, 2.0]
