# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license
"""
Named verification suites. Each suite is an ordered list of checks; a check takes a SuiteContext and returns one
CheckReport or a list of them. 'paper' runs every suite.

Usage:
    from utils.suites import SuiteContext, run_suite
    reports = run_suite('identities', SuiteContext(load_config('data/schwarzschild-n4.yaml')))
"""

import math

import numpy as np

from models.ambient import FlatMetric, PowerLawMetric, SchwarzschildMetric, SlabMetric, build_metric
from utils.bounds import (area_ratio_scan, ball_isoperimetric_witness, excess_decay, geometric_expansion_check,
                          induced_mass, induced_mass_check, layer_cake_check, monotonicity_check)
from utils.callbacks import Callbacks
from utils.config import solver_kwargs
from utils.curvature import adm_mass, adm_mass_check, curvature_paths_check, vanishing_scalar_check
from utils.foliation import (build_leaf, build_leaves, decay_check, foliation_scan, geometric_schedule,
                             inf_height_check, leaf_checks, oscillation_check, sigma0_limit)
from utils.general import LOGGER, colorstr
from utils.geometry import (TailEstimateUnreliable, acv_expansion_check, acv_functional, area_convergence,
                            euclidean_ibp_check, first_variation_check, gauss_trace_check, second_variation,
                            second_variation_check, sphere_second_variation)
from utils.perturbation import build_chain, chain_centers, curvature_oracle_check, verify_perturbed_metric
from utils.reports import CheckReport, timed
from utils.shooting import (ShootingProblem, check_nesting, closed_form_profile_check, direct_minimization_check,
                            flat_plane_check, second_height_bound_check, slab_flatness_check, slab_threshold,
                            small_z_scan, solve_batch, solve_plateau, verify_solution)
from utils.surfaces import CatenoidCurve, PlaneCurve, SphereCurve, VariationTestFunction, build_test_function

PREFIX = colorstr('verify: ')
SUITES = {}  # suite name -> list of check functions


def register(*suites):
    # decorator adding a check function to the named suites and to 'paper'
    def wrapper(fn):
        for s in (*suites, 'paper'):
            SUITES.setdefault(s, []).append(fn)
        return fn

    return wrapper


def tag(reports, label):
    # suffix report names with a configuration label, i.e. 'height_bound@n4-r100-z1'
    for r in reports:
        r.name = f'{r.name}@{label}'
    return reports


class SuiteContext:
    """
    Shared state of one verification run: the config, its metric, and a cache of leaves so that suites needing the
    same leaf build it once.
    """

    def __init__(self, cfg, jobs=1, callbacks=None):
        self.cfg, self.jobs = cfg, int(jobs)
        self.n = cfg['dimension']
        self.metric = build_metric(cfg['metric'], self.n)
        self.seed = cfg['seed']
        self.callbacks = callbacks or Callbacks()
        self._leaves = {}

    @property
    def schedule(self):
        f = self.cfg['foliation']
        return geometric_schedule(f['r0'], f['r_factor'], f['r_steps'])

    def solver(self, r=None):
        return solver_kwargs(self.cfg, r)

    def leaf(self, z, metric=None):
        # cached leaf of `metric` (default: the config metric) at height z
        metric = metric or self.metric
        key = (repr(metric), float(z))
        if key not in self._leaves:
            f = self.cfg['foliation']
            leaf = build_leaf(metric, z, self.schedule, f['T_view'], f['tol'], **self.solver())
            self.callbacks.run('on_leaf_end', leaf)
            self._leaves[key] = leaf
        return self._leaves[key]

    def leaves(self):
        # leaves of the config metric over the foliation z grid, built in parallel where missing
        f = self.cfg['foliation']
        missing = [z for z in f['z_grid'] if (repr(self.metric), float(z)) not in self._leaves]
        if missing:
            for leaf in build_leaves(self.metric, missing, self.schedule, f['T_view'], f['tol'], self.jobs,
                                     **self.solver()):
                self.callbacks.run('on_leaf_end', leaf)
                self._leaves[(repr(self.metric), leaf.z)] = leaf
        return [self._leaves[(repr(self.metric), float(z))] for z in f['z_grid']]

    @property
    def primary_leaf(self):
        return self.leaf(self.cfg['stability']['leaf_z'])


def run_suite(name, ctx):
    """
    Run the checks of one suite in order. Every report is logged and passed to the on_check_end callbacks; a
    callback may set ctx.callbacks.stop_run to skip the remaining checks.
    """
    assert name in SUITES, f"unknown suite '{name}', available: {sorted(SUITES)}"
    LOGGER.info(f'{PREFIX}suite {name}, {len(SUITES[name])} checks')
    reports = []
    for fn in SUITES[name]:
        if ctx.callbacks.stop_run:
            LOGGER.warning(f'{PREFIX}run stopped before {fn.__name__}')
            break
        out = timed(fn, ctx)
        for r in out if isinstance(out, list) else [out]:
            r.log()
            ctx.callbacks.run('on_check_end', r)
            reports.append(r)
    return reports


# Metric -------------------------------------------------------------------------------------------------------------
@register('metric')
def schwarzschild_mass(ctx):
    radii = ctx.cfg['mass']['radii']
    return [adm_mass_check(adm_mass(SchwarzschildMetric(n), radii, ctx.cfg['mass']['order'], label=f'adm_n{n}'), 2.0)
            for n in (4, 5)]


@register('metric')
def schwarzschild_scalar(ctx):
    return [tag([vanishing_scalar_check(SchwarzschildMetric(n), 100, ctx.seed)], f'n{n}')[0] for n in (4, 5)]


@register('metric')
def curvature_oracle(ctx):
    return curvature_paths_check(ctx.metric, 20, ctx.seed)


@register('metric')
def powerlaw_mass(ctx):
    # faster decay than τ = n-2 leaves no mass
    n = ctx.n
    est = adm_mass(PowerLawMetric(n, amplitude=1.0, tau=n - 1.5), ctx.cfg['mass']['radii'], ctx.cfg['mass']['order'],
                   label='powerlaw')
    return CheckReport.finding('powerlaw_mass', 'mass vanishes for decay faster than |x|^(2-n)', est.limit,
                               **est.summary())


@register('metric')
def isoperimetric_witness(ctx):
    return ball_isoperimetric_witness(SchwarzschildMetric(4))


# Plateau ------------------------------------------------------------------------------------------------------------
@register('plateau')
def flat_planes(ctx):
    return flat_plane_check(ctx.n, 5, ctx.seed)


@register('plateau')
def closed_form_profile(ctx):
    return closed_form_profile_check(4, 1.0, (2.0, 100.0))


@register('plateau')
def height_bounds(ctx):
    # verify_solution on Schwarzschild n = 4, 5 for r ∈ {100, 400}, z ∈ {0.5, 1, 4}
    grid = [(n, r, z) for n in (4, 5) for r in (100.0, 400.0) for z in (0.5, 1.0, 4.0)]
    problems = [ShootingProblem(SchwarzschildMetric(n), r, z, **ctx.solver(r)) for n, r, z in grid]
    reports = []
    for (n, r, z), pr in zip(grid, solve_batch(problems, ctx.jobs, desc='height bounds')):
        ctx.callbacks.run('on_solve_end', pr)
        reports += tag(verify_solution(pr), f'n{n}-r{r:g}-z{z:g}')
    return reports


@register('plateau')
def nesting(ctx):
    r = ctx.cfg['plateau']['r']
    problems = [ShootingProblem(ctx.metric, r, z, **ctx.solver(r)) for z in ctx.cfg['foliation']['z_grid']]
    return check_nesting(solve_batch(problems, ctx.jobs, desc='nesting'))


@register('plateau')
def small_z(ctx):
    return small_z_scan(SchwarzschildMetric(4), [0.2, 0.1, 0.05], 1600.0, **ctx.solver(1600.0))


@register('plateau')
def direct_minimization(ctx):
    p = ctx.cfg['plateau']
    pr = solve_plateau(ShootingProblem(ctx.metric, p['r'], p['z'], **ctx.solver(p['r'])))
    return direct_minimization_check(pr, seed=ctx.seed)


# Identities ---------------------------------------------------------------------------------------------------------
@register('identities')
def monotonicity(ctx):
    # (surface, center, s, t) over flat test surfaces and the config leaf
    n, leaf = ctx.n, ctx.primary_leaf
    configs = [(PlaneCurve(1.0, 20.0), 0.5, 1.0, 5.0, 'plane'),
               (PlaneCurve(0.0, 20.0), 0.0, 0.5, 8.0, 'plane-on'),
               (CatenoidCurve(n, 1.0, 0.0, 10.0), 0.0, 2.0, 6.0, 'catenoid'),
               (CatenoidCurve(n, 1.0, 0.0, 10.0), 1.0, 1.5, 5.0, 'catenoid-off'),
               (SphereCurve(1.0, 0.0), 0.5, 0.8, 3.0, 'sphere'),
               (SphereCurve(2.0, 1.0, 0.75 * math.pi), 2.5, 1.0, 3.0, 'cap'),
               (leaf, 0.0, 2.0, 20.0, 'leaf'),
               (leaf, leaf.z, 1.0, 50.0, 'leaf-z'),
               (leaf, 2.0 * leaf.z, 5.0, 80.0, 'leaf-2z'),
               (leaf, leaf.f0, 0.5, 30.0, 'leaf-axis')]
    return [tag([monotonicity_check(c, x0, s, t, n=n)], label)[0] for c, x0, s, t, label in configs]


@register('identities')
def second_variation_oracle(ctx):
    n, leaf, metric = ctx.n, ctx.primary_leaf, ctx.metric
    bump = VariationTestFunction.bump
    configs = [(leaf, metric, bump(2.0, 8.0), 'leaf'),
               (leaf, metric, bump(1.0, 6.0, 0.5, accel=0.3), 'leaf-accel'),
               (CatenoidCurve(n, 1.0, 0.0, 10.0), FlatMetric(n), bump(-1.0, 1.5), 'catenoid'),
               (PlaneCurve(1.0, 20.0), metric, bump(2.0, 10.0), 'plane'),
               (SphereCurve(3.0, 0.0), metric, VariationTestFunction.constant(1.0), 'sphere')]
    reports = [second_variation_check(c, m, u, label=f'second_variation@{label}') for c, m, u, label in configs]
    rho = 2.0
    sv = second_variation(SphereCurve(rho), FlatMetric(n), VariationTestFunction.constant(1.0))
    exact = sphere_second_variation(n, rho)
    reports.append(CheckReport.residual('second_variation_sphere', 'second variation of area',
                                        abs(sv - exact) / exact, 1e-6, formula=sv, closed_form=exact, rho=rho))
    return reports


@register('identities')
def euclidean_ibp(ctx):
    surfaces = [(PlaneCurve(1.0, 10.0), 'plane'), (CatenoidCurve(4, 1.0, 0.0, 10.0), 'catenoid'),
                (SphereCurve(1.0, 0.0, math.pi / 3), 'cap')]
    return [tag([euclidean_ibp_check(c, n=4)], label)[0] for c, label in surfaces]


@register('identities')
def gauss_trace(ctx):
    return [tag([gauss_trace_check(ctx.primary_leaf, ctx.metric)], 'leaf')[0],
            tag([gauss_trace_check(SphereCurve(3.0, 1.0), ctx.metric)], 'sphere')[0]]


@register('identities')
def first_variation(ctx):
    leaf = ctx.primary_leaf
    return [tag([first_variation_check(leaf, ctx.metric, VariationTestFunction.bump(2.0, 8.0))], 'leaf')[0],
            tag([first_variation_check(SphereCurve(3.0), ctx.metric, VariationTestFunction.constant(1.0))],
                'sphere')[0]]


@register('identities')
def area_quadrature(ctx):
    return area_convergence(ctx.primary_leaf, ctx.metric)


@register('identities')
def layer_cake(ctx):
    n = ctx.n
    return [tag([layer_cake_check(PlaneCurve(0.0, 100.0), 1.0, 1.0, 50.0, n=n)], 'plane')[0],
            tag([layer_cake_check(ctx.primary_leaf, 0.5 * (n - 1), 2.0, 50.0)], 'leaf')[0]]


# Foliation ----------------------------------------------------------------------------------------------------------
@register('foliation')
def foliation(ctx):
    leaves = ctx.leaves()
    reports = [foliation_scan(leaves=leaves), inf_height_check(leaves),
               oscillation_check(leaves, ctx.cfg['foliation']['T_view'])]
    for leaf in leaves:
        reports += tag(leaf_checks(leaf), f'z{leaf.z:g}')
    return reports


@register('foliation')
def sigma0(ctx):
    f = ctx.cfg['foliation']
    z0 = min(f['z_grid'])
    return sigma0_limit(ctx.metric, [z0, z0 / 2, z0 / 4], ctx.schedule, f['T_view'], f['tol'], jobs=ctx.jobs,
                        **ctx.solver())


# Slab ---------------------------------------------------------------------------------------------------------------
@register('slab')
def slab(ctx):
    metric = SlabMetric(4)
    kw = ctx.solver()
    threshold = slab_threshold(metric, r=200.0, jobs=ctx.jobs, **kw)
    flat = slab_flatness_check(metric, threshold, r=200.0, **kw)
    below = solve_batch([ShootingProblem(metric, 200.0, z, **kw) for z in (-0.5, -1.0, -2.0)], ctx.jobs, desc='slab')
    return [flat, second_height_bound_check(below, threshold)]


# Asymptotics --------------------------------------------------------------------------------------------------------
@register('asymptotics')
def leaf_decay(ctx):
    reports = []
    for n in (4, 5):
        metric = ctx.metric if n == ctx.n else SchwarzschildMetric(n)
        leaf = ctx.leaf(1.0, metric)
        reports += tag([decay_check(leaf), geometric_expansion_check(leaf, metric)], f'n{n}')
    return reports


@register('asymptotics')
def leaf_induced_mass(ctx):
    return induced_mass_check(induced_mass(ctx.leaf(1.0), ctx.metric))


@register('asymptotics')
def area_ratios(ctx):
    leaf = ctx.leaf(1.0)
    return [area_ratio_scan(leaf, tau=ctx.metric.tau), excess_decay(leaf)]


# Perturbation -------------------------------------------------------------------------------------------------------
def default_chain(metric, cfg):
    p = cfg['perturbation']
    n = metric.n
    if p['centers'] is not None:
        centers = [np.asarray(q, dtype=float) for q in p['centers']]
    else:
        e1 = np.eye(n)[0]
        centers = chain_centers(metric, 5.0 * e1, e1, p['count'], p['r'])
    return build_chain(metric, centers, p['r'], p['lam'], seed=cfg['seed'])


@register('perturbation')
def perturbation(ctx):
    p = ctx.cfg['perturbation']
    reports = []
    for label, metric in (('flat', FlatMetric(ctx.n)), ('schwarzschild', SchwarzschildMetric(ctx.n))):
        chain = default_chain(metric, ctx.cfg)
        reports += tag(verify_perturbed_metric(metric, chain, p['t'], p['delta'], seed=ctx.seed), label)
        reports += tag([curvature_oracle_check(metric, chain, p['t'], p['delta'], seed=ctx.seed)], label)
    return reports


# Stability ----------------------------------------------------------------------------------------------------------
@register('stability')
def stability(ctx):
    leaf, metric = ctx.primary_leaf, ctx.metric
    reports = []
    for i, d in enumerate(ctx.cfg['stability']['tests']):
        u = build_test_function(d)
        reports.append(second_variation_check(leaf, metric, u, label=f'second_variation@test{i}'))
        if u.v is None:
            anchor = 'stability with respect to asymptotically constant variations'
            try:
                terms, terms2 = acv_functional(leaf, metric, u), acv_functional(leaf, metric, u.scaled(2.0))
            except TailEstimateUnreliable as e:
                reports.append(CheckReport.finding(f'acv_form@test{i}', anchor, float('nan'), reason=str(e)))
                continue
            d = terms.to_dict()
            reports.append(CheckReport.finding(f'acv_form@test{i}', anchor, d.pop('value'), **d))
            reports.append(tag([acv_expansion_check(terms, terms2)], f'test{i}')[0])
    return reports
