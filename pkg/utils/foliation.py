# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license
"""
Foliation leaves Σ_z as r -> ∞ limits of Plateau solutions f_{r,z}

Usage:
    from utils.foliation import build_leaf, geometric_schedule
    leaf = build_leaf(metric, z=1.0, r_schedule=geometric_schedule(64, 2, 16), T_view=25, tol=1e-6)
"""

from dataclasses import dataclass, field
from multiprocessing.pool import Pool
from typing import NamedTuple

import numpy as np
from tqdm import tqdm

from models.profile import HorizonCollision
from utils.general import LOGGER, TQDM_BAR_FORMAT, LabError, colorstr
from utils.quadrature import fit_power_law, richardson_limit
from utils.reports import CheckReport
from utils.shooting import NoBracket, ShootingProblem, solve_plateau

PREFIX = colorstr('foliate: ')
LEAF_T_START = 1e-4  # axis offset for leaf solves, independent of r


class NotConverged(LabError):
    pass


class TailTooFlat(LabError):
    pass


def geometric_schedule(r0=64.0, factor=2.0, steps=16):
    # r_k = r0·factor^k, k < steps
    return [float(r0 * factor ** k) for k in range(steps)]


@dataclass
class Leaf:
    z: float
    T_view: float
    tol: float
    radii: list = field(default_factory=list)
    profiles: list = field(default_factory=list, repr=False)
    history: list = field(default_factory=list)  # sup_{t <= T_view} |f_{r_k} - f_{r_{k-1}}|
    converged: bool = False

    @property
    def profile(self):
        return self.profiles[-1]

    @property
    def metric(self):
        return self.profile.metric

    @property
    def n(self):
        return self.profile.n

    @property
    def f0(self):
        return self.profile.f0

    @property
    def resolved_range(self):
        # the last iterate is trusted on [0, r_last/4]
        return self.radii[-1] / 4

    def __call__(self, t):
        return self.profile(t)

    def table(self, t_max=None):
        # samples (t, f, p) of the last iterate on [0, t_max], t_max defaults to the resolved range
        t_max = self.resolved_range if t_max is None else t_max
        s = self.profile.samples
        return s[s['t'] <= t_max].reset_index(drop=True)

    def oscillation(self, T=None):
        # max f - min f on [0, T]
        t = np.linspace(0.0, self.T_view if T is None else T, 1001)
        f = self(t)
        return float(np.max(f) - np.min(f))

    def tail_height(self, T=None):
        # Richardson limit of f along t = T/4, T/2, T, an estimate of inf f = lim f
        T = self.resolved_range if T is None else T
        t = np.array([T / 4, T / 2, T])
        return float(richardson_limit(t, self(t))[0])

    def summary(self):
        return {'z': self.z, 'f0': self.f0, 'radii': self.radii, 'history': self.history,
                'converged': self.converged, 'T_view': self.T_view, 'tol': self.tol,
                'resolved_range': self.resolved_range, 'oscillation': self.oscillation(),
                'inf_height': self.tail_height(), 'metric': self.profile.metric_id}


def sup_difference(a, b, T, points=1001):
    t = np.linspace(0.0, T, points)
    return float(np.max(np.abs(a(t) - b(t))))


def build_leaf(metric, z, r_schedule, T_view=25.0, tol=1e-6, **kwargs):
    """
    Solve f_{r,z} along an increasing r schedule until sup_{t <= T_view}|f_{r_{k+1}} - f_{r_k}| < tol.
    Each solve brackets f0 from the previous axis height, since f0 increases with r.
    """
    r_schedule = [float(r) for r in r_schedule]
    assert all(a < b for a, b in zip(r_schedule[:-1], r_schedule[1:])), 'r schedule must increase'
    assert r_schedule[0] > max(2.0, 2 * T_view), f'first radius must exceed max(2, 2·T_view), got {r_schedule[0]}'
    kwargs.setdefault('t_start', LEAF_T_START)
    leaf = Leaf(float(z), float(T_view), float(tol))
    for r in r_schedule:
        bracket = None
        if leaf.profiles:
            f0 = [pr.f0 for pr in leaf.profiles[-2:]]
            bracket = (f0[-1], f0[-1] + max(1e-3, 4 * (f0[-1] - f0[0])))
        problem = ShootingProblem(metric, r, z, bracket=bracket, **kwargs)
        profile = solve_plateau(problem)
        if leaf.profiles:
            leaf.history.append(sup_difference(profile, leaf.profile, T_view))
        leaf.radii.append(r)
        leaf.profiles.append(profile)
        LOGGER.debug(f'{PREFIX}z={z:g} r={r:g} f0={profile.f0:.12g} '
                     f'diff={leaf.history[-1] if leaf.history else float("nan"):.3g}')
        if leaf.history and leaf.history[-1] < tol:
            leaf.converged = True
            break
    if not leaf.converged:
        raise NotConverged(f'leaf z={z} not converged over r <= {r_schedule[-1]:g}: history {leaf.history}')
    if any(b > a for a, b in zip(leaf.history[:-1], leaf.history[1:])):
        LOGGER.warning(f'{PREFIX}leaf z={z} sup-difference history not decreasing: {leaf.history}')
    return leaf


def _build(args):
    metric, z, r_schedule, T_view, tol, kwargs = args
    return build_leaf(metric, z, r_schedule, T_view, tol, **kwargs)


def build_leaves(metric, z_grid, r_schedule, T_view=25.0, tol=1e-6, jobs=1, **kwargs):
    # leaves for each z, in a process pool when jobs > 1, returned in z_grid order
    args = [(metric, float(z), list(r_schedule), T_view, tol, kwargs) for z in z_grid]
    if jobs > 1 and len(args) > 1:
        with Pool(min(jobs, len(args))) as pool:
            return list(tqdm(pool.imap(_build, args), total=len(args), desc='leaves', bar_format=TQDM_BAR_FORMAT))
    return [_build(a) for a in tqdm(args, desc='leaves', bar_format=TQDM_BAR_FORMAT)]


def leaf_checks(leaf, solver_tol=1e-8):
    """
    Structure of one leaf: convergence, decreasing sup-difference history, inf f >= z on [0, T_view], f
    non-increasing toward z, and monotone growth of the iterates in r on shared samples.
    """
    z = leaf.z
    t = np.linspace(0.0, leaf.T_view, 1001)
    f = leaf(t)
    s = leaf.table()
    hist = leaf.history
    growth = [float(np.min(b(t) - a(t))) for a, b in zip(leaf.profiles[:-1], leaf.profiles[1:])]
    return [
        CheckReport.residual('leaf_convergence', 'Plateau solutions converge locally smoothly to the leaf',
                             hist[-1] if hist else 0.0, leaf.tol, radii=leaf.radii),
        CheckReport.flag('leaf_history_decreasing', 'Plateau solutions converge locally smoothly to the leaf',
                         all(b <= a for a, b in zip(hist[:-1], hist[1:])), history=hist),
        CheckReport.margin('leaf_above_z', 'inf of x^n over the leaf equals z', float(np.min(f) - z), leaf.tol),
        CheckReport.residual('leaf_descends', 'the leaf approaches its height z from above',
                             float(s['p'].max()), 1e-10),
        CheckReport.margin('leaf_monotone_in_r', 'Plateau solutions increase with the boundary radius',
                           min(growth) if growth else 0.0, solver_tol, growth=growth)]


def _shared_samples(leaves):
    t_max = min(leaf.resolved_range for leaf in leaves)
    t = np.unique(np.concatenate([leaf.table(t_max)['t'].to_numpy() for leaf in leaves]))
    return t[t <= t_max]


def _sample_height(leaf, t):
    # linear interpolation of the leaf's stored samples
    s = leaf.table()
    return np.interp(t, s['t'].to_numpy(), s['f'].to_numpy())


def foliation_scan(metric=None, z_grid=None, r_schedule=None, T_view=25.0, tol=1e-6, jobs=1, leaves=None, **kwargs):
    """
    Disjointness of leaves: f_{z_i}(t) < f_{z_j}(t) for z_i < z_j at every shared sample t. Prebuilt leaves may be
    passed; otherwise they are built from (metric, z_grid, r_schedule).
    """
    if leaves is None:
        z_grid = [float(z) for z in z_grid]
        assert all(0 < a < b for a, b in zip(z_grid[:-1], z_grid[1:])), 'z grid must be positive and increasing'
        leaves = build_leaves(metric, z_grid, r_schedule, T_view, tol, jobs, **kwargs)
    leaves = sorted(leaves, key=lambda lf: lf.z)
    t = _shared_samples(leaves)
    gaps = [float(np.min(_sample_height(b, t) - _sample_height(a, t))) for a, b in zip(leaves[:-1], leaves[1:])]
    gap = min(gaps) if gaps else float('inf')
    return CheckReport('foliation_ordering', 'the leaves form a smooth foliation', gap, 0.0, bool(gap > 0),
                       {'z': [lf.z for lf in leaves], 'gaps': gaps, 'samples': len(t)})


def oscillation_check(leaves, T=25.0):
    # oscillation of f on [0, T] decreases in z
    leaves = sorted(leaves, key=lambda lf: lf.z)
    osc = [lf.oscillation(T) for lf in leaves]
    ok = all(b < a for a, b in zip(osc[:-1], osc[1:]))
    return CheckReport.flag('leaf_oscillation', 'leaves converge to Euclidean hyperplanes as z grows', ok,
                            z=[lf.z for lf in leaves], oscillation=osc)


def inf_height_check(leaves, tol=1e-5):
    # |inf f - z| per leaf, inf f estimated by the Richardson tail height
    dev = {lf.z: abs(lf.tail_height() - lf.z) for lf in leaves}
    return CheckReport.residual('leaf_inf_height', 'inf of x^n over the leaf equals z', max(dev.values()), tol,
                                deviations=dev)


def sigma0_limit(metric, z_seq, r_schedule, T_view=25.0, tol=1e-6, inf_tol=1e-5, jobs=1, **kwargs):
    """
    Leaves for a decreasing z sequence: inf heights equal z and heights at fixed t decrease with z. Solver
    failures near the horizon at very small z are findings, not failures.
    """
    z_seq = [float(z) for z in z_seq]
    assert all(a > b > 0 for a, b in zip(z_seq[:-1], z_seq[1:])), 'z sequence must decrease toward 0'
    leaves, lost = [], []
    for z in tqdm(z_seq, desc='sigma0', bar_format=TQDM_BAR_FORMAT):
        try:
            leaves.append(build_leaf(metric, z, r_schedule, T_view, tol, **kwargs))
        except (HorizonCollision, NoBracket, NotConverged) as e:
            LOGGER.warning(f'{PREFIX}leaf z={z} lost near the horizon: {e}')
            lost.append({'z': z, 'error': type(e).__name__})
    if not leaves:
        return [CheckReport.finding('sigma0_limit', 'the leaves converge to a limit leaf with inf height 0',
                                    float('nan'), lost=lost)]
    dev = {lf.z: abs(lf.tail_height() - lf.z) for lf in leaves}
    t = np.linspace(0.0, T_view, 501)
    drops = [float(np.min(a(t) - b(t))) for a, b in zip(leaves[:-1], leaves[1:])]  # z decreasing
    return [CheckReport.residual('sigma0_inf_height', 'inf of x^n over the limit leaf is 0', max(dev.values()),
                                 inf_tol, deviations=dev, lost=lost),
            CheckReport('sigma0_decreasing', 'the leaves converge to a limit leaf with inf height 0',
                        min(drops) if drops else 0.0, 0.0, all(d > 0 for d in drops), {'drops': drops})]


class DecayFit(NamedTuple):
    exponent: float
    amplitude: float
    residual: float


def decay_fit(leaf, T=None, points=64):
    """
    Least-squares fit of log|f - f_tail| against log t on [T/2, T], T = T_view by default, with f_tail the
    three-point Richardson limit of f along t = T/4, T/2, T.
    """
    T = leaf.T_view if T is None else T
    f_tail = leaf.tail_height(T)
    t = np.geomspace(T / 2, T, points)
    d = np.abs(leaf(t) - f_tail)
    if np.max(d) < 1e-12:
        raise TailTooFlat(f'leaf z={leaf.z} tail differences below 1e-12 on [{T / 2:g}, {T:g}]')
    k, A, rms = fit_power_law(t, d)
    LOGGER.info(f'{PREFIX}z={leaf.z:g} decay exponent {k:.4f}, amplitude {A:.4g}, f_tail - z = {f_tail - leaf.z:.3g}')
    return DecayFit(k, A, rms)


def decay_check(leaf, T=None, window=0.3):
    # tail-height exponent within ±window of 3 - n, TailTooFlat reported as a finding
    target = 3 - leaf.n
    try:
        fit = decay_fit(leaf, T)
    except TailTooFlat as e:
        return CheckReport.finding('leaf_decay', 'leaf heights decay at rate |y|^(1 - tau)', 0.0, reason=str(e))
    return CheckReport.residual('leaf_decay', 'leaf heights decay at rate |y|^(1 - tau)', abs(fit.exponent - target),
                                window, exponent=fit.exponent, amplitude=fit.amplitude, fit_residual=fit.residual,
                                target=target)
