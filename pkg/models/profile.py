# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license
"""
Radial minimal-graph ODE for hypersurfaces of revolution x_n = f(|x'|) in g = ω·ḡ

The state is (f, Q) with Q = t^{n-2}·p/(1+p²)^{1/2}, p = f'. With the upward normal ν̄ = (-p·x̂', 1)/(1+p²)^{1/2}
the Euclidean mean curvature is H̄ = -Q'/t^{n-2}, so H = 0 in g is the first-order law

    Q' = t^{n-2}·(n-1)/2·(-p·∂_t log ω + ∂_z log ω)/(1+p²)^{1/2}

Near the axis f = f0 + ½·c·t² + O(t⁴) with c = ½·∂_z log ω(0, f0), see docs/profile_ode.md.
"""

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.integrate import DOP853, OdeSolution, quad
from scipy.optimize import brentq
from scipy.special import roots_jacobi

from models.ambient import PointOutsideDomain, SchwarzschildMetric
from utils.general import LOGGER, LabError


class DomainViolation(LabError):
    pass


class HorizonCollision(LabError):
    def __init__(self, msg, t=None):
        super().__init__(msg)
        self.t = t


class SlopeBlowup(LabError):
    def __init__(self, msg, t=None, sign=-1.0):
        super().__init__(msg)
        self.t, self.sign = t, sign


class StepUnderflow(LabError):
    pass


class SingularLowerLimit(LabError):
    pass


HORIZON_BAND = 1e-8  # relative guard band above the horizon
SLOPE_CAP = 1e6  # |p| beyond this is a failure of the graph property
DENSE_EVALS = 3  # extra function evaluations per DOP853 dense output


@dataclass
class ProfileState:
    t: float
    f: float
    p: float

    @property
    def rho(self):
        return math.hypot(self.t, self.f)


def _rhs_schwarzschild(t, f, p, n):
    rho2 = t * t + f * f
    return (-2 * (n - 1) / (1 + rho2 ** (-(n - 2) / 2)) * t ** (n - 2) / rho2 ** (n / 2)
            * (f - p * t) / math.sqrt(1 + p * p))


def rhs_schwarzschild(t, f, p, n):
    # dQ/dt in spatial Schwarzschild with m = 2
    if t * t + f * f < 1:
        raise DomainViolation(f'(t, f)=({t}, {f}) lies inside the horizon |x| = 1')
    return _rhs_schwarzschild(t, f, p, n)


def rhs_general(t, f, p, metric):
    # dQ/dt for any rotation-invariant conformal factor
    try:
        dt, dz = metric.log_gradient_rz(t, f)
    except PointOutsideDomain as e:
        raise DomainViolation(str(e)) from e
    n = metric.n
    return t ** (n - 2) * (n - 1) / 2 * (-p * dt + dz) / math.sqrt(1 + p * p)


class ProfileODE:
    """
    First-order system y = (f, Q) in t for the minimal-graph law of a rotation-invariant metric.
    The closed-form Schwarzschild right-hand side is used for m = 2 Schwarzschild metrics.
    """

    def __init__(self, metric, closed_form=True):
        self.metric, self.n = metric, metric.n
        self.closed_form = bool(closed_form and isinstance(metric, SchwarzschildMetric) and metric.m == 2)
        self.guard = metric.inner_radius * (1 + HORIZON_BAND) if metric.inner_radius > 0 else 0.0

    def __repr__(self):
        return f'ProfileODE({self.metric!r}, closed_form={self.closed_form})'

    def rhs(self, t, f, p):
        if self.closed_form:
            return _rhs_schwarzschild(t, f, p, self.n)
        return rhs_general(t, f, p, self.metric)

    def slope(self, t, Q):
        # invert Q = t^{n-2}·p/(1+p²)^{1/2}
        s = Q / t ** (self.n - 2)
        if abs(s) >= 1:
            raise SlopeBlowup(f'|Q| >= t^(n-2) at t={t:.6g}, graph property lost', t=t, sign=math.copysign(1, s))
        return s / math.sqrt(1 - s * s)

    def conserved(self, t, p):
        return t ** (self.n - 2) * p / math.sqrt(1 + p * p)

    def fun(self, t, y):
        f, Q = y
        p = self.slope(t, Q)
        return np.array([p, self.rhs(t, f, p)])

    def dslope(self, t, f, p):
        # p' from Q' = (n-2)·t^{n-3}·s + t^{n-2}·p'/W³
        n, W = self.n, math.sqrt(1 + p * p)
        return W ** 3 * (self.rhs(t, f, p) - (n - 2) * t ** (n - 3) * p / W) / t ** (n - 2)

    def axis_curvature(self, f0):
        # f''(0) = ½·∂_z log ω(0, f0)
        if self.closed_form:
            n = self.n
            return -2 * f0 ** (1 - n) / (1 + f0 ** (2 - n))
        try:
            return 0.5 * float(self.metric.log_gradient_rz(0.0, f0)[1])
        except PointOutsideDomain as e:
            raise DomainViolation(str(e)) from e


def axis_start(f0, t_start, ode):
    # second-order series state off the symmetry axis
    if ode.guard and abs(f0) < ode.metric.inner_radius:
        raise DomainViolation(f'axis height f0={f0:.6g} lies inside |x| = {ode.metric.inner_radius:.6g}')
    c = ode.axis_curvature(f0)
    return ProfileState(t_start, f0 + 0.5 * c * t_start ** 2, c * t_start)


class RadialProfile:
    """
    Solved radial graph f(t) with dense output. Evaluation below t_start uses the axis series.

    Attributes:
        metric_id   repr of the ambient metric
        r, z        boundary data (None until a shooting run pins them)
        f0, c       axis height and axis curvature f''(0)
        samples     DataFrame with columns t, f, p, strictly increasing in t
        stats       integrator statistics: steps, rejected, nfev, max_residual
        events      recorded non-fatal events, i.e. height sign changes
    """

    def __init__(self, ode, f0, c, t_start, sol, samples, stats, events=()):
        self.ode, self.metric, self.n = ode, ode.metric, ode.n
        self.metric_id = repr(ode.metric)
        self.f0, self.c, self.t_start = f0, c, t_start
        self.sol, self.samples, self.stats, self.events = sol, samples, dict(stats), list(events)
        self.r, self.z = None, None

    def __repr__(self):
        return f'RadialProfile({self.metric_id}, f0={self.f0}, r={self.r}, z={self.z})'

    @property
    def t_end(self):
        return float(self.samples['t'].iloc[-1])

    def state(self, t):
        # (f, p) at t, vectorized
        t = np.atleast_1d(np.asarray(t, dtype=float))
        f, p = np.empty_like(t), np.empty_like(t)
        lo = t < self.t_start
        if np.any(lo):
            if self.f0 is None:
                raise DomainViolation(f'off-axis profile starts at t={self.t_start:.6g}, got t={np.min(t):.6g}')
            f[lo], p[lo] = self.f0 + 0.5 * self.c * t[lo] ** 2, self.c * t[lo]
        if np.any(~lo):
            th = np.minimum(t[~lo], self.t_end)
            y = self.sol(th)
            s = y[1] / th ** (self.n - 2)
            f[~lo], p[~lo] = y[0], s / np.sqrt(1 - s * s)
        return f, p

    def __call__(self, t):
        return self.state(t)[0]

    def slope(self, t):
        return self.state(t)[1]

    def dslope(self, t):
        # p' along the solution from the ODE itself
        t = np.atleast_1d(np.asarray(t, dtype=float))
        f, p = self.state(t)
        out = np.full_like(t, self.c if self.c is not None else np.nan)
        for i in np.flatnonzero(t >= self.t_start):
            out[i] = self.ode.dslope(t[i], f[i], p[i])
        return out

    def Q(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        p = self.slope(t)
        return t ** (self.n - 2) * p / np.sqrt(1 + p * p)

    def dense(self, t):
        f, p = self.state(t)
        return pd.DataFrame({'t': np.asarray(t, dtype=float), 'f': f, 'p': p})

    def with_boundary(self, r, z, residual):
        self.r, self.z = float(r), float(z)
        self.stats['max_residual'] = float(abs(residual))
        return self


def _locate(fn, a, b):
    # root of a bracketed scalar event function on [a, b]
    try:
        return brentq(fn, a, b, xtol=1e-14 * max(1.0, abs(b)))
    except ValueError:
        return b


def integrate(ode, start, t_end, rtol=1e-10, atol=1e-12, samples_per_step=4, axis=None):
    """
    Integrate the profile ODE from start to t_end with DOP853 stepped manually.

    Fatal events, located with brentq on the step's dense output:
        horizon approach  |x| < ρ_h·(1 + 1e-8)   -> HorizonCollision
        slope blowup      |p| > 1e6              -> SlopeBlowup (sign of p attached)
        solver failure                           -> StepUnderflow
    Height sign changes are recorded in RadialProfile.events. axis=(f0, c) enables series evaluation below
    start.t for trajectories launched by axis_start().
    """
    assert t_end > start.t and rtol > 0 and atol > 0, 'integrate needs t_end > t_start and positive tolerances'
    n = ode.n
    y0 = np.array([start.f, ode.conserved(start.t, start.p)])
    try:
        solver = DOP853(ode.fun, start.t, y0, t_end, rtol=rtol, atol=atol)
    except SlopeBlowup as e:
        raise SlopeBlowup(f'slope blowup at start t={start.t:.3g}', t=start.t, sign=e.sign) from e
    ts, interps, rows, events = [start.t], [], [(start.t, start.f, start.p)], []
    steps = rejected = 0
    nfev = solver.nfev

    def fp(sol_step, t):
        f, Q = sol_step(t)
        s = Q / t ** (n - 2)
        return f, s / math.sqrt(max(1 - s * s, 1e-300))

    while solver.status == 'running':
        t_old = solver.t
        try:
            msg = solver.step()
        except (PointOutsideDomain, DomainViolation) as e:
            raise HorizonCollision(f'trajectory left the domain near t={t_old:.6g}: {e}', t=t_old) from e
        except SlopeBlowup as e:
            raise SlopeBlowup(f'slope blowup near t={t_old:.6g}', t=t_old, sign=e.sign) from e
        if solver.status == 'failed':
            raise StepUnderflow(f'DOP853 failed at t={t_old:.6g}: {msg}')
        step = solver.dense_output()
        attempts = max(1, (solver.nfev - nfev - DENSE_EVALS) // solver.n_stages)
        nfev = solver.nfev
        steps, rejected = steps + 1, rejected + attempts - 1
        t_new = solver.t
        f_new, p_new = fp(step, t_new)

        if ode.guard and math.hypot(t_new, f_new) < ode.guard:
            te = _locate(lambda t: math.hypot(t, step(t)[0]) - ode.guard, t_old, t_new)
            raise HorizonCollision(f'horizon approach at t={te:.6g}', t=te)
        if abs(p_new) > SLOPE_CAP:
            te = _locate(lambda t: abs(fp(step, t)[1]) - SLOPE_CAP, t_old, t_new)
            raise SlopeBlowup(f'|p| > {SLOPE_CAP:.0e} at t={te:.6g}', t=te, sign=math.copysign(1, p_new))
        f_old = rows[-1][1]
        if f_old * f_new < 0:
            te = _locate(lambda t: step(t)[0], t_old, t_new)
            events.append({'kind': 'height_sign_change', 't': float(te)})

        for tt in np.linspace(t_old, t_new, samples_per_step + 1)[1:-1]:
            rows.append((tt, *fp(step, tt)))
        rows.append((t_new, f_new, p_new))
        ts.append(t_new)
        interps.append(step)

    sol = OdeSolution(ts, interps)
    samples = pd.DataFrame(rows, columns=['t', 'f', 'p'])
    stats = {'steps': steps, 'rejected': rejected, 'nfev': int(solver.nfev), 't_start': float(start.t),
             'max_residual': float('nan')}
    LOGGER.debug(f'integrate {ode!r}: {steps} steps, {rejected} rejected, f(t_end)={rows[-1][1]:.12g}')
    f0, c = axis if axis is not None else (None, None)
    return RadialProfile(ode, f0, c, start.t, sol, samples, stats, events)


def integrate_from_axis(ode, f0, t_end, t_start=None, rtol=1e-10, atol=1e-12):
    # axis_start() followed by integrate(), t_start defaults to 1e-6·max(1, t_end)
    t_start = 1e-6 * max(1.0, t_end) if t_start is None else t_start
    start = axis_start(f0, t_start, ode)
    return integrate(ode, start, t_end, rtol=rtol, atol=atol, axis=(f0, start.p / t_start))


def flat_region_profile(a, t_ref, f_ref, t_range, n):
    """
    Flat-metric solution with conserved t^{n-2}·p/(1+p²)^{1/2} = -a:

        f(t) = f_ref - ∫_{t_ref}^t a/(s^{2n-4} - a²)^{1/2} ds,   p(t) = -a/(t^{2n-4} - a²)^{1/2}

    Returns a DataFrame with columns t, f, p; t may include inf.
    """
    assert a >= 0, f'flat_region_profile needs a >= 0, got a={a}'
    k = n - 2
    t = np.atleast_1d(np.asarray(t_range, dtype=float))
    floor = a ** (1 / k)
    if a > 0 and (t_ref <= floor or np.any(t <= floor)):
        raise SingularLowerLimit(f'profile samples must lie above a^(1/(n-2)) = {floor:.6g}')
    if a == 0:
        return pd.DataFrame({'t': t, 'f': np.full_like(t, f_ref), 'p': np.zeros_like(t)})

    def integrand(s):
        return a / math.sqrt(s ** (2 * k) - a * a)

    f = np.array([f_ref - math.copysign(quad(integrand, min(t_ref, ti), max(t_ref, ti), epsabs=1e-14,
                                             epsrel=1e-13, limit=200)[0], ti - t_ref) for ti in t])
    with np.errstate(over='ignore'):
        p = -a / np.sqrt(t ** (2 * k) - a * a)  # -0.0 at t = inf
    return pd.DataFrame({'t': t, 'f': f, 'p': p})


def _tail_weight(u, k):
    # u^{k-2}·((1-u)/(1-u^{2k}))^{1/2} with the geometric sum in closed polynomial form
    return u ** (k - 2) / np.sqrt(sum(u ** j for j in range(2 * k)))


def tail_integral(n, order=None):
    """
    I_n = ∫_1^∞ ds/(s^{2n-4} - 1)^{1/2} = ∫_0^1 u^{n-4}/(1 - u^{2n-4})^{1/2} du after s = 1/u.
    The (1-u)^{-1/2} endpoint factor is integrated exactly: adaptive quad with an algebraic weight by default,
    or a fixed-order Gauss-Jacobi rule when order is given.
    """
    assert n >= 4, f'tail integral is finite for n >= 4, got n={n}'
    k = n - 2
    if order is None:
        return quad(_tail_weight, 0.0, 1.0, args=(k,), weight='alg', wvar=(0.0, -0.5), epsabs=1e-13, epsrel=1e-13)[0]
    x, w = roots_jacobi(order, -0.5, 0.0)
    return float(np.sum(w * _tail_weight((1 + x) / 2, k)) / math.sqrt(2))
