# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license
"""
Area growth, monotonicity and asymptotic checks on computed hypersurfaces of revolution

Euclidean ball slices |B_ρ(x0) ∩ Σ| are integrated with the quadrature split exactly at the parameters where
|x(σ) - x0| = ρ, so every masked integrand below is smooth on each panel.
"""

import math

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from models.ambient import FlatMetric
from utils.curvature import MassEstimate, check_flux_sequence, mass_flux
from utils.general import LOGGER, LabError, unit_ball_volume
from utils.geometry import SurfaceQuadrature, curve_dimension, surface_data
from utils.quadrature import InsufficientRange, composite_gauss, fit_power_law, richardson_limit, sphere_quadrature
from utils.reports import CheckReport
from utils.surfaces import as_curve


class QuadratureSingularity(LabError):
    pass


class ExponentOutOfRange(LabError):
    pass


class TailTooShort(LabError):
    pass


class BallSlicer:
    """
    Euclidean quadrature of a meridian curve centered at x0 = (0, ..., 0, center), with panel breaks at the
    crossings of every radius in `radii`.

    Attributes:
        r       |x - x0| at the nodes
        gnu     ḡ(x - x0, ν̄) at the nodes
        H       Euclidean mean curvature at the nodes
        dmu     Euclidean area weights
    """

    def __init__(self, obj, n=None, center=0.0, radii=(), panels=96, order=16, samples=4097):
        self.curve = as_curve(obj)
        self.n, self.center = curve_dimension(self.curve, n), float(center)
        a, b = self.curve.interval
        self._grid = np.linspace(a, b, samples)
        t, z = self.curve.point(self._grid)
        self._rgrid = np.hypot(t, z - self.center)
        cuts = sorted({s for rho in radii for s in self.crossings(rho)})
        self.q = SurfaceQuadrature(self.curve, FlatMetric(self.n), panels, order, breakpoints=cuts)
        d = self.q.d
        self.r = np.hypot(d.t, d.z - self.center)
        self.gnu = d.t * d.nu_bar[:, 0] + (d.z - self.center) * d.nu_bar[:, -1]
        self.H = d.H_bar
        self.dmu = self.q.dmu_bar

    def _radius(self, s):
        t, z = self.curve.point(s)
        return float(np.hypot(t[0], z[0] - self.center))

    def crossings(self, rho):
        # parameters σ with |x(σ) - x0| = rho, from sign changes on the sample grid
        g = self._rgrid - rho
        idx = np.flatnonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)
        return [brentq(lambda s: self._radius(s) - rho, self._grid[i], self._grid[i + 1], xtol=1e-14, rtol=1e-14)
                for i in idx]

    @property
    def min_radius(self):
        return float(min(np.min(self._rgrid), np.min(self.r)))

    def end_radii(self):
        # |x - x0| at the boundary circles
        return [self._radius(s) for s in self.curve.boundary_ends()]

    def ball_area(self, rho):
        return float(np.sum(self.dmu[self.r < rho]))

    def integrate(self, values, mask=None):
        values = np.broadcast_to(values, self.dmu.shape)
        return float(np.sum((values * self.dmu)[mask] if mask is not None else values * self.dmu))


def monotonicity_check(obj, center=0.0, s=1.0, t=10.0, n=None, tol=1e-6, panels=96, order=16):
    """
    Monotonicity identity for a center x0 on the symmetry axis, k = n-1, r = |x - x0|:

        t^{-k}·I(t) = s^{-k}·I(s) + ∫_{B_t∖B_s} r^{-1-n}·ḡ(x-x0, ν̄)^2 dμ̄
                      + (1/k)·∫_{B_t∖B_s} (t^{-k} - r^{-k})·ḡ(x-x0, ν̄)·H̄ dμ̄
                      + (1/k)·∫_{B_s} (t^{-k} - s^{-k})·ḡ(x-x0, ν̄)·H̄ dμ̄

    with I(ρ) = |B_ρ(x0) ∩ Σ|_ḡ. The boundary of Σ must lie outside B_t.
    """
    assert 0 < s < t, f'monotonicity radii need 0 < s < t, got s={s}, t={t}'
    sl = BallSlicer(obj, n, center, (s, t), panels, order)
    k = sl.n - 1
    if sl.min_radius < 1e-9 and s < 1e-6:
        raise QuadratureSingularity(f'center {center:g} lies on the surface and s={s:g} is below 1e-6')
    ends = sl.end_radii()
    if any(e <= t for e in ends):
        raise InsufficientRange(f'boundary of the surface at |x - x0|={min(ends):.6g} lies inside B_{t:g}')

    inner, ann = sl.r < s, (sl.r >= s) & (sl.r < t)
    It, Is = sl.ball_area(t), sl.ball_area(s)
    with np.errstate(divide='ignore'):
        excess = sl.integrate(sl.r ** (-1.0 - sl.n) * sl.gnu ** 2, ann)
        h_ann = sl.integrate((t ** -k - sl.r ** -k) * sl.gnu * sl.H, ann) / k
    h_in = (t ** -k - s ** -k) * sl.integrate(sl.gnu * sl.H, inner) / k
    lhs, rhs = t ** -k * It, s ** -k * Is + excess + h_ann + h_in
    scale = max(abs(lhs), abs(s ** -k * Is) + abs(excess) + abs(h_ann) + abs(h_in), 1e-300)
    return CheckReport.residual('monotonicity', 'monotonicity formula, axis center', abs(lhs - rhs) / scale, tol,
                                center=center, s=s, t=t, density_t=lhs, density_s=s ** -k * Is, excess=excess,
                                h_annulus=h_ann, h_inner=h_in)


def layer_cake_check(obj, alpha, s, t, n=None, tol=1e-6, radii=64, panels=96, order=16):
    """
    Layer-cake bound for ∫_{(B_t∖B_s)∩Σ} |x|^{-α} dμ̄ with c = max(1, sup_{s<ρ<t} ρ^{1-n}·I(ρ)):

        ∫ |x|^{-α} dμ̄ = t^{-α}I(t) - s^{-α}I(s) + α∫_s^t ρ^{-α-1}I(ρ) dρ ≤ c·t^{n-1-α} + (cα/(n-1-α))·(t^{n-1-α} + s^{n-1-α})

    The left side is integrated on the surface and the identity's right side through I(ρ); both the identity
    residual and the bound margin are reported.
    """
    curve = as_curve(obj)
    n = curve_dimension(curve, n)
    if not 0 < alpha < n - 1:
        raise ExponentOutOfRange(f'layer cake exponent must lie in (0, {n - 1}), got {alpha}')
    assert 0 < s < t, f'layer cake radii need 0 < s < t, got s={s}, t={t}'
    rho, w = composite_gauss(s, t, panels=16, order=8)
    sup_grid = np.geomspace(s, t, radii)
    sl = BallSlicer(curve, n, 0.0, np.r_[s, t, rho, sup_grid], panels, order)
    ann = (sl.r >= s) & (sl.r < t)
    lhs = sl.integrate(sl.r ** -alpha, ann)

    I = np.array([sl.ball_area(p) for p in rho])
    ident = t ** -alpha * sl.ball_area(t) - s ** -alpha * sl.ball_area(s) + alpha * np.sum(w * rho ** (-alpha - 1) * I)
    c = max(1.0, max(p ** (1 - n) * sl.ball_area(p) for p in sup_grid))
    m = n - 1 - alpha
    bound = c * t ** m + c * alpha / m * (t ** m + s ** m)
    ident_res = abs(lhs - ident) / max(abs(lhs), 1e-300)
    margin = (bound - lhs) / bound
    return CheckReport('layer_cake', 'layer-cake formula for area in balls', margin, tol, bool(margin >= 0 and ident_res < tol),
                       {'alpha': alpha, 's': s, 't': t, 'c': c, 'integral': lhs, 'bound': bound,
                        'identity_residual': ident_res})


def area_ratio_table(obj, n=None, s_grid=None, points=32, panels=96, order=16):
    # DataFrame (s, ratio) of I(s)/(ω_{n-1}·s^{n-1}) for the origin-centered balls inside the surface's range
    curve = as_curve(obj)
    n = curve_dimension(curve, n)
    if s_grid is None:
        coarse = BallSlicer(curve, n, panels=8, order=4, samples=1025)
        ends = coarse.end_radii() or [float(np.max(coarse._rgrid))]
        s_max = 0.9 * min(ends)
        s_grid = np.geomspace(max(1.0, s_max / 20), s_max, points)
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid[-1] / s_grid[0] < 4:
        raise InsufficientRange(f'area ratio grid spans only [{s_grid[0]:.4g}, {s_grid[-1]:.4g}]')
    sl = BallSlicer(curve, n, 0.0, s_grid, panels, order)
    ratio = np.array([sl.ball_area(s) for s in s_grid]) / (unit_ball_volume(n - 1) * s_grid ** (n - 1))
    return pd.DataFrame({'s': s_grid, 'ratio': ratio})


def _fit_exponent(x, y):
    # decay exponent of the positive part of y, nan without enough positive samples
    keep = y > 1e-14
    if keep.sum() < 4:
        return float('nan')
    return fit_power_law(x[keep], y[keep])[0]


def area_ratio_scan(obj, n=None, tau=None, s_grid=None, window=0.3, limit_tol=0.2, **kw):
    """
    Area ratios I(s)/(ω_{n-1}·s^{n-1}) over a geometric s grid, with fitted approach-to-1 exponents from above
    (upper bound 1 + O(s^{-τ})) and from below (lower bound 1 - O(s^{-τ/(n-1)})) on the outer half of the grid.
    """
    curve = as_curve(obj)
    n = curve_dimension(curve, n)
    tau = n - 2 if tau is None else tau
    df = area_ratio_table(curve, n, s_grid, **kw)
    s, ratio = df['s'].to_numpy(), df['ratio'].to_numpy()
    half = s >= s[len(s) // 2]
    up, lo = _fit_exponent(s[half], ratio[half] - 1), _fit_exponent(s[half], 1 - ratio[half])
    dev = np.abs(ratio - 1)
    ok = dev[-1] <= limit_tol and dev[-1] <= dev[0] + 1e-12
    ok &= math.isnan(up) or up <= -tau + window
    ok &= math.isnan(lo) or lo <= -tau / (n - 1) + window
    return CheckReport('area_ratio', 'upper and lower area bounds', float(dev[-1]), limit_tol, bool(ok),
                       {'s': s, 'ratio': ratio, 'upper_exponent': up, 'lower_exponent': lo, 'tau': tau})


def excess_decay(obj, n=None, s_grid=None, points=16, panels=96, order=16):
    """
    Tail excess E(s) = ∫_{Σ∖B_s} |x|^{-1-n}·ḡ(x, ν̄)^2 dμ̄ over a geometric s grid, truncated at the surface's range,
    with its fitted decay exponent. Reported as a finding; the expected bound is O(s^{-τ/(n-1)}).
    """
    curve = as_curve(obj)
    n = curve_dimension(curve, n)
    if s_grid is None:
        t, z = curve.point(np.asarray(curve.boundary_ends() or [curve.interval[1]], dtype=float))
        R = float(np.min(np.hypot(t, z)))  # radius reached by every end
        s_grid = np.geomspace(max(1.0, R / 40), R / 2, points)
    s_grid = np.asarray(s_grid, dtype=float)
    sl = BallSlicer(curve, n, 0.0, s_grid, panels, order)
    dens = sl.r ** (-1.0 - n) * sl.gnu ** 2
    E = np.array([sl.integrate(dens, sl.r >= s) for s in s_grid])
    k = _fit_exponent(s_grid, E)
    return CheckReport.finding('excess_decay', 'excess estimate', k, s=s_grid, excess=E, expected=-(n - 2) / (n - 1))


def geometric_expansion_check(obj, metric, tau=None, window=0.3, samples=64):
    """
    Decay of the conformal-vs-Euclidean discrepancies along the tail t ∈ [T/4, T]: |ν - ν̄| = |1 - ω^{-1/2}|,
    |dμ/dμ̄ - 1| = |ω^{(n-1)/2} - 1| and |x|·|κ_i - κ̄_i|. The first two must decay like |x|^{-τ} within the
    window, the curvature term at least that fast.
    """
    curve = as_curve(obj)
    tau = float(metric.tau if tau is None else tau)
    a, T = curve.interval
    if T < 16:
        raise TailTooShort(f'tail [{T / 4:g}, {T:g}] starts inside |x| < 4')
    sigma = np.geomspace(max(T / 4, a + 1e-9), T, samples)
    d = surface_data(curve, metric, sigma)
    n = metric.n
    rho = np.linalg.norm(d.x, axis=-1)
    nu = np.abs(1 - d.omega ** -0.5)
    dmu = np.abs(d.omega ** ((n - 1) / 2) - 1)
    h = rho * np.maximum(np.abs(d.k1 - d.k1_bar), np.abs(d.k2 - d.k2_bar))
    e_nu, e_dmu, e_h = (_fit_exponent(rho, v) for v in (nu, dmu, h))
    ok = all(math.isnan(e) or abs(e + tau) <= window for e in (e_nu, e_dmu))
    ok &= math.isnan(e_h) or e_h <= -tau + window
    worst = max((abs(e + tau) for e in (e_nu, e_dmu) if not math.isnan(e)), default=0.0)
    return CheckReport('geometric_expansion', 'geometric expansions', worst, window, bool(ok),
                       {'tau': tau, 'normal_exponent': e_nu, 'area_exponent': e_dmu, 'curvature_exponent': e_h,
                        'tail': [T / 4, T], 'max_normal': float(np.max(nu)), 'max_area': float(np.max(dmu))})


def _graph_mass_integrand(curve, metric):
    """
    Flux integrand Σ_ab y^a·[∂_b g_ab - ∂_a g_bb] of the induced metric g_ab = ω·(δ_ab + p^2·ŷ_a·ŷ_b) in the graph
    chart y -> (y, f(|y|)). With A = ω and B = ω·p^2 along the graph it reduces to (m-1)·(B - ρ·A'), m = n-1.
    """
    m = metric.n - 1

    def integrand(y):
        rho = np.linalg.norm(y, axis=-1)
        j = curve.jet(rho)
        f, p = j.z, j.dz / j.dt
        w, grad, _ = metric.factor(metric.embed(rho, f))
        dA = grad[:, 0] + p * grad[:, -1]
        return (m - 1) * (w * p * p - rho * dA)

    return integrand


def induced_mass(obj, metric, radii=None, order=24, label='induced'):
    """
    Mass of the induced metric on a rotation graph: the (n-1)-dimensional flux integral over the circles |y| = λ of
    the graph chart, extrapolated along the radius schedule. The radial closed form ½·λ^{n-3}·[ω·p^2 - λ·A'] is
    kept as a cross-check column.
    """
    curve = as_curve(obj)
    assert curve.kind in ('graph', 'plane'), f'induced mass needs a graph chart, got {curve.kind}'
    T = curve.interval[1]
    radii = np.geomspace(T / 16, T, 5) if radii is None else np.asarray(radii, dtype=float)
    if radii[-1] > T * (1 + 1e-12) or len(radii) < 3:
        raise TailTooShort(f'mass radii up to {radii[-1]:g} exceed the resolved range {T:g}')
    m = metric.n - 1
    integrand = _graph_mass_integrand(curve, metric)
    values = np.array([mass_flux(integrand, m, lam, order) for lam in radii])
    check_flux_sequence(values)
    limit, rate, error = richardson_limit(radii, values)
    closed = np.array([integrand(np.array([[lam] + [0.0] * (m - 1)]))[0] for lam in radii]) \
        * radii ** (m - 2) / (2 * (m - 1))
    LOGGER.debug(f'{label} mass on {curve.describe()}: {limit:.6g} (rate {rate:.3g}, error {error:.3g})')
    return MassEstimate(radii, values, float(limit), float(rate), float(error), label, closed)


def induced_mass_check(est, atol=1e-3):
    # limit consistent with zero within the estimator error
    return CheckReport.residual('induced_mass', 'vanishing mass of the induced metric',
                                abs(est.limit) / max(est.error, atol), 1.0 + 1e-12, **est.summary())


def ball_isoperimetric_witness(metric, radii=(4, 8, 16, 32, 64, 128, 256), tol=0.01, panels=48, order=16,
                               angular=8):
    """
    Coordinate-ball witness (V/ω_n)^{(1-n)/n}·|∂B_r|_g -> n·ω_n with V the g-volume of {inner ≤ |x| ≤ r} and the
    boundary area |∂B_r|_g, both by radial composite Gauss-Legendre times the product sphere rule.
    """
    n = metric.n
    theta, wt = sphere_quadrature(n, angular)
    r0 = metric.inner_radius
    target = n * unit_ball_volume(n)
    out = []
    for r in radii:
        kind = 'geometric' if r0 > 0 and r / r0 > 8 else 'uniform'
        rho, wr = composite_gauss(r0, r, panels, order, kind=kind)
        pts = rho[:, None, None] * theta[None]
        vol = np.sum(wr[:, None] * wt[None] * metric.value(pts) ** (n / 2) * rho[:, None] ** (n - 1))
        area = np.sum(wt * metric.value(r * theta) ** ((n - 1) / 2)) * r ** (n - 1)
        out.append((r, vol, area, (vol / unit_ball_volume(n)) ** ((1 - n) / n) * area))
    df = pd.DataFrame(out, columns=['r', 'volume', 'area', 'ratio'])
    dev = np.abs(df['ratio'].to_numpy() / target - 1)
    decreasing = bool(np.all(np.diff(df['ratio'].to_numpy()) <= 1e-12 * target))
    return CheckReport.residual('ball_isoperimetric', 'isoperimetric profile asymptotics', float(dev[-1]), tol,
                                target=target, decreasing=decreasing, **df.to_dict('list'))
