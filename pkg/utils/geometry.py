# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license
"""
Quadrature geometry of rotation hypersurfaces in g = ω·ḡ

A meridian curve (t(σ), z(σ)) sweeps the hypersurface {(t·θ, z)}; with c = (n-1)·ω_{n-1} = |S^{n-2}| the Euclidean
and conformal area elements are dμ̄ = c·t^{n-2}·L·dσ and dμ = ω^{(n-1)/2}·dμ̄. Conformal principal curvatures are
κ_i = ω^{-1/2}·(κ̄_i + ∂_ν̄ u) with u = ½·log ω.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from models.ambient import FlatMetric
from utils.curvature import christoffel_fd, ricci_normal, scalar_curvature
from utils.general import LOGGER, LabError, relative_residual, unit_ball_volume, unit_sphere_area
from utils.quadrature import fit_power_law, gauss_legendre
from utils.reports import CheckReport
from utils.surfaces import InvalidTestFunction, VariationTestFunction, as_curve


class TailEstimateUnreliable(LabError):
    pass


def graded_edges(a, b, panels=96, scale=1.0, breakpoints=()):
    # uniform panels on short curves; on long ones a uniform core [a, a + 20·scale] and geometric panels beyond
    a, b = float(a), float(b)
    if b - a <= 200 * scale or a + 20 * scale <= 0:  # geometric panels need a positive core end
        edges = np.linspace(a, b, panels + 1)
    else:
        core = a + 20 * scale
        edges = np.concatenate([np.linspace(a, core, panels // 4 + 1), np.geomspace(core, b, panels - panels // 4 + 1)])
    inner = [p for p in breakpoints if a < p < b]
    return np.unique(np.concatenate([edges, inner]))


@dataclass
class SurfaceData:
    # per-parameter geometric data of a rotation hypersurface
    sigma: np.ndarray
    t: np.ndarray
    z: np.ndarray
    L: np.ndarray
    x: np.ndarray  # embedded meridian points (N, n)
    nu_bar: np.ndarray  # Euclidean unit normal (N, n)
    nu: np.ndarray  # g-unit normal
    omega: np.ndarray
    grad: np.ndarray  # ∇ω (N, n)
    hess: np.ndarray  # ∇²ω (N, n, n)
    k1_bar: np.ndarray
    k2_bar: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    jet: object = field(repr=False)

    @property
    def n(self):
        return self.x.shape[-1]

    @property
    def H_bar(self):
        return self.k1_bar + (self.n - 2) * self.k2_bar

    @property
    def H(self):
        return self.k1 + (self.n - 2) * self.k2

    @property
    def h2_bar(self):
        return self.k1_bar ** 2 + (self.n - 2) * self.k2_bar ** 2

    @property
    def h2(self):
        return self.k1 ** 2 + (self.n - 2) * self.k2 ** 2


def surface_data(curve, metric, sigma):
    """
    Closed-form geometry of the rotation hypersurface at meridian parameters sigma: normals, conformal factor with
    derivatives, and Euclidean and conformal principal curvatures (meridian κ_1, rotational κ_2 of multiplicity
    n-2).
    """
    n = metric.n
    j = curve.jet(sigma)
    L = j.L
    Nt, Nz = j.normal
    x = metric.embed(j.t, j.z)
    nu_bar = metric.embed(Nt, Nz)
    w, grad, hess = metric.factor(x)
    du = 0.5 * np.sum(grad * nu_bar, axis=-1) / w  # ∂_ν̄ u
    k1b, k2b = j.kappa_bar()
    s = w ** -0.5
    return SurfaceData(j.sigma, j.t, j.z, L, x, nu_bar, nu_bar * s[:, None], w, grad, hess, k1b, k2b,
                       s * (k1b + du), s * (k2b + du), j)


class SurfaceQuadrature:
    """
    Composite Gauss-Legendre rule over the meridian parameter with cached geometry at the nodes.

    Attributes:
        sigma, w    nodes and quadrature weights in σ
        d           SurfaceData at the nodes
        dmu_bar     Euclidean area weights c·t^{n-2}·L·w
        dmu         conformal area weights ω^{(n-1)/2}·dmu_bar
    """

    def __init__(self, curve, metric, panels=96, order=16, breakpoints=()):
        self.curve, self.metric, self.n = as_curve(curve), metric, metric.n
        self.panels, self.order, self.breakpoints = panels, order, tuple(breakpoints)
        a, b = self.curve.interval
        edges = graded_edges(a, b, panels, self.curve.scale, breakpoints)
        xg, wg = gauss_legendre(order)
        lo, hi = edges[:-1, None], edges[1:, None]
        self.sigma = (0.5 * (hi - lo) * xg + 0.5 * (hi + lo)).ravel()
        self.w = (0.5 * (hi - lo) * wg).ravel()
        self.d = surface_data(self.curve, metric, self.sigma)
        assert np.all(np.abs(np.linalg.norm(self.d.nu_bar, axis=-1) - 1) < 1e-12), 'Euclidean normals not unit'
        self.dmu_bar = unit_sphere_area(self.n - 1) * self.d.t ** (self.n - 2) * self.d.L * self.w
        self.dmu = self.d.omega ** ((self.n - 1) / 2) * self.dmu_bar

    def integrate(self, values, euclid=False):
        return float(np.sum(np.asarray(values) * (self.dmu_bar if euclid else self.dmu)))

    def refine(self):
        # same rule with twice the panels
        return SurfaceQuadrature(self.curve, self.metric, 2 * self.panels, self.order, self.breakpoints)

    def ricci_normal(self):
        return ricci_normal(self.metric, self.d.x, self.d.nu)


def area_functional(obj, metric, t_range=None, panels=96, order=16):
    """
    Area (n-1)ω_{n-1}·∫ t^{n-2}·(1+p^2)^{1/2}·ω(t, f)^{(n-1)/2} dt of a rotation graph (or any meridian curve) in
    g = ω·ḡ.
    """
    return SurfaceQuadrature(as_curve(obj, t_range), metric, panels, order).integrate(1.0)


def area_convergence(obj, metric, t_range=None, panels=96, order=16, tol=1e-9):
    # area at the given panel count and at twice the panel count
    q = SurfaceQuadrature(as_curve(obj, t_range), metric, panels, order)
    a1, a2 = q.integrate(1.0), q.refine().integrate(1.0)
    return CheckReport.residual('area_self_convergence', 'area of a hypersurface of revolution',
                                relative_residual(a1, a2), tol, area=a1, refined=a2)


def second_fundamental_form(obj, metric, t):
    """
    Returns (|h|^2, H, (κ_1, κ_2)) at meridian parameters t (t is the graph radius for profiles); κ_2 has
    multiplicity n-2.
    """
    d = surface_data(as_curve(obj), metric, np.atleast_1d(np.asarray(t, dtype=float)))
    return d.h2, d.H, (d.k1, d.k2)


def second_fundamental_form_fd(obj, metric, t, h=None):
    """
    Finite-difference oracle h(X, X) = -g(∇_X X, ν)/g(X, X) along the meridian direction X = γ' (γ'' from central
    differences of γ') and along the rotation circle (0, t, 0, ...), with Γ from christoffel_fd().
    """
    curve, n = as_curve(obj), metric.n
    sigma = np.atleast_1d(np.asarray(t, dtype=float))
    h = 1e-5 * np.maximum(1.0, np.abs(sigma)) if h is None else h
    j, jp, jm = curve.jet(sigma), curve.jet(sigma + h), curve.jet(sigma - h)
    x = metric.embed(j.t, j.z)
    nu_bar = metric.embed(*j.normal)
    w = metric.value(x)
    gam = christoffel_fd(metric, x)

    X = metric.embed(j.dt, j.dz)
    dX = metric.embed((jp.dt - jm.dt) / (2 * h), (jp.dz - jm.dz) / (2 * h))
    acc = dX + np.einsum('...kij,...i,...j->...k', gam, X, X)
    k1 = -np.sum(acc * nu_bar, axis=-1) / (np.sqrt(w) * np.sum(X * X, axis=-1))

    C = np.zeros_like(x)
    C[:, 1] = j.t
    dC = np.zeros_like(x)
    dC[:, 0] = -j.t
    acc = dC + np.einsum('...kij,...i,...j->...k', gam, C, C)
    k2 = -np.sum(acc * nu_bar, axis=-1) / (np.sqrt(w) * j.t ** 2)
    return k1 ** 2 + (n - 2) * k2 ** 2, k1 + (n - 2) * k2, (k1, k2)


def normal_displacement(curve, metric, test, s, sigma):
    """
    Meridian displacement of x_s = exp_x(φ·ν), φ = s·u + ½s²·v, to second order in coordinates:
    W = w - ½Γ(w, w) with w = φ·ω^{-1/2}·ν̄ and Γ(w, w) = 2(w·∇U)w - |w|^2·∇U, U = ½·log ω.
    """
    j = curve.jet(sigma)
    Nt, Nz = j.normal
    phi = s * test(sigma) + 0.5 * s * s * test.accel(sigma)
    amp = phi * metric.value_rz(j.t, j.z) ** -0.5
    wt, wz = amp * Nt, amp * Nz
    gt, gz = metric.log_gradient_rz(j.t, j.z)
    Ut, Uz = 0.5 * np.asarray(gt), 0.5 * np.asarray(gz)
    dot, sq = wt * Ut + wz * Uz, wt * wt + wz * wz
    return j, wt - 0.5 * (2 * dot * wt - sq * Ut), wz - 0.5 * (2 * dot * wz - sq * Uz)


def perturbed_area(q, test, s, h=None):
    # area of the normal-graph variation of q.curve by test at parameter s, on the nodes of q
    curve, metric, n, sigma = q.curve, q.metric, q.n, q.sigma
    if s == 0:
        return q.integrate(1.0)
    h = 1e-6 * max(1.0, float(np.max(np.abs(sigma)))) if h is None else h
    j, Wt, Wz = normal_displacement(curve, metric, test, s, sigma)
    d = [normal_displacement(curve, metric, test, s, sigma + k * h)[1:] for k in (-2, -1, 1, 2)]
    dWt = (d[0][0] - 8 * d[1][0] + 8 * d[2][0] - d[3][0]) / (12 * h)
    dWz = (d[0][1] - 8 * d[1][1] + 8 * d[2][1] - d[3][1]) / (12 * h)
    t, z = j.t + Wt, j.z + Wz
    L = np.hypot(j.dt + dWt, j.dz + dWz)
    dens = unit_sphere_area(n - 1) * t ** (n - 2) * L * metric.value_rz(t, z) ** ((n - 1) / 2)
    return float(np.sum(q.w * dens))


def _quadrature(obj, metric, test, t_range=None, panels=96, order=16):
    # quadrature with panel breaks at the test function's knots
    knots = tuple(float(k) for k in np.unique(np.r_[test.u.x, test.v.x if test.v is not None else []])
                  if abs(k) < 1e299)
    return SurfaceQuadrature(as_curve(obj, t_range), metric, panels, order, breakpoints=knots)


def first_variation(obj, metric, test, t_range=None, panels=96, order=16):
    # ∫ H·u dμ
    q = _quadrature(obj, metric, test, t_range, panels, order)
    return q.integrate(q.d.H * test(q.sigma))


def first_variation_check(obj, metric, test, s=1e-3, tol=1e-6, t_range=None):
    # ∫ H·u dμ against the central first difference of the area along the normal flow
    q = _quadrature(obj, metric, test, t_range)
    fv = q.integrate(q.d.H * test(q.sigma))
    fd = (perturbed_area(q, test, s) - perturbed_area(q, test, -s)) / (2 * s)
    scale = max(abs(fv), abs(fd), 1e-12 * q.integrate(1.0))
    return CheckReport.residual('first_variation', 'first variation of area is the integral of H·u',
                                abs(fv - fd) / scale, tol, analytic=fv, finite_difference=fd)


def second_variation(obj, metric, test, t_range=None, panels=96, order=16):
    """
    ∫ [H·v + H^2·u^2 + |∇u|^2 - (|h|^2 + Ric(ν, ν))·u^2] dμ for the axisymmetric variation (u, v) = (test,
    test.accel), with |∇u|^2 = (du/dσ)^2/(ω·L^2) in the induced metric.
    """
    q = _quadrature(obj, metric, test, t_range, panels, order)
    d = q.d
    u, du, v = test(q.sigma), test(q.sigma, 1), test.accel(q.sigma)
    grad2 = du ** 2 / (d.omega * d.L ** 2)
    ric = q.ricci_normal() if not isinstance(metric, FlatMetric) else 0.0
    return q.integrate(d.H * v + d.H ** 2 * u ** 2 + grad2 - (d.h2 + ric) * u ** 2)


def second_variation_fd(obj, metric, test, s=1e-2, t_range=None, panels=96, order=16):
    # central second difference of the area in s, Richardson-combined over s and s/2
    q = _quadrature(obj, metric, test, t_range, panels, order)
    a0 = q.integrate(1.0)

    def D(e):
        return (perturbed_area(q, test, e) - 2 * a0 + perturbed_area(q, test, -e)) / e ** 2

    return (4 * D(s / 2) - D(s)) / 3


def second_variation_check(obj, metric, test, tol=1e-4, t_range=None, label='second_variation'):
    sv = second_variation(obj, metric, test, t_range)
    fd = second_variation_fd(obj, metric, test, t_range=t_range)
    return CheckReport.residual(label, 'second variation of area', relative_residual(sv, fd), tol, formula=sv,
                                finite_difference=fd, test=test.describe())


def sphere_second_variation(n, rho):
    # d^2/ds^2 of n·ω_n·(ρ + s)^{n-1} at s = 0
    return n * unit_ball_volume(n) * (n - 1) * (n - 2) * rho ** (n - 3)


@dataclass
class AcvTerms:
    """
    Quadrature sums of the asymptotically-constant-variation form with q = |h|^2 + Ric(ν, ν):
    A = ∫|∇u|^2, B = ∫q (plus tail), C = ∫q·u, D = ∫q·u^2, so that Q(1 + s·u) = A·s^2 - B - 2s·C - s^2·D.
    """
    A: float
    B: float
    C: float
    D: float
    tail: float
    tail_exponent: float
    resolved_range: float

    def Q(self, s=1.0):
        return self.A * s * s - (self.B + self.tail) - 2 * s * self.C - s * s * self.D

    @property
    def value(self):
        return self.Q(1.0)

    def to_dict(self):
        return {'value': self.value, 'A': self.A, 'B': self.B, 'C': self.C, 'D': self.D, 'tail': self.tail,
                'tail_exponent': self.tail_exponent, 'resolved_range': self.resolved_range}


def acv_functional(leaf, metric, test, panels=128, order=16, max_fit_residual=0.25):
    """
    Q(1+u) = ∫|∇u|^2 dμ - ∫(|h|^2 + Ric(ν, ν))·(1+u)^2 dμ on a leaf, truncated at the leaf's resolved range T. The
    tail ∫_T^∞ is extrapolated from a power-law fit of the density (|h|^2 + Ric)·dμ/dt on [T/4, T].
    """
    T = leaf.resolved_range
    a, b = test.support
    if not ((test.compact and a >= 0 and b <= T) or not np.any(test.u.c)):
        raise InvalidTestFunction(f'test function {test.label} must be compactly supported in [0, {T:g}], '
                                  f'got support [{a:g}, {b:g}]')
    q = _quadrature(leaf, metric, test, (0.0, T), panels, order)
    d = q.d
    u, du = test(q.sigma), test(q.sigma, 1)
    Q = d.h2 + (q.ricci_normal() if not isinstance(metric, FlatMetric) else 0.0)
    A = q.integrate(du ** 2 / (d.omega * d.L ** 2))
    B, C, D = q.integrate(Q), q.integrate(Q * u), q.integrate(Q * u * u)

    win = d.t >= T / 4
    dens = Q[win] * q.dmu[win] / q.w[win]
    tail, k = 0.0, float('nan')
    if np.any(dens != 0):
        k, amp, rms = fit_power_law(d.t[win], dens)
        if k >= -1 or rms > max_fit_residual:
            raise TailEstimateUnreliable(f'tail density exponent {k:.3g} (fit residual {rms:.3g}) on [{T / 4:g}, {T:g}]')
        tail = math.copysign(amp * T ** (k + 1) / -(k + 1), dens[-1])
    terms = AcvTerms(A, B, C, D, tail, k, T)
    LOGGER.debug(f'acv form on leaf z={leaf.z}: {terms.to_dict()}')
    return terms


def acv_expansion_check(terms_u, terms_2u, tol=1e-10):
    # Q(1+2u) from the u-sums (4A - B - 4C - 4D) against the direct 2u evaluation
    pred = terms_u.Q(2.0)
    return CheckReport.residual('acv_expansion', 'stability with respect to asymptotically constant variations',
                                relative_residual(pred, terms_2u.value), tol, predicted=pred, direct=terms_2u.value)


def intrinsic_scalar_curvature(obj, metric, sigma):
    """
    Scalar curvature of the induced metric ds^2 + ψ(s)^2·g_{S^{n-2}}, ψ = ω^{1/2}·t, ds = ω^{1/2}·L·dσ:

        R_Σ = -2(n-2)·ψ_ss/ψ + (n-2)(n-3)·(1 - ψ_s^2)/ψ^2
    """
    curve, n = as_curve(obj), metric.n
    j = curve.jet(np.atleast_1d(np.asarray(sigma, dtype=float)))
    w, grad, hess = metric.factor(metric.embed(j.t, j.z))
    d1 = np.stack([j.dt, j.dz], axis=-1)
    d2 = np.stack([j.ddt, j.ddz], axis=-1)
    g2 = grad[:, [0, -1]]
    H2 = hess[:, [0, -1]][:, :, [0, -1]]
    Ws = np.sum(g2 * d1, axis=-1)
    Wss = np.einsum('...i,...ij,...j->...', d1, H2, d1) + np.sum(g2 * d2, axis=-1)
    r = np.sqrt(w)
    psi = r * j.t
    psi_sig = 0.5 * Ws / r * j.t + r * j.dt
    psi_sigsig = -0.25 * Ws ** 2 / r ** 3 * j.t + 0.5 * Wss / r * j.t + Ws / r * j.dt + r * j.ddt
    J = r * j.L
    J_sig = 0.5 * Ws / r * j.L + r * j.dL
    psi_s = psi_sig / J
    psi_ss = (psi_sigsig * J - psi_sig * J_sig) / J ** 3
    m = n - 2
    return -2 * m * psi_ss / psi + m * (m - 1) * (1 - psi_s ** 2) / psi ** 2


def curve_dimension(curve, n=None):
    # ambient dimension carried by graph and catenoid curves; plane and sphere curves need it passed in
    n = n or getattr(curve, 'n', None) or getattr(getattr(curve, 'profile', None), 'n', None)
    assert n is not None and n >= 3, f'ambient dimension needed for {curve.describe()}'
    return int(n)


def _interior(curve, samples):
    a, b = curve.interval
    return np.linspace(a + 0.05 * (b - a), b - 0.05 * (b - a), samples)


def gauss_trace_check(obj, metric, sigma=None, tol=1e-5, samples=64):
    """
    Traced Gauss equation 2·Ric(ν, ν) = R - R_Σ + H^2 - |h|^2 with every term from an independent path: Ric from
    the conformal Ricci tensor, R from scalar_curvature(), R_Σ from the warped-product formula, h from the
    conformal principal curvatures.
    """
    curve = as_curve(obj)
    sigma = _interior(curve, samples) if sigma is None else np.atleast_1d(np.asarray(sigma, dtype=float))
    d = surface_data(curve, metric, sigma)
    ric = ricci_normal(metric, d.x, d.nu)
    R = scalar_curvature(metric, d.x)
    Rs = intrinsic_scalar_curvature(curve, metric, sigma)
    lhs, rhs = 2 * ric, R - Rs + d.H ** 2 - d.h2
    scale = np.maximum(1.0, np.max(np.abs(np.stack([ric, R, Rs, d.H ** 2, d.h2])), axis=0))
    res = float(np.max(np.abs(lhs - rhs) / scale))
    return CheckReport.residual('gauss_trace', '2 Ric(nu, nu) = R - R_Sigma + H^2 - |h|^2', res, tol,
                                samples=len(sigma), curve=curve.describe())


def euclidean_ibp_check(obj, n=None, tol=1e-6, panels=96, order=16):
    """
    Euclidean identity for ū = ḡ(e_n, ν̄) and v̄ = -h̄(e_n^T, e_n^T) on a compact rotation hypersurface:

        ∫[H̄·v̄ + H̄^2·ū^2 + |∇ū|^2 - |h̄|^2·ū^2] dμ̄ = ∮ h̄(η, e_n^T)·ū dl̄ - ∮ ḡ(e_n^T, η)·H̄·ū dl̄

    with η the outward conormal. On a boundary circle at σ_e, η = ±γ'/L and e_n^T = (z'/L)·γ'/L, so the boundary
    integrand reduces to ±(z'/L)·ū·(κ̄_1 - H̄) times the circle length c·t^{n-2}.
    """
    curve = as_curve(obj)
    n = curve_dimension(curve, n)
    q = SurfaceQuadrature(curve, FlatMetric(n), panels, order)
    d, j = q.d, q.d.jet
    ub = j.dt / d.L
    dub = (j.ddt * d.L - j.dt * j.dL) / d.L ** 2
    vb = -d.k1_bar * (j.dz / d.L) ** 2
    lhs = q.integrate(d.H_bar * vb + d.H_bar ** 2 * ub ** 2 + dub ** 2 / d.L ** 2 - d.h2_bar * ub ** 2, euclid=True)

    c = unit_sphere_area(n - 1)
    a, b = curve.interval
    rhs = 0.0
    for s in curve.boundary_ends():
        e = surface_data(curve, FlatMetric(n), np.array([s]))
        je = e.jet
        sign = 1.0 if s == b else -1.0
        rhs += float(c * je.t[0] ** (n - 2) * sign * (je.dz[0] / e.L[0]) * (je.dt[0] / e.L[0])
                     * (e.k1_bar[0] - e.H_bar[0]))
    return CheckReport.residual('euclidean_ibp', 'Euclidean integration by parts with outward conormal boundary terms',
                                relative_residual(lhs, rhs), tol, lhs=lhs, rhs=rhs, curve=curve.describe())
