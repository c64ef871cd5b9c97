# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license
"""
Curvature and mass of conformally flat metrics g = ω·ḡ, with u = ½·log(ω):

    Ric = -(n-2)·(∇²u - du⊗du) - (Δu + (n-2)|∇u|²)·ḡ
    R   = ω^{-1}·(-2(n-1)·Δu - (n-2)(n-1)·|∇u|²)
    H   = ω^{-1/2}·(H̄ + (n-1)·∂_ν̄ u)

A finite-difference Christoffel oracle (christoffel_fd, ricci_fd) rebuilds the same tensors from values of ω alone.
"""

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from models.ambient import RadialMetric
from utils.general import LOGGER, LabError, init_seeds, unit_ball_volume
from utils.quadrature import richardson_limit, sphere_quadrature
from utils.reports import CheckReport


class NonUnitNormal(LabError):
    pass


class QuadratureDivergence(LabError):
    pass


def log_factor_derivatives(metric, x):
    # ω, ∇u and ∇²u for u = ½·log(ω)
    w, g, H = metric.factor(x)
    du = g / (2 * w[..., None])
    ddu = H / (2 * w[..., None, None]) - np.einsum('...i,...j->...ij', g, g) / (2 * w[..., None, None] ** 2)
    return w, du, ddu


def ricci_tensor(metric, x):
    # coordinate components Ric_ij of g = ω·ḡ, shape (..., n, n)
    n = metric.n
    _, du, ddu = log_factor_derivatives(metric, x)
    lap = np.trace(ddu, axis1=-2, axis2=-1)
    g2 = np.sum(du ** 2, axis=-1)
    return (-(n - 2) * (ddu - np.einsum('...i,...j->...ij', du, du))
            - (lap + (n - 2) * g2)[..., None, None] * np.eye(n))


def scalar_curvature(metric, x, path='auto'):
    """
    Scalar curvature of g = ω·ḡ at points x (..., n).

    path='phi' uses R = -(4(n-1)/(n-2))·φ^{-(n+2)/(n-2)}·Δ̄φ for radial φ families, 'log' the u-form above,
    'fd' the finite-difference Christoffel oracle, 'auto' the first analytic path available.
    """
    n = metric.n
    x = metric.check_domain(x)
    if path == 'auto':
        path = 'phi' if hasattr(metric, 'phi') else 'log'
    if path == 'phi':
        rho = np.linalg.norm(x, axis=-1)
        p0, p1, p2 = metric.phi(rho)
        safe = np.where(rho > 0, rho, 1.0)
        lap = np.where(rho > 0, p2 + (n - 1) * p1 / safe, n * p2)  # radial Laplacian, n·φ''(0) at the origin
        return -4 * (n - 1) / (n - 2) * p0 ** (-(n + 2) / (n - 2)) * lap
    if path == 'log':
        w, du, ddu = log_factor_derivatives(metric, x)
        lap = np.trace(ddu, axis1=-2, axis2=-1)
        return (-2 * (n - 1) * lap - (n - 2) * (n - 1) * np.sum(du ** 2, axis=-1)) / w
    if path == 'fd':
        return np.trace(ricci_fd(metric, x), axis1=-2, axis2=-1) / metric.value(x)
    raise ValueError(f'unknown scalar curvature path {path}')


def check_unit_normal(metric, x, nu, tol=1e-10):
    # nu must have g-length 1 at x
    norm2 = metric.value(x) * np.sum(np.asarray(nu, dtype=float) ** 2, axis=-1)
    if np.any(np.abs(norm2 - 1) > tol):
        raise NonUnitNormal(f'g(ν, ν) deviates from 1 by {np.max(np.abs(norm2 - 1)):.3g}')


def ricci_normal(metric, x, unit_normal, path='analytic'):
    # Ric(ν, ν) for a g-unit vector ν at x
    x = metric.check_domain(x)
    nu = np.asarray(unit_normal, dtype=float)
    check_unit_normal(metric, x, nu)
    ric = ricci_tensor(metric, x) if path == 'analytic' else ricci_fd(metric, x)
    return np.einsum('...i,...ij,...j->...', nu, ric, nu)


def mean_curvature_from_euclidean(metric, x, H_bar, nu_bar):
    """
    Mean curvature in g = ω·ḡ of a hypersurface with Euclidean mean curvature H̄ = div ν̄ and unit normal ν̄.
    For ω = φ^{4/(n-2)} this is φ^{2/(n-2)}·H = H̄ + (2(n-1)/(n-2))·φ^{-1}·D̄_ν̄ φ.
    """
    x = metric.check_domain(x)
    nu_bar = np.asarray(nu_bar, dtype=float)
    assert np.all(np.abs(np.sum(nu_bar ** 2, axis=-1) - 1) < 1e-10), 'nu_bar must be Euclidean-unit'
    w, grad, _ = metric.factor(x)
    dnu = np.sum(grad * nu_bar, axis=-1) / (2 * w)  # ∂_ν̄ u
    return (H_bar + (metric.n - 1) * dnu) / np.sqrt(w)


def fd_step(x):
    # central difference step 1e-4·max(1, |x|)
    return 1e-4 * np.maximum(1.0, np.linalg.norm(x, axis=-1))


def christoffel_fd(metric, x, h=None):
    """
    Christoffel symbols Γ^k_ij (..., k, i, j) from central differences of the metric components g_ij = ω·δ_ij.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    h = fd_step(x) if h is None else np.broadcast_to(h, x.shape[:-1])
    eye = np.eye(n)
    w = metric.value(x)
    dg = np.empty(x.shape)  # ∂_l ω, g_ij = ω δ_ij so ∂_l g_ij = ∂_l ω δ_ij
    for l in range(n):
        e = h[..., None] * eye[l]
        dg[..., l] = (metric.value(x + e) - metric.value(x - e)) / (2 * h)
    # Γ^k_ij = ½ g^{kl} (∂_i g_jl + ∂_j g_il - ∂_l g_ij)
    d = np.einsum('...i,jk->...kij', dg, eye)  # ∂_i g_jk
    gam = d + np.swapaxes(d, -1, -2) - np.einsum('...k,ij->...kij', dg, eye)
    return gam / (2 * w[..., None, None, None])


def ricci_fd(metric, x, h=None):
    """
    Ricci tensor R_ij = ∂_k Γ^k_ij - ∂_j Γ^k_ik + Γ^k_kl Γ^l_ij - Γ^k_jl Γ^l_ik with every derivative a central
    difference of christoffel_fd().
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    h = fd_step(x) if h is None else np.broadcast_to(h, x.shape[:-1])
    eye = np.eye(n)
    gam = christoffel_fd(metric, x, h)
    dgam = np.empty(x.shape + (n, n, n))  # (..., m, k, i, j) = ∂_m Γ^k_ij
    for m in range(n):
        e = h[..., None] * eye[m]
        dgam[..., m, :, :, :] = (christoffel_fd(metric, x + e, h) - christoffel_fd(metric, x - e, h)) / (
            2 * h[..., None, None, None])
    term1 = np.einsum('...kkij->...ij', dgam)
    term2 = np.einsum('...jkik->...ij', dgam)
    term3 = np.einsum('...kkl,...lij->...ij', gam, gam)
    term4 = np.einsum('...kjl,...lik->...ij', gam, gam)
    return term1 - term2 + term3 - term4


def mass_flux(integrand, dim, radius, order=32):
    """
    (1/(2(dim-1)·dim·ω_dim))·λ^{-1}·∮_{S^{dim-1}_λ} integrand dμ̄ by product Gauss-Legendre quadrature, where
    integrand(points) returns Σ_ij x^i [∂_j g_ij - ∂_i g_jj] at (N, dim) points.
    """
    theta, w = sphere_quadrature(dim, order)
    flux = radius ** (dim - 1) * np.sum(w * integrand(radius * theta))
    return flux / (2 * (dim - 1) * dim * unit_ball_volume(dim) * radius)


@dataclass
class MassEstimate:
    # Flux integrals over a growing radius schedule with extrapolated limit
    radii: np.ndarray
    values: np.ndarray
    limit: float
    rate: float
    error: float
    label: str = 'adm'
    closed_form: np.ndarray = field(default=None, repr=False)

    def consistent_with(self, target, rtol=0.0, atol=0.0):
        return abs(self.limit - target) <= max(self.error, rtol * abs(target), atol)

    def to_frame(self):
        d = {'lambda': self.radii, 'flux': self.values}
        if self.closed_form is not None:
            d['closed_form'] = self.closed_form
        return pd.DataFrame(d)

    def summary(self):
        return {'label': self.label, 'limit': self.limit, 'rate': self.rate, 'error': self.error,
                'radii': [float(r) for r in self.radii], 'values': [float(v) for v in self.values]}


def check_flux_sequence(values, rtol=1e-6, atol=1e-12):
    # consecutive differences must shrink along the schedule
    d = np.abs(np.diff(values))
    for k in range(1, len(d)):
        if d[k] > d[k - 1] * (1 + rtol) + atol:
            raise QuadratureDivergence(f'flux sequence difference grew from {d[k - 1]:.3g} to {d[k]:.3g}')


def adm_mass(metric, radius_schedule, order=32, label='adm'):
    """
    ADM mass of g = ω·ḡ. For g_ij = ω δ_ij the flux integrand Σ_ij x^i [∂_j g_ij - ∂_i g_jj] reduces to
    (1 - n)·x·∇ω; each radius is integrated by the product sphere rule and the limit is Richardson-extrapolated.
    """
    n = metric.n
    radii = np.asarray(radius_schedule, dtype=float)
    assert np.all(np.diff(radii) > 0), 'radius schedule must increase'

    def integrand(x):
        _, grad, _ = metric.factor(x)
        return (1 - n) * np.sum(x * grad, axis=-1)

    values = np.array([mass_flux(integrand, n, lam, order) for lam in radii])
    check_flux_sequence(values)
    limit, rate, error = richardson_limit(radii, values)
    closed = None
    if isinstance(metric, RadialMetric):
        closed = -0.5 * radii ** (n - 1) * metric.radial(radii)[1]
    LOGGER.debug(f'{label} mass of {metric!r}: {limit:.10g} (rate {rate:.3g}, error {error:.3g})')
    return MassEstimate(radii, values, float(limit), float(rate), float(error), label, closed)


def sample_points(metric, count=100, seed=0, r_max=20.0):
    # random points with |x| uniform in [max(1.5·ρ_in, 0.5), r_max] and uniform directions
    rng = init_seeds(seed)
    lo = max(1.5 * metric.inner_radius, 0.5)
    u = rng.standard_normal((count, metric.n))
    u /= np.linalg.norm(u, axis=-1, keepdims=True)
    return rng.uniform(lo, r_max, count)[:, None] * u


def vanishing_scalar_check(metric, samples=100, seed=0, tol=1e-8):
    # max |R| at random domain points, for families with harmonic φ
    x = sample_points(metric, samples, seed)
    R = np.abs(scalar_curvature(metric, x))
    return CheckReport.residual('scalar_curvature_vanishes', 'R = 0 for the spatial Schwarzschild metric',
                                float(np.max(R)), tol, samples=samples, metric=repr(metric))


def curvature_paths_check(metric, samples=20, seed=0, tol=1e-5):
    # analytic scalar curvature against the finite-difference Christoffel oracle, relative to max(1, |R|)
    x = sample_points(metric, samples, seed)
    a, b = scalar_curvature(metric, x), scalar_curvature(metric, x, path='fd')
    res = float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a))))
    return CheckReport.residual('scalar_curvature_oracle', 'conformal transformation of scalar curvature', res, tol,
                                samples=samples, metric=repr(metric))


def adm_mass_check(est, target, rtol=0.01):
    # extrapolated mass within rtol of target
    res = abs(est.limit - target) / max(abs(target), 1e-300)
    return CheckReport.residual(f'{est.label}_mass', 'ADM mass of the spatial Schwarzschild metric equals m', res, rtol,
                                limit=est.limit, error=est.error, rate=est.rate, target=target,
                                table=est.to_frame().to_dict('list'))
