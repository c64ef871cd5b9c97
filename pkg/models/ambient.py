# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license
"""
Conformally flat ambient metrics g = ω·ḡ on a chart of R^n

Usage:
    from models.ambient import build_metric
    metric = build_metric({'family': 'schwarzschild', 'm': 2.0}, n=4)
    w, grad, hess = metric.factor([2.0, 0.0, 0.0, 0.0])
"""

import math

import numpy as np

from utils.general import LOGGER, ConfigError, LabError


class PointOutsideDomain(LabError):
    pass


class StepCutoff:
    """
    Smooth monotone step η with η = 0 on t <= lo and η = 1 on t >= hi, realized as the quintic smoothstep
    6s^5 - 15s^4 + 10s^3 in s = (t - lo)/(hi - lo). Twice continuously differentiable.
    """

    def __init__(self, lo=0.5, hi=1.0):
        assert hi > lo, f'StepCutoff needs lo < hi, got lo={lo}, hi={hi}'
        self.lo, self.hi = float(lo), float(hi)

    def __call__(self, t, nu=0):
        # nu-th derivative of η at t (nu <= 2)
        w = self.hi - self.lo
        s = np.clip((np.asarray(t, dtype=float) - self.lo) / w, 0.0, 1.0)
        if nu == 0:
            return s ** 3 * (10 - 15 * s + 6 * s ** 2)
        if nu == 1:
            return 30 * s ** 2 * (1 - s) ** 2 / w
        if nu == 2:
            return 60 * s * (1 - s) * (1 - 2 * s) / w ** 2
        raise ValueError(f'StepCutoff derivative order {nu} not supported')

    def antiderivative(self, t):
        # ∫_lo^t η, equal to t - (lo + hi)/2 for t >= hi
        w = self.hi - self.lo
        t = np.asarray(t, dtype=float)
        s = np.clip((t - self.lo) / w, 0.0, 1.0)
        inner = w * (s ** 6 - 3 * s ** 5 + 2.5 * s ** 4)
        return np.where(t > self.hi, inner + (t - self.hi), inner)

    def describe(self):
        return {'kind': 'quintic', 'lo': self.lo, 'hi': self.hi}


def fd_factor(value, x, h=None):
    """
    Central finite-difference value, gradient and Hessian of a scalar field.

    Arguments:
        value:  vectorized callable mapping (..., n) points to (...) values
        x:      (..., n) evaluation points
        h:      step, defaults to 1e-4·max(1, |x|) per point
    Returns:
        (w, grad, hess) with shapes (...), (..., n), (..., n, n)
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if h is None:
        h = 1e-4 * np.maximum(1.0, np.linalg.norm(x, axis=-1))
    h = np.broadcast_to(np.asarray(h, dtype=float), x.shape[:-1])[..., None]  # (..., 1)
    eye = np.eye(n)
    w = value(x)
    grad = np.empty(x.shape)
    hess = np.empty(x.shape + (n,))
    for i in range(n):
        ei = h * eye[i]
        wp, wm = value(x + ei), value(x - ei)
        grad[..., i] = (wp - wm) / (2 * h[..., 0])
        hess[..., i, i] = (wp - 2 * w + wm) / h[..., 0] ** 2
        for j in range(i):
            ej = h * eye[j]
            d = value(x + ei + ej) - value(x + ei - ej) - value(x - ei + ej) + value(x - ei - ej)
            hess[..., i, j] = hess[..., j, i] = d / (4 * h[..., 0] ** 2)
    return w, grad, hess


class AmbientMetric:
    """
    Base class of the conformally flat families g = ω·ḡ. Subclasses implement value() and factor(); every family
    is invariant under rotations fixing e_n, so the (t, z) half-plane carries all profile data.
    """
    family = 'base'
    tau = None  # asymptotic decay rate, metadata only
    scalar_flat = False  # R(g) vanishes identically

    def __init__(self, n):
        if not 3 <= int(n) <= 7:
            raise ConfigError(f'dimension must satisfy 3 <= n <= 7, got {n}')
        self.n = int(n)

    @property
    def inner_radius(self):
        # domain is |x| >= inner_radius
        return 0.0

    @property
    def horizon(self):
        # radius of a minimal horizon sphere bounding the domain, None if the chart is complete
        return None

    def params(self):
        return {}

    def describe(self):
        return {'family': self.family, 'n': self.n, 'tau': self.tau, **self.params()}

    def __repr__(self):
        args = ', '.join(f'{k}={v}' for k, v in self.params().items())
        return f'{self.family}(n={self.n}{", " if args else ""}{args})'

    def check_domain(self, x):
        x = np.asarray(x, dtype=float)
        if self.inner_radius > 0:
            rho = np.linalg.norm(x, axis=-1)
            if np.any(rho < self.inner_radius * (1 - 1e-12)):
                raise PointOutsideDomain(f'{self!r}: point with |x|={np.min(rho):.6g} inside {self.inner_radius:.6g}')
        return x

    def value(self, x):
        return self.factor(x)[0]

    def factor(self, x):
        raise NotImplementedError

    def embed(self, t, z):
        # point (t, 0, ..., 0, z) of the meridian half-plane
        t, z = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(z, dtype=float))
        x = np.zeros(t.shape + (self.n,))
        x[..., 0], x[..., -1] = t, z
        return x

    def log_gradient_rz(self, t, z):
        # (∂_t log ω, ∂_z log ω) at the meridian point (t, z)
        w, grad, _ = self.factor(self.embed(t, z))
        return grad[..., 0] / w, grad[..., -1] / w

    def value_rz(self, t, z):
        return self.value(self.embed(t, z))


class FlatMetric(AmbientMetric):
    family = 'flat'
    scalar_flat = True

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return np.ones(x.shape[:-1])

    def factor(self, x):
        x = np.asarray(x, dtype=float)
        return np.ones(x.shape[:-1]), np.zeros(x.shape), np.zeros(x.shape + (x.shape[-1],))

    def phi(self, rho):
        rho = np.asarray(rho, dtype=float)
        return np.ones_like(rho), np.zeros_like(rho), np.zeros_like(rho)

    def log_gradient_rz(self, t, z):
        return 0.0 * t, 0.0 * z


class RadialMetric(AmbientMetric):
    # ω(x) = W(|x|), subclasses implement radial(rho) -> (W, W', W'')

    def radial(self, rho):
        raise NotImplementedError

    def value(self, x):
        x = self.check_domain(x)
        return self.radial(np.linalg.norm(x, axis=-1))[0]

    def factor(self, x):
        x = self.check_domain(x)
        n = x.shape[-1]
        rho = np.linalg.norm(x, axis=-1)
        W, W1, W2 = self.radial(rho)
        pos = rho > 0
        safe = np.where(pos, rho, 1.0)
        xhat = x / safe[..., None] * pos[..., None]
        W1_rho = np.where(pos, W1 / safe, W2)  # W'/ρ -> W''(0) on the axis origin
        P = np.einsum('...i,...j->...ij', xhat, xhat)
        hess = W2[..., None, None] * P + W1_rho[..., None, None] * (np.eye(n) - P)
        return W, W1[..., None] * xhat, hess

    def log_gradient_rz(self, t, z):
        rho = math.hypot(t, z) if np.isscalar(t) and np.isscalar(z) else np.hypot(t, z)
        if np.any(np.asarray(rho) < self.inner_radius * (1 - 1e-12)):
            raise PointOutsideDomain(f'{self!r}: meridian point (t, z)=({t}, {z}) inside {self.inner_radius:.6g}')
        W, W1, _ = self.radial(rho)
        d = W1 / W / rho
        return d * t, d * z


class PhiMetric(RadialMetric):
    # ω = φ^{4/(n-2)} with radial φ, subclasses implement phi(rho) -> (φ, φ', φ'')

    def phi(self, rho):
        raise NotImplementedError

    def radial(self, rho):
        k = 4 / (self.n - 2)
        p0, p1, p2 = self.phi(rho)
        W = p0 ** k
        W1 = k * p0 ** (k - 1) * p1
        W2 = k * (k - 1) * p0 ** (k - 2) * p1 ** 2 + k * p0 ** (k - 1) * p2
        return W, W1, W2


class SchwarzschildMetric(PhiMetric):
    """Spatial Schwarzschild φ = 1 + (m/2)|x|^{2-n}; with horizon=True the chart stops at the horizon sphere."""
    family = 'schwarzschild'
    scalar_flat = True

    def __init__(self, n, m=2.0, horizon=True):
        super().__init__(n)
        if m <= 0:
            raise ConfigError(f'Schwarzschild mass must be positive, got m={m}')
        self.m, self.has_horizon = float(m), bool(horizon)
        self.tau = self.n - 2

    @property
    def horizon(self):
        return (self.m / 2) ** (1 / (self.n - 2))

    @property
    def inner_radius(self):
        return self.horizon if self.has_horizon else 0.0

    def params(self):
        return {'m': self.m, 'horizon': self.has_horizon}

    def phi(self, rho):
        c, n = self.m / 2, self.n
        return 1 + c * rho ** (2 - n), c * (2 - n) * rho ** (1 - n), c * (2 - n) * (1 - n) * rho ** (-n)


class HatLocalizedMetric(PhiMetric):
    """Localized metric φ = 1 + (1 + |x|^{2n-4})^{-1/2}, smooth on all of R^n and of mass 2."""
    family = 'hat'

    def __init__(self, n):
        super().__init__(n)
        self.tau = self.n - 2

    def phi(self, rho):
        k = 2 * self.n - 4
        u, u1, u2 = rho ** k, k * rho ** (k - 1), k * (k - 1) * rho ** (k - 2)
        p0 = 1 + (1 + u) ** -0.5
        p1 = -0.5 * (1 + u) ** -1.5 * u1
        p2 = 0.75 * (1 + u) ** -2.5 * u1 ** 2 - 0.5 * (1 + u) ** -1.5 * u2
        return p0, p1, p2


class PowerLawMetric(RadialMetric):
    """Test factor ω = 1 + A|x|^{-τ} on |x| >= r_min; its mass vanishes when τ > n - 2."""
    family = 'power'

    def __init__(self, n, amplitude=1.0, tau=None, r_min=0.5):
        super().__init__(n)
        self.amplitude = float(amplitude)
        self.tau = float(self.n - 1 if tau is None else tau)
        self.r_min = float(r_min)
        assert self.amplitude > -self.r_min ** self.tau, 'PowerLaw factor must stay positive on its domain'

    @property
    def inner_radius(self):
        return self.r_min

    def params(self):
        return {'amplitude': self.amplitude, 'r_min': self.r_min}

    def radial(self, rho):
        A, s = self.amplitude, self.tau
        return 1 + A * rho ** -s, -s * A * rho ** (-s - 1), s * (s + 1) * A * rho ** (-s - 2)


class SlabMetric(AmbientMetric):
    """
    Slab-interpolated factor ω = 1 - (1 - δ)·η(ξ)·(1 + δ|x|^2)^{-τ̃/2} with ξ = x_n / (1 + |x'|^2)^{1/2}.
    Exactly flat on {x_n <= 0}, since η vanishes for ξ <= 1/2.
    """
    family = 'slab'

    def __init__(self, n, delta=0.5, tau_tilde=None, cutoff=None):
        super().__init__(n)
        tau_tilde = 0.75 * (self.n - 2) if tau_tilde is None else float(tau_tilde)
        if not 0 < delta < 1:
            raise ConfigError(f'slab delta must lie in (0, 1), got {delta}')
        if not (self.n - 2) / 2 < tau_tilde < self.n - 2:
            raise ConfigError(f'slab tau_tilde must lie in ((n-2)/2, n-2), got {tau_tilde}')
        self.delta, self.tau_tilde = float(delta), tau_tilde
        self.cutoff = cutoff or StepCutoff()
        self.tau = tau_tilde

    def params(self):
        return {'delta': self.delta, 'tau_tilde': self.tau_tilde, 'cutoff': self.cutoff.describe()}

    def value(self, x):
        x = np.asarray(x, dtype=float)
        xp, xn = x[..., :-1], x[..., -1]
        xi = xn / np.sqrt(1 + np.sum(xp ** 2, axis=-1))
        kappa = (1 + self.delta * np.sum(x ** 2, axis=-1)) ** (-self.tau_tilde / 2)
        return 1 - (1 - self.delta) * self.cutoff(xi) * kappa

    def factor(self, x):
        x = np.asarray(x, dtype=float)
        n, d, a = x.shape[-1], self.delta, self.tau_tilde / 2
        xp, xn = x[..., :-1], x[..., -1]
        q = 1 + np.sum(xp ** 2, axis=-1)
        xi = xn * q ** -0.5

        # ξ derivatives
        dxi = np.zeros(x.shape)
        dxi[..., :-1] = -(xn * q ** -1.5)[..., None] * xp
        dxi[..., -1] = q ** -0.5
        hxi = np.zeros(x.shape + (n,))
        outer_p = np.einsum('...i,...j->...ij', xp, xp)
        hxi[..., :-1, :-1] = -xn[..., None, None] * (q[..., None, None] ** -1.5 * np.eye(n - 1)
                                                      - 3 * q[..., None, None] ** -2.5 * outer_p)
        hxi[..., :-1, -1] = hxi[..., -1, :-1] = -(q ** -1.5)[..., None] * xp

        # κ = (1 + δ|x|^2)^{-a} derivatives
        b = 1 + d * np.sum(x ** 2, axis=-1)
        kappa = b ** -a
        dkappa = (-2 * a * d * b ** (-a - 1))[..., None] * x
        hkappa = -2 * a * d * (b[..., None, None] ** (-a - 1) * np.eye(n)
                               - 2 * (a + 1) * d * b[..., None, None] ** (-a - 2) * np.einsum('...i,...j->...ij', x, x))

        # E = η(ξ), P = E·κ
        e0, e1, e2 = self.cutoff(xi), self.cutoff(xi, 1), self.cutoff(xi, 2)
        dE = e1[..., None] * dxi
        hE = e2[..., None, None] * np.einsum('...i,...j->...ij', dxi, dxi) + e1[..., None, None] * hxi
        P = e0 * kappa
        dP = kappa[..., None] * dE + e0[..., None] * dkappa
        hP = (kappa[..., None, None] * hE + np.einsum('...i,...j->...ij', dE, dkappa)
              + np.einsum('...i,...j->...ij', dkappa, dE) + e0[..., None, None] * hkappa)
        c = 1 - d
        return 1 - c * P, -c * dP, -c * hP


class ConformallyPerturbedMetric(AmbientMetric):
    """
    g_t = (1 + t·δ·v)^{4/(n-2)}·g_base for a numerically defined field v. Derivatives come from the central
    finite-difference path fd_factor().
    """
    family = 'perturbed'

    def __init__(self, base, field, t=0.5, delta=0.1):
        super().__init__(base.n)
        self.base, self.field, self.t, self.delta = base, field, float(t), float(delta)
        self.tau = base.tau

    @property
    def inner_radius(self):
        return self.base.inner_radius

    @property
    def horizon(self):
        return self.base.horizon

    def params(self):
        return {'base': self.base.describe(), 't': self.t, 'delta': self.delta}

    def psi(self, x):
        # 1 + t·δ·v
        return 1 + self.t * self.delta * self.field(x)

    def value(self, x):
        x = self.check_domain(x)
        return self.psi(x) ** (4 / (self.n - 2)) * self.base.value(x)

    def factor(self, x):
        x = self.check_domain(x)
        return fd_factor(self.value, x)


FAMILIES = {m.family: m for m in (FlatMetric, SchwarzschildMetric, HatLocalizedMetric, PowerLawMetric, SlabMetric)}


def build_metric(d, n):
    # Build an AmbientMetric from a config dict, i.e. {'family': 'slab', 'delta': 0.5, 'tau_tilde': 1.5}
    d = dict(d or {'family': 'flat'})
    family = d.pop('family', 'flat')
    if family not in FAMILIES:
        raise ConfigError(f"unknown metric family '{family}', available: {sorted(FAMILIES)}")
    if family == 'slab' and isinstance(d.get('cutoff'), dict):
        c = dict(d['cutoff'])
        c.pop('kind', None)
        d['cutoff'] = StepCutoff(**c)
    try:
        metric = FAMILIES[family](n, **d)
    except TypeError as e:
        raise ConfigError(f'bad parameters for metric family {family}: {e}') from e
    LOGGER.debug(f'built metric {metric!r}')
    return metric
