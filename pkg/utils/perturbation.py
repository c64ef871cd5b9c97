# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license
"""
Superharmonic bump fields, bump chains and the conformal perturbations g_t = (1 + t·δ·v)^{4/(n-2)}·g

A bump v(x) = ψ(d(x)) uses the straight-ray conformal distance d(x) = |x - q|·∫_0^1 ω(q + s(x-q))^{1/2} ds, which
equals dist_g only along rays through the conformal center; every sign property is verified on the sampled
d-balls themselves.
"""

import math

import numpy as np
from scipy.optimize import brentq

from models.ambient import ConformallyPerturbedMetric, FlatMetric, PointOutsideDomain, StepCutoff, fd_factor
from models.profile import DomainViolation
from utils.curvature import ricci_fd, scalar_curvature
from utils.general import LOGGER, LabError, colorstr, init_seeds
from utils.quadrature import gauss_legendre
from utils.reports import CheckReport

PREFIX = colorstr('perturb: ')


class SteepnessTooLow(LabError):
    pass


class OverlapViolation(LabError):
    pass


class SignCheckFailed(LabError):
    pass


class PositivityViolation(LabError):
    pass


def unit_directions(n, count=32, seed=0):
    # count deterministic unit vectors in R^n
    d = init_seeds(seed).standard_normal((count, n))
    return d / np.linalg.norm(d, axis=-1, keepdims=True)


class BumpField:
    """
    v(x) = ψ(d(x)) with

        ψ(s) = -(e^{λ(6r - S(s))} - 1)·(1 - η_out(s)) / (e^{λ(5r + w)} - 1)

    where S(s) = max(s, r - w) smoothed over [r - 2w, r] (constant core), η_out is a C^2 step on [6r - w, 6r] and
    w = join·r. ψ is C^2, min ψ = -1, ψ < 0 on s < 6r and ψ = 0 on s >= 6r. On r < s < 6r - w the flat
    Laplacian is e^{λ(6r-s)}·λ·(-λ + (n-1)/s)/N < 0 once λ > (n-1)/r.
    """

    def __init__(self, metric, q, r, lam, join=0.05):
        self.metric, self.n = metric, metric.n
        self.q = np.asarray(q, dtype=float)
        assert self.q.shape == (self.n,), f'bump center must be a point of R^{self.n}, got {self.q.shape}'
        self.r, self.lam, self.w = float(r), float(lam), float(join) * float(r)
        assert self.lam * 6 * self.r < 700, f'bump steepness λ·6r={self.lam * 6 * self.r:.4g} overflows'
        self.core = StepCutoff(self.r - 2 * self.w, self.r)
        self.outer = StepCutoff(6 * self.r - self.w, 6 * self.r)
        self.norm = math.expm1(self.lam * (5 * self.r + self.w))
        self.margins = None  # grid-check margins, set by make_bump()

    def __repr__(self):
        return f'BumpField(q={self.q.tolist()}, r={self.r}, lam={self.lam})'

    @property
    def radius(self):
        # support radius 6r
        return 6 * self.r

    def describe(self):
        return {'q': self.q.tolist(), 'r': self.r, 'lambda': self.lam, 'join': self.w / self.r}

    def profile(self, s):
        # (ψ, ψ', ψ'') at distances s
        s = np.asarray(s, dtype=float)
        S = (self.r - self.w) + self.core.antiderivative(s)
        S1, S2 = self.core(s), self.core(s, 1)
        e = np.exp(self.lam * (6 * self.r - S))
        E, E1, E2 = -(e - 1), self.lam * e, -self.lam ** 2 * e  # derivatives in S
        p0, p1, p2 = E, E1 * S1, E2 * S1 ** 2 + E1 * S2
        c0, c1, c2 = 1 - self.outer(s), -self.outer(s, 1), -self.outer(s, 2)
        return np.array([p0 * c0, p1 * c0 + p0 * c1, p2 * c0 + 2 * p1 * c1 + p0 * c2]) / self.norm

    def flat_laplacian(self, s):
        # ψ'' + (n-1)·ψ'/s
        _, p1, p2 = self.profile(s)
        with np.errstate(divide='ignore', invalid='ignore'):
            return np.where(s > 0, p2 + (self.n - 1) * p1 / s, self.n * p2)

    def dist(self, x):
        # straight-ray conformal distance from q
        x = np.asarray(x, dtype=float)
        xg, wg = gauss_legendre(16)
        s, w = 0.5 * (xg + 1), 0.5 * wg
        dx = x - self.q
        pts = self.q + s.reshape((-1,) + (1,) * (x.ndim - 1) + (1,)) * dx[None]
        root = np.sqrt(self.metric.value(pts))
        return np.linalg.norm(dx, axis=-1) * np.tensordot(w, root, axes=(0, 0))

    def __call__(self, x):
        d = self.dist(x)
        return np.where(d < self.radius, self.profile(np.minimum(d, self.radius))[0], 0.0)

    def laplacian(self, x, path='auto', h=None):
        """
        Δ_g v = ω^{-1}·[Δ̄v + ((n-2)/2)·∇̄log ω·∇̄v]. path='closed' uses the radial formula (flat metric only),
        'fd' central differences of v with step h (default 2e-4·r).
        """
        x = np.asarray(x, dtype=float)
        if path == 'auto':
            path = 'closed' if isinstance(self.metric, FlatMetric) else 'fd'
        if path == 'closed':
            assert isinstance(self.metric, FlatMetric), 'closed-form bump Laplacian needs the flat metric'
            d = np.linalg.norm(x - self.q, axis=-1)
            return np.where(d < self.radius, self.flat_laplacian(np.minimum(d, self.radius)), 0.0)
        _, gv, hv = fd_factor(self, x, 2e-4 * self.r if h is None else h)
        w, gw, _ = self.metric.factor(x)
        lap = np.trace(hv, axis1=-2, axis2=-1)
        return (lap + 0.5 * (self.n - 2) * np.sum(gw * gv, axis=-1) / w) / w

    def shell(self, targets, directions):
        """
        Points at straight-ray distances ≈ targets along each direction from q, (len(directions)·len(targets), n),
        found by inverting the cumulative conformal length along the ray.
        """
        targets = np.asarray(targets, dtype=float)
        top = float(np.max(targets))
        out = []
        for u in directions:
            ell = top * (1 + 1e-9) / math.sqrt(float(self.metric.value(self.q)))
            for _ in range(60):
                sig = np.linspace(0.0, ell, 2049)
                root = np.sqrt(self.metric.value(self.q + sig[:, None] * u))
                cum = np.concatenate([[0.0], np.cumsum(0.5 * (root[1:] + root[:-1]) * np.diff(sig))])
                if cum[-1] >= top:
                    break
                ell *= 1.5
            out.append(self.q + np.interp(targets, cum, sig)[:, None] * u)
        return np.concatenate(out)


def bump_grid_check(bump, radial=64, angular=32, seed=0):
    """
    Sign checks of one bump on a shell grid of `radial` distances in (0, 7r] times `angular` directions: Δ_g v < 0
    on r < d < 6r - w, v < 0 on d < 6r, v = 0 on d >= 6r. Returns the measured margins.
    """
    r, R = bump.r, bump.radius
    x = bump.shell(np.linspace(7 * r / radial, 7 * r, radial), unit_directions(bump.n, angular, seed))
    d, v = bump.dist(x), bump(x)
    ann = (d > r) & (d < R - bump.w)
    lap = bump.laplacian(x[ann])
    return {'max_laplacian': float(np.max(lap)) if lap.size else -np.inf,
            'max_inside': float(np.max(v[d < R])) if np.any(d < R) else -np.inf,
            'max_outside': float(np.max(np.abs(v[d >= R]))) if np.any(d >= R) else 0.0,
            'samples': int(d.size), 'annulus_samples': int(ann.sum())}


def make_bump(metric, q, r, lam, join=0.05, radial=64, angular=32, seed=0):
    """
    BumpField centered at q with radius r and steepness λ > 2(n-1)/r, grid-verified. Raises DomainViolation when
    the 7r shell leaves the metric's domain and SteepnessTooLow when λ is too small or the grid check finds
    Δ_g v >= 0 on the annulus.
    """
    n = metric.n
    if lam <= 2 * (n - 1) / r:
        raise SteepnessTooLow(f'bump steepness λ={lam:g} must exceed 2(n-1)/r={2 * (n - 1) / r:g}')
    bump = BumpField(metric, q, r, lam, join)
    try:
        m = bump_grid_check(bump, radial, angular, seed)
    except PointOutsideDomain as e:
        raise DomainViolation(f'{bump!r}: support shell leaves the domain, {e}') from e
    if not m['max_laplacian'] < 0:
        raise SteepnessTooLow(f'{bump!r}: Δ_g v reaches {m["max_laplacian"]:.3g} on the annulus r < d < 6r')
    assert m['max_inside'] < 0 and m['max_outside'] == 0, f'bump sign properties violated: {m}'
    LOGGER.debug(f'{PREFIX}{bump!r} margins {m}')
    bump.margins = m
    return bump


class BumpChain:
    # v = scale·Σ a_i·v_{r,q_i} on W = ∪ {d_i < 6r}; chain_coefficients() sets scale so that min v = -1
    def __init__(self, bumps, coefficients, scale=1.0):
        assert len(bumps) == len(coefficients) >= 1, 'one coefficient per bump'
        self.bumps, self.a = list(bumps), np.asarray(coefficients, dtype=float)
        self.metric, self.r = bumps[0].metric, bumps[0].r
        self.scale = float(scale)
        self.margins = None

    def __repr__(self):
        return f'BumpChain(N={len(self.bumps)}, r={self.r}, a={self.a.tolist()}, scale={self.scale:.4g})'

    @property
    def weights(self):
        # effective coefficients scale·a_i of the normalized field
        return self.scale * self.a

    def __call__(self, x):
        return sum(a * b(x) for a, b in zip(self.weights, self.bumps))

    def laplacian(self, x):
        return sum(a * b.laplacian(x) for a, b in zip(self.weights, self.bumps))

    def dists(self, x):
        return np.stack([b.dist(x) for b in self.bumps])

    def in_W(self, x):
        return np.any(self.dists(x) < 6 * self.r, axis=0)

    def describe(self):
        return {'centers': [b.q.tolist() for b in self.bumps], 'r': self.r, 'coefficients': self.a.tolist(),
                'scale': self.scale, 'lambda': [b.lam for b in self.bumps]}

    def grid(self, radial=64, angular=32, seed=0):
        # union of the bumps' shell grids out to 7r
        dirs = unit_directions(self.metric.n, angular, seed)
        return np.concatenate([b.shell(np.linspace(7 * self.r / radial, 7 * self.r, radial), dirs)
                               for b in self.bumps])

    def sign_margins(self, x):
        """
        v < 0 on W, v = 0 off W, and Δ_g v < 0 on {x ∈ W : d_N(x) > r} outside the outer join bands
        6r - w <= d_i < 6r of every bump.
        """
        D = self.dists(x)
        v = self(x)
        W = np.any(D < 6 * self.r, axis=0)
        band = np.any((D >= 6 * self.r - self.bumps[0].w) & (D < 6 * self.r), axis=0)
        sel = W & (D[-1] > self.r) & ~band
        lap = self.laplacian(x[sel])
        return {'max_laplacian': float(np.max(lap)) if lap.size else -np.inf,
                'max_inside': float(np.max(v[W])) if np.any(W) else -np.inf,
                'max_outside': float(np.max(np.abs(v[~W]))) if np.any(~W) else 0.0,
                'samples': int(len(x)), 'superharmonic_samples': int(sel.sum())}


def _ball(bump, radius, dirs, radial=16):
    return bump.shell(np.linspace(radius / radial, radius, radial), dirs)


def check_overlap(bumps, slack=0.02, angular=32, seed=0):
    # d-ball of radius r around q_i inside the 3r-5r annulus of q_{i+1}
    dirs = unit_directions(bumps[0].n, angular, seed)
    for i in range(len(bumps) - 1):
        r = bumps[i].r
        d = bumps[i + 1].dist(np.concatenate([bumps[i].q[None], _ball(bumps[i], r, dirs)]))
        if d.min() < 3 * r * (1 - slack) or d.max() > 5 * r * (1 + slack):
            raise OverlapViolation(f'r-ball of q_{i + 1} spans distances [{d.min():.4g}, {d.max():.4g}] from '
                                   f'q_{i + 2}, outside [3r, 5r] = [{3 * r:g}, {5 * r:g}]')


def chain_coefficients(metric, bumps, margin=1.1, slack=0.02, radial=64, angular=32, seed=0):
    """
    Coefficients a_1 = 1 and a_i = 1 + margin·(sup of Δv_{i-1} over its r-ball)/(smallest |Δv_i| on the 3r-5r
    annulus)·a_{i-1}, then the scale making min v = -1 on the grid and a sign check of the normalized field. Raises
    OverlapViolation and SignCheckFailed.
    """
    assert all(b.metric is metric for b in bumps), 'bumps must share the chain metric'
    rs = {b.r for b in bumps}
    assert len(rs) == 1, f'bumps must share one radius, got {sorted(rs)}'
    check_overlap(bumps, slack, angular, seed)
    dirs = unit_directions(metric.n, angular, seed)
    a = [1.0]
    for prev, cur in zip(bumps[:-1], bumps[1:]):
        r = cur.r
        sup = float(np.max(prev.laplacian(_ball(prev, r, dirs, radial))))
        ring = cur.shell(np.linspace(3 * r, 5 * r, radial // 2), dirs)
        lap = cur.laplacian(ring)
        assert np.all(lap < 0), f'{cur!r}: Δv not negative on its 3r-5r annulus'
        a.append(1 + margin * max(sup, 0.0) / float(np.min(-lap)) * a[-1])
    chain = BumpChain(bumps, a)
    x = chain.grid(radial, angular, seed)
    chain.scale = 1 / float(np.max(np.abs(chain(x))))
    m = chain.sign_margins(x)
    if not (m['max_laplacian'] < 0 and m['max_inside'] < 0 and m['max_outside'] == 0):
        raise SignCheckFailed(f'{chain!r}: combined field sign check failed, {m}')
    LOGGER.info(f'{PREFIX}chain coefficients {np.round(a, 6).tolist()}, scale {chain.scale:.4g}, '
                f'max Δv {m["max_laplacian"]:.3g}')
    chain.margins = m
    return chain


def ray_distance(metric, a, b):
    # straight-ray conformal length of the segment [a, b]
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    xg, wg = gauss_legendre(16)
    s = 0.5 * (xg + 1)
    root = np.sqrt(metric.value(a + s[:, None] * (b - a)))
    return float(np.linalg.norm(b - a) * np.dot(0.5 * wg, root))


def chain_centers(metric, q1, direction, count, r, spacing=4.0):
    """
    count centers along q1 + s·direction, each at straight-ray distance spacing·r beyond the previous one, so the
    r-ball of q_i sits in the middle of the 3r-5r annulus of q_{i+1}.
    """
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    centers = [np.asarray(q1, dtype=float)]
    for _ in range(count - 1):
        q = centers[-1]
        target = spacing * r
        hi = target
        while ray_distance(metric, q, q + hi * u) < target:
            hi *= 2
        s = brentq(lambda s: ray_distance(metric, q, q + s * u) - target, 1e-12, hi, xtol=1e-14)
        centers.append(q + s * u)
    return centers


def build_chain(metric, centers, r, lam, **kw):
    # bumps at the given centers followed by chain_coefficients()
    return chain_coefficients(metric, [make_bump(metric, q, r, lam) for q in centers], **kw)


def perturbed_scalar_curvature(metric, chain, t, delta, x):
    """
    R(g_t) = φ^{-(n+2)/(n-2)}·(-(4(n-1)/(n-2))·t·δ·Δ_g v + R(g)·φ) with φ = 1 + t·δ·v. R(g) = 0 is taken
    exactly on scalar-flat backgrounds, where the computed value is rounding noise above the early bumps' Δ_g v.
    """
    n = metric.n
    phi = 1 + t * delta * chain(x)
    R = 0.0 if metric.scalar_flat else scalar_curvature(metric, x)
    return phi ** (-(n + 2) / (n - 2)) * (-4 * (n - 1) / (n - 2) * t * delta * chain.laplacian(x) + R * phi)


def verify_perturbed_metric(metric, chain, t=0.5, delta=0.1, radial=64, angular=32, seed=0, linear_tol=0.05):
    """
    Grid checks of g_t = (1 + t·δ·v)^{4/(n-2)}·g: g_t = g off W, g_t < g in W, R(g_t) > 0 on {x ∈ W : d_N > r}
    outside the outer join bands, and max|ω_t/ω - 1| linear in t. Raises PositivityViolation when 1 + t·δ·v
    reaches 0.
    """
    assert 0 < t < 1, f't must lie in (0, 1), got {t}'
    x = chain.grid(radial, angular, seed)
    v = chain(x)
    if np.min(1 + t * delta * v) <= 0:
        raise PositivityViolation(f'1 + t·δ·v reaches {np.min(1 + t * delta * v):.4g} at t={t}, δ={delta}')
    gt = ConformallyPerturbedMetric(metric, chain, t, delta)
    D = chain.dists(x)
    W = np.any(D < 6 * chain.r, axis=0)
    ratio = gt.value(x) / metric.value(x)

    off = float(np.max(np.abs(ratio[~W] - 1))) if np.any(~W) else 0.0
    inside = float(np.max(ratio[W])) if np.any(W) else 0.0
    band = np.any((D >= 6 * chain.r - chain.bumps[0].w) & (D < 6 * chain.r), axis=0)
    sel = W & (D[-1] > chain.r) & ~band
    R = perturbed_scalar_curvature(metric, chain, t, delta, x[sel])
    half = ConformallyPerturbedMetric(metric, chain, t / 2, delta).value(x[W]) / metric.value(x[W])
    lin = float(np.max(np.abs(ratio[W] - 1)) / np.max(np.abs(half - 1))) / 2
    anchor = 'conformal perturbation by a superharmonic bump chain'
    return [CheckReport.residual('perturbed_equal_off_W', anchor, off, 1e-15, samples=int((~W).sum())),
            CheckReport.margin('perturbed_smaller_in_W', anchor, 1 - inside, 0.0, max_ratio=inside),
            CheckReport.margin('perturbed_positive_scalar', anchor, float(np.min(R)) if R.size else 0.0, 0.0,
                               samples=int(sel.sum()), t=t, delta=delta),
            CheckReport.residual('perturbed_linear_in_t', anchor, abs(lin - 1), linear_tol, ratio=2 * lin)]


def curvature_oracle_check(metric, chain, t=0.5, delta=0.1, samples=100, seed=0, tol=1e-4, resolvable=1e-6):
    """
    R(g_t) from the conformal law against the finite-difference Christoffel oracle at random samples with
    r < d_i < 2r of random bumps, where |R(g_t)| is well above the difference noise. Bumps whose weight in the
    normalized field is below `resolvable` times the largest one are skipped.
    """
    rng = init_seeds(seed)
    gt = ConformallyPerturbedMetric(metric, chain, t, delta)
    wts = np.abs(chain.weights)
    idx = np.flatnonzero(wts >= resolvable * wts.max())
    x = np.empty((samples, metric.n))
    for k in range(samples):
        b = chain.bumps[idx[rng.integers(len(idx))]]
        u = rng.standard_normal(metric.n)
        x[k] = b.shell([chain.r * (1 + rng.uniform(0.05, 1.0))], [u / np.linalg.norm(u)])[0]
    law = perturbed_scalar_curvature(metric, chain, t, delta, x)
    h = 2e-4 * chain.r
    fd = np.trace(ricci_fd(gt, x, h), axis1=-2, axis2=-1) / gt.value(x)
    res = float(np.max(np.abs(law - fd) / np.maximum(np.abs(law), 1e-12)))
    return CheckReport.residual('perturbed_scalar_oracle', 'conformal transformation of scalar curvature', res, tol,
                                samples=samples, bumps=len(idx), max_R=float(np.max(np.abs(law))))
