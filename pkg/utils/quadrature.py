# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license
"""
Quadrature and extrapolation utils
"""

from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import roots_legendre

from utils.general import LabError


class InsufficientRange(LabError):
    pass


@lru_cache(maxsize=32)
def gauss_legendre(order=32):
    # Gauss-Legendre nodes and weights on [-1, 1]
    x, w = roots_legendre(order)
    x.flags.writeable, w.flags.writeable = False, False
    return x, w


def panel_edges(a, b, panels=64, kind='uniform', breakpoints=(), ratio=None):
    """Panel edges covering [a, b], optionally graded geometrically toward a and split at breakpoints.

    >>> panel_edges(0.0, 1.0, 4).tolist()
    [0.0, 0.25, 0.5, 0.75, 1.0]
    """
    a, b = float(a), float(b)
    assert b > a, f'empty interval [{a}, {b}]'
    if kind == 'uniform':
        edges = np.linspace(a, b, panels + 1)
    elif kind == 'geometric':  # first panel (b-a)·(q-1)/(q^panels-1)
        q = ratio or (1 + 8.0 / panels)
        h = (b - a) * (q - 1) / (q ** panels - 1)
        edges = a + h * (q ** np.arange(panels + 1) - 1) / (q - 1)
        edges[-1] = b
    else:
        raise ValueError(f'unknown panel kind {kind}')
    inner = [p for p in breakpoints if a < p < b]
    return np.unique(np.concatenate([edges, inner]))


def composite_gauss(a, b, panels=64, order=16, kind='uniform', breakpoints=(), ratio=None):
    """Composite Gauss-Legendre nodes and weights on [a, b].

    >>> x, w = composite_gauss(0.0, 1.0, panels=2, order=4)
    >>> bool(abs(np.sum(w * x ** 2) - 1 / 3) < 1e-15)
    True
    """
    edges = panel_edges(a, b, panels, kind, breakpoints, ratio)
    xg, wg = gauss_legendre(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    x = 0.5 * (hi - lo) * xg + 0.5 * (hi + lo)
    w = 0.5 * (hi - lo) * wg
    return x.ravel(), w.ravel()


@lru_cache(maxsize=16)
def sphere_quadrature(n, order=32, max_nodes=2_000_000):
    """
    Product Gauss-Legendre rule on the unit sphere S^{n-1} in hyperspherical angles θ_1..θ_{n-2} ∈ [0, π],
    φ ∈ [0, 2π], with Jacobian Π sin^{n-1-i}(θ_i). The per-axis order is reduced when order^{n-1} would exceed
    max_nodes. Returns (directions (N, n), weights (N,)); the weights sum to n·ω_n.
    """
    order = int(min(order, max(4, np.floor(max_nodes ** (1 / (n - 1))))))
    xg, wg = gauss_legendre(order)
    theta, wt = 0.5 * np.pi * (xg + 1), 0.5 * np.pi * wg
    phi, wp = np.pi * (xg + 1), np.pi * wg
    grids = np.meshgrid(*([theta] * (n - 2) + [phi]), indexing='ij')
    wgrids = np.meshgrid(*([wt] * (n - 2) + [wp]), indexing='ij')
    angles = [g.ravel() for g in grids]
    w = np.prod([g.ravel() for g in wgrids], axis=0)
    x = np.empty((w.size, n))
    s = np.ones_like(w)  # running product of sines
    for i, th in enumerate(angles[:-1]):
        x[:, i] = s * np.cos(th)
        w = w * np.sin(th) ** (n - 2 - i)
        s = s * np.sin(th)
    x[:, n - 2], x[:, n - 1] = s * np.cos(angles[-1]), s * np.sin(angles[-1])
    x.flags.writeable, w.flags.writeable = False, False
    return x, w


def richardson_limit(x, y):
    """
    Fit y = y_inf + c·x^{-p} through the last three samples and return (y_inf, p, error) where error is the
    last-two-term difference |y[-1] - y[-2]|. Non-monotone tails fall back to y_inf = y[-1] with p = nan.

    >>> lam = np.array([8.0, 16.0, 32.0])
    >>> y_inf, p, err = richardson_limit(lam, 2 + 3 * lam ** -2.0)
    >>> bool(abs(y_inf - 2) < 1e-12 and abs(p - 2) < 1e-8)
    True
    """
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if len(x) < 3:
        raise InsufficientRange(f'Richardson extrapolation needs 3 samples, got {len(x)}')
    (x1, x2, x3), (y1, y2, y3) = x[-3:], y[-3:]
    err = abs(y3 - y2)
    d12, d23 = y1 - y2, y2 - y3
    if d23 == 0 or d12 == 0 or d12 / d23 <= 0:
        return y3, float('nan'), err
    ratio = d12 / d23

    def F(p):
        return (x1 ** -p - x2 ** -p) / (x2 ** -p - x3 ** -p) - ratio

    try:
        p = brentq(F, 1e-6, 60.0, xtol=1e-14)
    except ValueError:
        return y3, float('nan'), err
    c = d23 / (x2 ** -p - x3 ** -p)
    return y3 - c * x3 ** -p, p, err


def fit_power_law(x, y):
    """
    Least-squares fit of log|y| = log(A) + k·log(x). Returns (k, A, rms residual in log space).

    >>> k, A, res = fit_power_law([1.0, 2.0, 4.0], [3.0, 0.75, 0.1875])
    >>> round(k, 12), round(A, 12), res < 1e-12
    (-2.0, 3.0, True)
    """
    x, y = np.asarray(x, dtype=float), np.abs(np.asarray(y, dtype=float))
    keep = (x > 0) & (y > 0)
    if keep.sum() < 2:
        raise InsufficientRange(f'power-law fit needs 2 positive samples, got {int(keep.sum())}')
    lx, ly = np.log(x[keep]), np.log(y[keep])
    (k, b), res = np.polyfit(lx, ly, 1, full=True)[:2]
    rms = float(np.sqrt(res[0] / keep.sum())) if len(res) else 0.0
    return float(k), float(np.exp(b)), rms
