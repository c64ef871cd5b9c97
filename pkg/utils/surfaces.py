# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license
"""
Meridian curves σ -> (t(σ), z(σ)) of rotation hypersurfaces {(t·θ, z) : θ ∈ S^{n-2}} and axisymmetric test functions

The unit normal of a curve is N = (-z', t')/L with L = (t'^2 + z'^2)^{1/2}; for graphs z = f(t) this is the upward
normal (-f', 1)/(1+f'^2)^{1/2}. With H̄ = div ν̄ the Euclidean principal curvatures are

    κ̄_1 = (t''·z' - z''·t')/L^3   (meridian direction)
    κ̄_2 = -z'/(t·L)               (n-2 rotational directions)
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline, PPoly
from scipy.special import comb

from models.profile import RadialProfile, flat_region_profile
from utils.general import LabError


class InvalidTestFunction(LabError):
    pass


@dataclass
class CurveJet:
    # position and first two σ-derivatives of a meridian curve
    sigma: np.ndarray
    t: np.ndarray
    z: np.ndarray
    dt: np.ndarray
    dz: np.ndarray
    ddt: np.ndarray
    ddz: np.ndarray

    @property
    def L(self):
        return np.hypot(self.dt, self.dz)

    @property
    def normal(self):
        L = self.L
        return -self.dz / L, self.dt / L

    @property
    def dL(self):
        return (self.dt * self.ddt + self.dz * self.ddz) / self.L

    def kappa_bar(self):
        L = self.L
        k1 = (self.ddt * self.dz - self.ddz * self.dt) / L ** 3
        with np.errstate(divide='ignore', invalid='ignore'):
            k2 = np.where(self.t > 0, -self.dz / (self.t * L), k1)  # umbilic on the axis
        return k1, k2


class MeridianCurve:
    """
    Base class. Subclasses define interval (a, b), axis_ends (whether σ = a, σ = b lie on the axis t = 0) and jet().
    """
    kind = 'curve'
    interval = (0.0, 1.0)
    axis_ends = (False, False)
    scale = 1.0  # length scale of the curve's features near σ = a, used to grade quadrature panels

    def jet(self, sigma):
        raise NotImplementedError

    def point(self, sigma):
        j = self.jet(sigma)
        return j.t, j.z

    def boundary_ends(self):
        # parameter values of the boundary circles (ends off the axis)
        return [s for s, on_axis in zip(self.interval, self.axis_ends) if not on_axis]

    def describe(self):
        return {'kind': self.kind, 'interval': list(self.interval)}


class GraphCurve(MeridianCurve):
    # graph z = f(t) of a solved profile, parameter σ = t
    kind = 'graph'

    def __init__(self, profile, t_range=None):
        self.profile = profile
        a, b = t_range if t_range is not None else (0.0, profile.r if profile.r is not None else profile.t_end)
        assert 0 <= a < b, f'bad graph range ({a}, {b})'
        self.interval = (float(a), float(b))
        self.axis_ends = (a == 0, False)
        self.scale = max(1.0, abs(profile.f0 or 1.0))

    def jet(self, sigma):
        t = np.atleast_1d(np.asarray(sigma, dtype=float))
        f, p = self.profile.state(t)
        one = np.ones_like(t)
        return CurveJet(t, t, f, one, p, 0 * one, self.profile.dslope(t))

    def describe(self):
        return {'kind': self.kind, 'interval': list(self.interval), 'profile': repr(self.profile)}


class PlaneCurve(MeridianCurve):
    # horizontal hyperplane z ≡ height over t ∈ [a, b]
    kind = 'plane'

    def __init__(self, height=0.0, radius=10.0, inner=0.0):
        self.height = float(height)
        self.interval = (float(inner), float(radius))
        self.axis_ends = (inner == 0, False)

    def jet(self, sigma):
        t = np.atleast_1d(np.asarray(sigma, dtype=float))
        zero, one = np.zeros_like(t), np.ones_like(t)
        return CurveJet(t, t, self.height + zero, one, zero, zero, zero)


class SphereCurve(MeridianCurve):
    """
    Round sphere |x - c·e_n| = ρ through the polar angle θ ∈ [0, θ_max], outward normal. θ_max = π is the full
    sphere, θ_max < π a spherical cap with boundary circle at θ_max.
    """
    kind = 'sphere'

    def __init__(self, rho=1.0, center=0.0, theta_max=math.pi):
        assert rho > 0 and 0 < theta_max <= math.pi, f'bad sphere rho={rho}, theta_max={theta_max}'
        self.rho, self.center, self.theta_max = float(rho), float(center), float(theta_max)
        self.interval = (0.0, self.theta_max)
        self.axis_ends = (True, theta_max == math.pi)
        self.scale = 0.1

    def jet(self, sigma):
        th = np.atleast_1d(np.asarray(sigma, dtype=float))
        s, c, r = np.sin(th), np.cos(th), self.rho
        return CurveJet(th, r * s, self.center + r * c, r * c, -r * s, -r * s, -r * c)

    def describe(self):
        return {'kind': 'cap' if self.theta_max < math.pi else self.kind, 'rho': self.rho, 'center': self.center,
                'theta_max': self.theta_max}


class CatenoidCurve(MeridianCurve):
    """
    Two-sheeted Euclidean catenoid with neck radius t_n at height z_n, the flat solution of t^{n-2}·p/(1+p^2)^{1/2}
    = ±t_n^{n-2}. Parametrized by σ ∈ [-σ_max, σ_max] with t = t_n·(1 + σ^2); the lower sheet is σ < 0 and the
    curve is cut at t = t_max. With k = n-2, a = t_n^k and D(σ) = a^2·((1+σ^2)^{2k} - 1)/σ^2 (a polynomial in σ^2),

        z'(σ) = 2·a·t_n / D(σ)^{1/2}
    """
    kind = 'catenoid'

    def __init__(self, n, neck=1.0, z_neck=0.0, t_max=10.0):
        assert t_max > neck > 0, f'catenoid needs t_max > neck > 0, got neck={neck}, t_max={t_max}'
        self.n, self.neck, self.z_neck, self.t_max = int(n), float(neck), float(z_neck), float(t_max)
        self.k = self.n - 2
        self.a = self.neck ** self.k
        smax = math.sqrt(self.t_max / self.neck - 1)
        self.interval = (-smax, smax)
        j = np.arange(1, 2 * self.k + 1)
        self._c = comb(2 * self.k, j)  # (1+x)^{2k} - 1 = Σ_j c_j x^j

    def _D(self, sigma):
        x = sigma ** 2
        j = np.arange(1, 2 * self.k + 1)
        D = self.a ** 2 * np.sum(self._c * x[..., None] ** (j - 1), axis=-1)
        dD = self.a ** 2 * np.sum(self._c[1:] * (j[1:] - 1) * x[..., None] ** (j[1:] - 2), axis=-1) * 2 * sigma
        return D, dD

    def _dz(self, sigma):
        return 2 * self.a * self.neck / np.sqrt(self._D(np.atleast_1d(sigma))[0])

    def height(self, sigma):
        # z(σ) = z_n + ∫_0^σ z'
        sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
        return self.z_neck + np.array([quad(lambda s: float(self._dz(s)[0]), 0.0, s, epsabs=1e-14, epsrel=1e-13)[0]
                                       for s in sigma])

    def jet(self, sigma):
        s = np.atleast_1d(np.asarray(sigma, dtype=float))
        D, dD = self._D(s)
        dz = 2 * self.a * self.neck / np.sqrt(D)
        ddz = -self.a * self.neck * D ** -1.5 * dD
        tn = self.neck
        return CurveJet(s, tn * (1 + s ** 2), self.height(s), 2 * tn * s, dz, 2 * tn * np.ones_like(s), ddz)

    def graph_check(self, t):
        # upper-sheet heights from flat_region_profile, for cross-checks against height()
        t = np.atleast_1d(np.asarray(t, dtype=float))
        sigma = np.sqrt(t / self.neck - 1)
        ref = float(self.height(sigma[-1])[0])
        # flat_region_profile follows the descending branch p = -a/(t^{2k} - a^2)^{1/2}; the upper sheet ascends
        df = flat_region_profile(self.a, t[-1], 0.0, t, self.n)['f'].to_numpy()
        return ref - df

    def describe(self):
        return {'kind': self.kind, 'n': self.n, 'neck': self.neck, 'z_neck': self.z_neck, 't_max': self.t_max}


def as_curve(obj, t_range=None):
    # profiles, leaves and curves to a MeridianCurve
    if isinstance(obj, MeridianCurve):
        return obj
    if isinstance(obj, RadialProfile):
        return GraphCurve(obj, t_range)
    if hasattr(obj, 'resolved_range'):  # Leaf
        return GraphCurve(obj.profile, t_range or (0.0, obj.resolved_range))
    raise TypeError(f'cannot build a meridian curve from {type(obj).__name__}')


class VariationTestFunction:
    """
    Axisymmetric variation: velocity u(σ) and optional acceleration v(σ) of the meridian parameter (σ = t for
    graphs), each a scipy PPoly. Functions flagged compact vanish outside their support.
    """

    def __init__(self, u, v=None, compact=False, support=(-np.inf, np.inf), label='u'):
        assert isinstance(u, PPoly) and (v is None or isinstance(v, PPoly)), 'test functions are PPoly instances'
        self.u, self.v, self.compact, self.support, self.label = u, v, bool(compact), tuple(support), label

    def _eval(self, pp, sigma, nu):
        sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
        if pp is None:
            return np.zeros_like(sigma)
        a, b = self.support
        inside = (sigma >= a) & (sigma <= b)
        out = np.zeros_like(sigma)
        out[inside] = pp(sigma[inside], nu)
        return out

    def __call__(self, sigma, nu=0):
        return self._eval(self.u, sigma, nu)

    def accel(self, sigma, nu=0):
        return self._eval(self.v, sigma, nu)

    def scaled(self, c):
        # c·u with the same acceleration
        u = PPoly(self.u.c * c, self.u.x, extrapolate=self.u.extrapolate)
        return VariationTestFunction(u, self.v, self.compact, self.support, f'{c:g}*{self.label}')

    def describe(self):
        return {'label': self.label, 'compact': self.compact, 'support': [float(s) for s in self.support],
                'acceleration': self.v is not None}

    @classmethod
    def constant(cls, value=1.0, accel=None):
        u = PPoly(np.array([[float(value)]]), np.array([-1e300, 1e300]))
        v = None if accel is None else PPoly(np.array([[float(accel)]]), np.array([-1e300, 1e300]))
        return cls(u, v, compact=False, label=f'const{value:g}')

    @classmethod
    def bump(cls, a, b, height=1.0, accel=0.0):
        """
        C^1 piecewise-cubic bump: 0 at a and b with zero slope, `height` at the midpoint; supported on [a, b].
        accel scales the same bump as acceleration.
        """
        assert b > a, f'bump support [{a}, {b}] is empty'
        x = [a, 0.5 * (a + b), b]
        u = CubicHermiteSpline(x, [0.0, height, 0.0], [0.0, 0.0, 0.0])
        v = CubicHermiteSpline(x, [0.0, accel, 0.0], [0.0, 0.0, 0.0]) if accel else None
        return cls(u, v, compact=True, support=(a, b), label=f'bump[{a:g},{b:g}]')

    @classmethod
    def hermite(cls, knots, values, slopes, compact=False):
        # C^1 piecewise cubic through (knots, values, slopes)
        u = CubicHermiteSpline(knots, values, slopes)
        return cls(u, compact=compact, support=(knots[0], knots[-1]) if compact else (-np.inf, np.inf),
                   label='hermite')


TEST_KINDS = 'bump', 'constant', 'hermite'


def build_test_function(d):
    # VariationTestFunction from a config dict, i.e. {'kind': 'bump', 'a': 2, 'b': 8, 'height': 1}
    if not isinstance(d, dict):
        raise InvalidTestFunction(f'test function must be a mapping, got {d!r}')
    d = dict(d)
    kind = d.pop('kind', 'bump')
    if kind not in TEST_KINDS:
        raise InvalidTestFunction(f'unknown test function kind {kind!r}, available: {list(TEST_KINDS)}')
    try:
        return getattr(VariationTestFunction, kind)(**d)
    except (AssertionError, TypeError, ValueError) as e:
        raise InvalidTestFunction(f'bad {kind} test function {d}: {e}') from e
