"""Local dimension of sampled measures, a cylinder oracle, and the exact-dimensionality test.

The estimators follow the scikit-learn conventions: hyperparameters in
``__init__``, data in ``fit``, learned state in trailing-underscore attributes.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DomainError, EnumerationGuardError, EstimationError
from .kernel import EmpiricalMeasure, _normalize_parameter, check_weights_for
from .rng import stream_generator

ENUMERATION_GUARD = 10 ** 7
DEFAULT_LEVELS = 11


# ----------------------------------------------------------------- types

@dataclass(frozen=True)
class RadiiGrid:
    r_min: float
    r_max: float
    n_levels: int = DEFAULT_LEVELS

    def __post_init__(self):
        if not 0 < self.r_min < self.r_max:
            raise DomainError(f"need 0 < r_min < r_max, got {self.r_min}, {self.r_max}")
        if self.n_levels < 4:
            raise DomainError("a radii grid needs at least 4 levels")

    @property
    def radii(self):
        return np.geomspace(self.r_min, self.r_max, self.n_levels)

    @classmethod
    def default(cls, support_diameter, error_bound=0.0, n_levels=DEFAULT_LEVELS):
        r_max = support_diameter / 8.0
        r_min = max(10.0 * error_bound, r_max * 2.0 ** -10)
        return cls(r_min, r_max, n_levels)

    def check_resolution(self, error_bound):
        if self.r_min < 10.0 * error_bound:
            raise DomainError(f"r_min={self.r_min:.3g} is below 10x the projection error "
                              f"{error_bound:.3g}")


@dataclass
class LocalDimEstimate:
    basepoint: np.ndarray
    slope: float
    r2_fit: float
    masses: np.ndarray
    radii: np.ndarray
    secant_min: float
    secant_max: float
    n_used: int

    @property
    def lower(self):
        return self.secant_min

    @property
    def upper(self):
        return self.secant_max


@dataclass
class CylinderSpec:
    depth: int
    word: tuple
    weight: float
    image_lo: np.ndarray
    image_hi: np.ndarray

    @property
    def diameter(self):
        return float(np.hypot.reduce(np.atleast_1d(self.image_hi - self.image_lo)))


@dataclass
class DimensionReport:
    estimates: list
    mean: float
    spread: float
    interval: tuple = None
    tol_spread: float = 0.05
    tol_mean: float = 0.05
    passed: bool = False
    details: dict = field(default_factory=dict)

    @property
    def slopes(self):
        return np.array([e.slope for e in self.estimates])

    @property
    def verdict(self):
        return "PASS" if self.passed else "FAIL"


# ----------------------------------------------------------- ball counting

class _BallCounter:
    """Closed-ball point counts, by sorting in 1-d and a k-d tree in 2-d."""

    def __init__(self, points):
        self.q = points.shape[1]
        self.n = points.shape[0]
        if self.q == 1:
            self.sorted = np.sort(points[:, 0])
        else:
            self.tree = cKDTree(points)

    def counts(self, centers, radii):
        centers = np.asarray(centers, dtype=float).reshape(-1, self.q)
        radii = np.asarray(radii, dtype=float)
        if self.q == 1:
            x = centers[:, :1]
            hi = np.searchsorted(self.sorted, x + radii, side="right")
            lo = np.searchsorted(self.sorted, x - radii, side="left")
            return hi - lo
        out = np.empty((centers.shape[0], radii.size), dtype=np.int64)
        for j, r in enumerate(radii):
            out[:, j] = self.tree.query_ball_point(centers, r, return_length=True)
        return out


def _points(em):
    pts = em.points if isinstance(em, EmpiricalMeasure) else np.asarray(em, dtype=float)
    if pts.shape[0] == 0:
        raise DomainError("empty sample")
    return pts.reshape(pts.shape[0], -1)


def empirical_ball_mass(em, x, r):
    """Fraction of sample points within distance ``r`` of ``x``."""
    if r <= 0:
        raise DomainError("radius must be positive")
    pts = _points(em)
    return float(_BallCounter(pts).counts(x, [r])[0, 0]) / pts.shape[0]


def _fit_log_log(radii, masses, basepoint):
    ok = masses > 0
    # zero masses only occur at the small end; shrink the grid from below
    first = int(np.argmax(ok)) if ok.any() else radii.size
    used_r, used_m = radii[first:], masses[first:]
    if used_r.size < 4 or not np.all(used_m > 0):
        raise EstimationError(
            f"only {int(ok.sum())} radii with positive mass at {np.ravel(basepoint)}; need 4")
    lx, ly = np.log(used_r), np.log(used_m)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - float(np.sum(resid ** 2)) / ss_tot)
    secants = np.diff(ly) / np.diff(lx)
    return LocalDimEstimate(np.ravel(basepoint).copy(), float(slope), r2, masses, radii,
                            float(secants.min()), float(secants.max()), int(used_r.size))


def local_dimension(em, x, grid):
    """Least-squares slope of ``log mass`` against ``log r`` over the grid."""
    pts = _points(em)
    radii = grid.radii
    masses = _BallCounter(pts).counts(x, radii)[0] / pts.shape[0]
    return _fit_log_log(radii, masses, x)


# ------------------------------------------------------------- estimators

class LocalDimensionEstimator(TransformerMixin, BaseEstimator):
    """Pointwise dimension of an empirical measure from ball masses.

    Parameters
    ----------
    r_min, r_max : float, optional
        Radii grid bounds. Defaults follow ``RadiiGrid.default`` on the fitted sample.
    n_levels : int
        Number of geometric radii.
    error_bound : float
        Sampling truncation error; ``r_min`` must be at least ten times it.

    Attributes
    ----------
    grid_ : RadiiGrid
    n_samples_ : int
    """

    def __init__(self, r_min=None, r_max=None, n_levels=DEFAULT_LEVELS, error_bound=0.0):
        self.r_min = r_min
        self.r_max = r_max
        self.n_levels = n_levels
        self.error_bound = error_bound

    def fit(self, X, y=None):
        X = check_array(np.asarray(X, dtype=float).reshape(len(X), -1))
        lo, hi = X.min(axis=0), X.max(axis=0)
        diam = float(np.hypot.reduce(hi - lo)) if X.shape[1] > 1 else float(hi[0] - lo[0])
        default = RadiiGrid.default(diam if diam > 0 else 1.0, self.error_bound, self.n_levels)
        self.grid_ = RadiiGrid(self.r_min if self.r_min is not None else default.r_min,
                               self.r_max if self.r_max is not None else default.r_max,
                               self.n_levels)
        self.grid_.check_resolution(self.error_bound)
        self._counter = _BallCounter(X)
        self.n_samples_ = X.shape[0]
        self.n_features_in_ = X.shape[1]
        return self

    def _masses(self, X, exclude_self=False):
        check_is_fitted(self, "grid_")
        X = check_array(np.asarray(X, dtype=float).reshape(len(X), -1))
        counts = self._counter.counts(X, self.grid_.radii)
        if exclude_self:
            return (counts - 1) / (self.n_samples_ - 1)
        return counts / self.n_samples_

    def transform(self, X):
        """Ball masses at each grid radius, one row per query point."""
        return self._masses(X)

    def estimate(self, X, exclude_self=False):
        X = np.asarray(X, dtype=float).reshape(len(X), -1)
        masses = self._masses(X, exclude_self)
        return [_fit_log_log(self.grid_.radii, m, x) for x, m in zip(X, masses)]

    def predict(self, X):
        return np.array([e.slope for e in self.estimate(X)])


class ExactDimensionalityTest(BaseEstimator):
    """Concentration test of local-dimension slopes at sample-drawn basepoints.

    Passes when the slopes' standard deviation is below ``tol_spread`` and,
    if ``interval`` is given, their mean lies within ``tol_mean`` of it.
    Basepoints are excluded from their own ball counts.
    """

    def __init__(self, n_basepoints=200, r_min=None, r_max=None, n_levels=DEFAULT_LEVELS,
                 error_bound=0.0, interval=None, tol_spread=0.05, tol_mean=0.05,
                 random_state=0):
        self.n_basepoints = n_basepoints
        self.r_min = r_min
        self.r_max = r_max
        self.n_levels = n_levels
        self.error_bound = error_bound
        self.interval = interval
        self.tol_spread = tol_spread
        self.tol_mean = tol_mean
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(np.asarray(X, dtype=float).reshape(len(X), -1))
        est = LocalDimensionEstimator(self.r_min, self.r_max, self.n_levels,
                                      self.error_bound).fit(X)
        rng = stream_generator(self.random_state, "basepoints")
        m = min(int(self.n_basepoints), X.shape[0])
        self.basepoint_index_ = np.sort(rng.choice(X.shape[0], size=m, replace=False))
        self.estimates_ = est.estimate(X[self.basepoint_index_], exclude_self=True)
        self.grid_ = est.grid_
        slopes = np.array([e.slope for e in self.estimates_])
        self.mean_ = float(slopes.mean())
        self.spread_ = float(slopes.std(ddof=1)) if slopes.size > 1 else 0.0
        ok = self.spread_ < self.tol_spread
        if self.interval is not None:
            lo, hi = self.interval
            ok = ok and (lo - self.tol_mean <= self.mean_ <= hi + self.tol_mean)
        self.passed_ = bool(ok)
        self.report_ = DimensionReport(self.estimates_, self.mean_, self.spread_,
                                       self.interval, self.tol_spread, self.tol_mean,
                                       self.passed_, {"grid": self.grid_})
        return self


def exact_dimensionality_test(em, n_basepoints=200, grid=None, interval=None,
                              tol_spread=0.05, tol_mean=0.05, seed=0):
    kw = {} if grid is None else dict(r_min=grid.r_min, r_max=grid.r_max, n_levels=grid.n_levels)
    err = em.error_bound if isinstance(em, EmpiricalMeasure) else 0.0
    pts = em.points if isinstance(em, EmpiricalMeasure) else em
    test = ExactDimensionalityTest(n_basepoints, error_bound=err, interval=interval,
                                   tol_spread=tol_spread, tol_mean=tol_mean,
                                   random_state=seed, **kw)
    return test.fit(pts).report_


def atom_lebesgue_mixture(N, atom=0.5, atom_weight=0.5, seed=0):
    """Half an atom, half Lebesgue on [0, 1]: a measure that is not exact dimensional."""
    if not 0 < atom_weight < 1:
        raise DomainError("atom_weight must lie in (0, 1)")
    rng = stream_generator(seed, "sample")
    is_atom = rng.random(N) < atom_weight
    pts = np.where(is_atom, float(atom), rng.random(N))
    return EmpiricalMeasure(pts.reshape(-1, 1), seed=seed, system="mixture")


# -------------------------------------------------------- cylinder oracle

def _compose_batch(outer, inner):
    if len(outer) == 2:
        A, B = outer
        a, b = inner
        return A * a, A * b + B
    A, B, C, D = outer
    a, b, c, d = inner
    out = (A * a + B * c, A * b + B * d, C * a + D * c, C * b + D * d)
    scale = np.maximum.reduce([np.abs(v) for v in out])
    return tuple(v / scale for v in out)


def _apply(coeffs, x):
    if len(coeffs) == 2:
        return coeffs[0] * x + coeffs[1]
    a, b, c, d = coeffs
    return (a * x + b) / (c * x + d)


def enumerate_cylinders(sys, lam, nu, depth, guard=ENUMERATION_GUARD):
    """All depth-n cylinders with positive weight: words, weights, image bounds.

    Images are bounding intervals in 1-d and circumscribed discs
    ``(center, radius)`` in 2-d.
    """
    check_weights_for(sys, nu)
    if depth < 1:
        raise DomainError("depth must be >= 1")
    lam = _normalize_parameter(sys, lam)
    sys.check_parameter(lam, depth)
    keep = nu.weights > 0
    symbols, w = nu.symbols[keep], nu.weights[keep]
    n_words = len(symbols) ** depth
    if n_words > guard:
        raise EnumerationGuardError(n_words, guard)
    coeffs = None
    weights = np.ones(1)
    words = np.zeros((1, 0), dtype=np.int64)
    for k in range(depth):
        step = [np.asarray(v).reshape(-1)
                for v in sys.coefficients(symbols, sys.driver.theta_power(lam, k))]
        step = [np.broadcast_to(v, symbols.shape) for v in step]
        if coeffs is None:
            coeffs = tuple(v.copy() for v in step)
        else:
            outer = tuple(np.repeat(v, symbols.size) for v in coeffs)
            inner = tuple(np.tile(v, coeffs[0].size) for v in step)
            coeffs = _compose_batch(outer, inner)
        weights = np.outer(weights, w).ravel()
        words = np.column_stack([np.repeat(words, symbols.size, axis=0),
                                 np.tile(symbols, words.shape[0])])
    dom = sys.domain
    if dom.q == 1:
        ends = np.stack([_apply(coeffs, dom.lo[0]), _apply(coeffs, dom.hi[0])])
        image = (ends.min(axis=0), ends.max(axis=0))
    else:
        c0 = complex(*dom.center)
        image = (_apply(coeffs, c0), np.abs(coeffs[0]) * dom.diameter / 2.0)
    return words, weights, image


def cylinder_specs(sys, lam, nu, depth, guard=ENUMERATION_GUARD):
    words, weights, image = enumerate_cylinders(sys, lam, nu, depth, guard)
    out = []
    for i in range(weights.size):
        if sys.domain.q == 1:
            lo, hi = np.array([image[0][i]]), np.array([image[1][i]])
        else:
            c, rad = image[0][i], image[1][i]
            lo = np.array([c.real - rad, c.imag - rad])
            hi = np.array([c.real + rad, c.imag + rad])
        out.append(CylinderSpec(depth, tuple(int(e) for e in words[i]), float(weights[i]), lo, hi))
    return out


def _sandwich(q, weights, image, x, r):
    if q == 1:
        lo, hi = image
        x = float(np.ravel(x)[0])
        inside = (lo >= x - r) & (hi <= x + r)
        meets = (hi >= x - r) & (lo <= x + r)
    else:
        c, rad = image
        z = complex(*np.ravel(x)[:2])
        dist = np.abs(c - z)
        inside = dist + rad <= r
        meets = dist <= r + rad
    return math.fsum(weights[inside]), math.fsum(weights[meets])


def cylinder_ball_mass(sys, lam, nu, depth, x, r, guard=ENUMERATION_GUARD):
    """Certified ``(lower, upper)`` for the projected mass of the closed ball ``B(x, r)``."""
    _, weights, image = enumerate_cylinders(sys, lam, nu, depth, guard)
    return _sandwich(sys.domain.q, weights, image, x, r)


def cylinder_ball_masses(sys, lam, nu, depth, xs, rs, guard=ENUMERATION_GUARD):
    """Vectorised :func:`cylinder_ball_mass` over pairs; returns an ``(m, 2)`` array."""
    _, weights, image = enumerate_cylinders(sys, lam, nu, depth, guard)
    return np.array([_sandwich(sys.domain.q, weights, image, x, r) for x, r in zip(xs, rs)])
