"""Planar system of similarities onto discs arranged along concentric circles.

Disc ``(n, i)`` sits on the circle of radius ``ring_radii[n]`` with radius
``disc_radii[n]``; the map with parameter ``lam`` sends the unit disc onto the
disc with the same centre and radius ``lam * disc_radii[n]``.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..exceptions import ConfigError
from ..kernel import Alphabet, DomainBox, IntervalDriver, RandomIFS
from ..weights import BernoulliWeights


@dataclass(frozen=True, eq=False)
class DiscSystemConfig:
    ring_radii: tuple
    disc_radii: tuple
    counts: tuple
    epsilon: float = 0.1
    weights: BernoulliWeights = None
    alpha: float = None

    @classmethod
    def default(cls, n_rings=3, epsilon=0.1, weights=None):
        """Rings ``1 - 2^-(n+1)``, disc radii ``2^-(n+3)``, neighbours overlapping."""
        rings = [1.0 - 2.0 ** -(n + 1) for n in range(1, n_rings + 1)]
        radii = [2.0 ** -(n + 3) for n in range(1, n_rings + 1)]
        counts = [math.ceil(math.pi * r / (0.9 * rp)) for r, rp in zip(rings, radii)]
        return cls(tuple(rings), tuple(radii), tuple(counts), epsilon, weights)

    @property
    def n_discs(self):
        return int(sum(self.counts))

    def ring_of(self):
        return np.repeat(np.arange(len(self.counts)), self.counts)

    def index_pairs(self):
        return [(n, i) for n, k in enumerate(self.counts) for i in range(k)]

    def centers(self):
        out = []
        for r, k in zip(self.ring_radii, self.counts):
            t = 2.0 * math.pi * np.arange(k) / k
            out.append(r * np.exp(1j * t))
        return np.concatenate(out)

    def radii(self):
        return np.repeat(np.asarray(self.disc_radii, dtype=float), self.counts)

    def fiber_weights(self):
        if self.weights is not None:
            return self.weights
        return BernoulliWeights.uniform(self.n_discs, offset=0)

    def validate(self):
        """Check the geometric hypotheses; every violation is listed."""
        errors = []
        if not (len(self.ring_radii) == len(self.disc_radii) == len(self.counts)):
            raise ConfigError("ring_radii, disc_radii and counts must have equal length")
        if not 0 < self.epsilon < 1:
            errors.append("epsilon must lie in (0, 1)")
        if any(k < 1 for k in self.counts) or self.n_discs < 2:
            errors.append("need at least two discs and one disc per ring")
        if any(not 0 < r < 1 for r in self.ring_radii):
            errors.append("ring radii must lie in (0, 1)")
        if self.weights is not None and (len(self.weights) != self.n_discs or self.weights.offset != 0):
            errors.append(f"weights must cover the {self.n_discs} discs with offset 0")
        if errors:
            raise ConfigError(errors)
        grow = 1.0 + self.epsilon
        c, rad, ring = self.centers(), self.radii(), self.ring_of()
        outside = np.abs(c) + grow * rad > 1.0
        for e in np.flatnonzero(outside)[:5]:
            errors.append(f"disc {self.index_pairs()[e]} leaves the unit disc")
        for n, r in enumerate(self.ring_radii):
            bad = (ring != n) & (np.abs(np.abs(c) - r) <= rad)
            for e in np.flatnonzero(bad)[:5]:
                errors.append(f"disc {self.index_pairs()[e]} meets circle {n}")
        for e, f in _meeting_pairs(c, grow * rad):
            if ring[e] != ring[f]:
                errors.append(f"dilated discs {self.index_pairs()[e]} and "
                              f"{self.index_pairs()[f]} on different rings meet")
                break
        degree = _degrees(c, grow * rad)
        for e in np.flatnonzero(degree > 2)[:5]:
            errors.append(f"dilated disc {self.index_pairs()[e]} meets {degree[e]} others")
        if errors:
            raise ConfigError(errors)


def _meeting_pairs(centers, radii):
    pts = np.column_stack([centers.real, centers.imag])
    tree = cKDTree(pts)
    pairs = tree.query_pairs(2.0 * float(radii.max()), output_type="ndarray")
    if pairs.size == 0:
        return np.empty((0, 2), dtype=int)
    d = np.abs(centers[pairs[:, 0]] - centers[pairs[:, 1]])
    return pairs[d <= radii[pairs[:, 0]] + radii[pairs[:, 1]]]


def _degrees(centers, radii):
    pairs = _meeting_pairs(centers, radii)
    return np.bincount(pairs.ravel(), minlength=centers.size)


def disc_overlap_count(config, lam):
    """Largest number of ``lam``-scaled discs meeting a single ``lam``-scaled disc."""
    deg = _degrees(config.centers(), lam * config.radii())
    return int(deg.max()) if deg.size else 0


class DiscSystem(RandomIFS):
    family = "planar_similarity"
    name = "discs"

    def __init__(self, config):
        config.validate()
        self.config = config
        self.center_table = config.centers()
        self.radius_table = config.radii()
        eps = config.epsilon
        super().__init__(DomainBox([-1.0, -1.0], [1.0, 1.0]), Alphabet.finite(config.n_discs, 0),
                         IntervalDriver.rotation(1 - eps, 1 + eps, config.alpha),
                         (1 + eps) * float(self.radius_table.max()))

    def coefficients(self, symbols, lam):
        a = lam * self.radius_table[symbols]
        return np.broadcast_arrays(a.astype(complex), self.center_table[symbols])

    def lyapunov_closed_form(self, fiber=None, lam=None):
        nu = fiber if fiber is not None else self.config.fiber_weights()
        mean_log = self.driver.mean_log() if lam is None else math.log(lam)
        value = -mean_log - math.fsum(nu.weights * np.log(self.radius_table[nu.symbols]))
        return value, None, 0.0

    def overlap_k(self):
        return disc_overlap_count(self.config, 1.0 + self.config.epsilon)
