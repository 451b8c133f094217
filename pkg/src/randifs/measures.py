"""Entropies, Lyapunov exponents and the entropy/Lyapunov dimension formula.

All quantities are in nats.
"""
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .kernel import (DEFAULT_RESOLUTION, _normalize_parameter, apply_coefficients,
                     log_abs_derivative)
from .rng import map_chunks
from .weights import BernoulliWeights, shannon_entropy

__all__ = [
    "BernoulliWeights", "ProductMeasureSpec", "EntropyBounds", "LyapunovEstimate",
    "shannon_entropy", "entropy_bounds", "lyapunov_closed_form", "lyapunov_birkhoff",
    "dimension_formula",
]


@dataclass(frozen=True)
class ProductMeasureSpec:
    """``mu = m x nu``: driver measure times a Bernoulli fibre measure."""

    driver: object
    fiber: BernoulliWeights

    def base_entropy(self):
        return self.driver.entropy()

    def entropy(self):
        return self.driver.entropy() + self.fiber.entropy()


@dataclass(frozen=True)
class EntropyBounds:
    h_mu: float
    overlap_k: int
    lower: float
    upper: float
    h_fiber: float = None

    @property
    def certified(self):
        return self.overlap_k is not None

    @property
    def fiber_lower(self):
        """``h(nu) - log k``: the lower end without the driver entropy.

        When the driver carries entropy that the maps ignore, ``h(mu) - log k``
        can exceed the projectional entropy; this end stays valid.
        """
        if self.overlap_k is None or self.h_fiber is None:
            return -math.inf
        return self.h_fiber - math.log(self.overlap_k)


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    method: str
    std_error: float = 0.0
    n_orbits: int = 0
    orbit_length: int = 0
    truncation_index: int = None
    truncation_error: float = 0.0

    def __post_init__(self):
        if not self.value > 0:
            raise DomainError(f"Lyapunov exponent must be positive, got {self.value}")


def entropy_bounds(mu, k=None):
    """Sandwich the projectional entropy between ``h(mu) - log k`` and ``h(mu)``.

    Without an overlap count the lower end is ``-inf``.
    """
    h = mu.entropy()
    hf = mu.fiber.entropy()
    if k is None:
        return EntropyBounds(h, None, -math.inf, h, hf)
    if int(k) != k or k < 1:
        raise DomainError(f"overlap count must be an integer >= 1, got {k}")
    k = int(k)
    return EntropyBounds(h, k, h - math.log(k), h, hf)


def lyapunov_closed_form(sys, mu=None, lam=None):
    """Closed-form exponent of a system that has one.

    Systems without a closed form (the continued-fraction jump system) raise
    ``NotImplementedError``; use their derivative-sandwich bounds instead.
    """
    closed = getattr(sys, "lyapunov_closed_form", None)
    if closed is None:
        raise NotImplementedError(f"{sys.name} has no closed-form exponent")
    fiber = mu.fiber if mu is not None else None
    value, n_trunc, err = closed(fiber) if lam is None else closed(fiber, lam=lam)
    return LyapunovEstimate(value, "closed_form", truncation_index=n_trunc,
                            truncation_error=err)


def lyapunov_birkhoff(sys, mu, n_orbits, orbit_length, seed=0, lam=None, depth=None,
                      threads=1, resolution=DEFAULT_RESOLUTION, chunk=4096):
    """Monte Carlo estimate of the exponent from finite-orbit log-derivatives.

    Each orbit draws ``(lam, omega) ~ mu`` (or uses the fixed ``lam``) and
    records ``-(1/n) log |(phi_{omega|n}^lam)'(y)|`` with ``y`` the depth-limited
    projection of ``sigma^n omega`` under ``theta^n lam``. The chain rule is
    accumulated in log space.
    """
    n = int(orbit_length)
    if n < 1 or n_orbits < 1:
        raise DomainError("need at least one orbit of length >= 1")
    nu = mu.fiber
    if depth is None:
        depth = sys.default_depth(resolution, lam)
    x0 = sys.to_internal(sys.domain.center)[0]
    fixed = None if lam is None else _normalize_parameter(sys, lam)
    if fixed is not None:
        sys.check_parameter(fixed, n + depth)

    def work(rng, size):
        if fixed is None:
            lam_b = sys.sample_parameter(rng, size, n + depth)
        else:
            lam_b = fixed
        words = nu.sample(rng, (size, n + depth))
        x = np.full(size, x0, dtype=complex if sys.domain.q == 2 else float)
        for k in range(n + depth - 1, n - 1, -1):
            x = apply_coefficients(sys.coefficients(words[:, k], sys.driver.theta_power(lam_b, k)), x)
        acc = np.zeros(size)
        for k in range(n - 1, -1, -1):
            co = sys.coefficients(words[:, k], sys.driver.theta_power(lam_b, k))
            acc += log_abs_derivative(co, x)
            x = apply_coefficients(co, x)
        return -acc / n

    values = np.concatenate(map_chunks(work, n_orbits, seed, "lyapunov", threads, chunk))
    se = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return LyapunovEstimate(float(values.mean()), "birkhoff", se, int(n_orbits), n)


def dimension_formula(bounds, chi, fiber_lower=False):
    """Interval ``[lower / chi, upper / chi]`` for the a.e. pointwise dimension.

    A lower entropy bound below zero carries no information and is reported as 0.
    With ``fiber_lower`` the lower end uses ``bounds.fiber_lower``.
    """
    value = chi.value if isinstance(chi, LyapunovEstimate) else float(chi)
    if not value > 0:
        raise DomainError(f"Lyapunov exponent must be positive, got {value}")
    low = bounds.fiber_lower if fiber_lower else bounds.lower
    lo = max(low / value, 0.0) if low > -math.inf else 0.0
    return (lo, bounds.upper / value)
