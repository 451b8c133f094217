"""Random continued fractions through the jump transformation.

The parabolic pair ``phi1(x) = (x + lam)/(x + lam + 1)``, ``phi2(x) = x/(x + 1)``
is replaced by the uniformly contracting family
``psi_n = phi2^n o phi1 : x -> (x + lam) / ((n + 1)(x + lam) + 1)``, ``n >= 0``,
weighted ``2^-(n+1)``.
"""
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import ks_2samp

from ..exceptions import ConfigError, DomainError
from ..kernel import (Alphabet, ContractionMap, DomainBox, EmpiricalMeasure, IntervalDriver,
                      RandomIFS)
from ..rng import DEFAULT_CHUNK, map_chunks
from ..weights import BernoulliWeights

LYONS_LOWER = (math.sqrt(3.0) - 1.0) / 2.0
DEFAULT_N_MAX = 40
PARABOLIC_LENGTH = 256


@dataclass(frozen=True)
class ContinuedFractionConfig:
    lam_lo: float
    lam_hi: float
    driver: str = "identity"
    n_max: int = DEFAULT_N_MAX

    def validate(self):
        errors = []
        if not 0 < self.lam_lo <= self.lam_hi <= 1:
            errors.append(f"lambda range [{self.lam_lo}, {self.lam_hi}] must lie in (0, 1]")
        if self.driver not in ("identity", "rotation"):
            errors.append(f"unknown driver {self.driver!r}")
        if self.n_max < 2:
            errors.append("n_max must be >= 2")
        elif 2.0 ** -self.n_max >= 1e-12:
            errors.append(f"n_max={self.n_max} leaves geometric tail 2^-{self.n_max} >= 1e-12")
        if errors:
            raise ConfigError(errors)

    def weights(self):
        return jump_weights(self.n_max)


def jump_weights(n_max=DEFAULT_N_MAX):
    """``(1/2, 1/4, ...)`` on symbols ``0 .. n_max - 1``, renormalised."""
    raw = 0.5 ** np.arange(1, n_max + 1)
    return BernoulliWeights(raw / raw.sum(), kind="geometric", ratio=0.5, offset=0,
                            tail_mass=0.5 ** n_max)


def _check_lambda(lam):
    if not lam > 0:
        raise DomainError(f"lambda must be > 0 (parabolic degeneracy at 0), got {lam}")


def parabolic_maps(lam):
    """``(phi1^lam, phi2)`` as Moebius maps."""
    _check_lambda(lam)
    one = Fraction(1) if isinstance(lam, Fraction) else 1
    return (ContractionMap.moebius(one, lam, one, lam + one),
            ContractionMap.moebius(one, 0 * one, one, one))


def jump_transform(lam, n):
    """Closed form of ``psi_n^lam``; exact when ``lam`` is a Fraction."""
    _check_lambda(lam)
    if n < 0:
        raise DomainError("n must be >= 0")
    one = Fraction(1) if isinstance(lam, Fraction) else 1
    return ContractionMap.moebius(one, lam, (n + 1) * one, (n + 1) * lam + one)


def jump_by_composition(lam, n):
    phi1, phi2 = parabolic_maps(lam)
    out = phi1
    for _ in range(n):
        out = phi2.compose(out)
    return out


def jump_derivative(lam, n, x):
    return 1.0 / ((n + 1) * (np.asarray(x) + lam) + 1) ** 2


def jump_derivative_bounds(lam, n):
    """``1/[lam(n+1)+n+2]^2 <= |psi_n'| <= 1/[lam(n+1)]^2`` on ``[0, 1]``."""
    _check_lambda(lam)
    return 1.0 / (lam * (n + 1) + n + 2) ** 2, 1.0 / (lam * (n + 1)) ** 2


def cf_fixed_point(lam):
    """Fixed point of ``phi1^lam`` in ``(0, 1)``."""
    if lam <= 0:
        return 0.0
    return (-lam + math.sqrt(lam * lam + 4.0 * lam)) / 2.0


def separated_regime(lam):
    """Whether ``phi1^lam(0) > phi2(P_lam)``."""
    p = cf_fixed_point(lam)
    return lam / (lam + 1.0) > p / (p + 1.0)


# ----------------------------------------------------------------- overlaps

def _endpoints(lam, j):
    j = np.asarray(j, dtype=float)
    return 1.0 / (j + 1.0 + 1.0 / lam), 1.0 / (j + 1.0 + 1.0 / (lam + 1.0))


def _exact_intersects(lam, n, j):
    lam = Fraction(lam)
    lo_n, hi_n = lam / (lam * (n + 1) + 1), (lam + 1) / ((n + 1) * (lam + 1) + 1)
    lo_j, hi_j = lam / (lam * (j + 1) + 1), (lam + 1) / ((j + 1) * (lam + 1) + 1)
    return lo_j <= hi_n and lo_n <= hi_j


def cf_overlap_count(lam, n, n_max, rtol=1e-9, return_ties=False):
    """Number of ``j != n`` in ``0..n_max`` whose image interval meets ``I_n``.

    ``I_j = [psi_j(0), psi_j(1)]`` (closed). Comparisons within ``rtol`` of a
    tie are redone in exact rational arithmetic on the float value of ``lam``.
    """
    _check_lambda(lam)
    j = np.arange(n_max + 1)
    lo, hi = _endpoints(lam, j)
    gap = np.minimum(hi[n] - lo, hi - lo[n])
    meets = gap >= 0
    near = np.abs(gap) <= rtol * np.maximum(hi[n], hi)
    ties = [int(t) for t in j[near] if t != n]
    for t in ties:
        meets[t] = _exact_intersects(lam, n, t)
    meets[n] = False
    count = int(meets.sum())
    return (count, ties) if return_ties else count


def max_reach(lam, rtol=1e-9):
    """Largest ``k`` with ``lam (lam + 1) <= 1/k`` (closed convention)."""
    _check_lambda(lam)
    prod = lam * (lam + 1.0)
    k = int(math.floor(1.0 / prod))
    # repair rounding at ties with exact arithmetic
    for cand in (k + 1, k, k - 1):
        if cand >= 1 and abs(cand * prod - 1.0) <= rtol:
            f = Fraction(lam)
            return cand if f * (f + 1) * cand <= 1 else cand - 1
    return k


def cf_overlap_predicate(lam, n, n_max):
    """Analytic count: ``I_{n+-k}`` meets ``I_n`` iff ``lam (lam + 1) <= 1/k``."""
    k = max_reach(lam)
    return min(k, n_max - n) + min(k, n)


def cf_ball_overlap_count(lam, n_max=DEFAULT_N_MAX):
    """Maximal number of image intervals containing a common point."""
    lo, hi = _endpoints(lam, np.arange(n_max))
    events = np.concatenate([lo, hi])
    kinds = np.concatenate([np.ones(n_max), -np.ones(n_max)])
    order = np.lexsort((-kinds, events))  # openings before closings at ties
    return int(np.max(np.cumsum(kinds[order])))


def certified_overlap_k(lam_lo):
    """``k`` for the entropy lower bound on ``lambda >= lam_lo``.

    For ``lam_lo > (sqrt 3 - 1)/2`` this is the value 3 (each image meets fewer
    than 4 others); in general ``2 K + 1`` with ``K = max_reach(lam_lo)``.
    """
    if lam_lo > LYONS_LOWER:
        return 3
    return 2 * max_reach(lam_lo) + 1


# --------------------------------------------------------------- the system

class JumpSystem(RandomIFS):
    family = "moebius"
    name = "jump"

    def __init__(self, config):
        config.validate()
        self.config = config
        driver = (IntervalDriver.identity if config.driver == "identity"
                  else IntervalDriver.rotation)(config.lam_lo, config.lam_hi)
        super().__init__(DomainBox([0.0], [1.0]), Alphabet.truncated(config.n_max, offset=0),
                         driver, 1.0 / (1.0 + config.lam_lo) ** 2)

    def contraction_bound(self, lam=None):
        if lam is None:
            return self.s
        return 1.0 / (1.0 + float(np.min(lam))) ** 2

    def coefficients(self, symbols, lam):
        m = symbols + 1.0
        return np.broadcast_arrays(1.0, lam, m, m * lam + 1.0)

    def overlap_k(self):
        return certified_overlap_k(self.config.lam_lo)

    def support_bound(self, lam):
        return cf_fixed_point(lam)


def lyapunov_bounds_cf(lam, n_max=DEFAULT_N_MAX, sharp=False):
    """Exponent sandwich from the derivative bounds, weights ``2^-(n+1)``.

    Returns ``(lower, upper)``; the lower end uses ``|psi_n'| <= 1/[lam(n+1)]^2``
    and may be negative for small ``lam``. ``sharp`` uses the exact maximum
    ``|psi_n'(0)| = 1/[lam(n+1)+1]^2`` instead, which keeps it positive.
    """
    w = jump_weights(n_max)
    n = w.symbols
    lower = math.fsum(w.weights * 2.0 * np.log(lam * (n + 1) + (1.0 if sharp else 0.0)))
    upper = math.fsum(w.weights * 2.0 * np.log(lam * (n + 1) + n + 2))
    return lower, upper


# ------------------------------------------------------- parabolic sampling

def sample_parabolic(lam, N, length=PARABOLIC_LENGTH, seed=0, threads=1, chunk=DEFAULT_CHUNK):
    """Sample ``nu_lam`` by applying ``length`` equiprobable parabolic maps to 0.5.

    The error bound is the worst per-sample Lipschitz product, using
    ``|phi1'| <= (1 + lam)^-2`` and ``|phi2'| <= 1`` on ``[0, 1]``.
    """
    _check_lambda(lam)
    contraction = (1.0 + lam) ** -2
    if contraction ** (length / 4) > 1e-6:
        warnings.warn(f"lambda={lam}: parabolic map mixes slowly, samples may be biased",
                      RuntimeWarning, stacklevel=2)

    def work(rng, size):
        x = np.full(size, 0.5)
        hits = np.zeros(size, dtype=np.int64)
        for _ in range(length):
            first = rng.random(size) < 0.5
            y = x + lam
            x = np.where(first, y / (y + 1.0), x / (x + 1.0))
            hits += first
        return x, hits

    parts = map_chunks(work, N, seed, "parabolic", threads, chunk)
    x = np.concatenate([p[0] for p in parts])
    hits = np.concatenate([p[1] for p in parts])
    err = float(contraction ** hits.min()) if hits.size else 0.0
    return EmpiricalMeasure(x.reshape(-1, 1), depth=length, seed=seed, error_bound=err,
                            parameter=f"{lam:.17g}", system="jump-parabolic")


def cf_invariance_residual(lam, em_parabolic, em_jump):
    """KS distance between the parabolic and jump-system samples of ``nu_lam``."""
    if lam < 0.05:
        warnings.warn(f"lambda={lam}: parabolic sampling mixes slowly near 0",
                      RuntimeWarning, stacklevel=2)
    a = np.asarray(em_parabolic.points, dtype=float).ravel()
    b = np.asarray(em_jump.points, dtype=float).ravel()
    return float(ks_2samp(a, b, method="asymp").statistic)


# ----------------------------------------------------------- bound audit

def lyons_bound_audit(lam_lo=LYONS_LOWER, lam_hi=0.5, k=3, n_terms=200):
    """Both readings of the reference exponent bound on ``[lam_lo, lam_hi]``.

    ``with_factor_10`` keeps the printed factor 10 in
    ``chi <= 10 (log 3/2 + sum log(n+2) / 2^n)``; ``without_factor_10`` drops
    it. ``rederived`` is the bound from averaging the exact-derivative estimate
    ``-log|psi_n'| <= 2 log((n+1)(1+lam)+1)`` at ``lam_hi`` under weights
    ``2^-(n+1)``.
    """
    h_lower = 2.0 * math.log(2.0) - math.log(k)
    n = np.arange(1, n_terms + 1)
    series = math.log(1.5) + math.fsum(np.log(n + 2.0) / 2.0 ** n)
    chi_10 = 10.0 * series
    chi_1 = series
    m = np.arange(0, n_terms)
    chi_re = math.fsum(2.0 * np.log((m + 1) * (1 + lam_hi) + 1) / 2.0 ** (m + 1))
    claim = 1.0 / 25.0
    out = {
        "entropy_lower": h_lower,
        "chi_upper_with_factor_10": chi_10,
        "chi_upper_without_factor_10": chi_1,
        "chi_upper_rederived": chi_re,
        "dim_lower_with_factor_10": h_lower / chi_10,
        "dim_lower_without_factor_10": h_lower / chi_1,
        "dim_lower_rederived": h_lower / chi_re,
        "claimed_lower": claim,
    }
    out["discrepancy"] = (out["dim_lower_with_factor_10"] < claim) != (
        out["dim_lower_without_factor_10"] < claim)
    return out
