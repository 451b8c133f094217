"""Randomised Kahane-Salem systems: maps ``x -> r x +/- 1`` with random ratios."""
import math
from dataclasses import dataclass

import numpy as np

from ..exceptions import ConfigError
from ..kernel import Alphabet, BernoulliShiftDriver, DomainBox, IntervalDriver, RandomIFS
from ..weights import BernoulliWeights


@dataclass(frozen=True, eq=False)
class KahaneSalemConfig:
    """Parameters of one of the three variants.

    ``"two-map"``: ratios ``r1, r2`` picked by the driver coordinate 0 (law ``p``),
    fibre law ``q`` on ``{1, 2}``.
    ``"countable"``: ratios ``rho[j]`` (j >= 1) picked by driver coordinate ``n``
    for symbol ``n``; sign ``(-1)**lambda_0``.
    ``"kahane-salem"``: ``phi_{2n+1} = lam rho_n x + 1``, ``phi_{2n+2} = lam rho_n x - 1``
    with ``lam`` in ``[1 - epsilon, 1 + epsilon]``. A single ``rho`` value means
    a constant sequence.
    """

    variant: str
    r1: float = None
    r2: float = None
    rho: tuple = None
    p: BernoulliWeights = None
    q: BernoulliWeights = None
    epsilon: float = None
    alpha: float = None

    def validate(self):
        errors = []
        if self.variant == "two-map":
            for name in ("r1", "r2"):
                v = getattr(self, name)
                if v is None or not 0 < v < 1:
                    errors.append(f"{name} must lie in (0, 1)")
            for name in ("p", "q"):
                w = getattr(self, name)
                if w is None or len(w) != 2 or w.offset != 1:
                    errors.append(f"{name} must be a two-point vector on {{1, 2}}")
        elif self.variant == "countable":
            if self.p is None or self.q is None:
                errors.append("p and q are required")
            rho = self.rho or ()
            if not rho or not all(0 < r < 1 for r in rho):
                errors.append("rho entries must lie in (0, 1)")
            elif self.p is not None and len(rho) < len(self.p):
                errors.append(f"rho has {len(rho)} entries, driver law needs {len(self.p)}")
        elif self.variant == "kahane-salem":
            eps = self.epsilon
            if eps is None or not 0 < eps < 1:
                errors.append("epsilon must lie in (0, 1)")
            rho = self.rho or ()
            if not rho or not all(0 < r < 1 for r in rho):
                errors.append("rho entries must lie in (0, 1)")
            elif eps is not None and (1 + eps) * max(rho) >= 1:
                errors.append("(1 + epsilon) * max(rho) must be < 1")
            if self.q is None:
                errors.append("nu (q) is required")
            elif len(rho) > 1 and len(rho) < math.ceil(len(self.q) / 2):
                errors.append(f"rho needs {math.ceil(len(self.q) / 2)} entries")
        else:
            errors.append(f"unknown Kahane-Salem variant {self.variant!r}")
        if errors:
            raise ConfigError(errors)


def _fiber_alphabet(q):
    if q.kind == "geometric":
        return Alphabet.truncated(len(q), offset=q.offset)
    return Alphabet.finite(len(q), offset=q.offset)


class TwoMapSystem(RandomIFS):
    name = "two-map"

    def __init__(self, config):
        config.validate()
        self.config = config
        self.ratios = np.array([np.nan, config.r1, config.r2])
        rmax = max(config.r1, config.r2)
        R = 1.0 / (1.0 - rmax)
        super().__init__(DomainBox([-R], [R]), Alphabet.finite(2),
                         BernoulliShiftDriver(config.p), rmax)

    def coefficients(self, symbols, lam):
        a = self.ratios[lam.coordinate(0)]
        b = np.where(symbols == 1, 1.0, -1.0)
        return np.broadcast_arrays(a, b)

    def lyapunov_closed_form(self, fiber=None, lam=None):
        p = self.config.p.weights
        r = (self.config.r1, self.config.r2)
        return -math.fsum(pi * math.log(ri) for pi, ri in zip(p, r) if pi > 0), None, 0.0

    def overlap_k(self):
        # images of the two maps are separated iff every ratio is < 1/2
        return 1 if max(self.config.r1, self.config.r2) < 0.5 else 2


class CountableRatioSystem(RandomIFS):
    name = "countable"

    def __init__(self, config):
        config.validate()
        self.config = config
        self.rho = np.concatenate([[np.nan], np.asarray(config.rho, dtype=float)])
        rho_sup = float(np.max(config.rho[:len(config.p)]))
        R = 1.0 / (1.0 - rho_sup)
        super().__init__(DomainBox([-R], [R]), _fiber_alphabet(config.q),
                         BernoulliShiftDriver(config.p), rho_sup)
        # symbol n reads coordinate lambda_n
        self.horizon_extra = self.alphabet.offset + self.alphabet.size

    def coefficients(self, symbols, lam):
        a = self.rho[lam.coordinate(symbols)]
        b = np.where(lam.coordinate(0) % 2 == 0, 1.0, -1.0)
        return np.broadcast_arrays(a, b)

    def lyapunov_closed_form(self, fiber=None, lam=None):
        p = self.config.p
        logs = np.log(self.rho[p.symbols])
        value = -math.fsum(p.weights * logs)
        err = p.tail_mass * float(np.max(np.abs(logs)))
        return value, len(p), err

    def overlap_k(self):
        return None


class KahaneSalemSystem(RandomIFS):
    name = "kahane-salem"

    def __init__(self, config):
        config.validate()
        self.config = config
        q = config.q
        n_pairs = math.ceil((q.offset + len(q)) / 2)
        rho = np.asarray(config.rho, dtype=float)
        if rho.size == 1:
            rho = np.full(n_pairs, rho[0])
        self.rho = rho
        eps = config.epsilon
        s = (1 + eps) * float(rho.max())
        R = 1.0 / (1.0 - s)
        super().__init__(DomainBox([-R], [R]), _fiber_alphabet(q),
                         IntervalDriver.rotation(1 - eps, 1 + eps, config.alpha), s)

    def coefficients(self, symbols, lam):
        a = lam * self.rho[(symbols - 1) // 2]
        b = np.where(symbols % 2 == 1, 1.0, -1.0)
        return np.broadcast_arrays(a, b)

    def lyapunov_closed_form(self, fiber=None, lam=None):
        nu = fiber if fiber is not None else self.config.q
        mean_log = self.driver.mean_log() if lam is None else math.log(lam)
        logs = np.log(self.rho[(nu.symbols - 1) // 2])
        value = -mean_log - math.fsum(nu.weights * logs)
        err = nu.tail_mass * float(np.max(np.abs(logs)))
        return value, len(nu), err

    def overlap_k(self):
        return None


def build(config):
    cls = {"two-map": TwoMapSystem, "countable": CountableRatioSystem, "kahane-salem": KahaneSalemSystem}
    config.validate()
    return cls[config.variant](config)
