"""Probability vectors for Bernoulli measures on shift spaces."""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import entr

from .exceptions import ConfigError

DEFAULT_TAIL_MASS = 1e-12


@dataclass(frozen=True, eq=False)
class BernoulliWeights:
    """A finite or geometrically-tailed probability vector.

    ``weights[i]`` is the mass of symbol ``offset + i``. Countable vectors are
    truncated where the residual mass drops below ``tail_mass_bound`` and the
    kept part is renormalised; ``tail_mass`` records what was cut.
    """

    weights: np.ndarray
    kind: str = "explicit"
    ratio: float = None
    offset: int = 1
    tail_mass: float = 0.0
    _cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ConfigError("weights must be a nonempty 1-d vector")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ConfigError("weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ConfigError(f"weights sum to {w.sum()!r}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        cdf = np.cumsum(w)
        cdf[-1] = 1.0
        object.__setattr__(self, "_cdf", cdf)

    @classmethod
    def explicit(cls, weights, offset=1, normalize=False):
        w = np.asarray(weights, dtype=float)
        if normalize:
            w = w / w.sum()
        return cls(w, kind="explicit", offset=offset)

    @classmethod
    def uniform(cls, size, offset=1):
        return cls(np.full(size, 1.0 / size), kind="explicit", offset=offset)

    @classmethod
    def geometric(cls, ratio, offset=1, tail_mass_bound=DEFAULT_TAIL_MASS):
        """Weights ``(1 - ratio) * ratio**i`` for ``i = 0, 1, ...``."""
        if not 0 < ratio < 1:
            raise ConfigError(f"geometric ratio must lie in (0, 1), got {ratio}")
        n_max = max(2, math.ceil(math.log(tail_mass_bound) / math.log(ratio)))
        while ratio ** n_max >= tail_mass_bound:
            n_max += 1
        raw = (1.0 - ratio) * ratio ** np.arange(n_max)
        tail = ratio ** n_max
        return cls(raw / raw.sum(), kind="geometric", ratio=ratio,
                   offset=offset, tail_mass=tail)

    def __len__(self):
        return self.weights.size

    @property
    def symbols(self):
        return np.arange(self.offset, self.offset + self.weights.size)

    @property
    def n_max(self):
        return self.weights.size

    def mass(self, symbol):
        i = int(symbol) - self.offset
        if 0 <= i < self.weights.size:
            return float(self.weights[i])
        return 0.0

    def entropy(self):
        return shannon_entropy(self)

    def sample(self, rng, size):
        """Draw i.i.d. symbols (not indices) with this law."""
        u = rng.random(size)
        idx = np.searchsorted(self._cdf, u, side="right")
        np.minimum(idx, self.weights.size - 1, out=idx)
        return idx + self.offset


def shannon_entropy(w):
    """Entropy in nats. Geometric vectors use the untruncated closed form."""
    if w.kind == "geometric":
        r = w.ratio
        h = -math.log1p(-r) - r / (1.0 - r) * math.log(r)
    else:
        h = float(math.fsum(entr(w.weights)))
    if not math.isfinite(h):
        raise ConfigError("entropy is not finite")
    return h
