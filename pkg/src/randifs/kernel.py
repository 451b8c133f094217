"""Random conformal IFS machinery: domains, drivers, maps, composition, sampling.

Every map family used here is a linear fractional map ``(a x + b) / (c x + d)``.
Real affine maps have ``c = 0, d = 1``; planar similarities are complex affine
maps acting on points of the plane encoded as complex numbers.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError, DomainError
from .rng import DEFAULT_CHUNK, map_chunks, stream_generator
from .weights import DEFAULT_TAIL_MASS

DEFAULT_RESOLUTION = 1e-9
DEFAULT_WINDOW = 64


# ---------------------------------------------------------------- domain types

@dataclass(frozen=True, eq=False)
class DomainBox:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or lo.size not in (1, 2):
            raise DomainError("domain must be an interval or a planar box")
        if not np.all(lo < hi) or not np.all(np.isfinite(hi - lo)):
            raise DomainError(f"degenerate domain {lo} .. {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def q(self):
        return self.lo.size

    @property
    def diameter(self):
        return float(np.hypot.reduce(self.hi - self.lo)) if self.q > 1 else float(self.hi[0] - self.lo[0])

    @property
    def center(self):
        return (self.lo + self.hi) / 2

    def contains(self, points, tol=0.0):
        pts = np.asarray(points, dtype=float).reshape(-1, self.q)
        return np.all((pts >= self.lo - tol) & (pts <= self.hi + tol), axis=1)


@dataclass(frozen=True)
class Alphabet:
    """Symbols ``offset, offset + 1, ...``; countable ones carry their truncation."""

    size: int
    offset: int = 1
    countable: bool = False
    tail_mass_bound: float = 0.0

    def __post_init__(self):
        if self.size < 2:
            raise ConfigError("alphabet needs at least two symbols")
        if not 0.0 <= self.tail_mass_bound < 1.0:
            raise ConfigError("tail_mass_bound must lie in [0, 1)")

    @classmethod
    def finite(cls, size, offset=1):
        return cls(size, offset)

    @classmethod
    def truncated(cls, n_max, offset=1, tail_mass_bound=DEFAULT_TAIL_MASS):
        return cls(n_max, offset, True, tail_mass_bound)

    @property
    def n_max(self):
        return self.size

    @property
    def symbols(self):
        return np.arange(self.offset, self.offset + self.size)

    def contains(self, symbols):
        s = np.asarray(symbols)
        return (s >= self.offset) & (s < self.offset + self.size)


@dataclass(frozen=True)
class SymbolSequence:
    word: tuple

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(int(e) for e in self.word))

    @property
    def depth(self):
        return len(self.word)

    def shift(self):
        return SymbolSequence(self.word[1:])

    def prefix(self, n):
        return SymbolSequence(self.word[:n])


def _as_word(omega):
    if isinstance(omega, SymbolSequence):
        return omega.word
    return tuple(int(e) for e in omega)


# --------------------------------------------------------------------- drivers

@dataclass(frozen=True, eq=False)
class ShiftParameter:
    """A finite window of points of a two-sided shift, one row per parameter.

    ``coords[:, origin + j]`` is coordinate ``j`` of each sequence.
    """

    coords: np.ndarray
    origin: int

    @property
    def size(self):
        return self.coords.shape[0]

    def coordinate(self, j):
        j = np.asarray(j)
        idx = self.origin + j
        if np.any(idx < 0) or np.any(idx >= self.coords.shape[1]):
            raise DomainError("parameter window too short for this composition")
        if j.ndim == 0:
            return self.coords[:, int(idx)]
        rows = np.arange(self.size) if self.size == j.shape[0] else np.zeros(j.shape[0], dtype=int)
        return self.coords[rows, idx]

    def row(self, i):
        return ShiftParameter(self.coords[i:i + 1], self.origin)

    @classmethod
    def from_sequence(cls, coords, origin=0):
        return cls(np.asarray(coords, dtype=np.int64).reshape(1, -1), int(origin))


class BernoulliShiftDriver:
    """Two-sided Bernoulli shift with coordinate law ``weights``; theta is the left shift."""

    kind = "shift"

    def __init__(self, weights, window=DEFAULT_WINDOW):
        self.weights = weights
        self.window = int(window)

    def sample(self, rng, size, horizon):
        width = horizon + 2 * self.window
        coords = self.weights.sample(rng, (size, width))
        return ShiftParameter(coords, self.window)

    def theta(self, lam):
        return ShiftParameter(lam.coords, lam.origin + 1)

    def theta_inverse(self, lam):
        return ShiftParameter(lam.coords, lam.origin - 1)

    def theta_power(self, lam, k):
        return ShiftParameter(lam.coords, lam.origin + k)

    def contains(self, lam, horizon=1):
        if not isinstance(lam, ShiftParameter):
            return False
        if lam.origin < 0 or lam.origin + horizon > lam.coords.shape[1]:
            return False
        lo = self.weights.offset
        return bool(np.all((lam.coords >= lo) & (lam.coords < lo + len(self.weights))))

    def entropy(self):
        return self.weights.entropy()

    def describe(self):
        return f"bernoulli-shift({list(np.round(self.weights.weights, 12))})"


class IntervalDriver:
    """Normalised Lebesgue measure on ``[lo, hi]`` with theta a rotation by ``alpha``.

    ``alpha = 0`` gives the identity. Rotation by an irrational fraction of the
    length is an invertible ergodic map preserving m; its entropy is zero.
    """

    kind = "interval"  # lo == hi is allowed and means a fixed parameter
    GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

    def __init__(self, lo, hi, alpha=0.0):
        if not lo <= hi:
            raise ConfigError(f"parameter interval [{lo}, {hi}] is empty")
        self.lo = float(lo)
        self.hi = float(hi)
        self.alpha = float(alpha) % 1.0

    @classmethod
    def identity(cls, lo, hi):
        return cls(lo, hi, 0.0)

    @classmethod
    def rotation(cls, lo, hi, alpha=None):
        return cls(lo, hi, cls.GOLDEN if alpha is None else alpha)

    @property
    def length(self):
        return self.hi - self.lo

    def sample(self, rng, size, horizon=0):
        return self.lo + self.length * rng.random(size)

    def theta_power(self, lam, k):
        lam = np.asarray(lam, dtype=float)
        if self.alpha == 0.0 or k == 0 or self.length == 0:
            return lam
        t = (lam - self.lo) / self.length + k * self.alpha
        return self.lo + self.length * (t % 1.0)

    def theta(self, lam):
        return self.theta_power(lam, 1)

    def theta_inverse(self, lam):
        return self.theta_power(lam, -1)

    def contains(self, lam, horizon=1):
        lam = np.asarray(lam, dtype=float)
        return bool(np.all((lam >= self.lo) & (lam <= self.hi)))

    def entropy(self):
        return 0.0

    def mean_log(self):
        """Integral of ``log lambda`` against normalised Lebesgue measure."""
        def g(x):
            return x * math.log(x) - x
        if self.lo <= 0:
            raise DomainError("log-moment needs a positive parameter interval")
        if self.length == 0:
            return math.log(self.lo)
        return (g(self.hi) - g(self.lo)) / self.length

    def describe(self):
        theta = "identity" if self.alpha == 0 else f"rotation({self.alpha:.12g})"
        return f"interval[{self.lo:.12g},{self.hi:.12g}] {theta}"


# ---------------------------------------------------------------------- maps

@dataclass(frozen=True)
class ContractionMap:
    """``x -> (a x + b) / (c x + d)``. Exact when the coefficients are Fractions."""

    a: object
    b: object
    c: object = 0
    d: object = 1
    family: str = "affine"

    @classmethod
    def affine(cls, a, b):
        return cls(a, b, 0, 1, "affine")

    @classmethod
    def moebius(cls, a, b, c, d):
        return cls(a, b, c, d, "moebius")

    @classmethod
    def planar_similarity(cls, scale, rotation, translation):
        t = complex(*translation) if np.ndim(translation) else complex(translation)
        return cls(scale * complex(math.cos(rotation), math.sin(rotation)), t, 0, 1,
                   "planar_similarity")

    def __call__(self, x):
        if self.family == "planar_similarity" and np.ndim(x) and np.shape(x)[-1] == 2:
            z = self.a * complex(x[0], x[1]) + self.b
            return np.array([z.real, z.imag])
        if self.c == 0:
            return (self.a * x + self.b) / self.d
        return (self.a * x + self.b) / (self.c * x + self.d)

    @property
    def determinant(self):
        return self.a * self.d - self.b * self.c

    def derivative_at(self, x):
        if self.family == "planar_similarity" and np.ndim(x):
            x = complex(x[0], x[1])
        return abs(self.determinant / (self.c * x + self.d) ** 2)

    def compose(self, inner):
        """``self o inner``."""
        a = self.a * inner.a + self.b * inner.c
        b = self.a * inner.b + self.b * inner.d
        c = self.c * inner.a + self.d * inner.c
        d = self.c * inner.b + self.d * inner.d
        fam = self.family if self.family == inner.family else "moebius"
        return ContractionMap(a, b, c, d, fam)

    def same_map(self, other):
        """Projective equality of coefficient matrices (exact for Fractions)."""
        p = (self.a, self.b, self.c, self.d)
        q = (other.a, other.b, other.c, other.d)
        return all(p[i] * q[j] == p[j] * q[i] for i in range(4) for j in range(i + 1, 4))

    def lipschitz_on(self, domain):
        if self.c == 0:
            return abs(self.a / self.d)
        lo, hi = float(domain.lo[0]), float(domain.hi[0])
        dl, dh = float(self.c) * lo + float(self.d), float(self.c) * hi + float(self.d)
        if dl * dh <= 0:
            return math.inf
        return abs(float(self.determinant)) / min(dl * dl, dh * dh)


# --------------------------------------------------------- coefficient helpers

def apply_coefficients(coeffs, x):
    if len(coeffs) == 2:
        a, b = coeffs
        return a * x + b
    a, b, c, d = coeffs
    return (a * x + b) / (c * x + d)


def log_abs_derivative(coeffs, x):
    if len(coeffs) == 2:
        return np.log(np.abs(coeffs[0])) + np.zeros(np.shape(x))
    a, b, c, d = coeffs
    return np.log(np.abs(a * d - b * c)) - 2.0 * np.log(np.abs(c * x + d))


# ------------------------------------------------------------------ the system

class RandomIFS:
    """A random countable conformal IFS ``(theta, {lambda -> phi_e^lambda})``.

    Subclasses implement :meth:`coefficients`, which evaluates the maps for an
    array of symbols under a batch of parameters (vectorised; broadcasting a
    single parameter across many symbols is allowed).
    """

    family = "affine"
    name = "random-ifs"
    horizon_extra = 0

    def __init__(self, domain, alphabet, driver, s):
        if not 0 < s < 1:
            raise ConfigError(f"contraction bound s={s} must lie in (0, 1)")
        self.domain = domain
        self.alphabet = alphabet
        self.driver = driver
        self.s = float(s)

    def coefficients(self, symbols, lam):
        raise NotImplementedError

    # points are complex internally for planar systems
    def to_internal(self, points):
        pts = np.asarray(points, dtype=float)
        if self.domain.q == 1:
            return pts.reshape(-1)
        pts = pts.reshape(-1, 2)
        return pts[:, 0] + 1j * pts[:, 1]

    def to_external(self, values):
        values = np.asarray(values)
        if self.domain.q == 1:
            return values.reshape(-1, 1).astype(float)
        return np.column_stack([values.real, values.imag])

    def contraction_bound(self, lam=None):
        return self.s

    def parameter_horizon(self, depth):
        return int(depth) + self.horizon_extra

    def default_depth(self, resolution=DEFAULT_RESOLUTION, lam=None):
        s = self.contraction_bound(lam)
        return max(1, math.ceil(math.log(resolution / self.domain.diameter) / math.log(s)))

    def sample_parameter(self, rng, size=1, depth=1):
        return self.driver.sample(rng, size, self.parameter_horizon(depth))

    def check_symbols(self, symbols):
        if not np.all(self.alphabet.contains(symbols)):
            raise DomainError(f"invalid symbol(s) in {np.asarray(symbols).ravel()[:10]}")

    def check_parameter(self, lam, depth=1):
        if not self.driver.contains(lam, self.parameter_horizon(depth)):
            raise DomainError("parameter outside the driver's space")

    def map_of(self, e, lam):
        self.check_symbols([e])
        if self.driver.kind == "interval":
            lam = np.atleast_1d(np.asarray(lam, dtype=float))
        self.check_parameter(lam, 1)
        co = [np.asarray(v).reshape(-1)[0].item() for v in self.coefficients(np.array([e]), lam)]
        if len(co) == 2:
            return ContractionMap(co[0], co[1], 0, 1, self.family)
        return ContractionMap(*co, family="moebius")


def _normalize_parameter(sys, lam):
    if sys.driver.kind == "interval":
        return np.atleast_1d(np.asarray(lam, dtype=float))
    return lam


def compose_randomized(sys, lam, omega):
    """``phi_{w1}^lam o phi_{w2}^{theta lam} o ... o phi_{wn}^{theta^{n-1} lam}``."""
    word = _as_word(omega)
    if not word:
        raise DomainError("cannot compose an empty word")
    lam = _normalize_parameter(sys, lam)
    sys.check_symbols(word)
    sys.check_parameter(lam, len(word))
    out = sys.map_of(word[0], lam)
    for k, e in enumerate(word[1:], start=1):
        out = out.compose(sys.map_of(e, sys.driver.theta_power(lam, k)))
    return out


def _project_words(sys, lam, words, anchor):
    """Apply the randomised composition for each row of ``words`` to ``anchor``.

    Iterates innermost map first, which keeps the point bounded and avoids
    forming large coefficient products.
    """
    n = words.shape[1]
    x = np.full(words.shape[0], anchor, dtype=complex if sys.domain.q == 2 else float)
    for k in range(n - 1, -1, -1):
        x = apply_coefficients(sys.coefficients(words[:, k], sys.driver.theta_power(lam, k)), x)
    return x


def project_point(sys, lam, omega, anchor=None):
    """Depth-n approximation of ``pi_lam(omega)`` and its error bound ``s^n diam X``."""
    word = _as_word(omega)
    if not word:
        raise DomainError("projection needs depth >= 1")
    lam = _normalize_parameter(sys, lam)
    sys.check_symbols(word)
    sys.check_parameter(lam, len(word))
    if anchor is None:
        anchor = sys.domain.center
    x0 = sys.to_internal(anchor)[0]
    x = _project_words(sys, lam, np.array([word]), x0)
    point = sys.to_external(x)[0]
    err = sys.contraction_bound(lam) ** len(word) * sys.domain.diameter
    return (float(point[0]) if sys.domain.q == 1 else point), err


@dataclass(eq=False)
class EmpiricalMeasure:
    """N sampled points of a projected measure, with provenance."""

    points: np.ndarray
    depth: int = 0
    seed: int = None
    error_bound: float = 0.0
    parameter: str = ""
    system: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        self.points = pts

    @property
    def N(self):
        return self.points.shape[0]

    @property
    def q(self):
        return self.points.shape[1]

    def __len__(self):
        return self.N


def check_weights_for(sys, nu):
    errors = []
    if nu.offset != sys.alphabet.offset or len(nu) > sys.alphabet.size:
        errors.append("weights do not live on the system alphabet")
    if sys.alphabet.countable and nu.tail_mass > sys.alphabet.tail_mass_bound:
        errors.append(f"truncated tail mass {nu.tail_mass:.3g} exceeds bound "
                      f"{sys.alphabet.tail_mass_bound:.3g}")
    if errors:
        raise ConfigError(errors)


def sample_limit_set(sys, lam, nu, N, depth=None, seed=0, threads=1, anchor=None,
                     resolution=DEFAULT_RESOLUTION, chunk=DEFAULT_CHUNK):
    """Draw N points ``pi_lam(omega)`` with ``omega ~ nu`` i.i.d. per coordinate.

    ``lam=None`` draws one parameter from the driver measure (``parameter``
    stream). Results are identical for any ``threads``.
    """
    check_weights_for(sys, nu)
    if depth is None:
        fixed = lam if lam is not None and sys.driver.kind == "interval" else None
        depth = sys.default_depth(resolution, fixed)
    if lam is None:
        lam = sys.sample_parameter(stream_generator(seed, "parameter"), 1, depth)
    lam = _normalize_parameter(sys, lam)
    sys.check_parameter(lam, depth)
    if anchor is None:
        anchor = sys.domain.center
    x0 = sys.to_internal(anchor)[0]

    def work(rng, size):
        words = nu.sample(rng, (size, depth))
        return _project_words(sys, lam, words, x0)

    parts = map_chunks(work, N, seed, "sample", threads, chunk)
    values = np.concatenate(parts) if parts else np.empty(0)
    err = sys.contraction_bound(lam) ** depth * sys.domain.diameter
    return EmpiricalMeasure(sys.to_external(values).reshape(-1, sys.domain.q), depth=depth,
                            seed=seed, error_bound=err, parameter=describe_parameter(lam),
                            system=sys.name, meta={"lam": lam})


def describe_parameter(lam):
    if isinstance(lam, ShiftParameter):
        c = lam.coords[0, lam.origin:lam.origin + 8]
        return "shift:" + "".join(str(int(v)) + " " for v in c).strip() + " ..."
    arr = np.atleast_1d(lam)
    return f"{float(arr[0]):.17g}"

