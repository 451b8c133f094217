import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy.special import entr

from randifs import (BernoulliWeights, ConfigError, DomainError, ProductMeasureSpec,
                     dimension_formula, entropy_bounds, lyapunov_birkhoff,
                     lyapunov_closed_form, shannon_entropy)
from randifs.kernel import IntervalDriver
from randifs.measures import EntropyBounds, LyapunovEstimate
from randifs.systems import (ContinuedFractionConfig, DiscSystemConfig, JumpSystem,
                             KahaneSalemConfig, build_system, lyapunov_bounds_cf)

prob_vectors = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=12).filter(
    lambda v: sum(v) > 1e-3).map(lambda v: [x / sum(v) for x in v])


def test_entropy_examples():
    assert shannon_entropy(BernoulliWeights.geometric(0.5)) == pytest.approx(2 * math.log(2), abs=1e-12)
    assert shannon_entropy(BernoulliWeights.explicit([1.0, 0.0, 0.0])) == 0.0
    assert shannon_entropy(BernoulliWeights.explicit([0.5, 0.5])) == pytest.approx(math.log(2))


@given(st.floats(0.05, 0.95))
def test_geometric_closed_form_matches_series(r):
    w = BernoulliWeights.geometric(r)
    n = np.arange(0, 4000)
    series = math.fsum(entr((1 - r) * r ** n))
    assert shannon_entropy(w) == pytest.approx(series, rel=1e-9, abs=1e-12)


@given(prob_vectors)
def test_entropy_range(v):
    w = BernoulliWeights.explicit(v, normalize=True)
    h = shannon_entropy(w)
    assert -1e-15 <= h <= math.log(len(v)) + 1e-12
    if np.count_nonzero(w.weights) == 1:
        assert h == 0.0
    else:
        assert h > 0


def test_weights_validation():
    with pytest.raises(ConfigError):
        BernoulliWeights.explicit([0.5, 0.6])
    with pytest.raises(ConfigError):
        BernoulliWeights.explicit([-0.1, 1.1])
    g = BernoulliWeights.geometric(0.5)
    assert g.n_max == 40 and g.tail_mass < 1e-12


def _mu(h_fiber_weights, driver=None):
    return ProductMeasureSpec(driver or IntervalDriver.identity(0.4, 0.5), h_fiber_weights)


def test_entropy_bounds_examples():
    mu = _mu(BernoulliWeights.geometric(0.5, offset=0))
    b = entropy_bounds(mu, 3)
    assert b.upper == pytest.approx(2 * math.log(2))
    assert b.lower == pytest.approx(math.log(4 / 3), abs=1e-12)
    one = entropy_bounds(mu, 1)
    assert one.lower == one.upper
    assert entropy_bounds(mu).lower == -math.inf


def test_entropy_bounds_rejects_bad_k():
    mu = _mu(BernoulliWeights.uniform(2))
    for k in (0, 2.5, -1):
        with pytest.raises(DomainError):
            entropy_bounds(mu, k)


@given(st.integers(1, 50), st.integers(1, 50))
def test_entropy_bounds_monotone_in_k(k1, k2):
    mu = _mu(BernoulliWeights.uniform(5))
    b1, b2 = entropy_bounds(mu, min(k1, k2)), entropy_bounds(mu, max(k1, k2))
    assert b2.lower <= b1.lower <= b1.upper == b2.upper


def test_driver_entropy_counts_in_upper_only_for_fiber_lower():
    cfg = KahaneSalemConfig("two-map", r1=1 / 3, r2=1 / 3, p=BernoulliWeights.uniform(2),
                            q=BernoulliWeights.uniform(2))
    sys_, mu = build_system(cfg)
    b = entropy_bounds(mu, sys_.overlap_k())
    assert b.upper == pytest.approx(2 * math.log(2))
    assert b.fiber_lower == pytest.approx(math.log(2))
    lo, hi = dimension_formula(b, math.log(3), fiber_lower=True)
    assert lo == pytest.approx(math.log(2) / math.log(3))


def test_closed_forms():
    # [DERIVED] countable system, P = (1/2, 1/2), rho = (1/4, 1/2): (1/2) log 4 + (1/2) log 2
    cfg = KahaneSalemConfig("countable", rho=(0.25, 0.5), p=BernoulliWeights.uniform(2),
                            q=BernoulliWeights.uniform(2))
    sys_, mu = build_system(cfg)
    assert lyapunov_closed_form(sys_, mu).value == pytest.approx(1.5 * math.log(2), rel=1e-14)
    # [TRIVIAL] p = (1, 0): -log r1
    cfg = KahaneSalemConfig("two-map", r1=0.3, r2=0.7, p=BernoulliWeights.explicit([1, 0]),
                            q=BernoulliWeights.uniform(2))
    sys_, mu = build_system(cfg)
    assert lyapunov_closed_form(sys_, mu).value == pytest.approx(-math.log(0.3))


def eight_discs():
    return DiscSystemConfig((0.7,), (0.25,), (8,), epsilon=0.1)


def test_disc_closed_form_and_bounds():
    # [DERIVED] lam = 1, r' = 1/4: chi = log 4; 8 equal weights, k = 2 -> [1, 1.5]
    sys_, mu = build_system(eight_discs())
    chi = lyapunov_closed_form(sys_, mu, lam=1.0)
    assert chi.value == pytest.approx(math.log(4))
    k = sys_.overlap_k()
    assert k == 2
    lo, hi = dimension_formula(entropy_bounds(mu, k), chi)
    assert (lo, hi) == (pytest.approx(1.0), pytest.approx(1.5))


def test_jump_system_has_no_closed_form():
    sys_ = JumpSystem(ContinuedFractionConfig(0.4, 0.4))
    with pytest.raises(NotImplementedError):
        lyapunov_closed_form(sys_)


def test_birkhoff_single_ratio():
    # [DERIVED] all branches share the factor 1/3
    cfg = KahaneSalemConfig("two-map", r1=1 / 3, r2=1 / 3, p=BernoulliWeights.uniform(2),
                            q=BernoulliWeights.uniform(2))
    sys_, mu = build_system(cfg)
    est = lyapunov_birkhoff(sys_, mu, 2000, 20, seed=1)
    assert abs(est.value - math.log(3)) <= 3 * est.std_error + 1e-12
    one = lyapunov_birkhoff(sys_, mu, 10, 1, seed=1)
    assert one.value == pytest.approx(math.log(3), rel=1e-14)


def test_birkhoff_jump_within_derivative_sandwich():
    lam = 0.4
    sys_ = JumpSystem(ContinuedFractionConfig(lam, lam))
    mu = ProductMeasureSpec(sys_.driver, sys_.config.weights())
    est = lyapunov_birkhoff(sys_, mu, 4000, 50, seed=2, lam=lam)
    lo, hi = lyapunov_bounds_cf(lam)
    lo_sharp, _ = lyapunov_bounds_cf(lam, sharp=True)
    assert lo <= lo_sharp <= est.value <= hi


def test_birkhoff_seed_determinism():
    cfg = KahaneSalemConfig("countable", rho=(0.25, 0.5), p=BernoulliWeights.uniform(2),
                            q=BernoulliWeights.uniform(2))
    sys_, mu = build_system(cfg)
    a = lyapunov_birkhoff(sys_, mu, 3000, 20, seed=4, threads=1, chunk=500)
    b = lyapunov_birkhoff(sys_, mu, 3000, 20, seed=4, threads=3, chunk=500)
    assert a == b


def test_dimension_formula_examples():
    b = EntropyBounds(math.log(2), 1, math.log(2), math.log(2))
    lo, hi = dimension_formula(b, math.log(3))
    assert lo == hi == pytest.approx(0.6309297535714574)
    # [DERIVED] p = q = (1/2, 1/2), r = (1/2, 1/2): 2 log 2 / log 2
    cfg = KahaneSalemConfig("two-map", r1=0.5, r2=0.5, p=BernoulliWeights.uniform(2),
                            q=BernoulliWeights.uniform(2))
    sys_, mu = build_system(cfg)
    assert dimension_formula(entropy_bounds(mu), lyapunov_closed_form(sys_, mu))[1] == pytest.approx(2)
    with pytest.raises(DomainError):
        dimension_formula(b, 0.0)
    with pytest.raises(DomainError):
        LyapunovEstimate(-1.0, "closed_form")


@settings(max_examples=50)
@given(st.floats(0.0, 5.0), st.integers(1, 9), st.floats(0.1, 10.0), st.floats(1.1, 8.0))
def test_dimension_formula_scales_inversely(h, k, chi, c):
    assume(h - math.log(k) > 0)
    b = EntropyBounds(h, k, h - math.log(k), h)
    lo, hi = dimension_formula(b, chi)
    lo2, hi2 = dimension_formula(b, c * chi)
    assert lo2 == pytest.approx(lo / c) and hi2 == pytest.approx(hi / c)
    assert lo <= hi
