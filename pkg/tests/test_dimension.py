import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from randifs import (BernoulliWeights, DomainError, EnumerationGuardError, EstimationError,
                     sample_limit_set)
from randifs.dimension import (ExactDimensionalityTest, LocalDimensionEstimator, RadiiGrid,
                               cylinder_ball_mass, cylinder_specs, empirical_ball_mass,
                               enumerate_cylinders, exact_dimensionality_test,
                               local_dimension)
from randifs.kernel import EmpiricalMeasure
from randifs.systems import (ContinuedFractionConfig, DiscSystemConfig, JumpSystem,
                             KahaneSalemConfig, build_system)

GRID = RadiiGrid(1e-3, 0.1, 11)


def osc(rho):
    cfg = KahaneSalemConfig("two-map", r1=rho, r2=rho, p=BernoulliWeights.explicit([1, 0]),
                            q=BernoulliWeights.uniform(2))
    sys_, mu = build_system(cfg)
    lam = sys_.sample_parameter(np.random.default_rng(0), 1, 40)
    return sys_, mu, lam


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.001, 1.0), st.sampled_from([1, 2]))
def test_ball_mass_matches_brute_force(seed, r, q):
    rng = np.random.default_rng(seed)
    pts = rng.random((500, q))
    x = rng.random(q)
    brute = np.mean(np.linalg.norm(pts - x, axis=1) <= r)
    assert empirical_ball_mass(EmpiricalMeasure(pts), x, r) == pytest.approx(brute, abs=1e-15)


def test_ball_mass_errors():
    with pytest.raises(DomainError):
        empirical_ball_mass(EmpiricalMeasure(np.empty((0, 1))), [0.0], 0.1)
    with pytest.raises(DomainError):
        empirical_ball_mass(EmpiricalMeasure(np.zeros((3, 1))), [0.0], 0.0)


def test_uniform_dimensions():
    rng = np.random.default_rng(1)
    one = EmpiricalMeasure(rng.random((100000, 1)))
    two = EmpiricalMeasure(rng.random((100000, 2)))
    assert local_dimension(one, [0.5], GRID).slope == pytest.approx(1.0, abs=0.05)
    assert local_dimension(two, [0.5, 0.5], RadiiGrid(0.01, 0.2, 8)).slope == pytest.approx(2.0, abs=0.1)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_slope_between_secants(seed):
    rng = np.random.default_rng(seed)
    pts = rng.beta(0.5, 0.5, size=(3000, 1))
    e = local_dimension(EmpiricalMeasure(pts), pts[0], RadiiGrid(0.01, 0.3, 8))
    assert e.secant_min - 1e-12 <= e.slope <= e.secant_max + 1e-12
    assert 0 <= e.r2_fit <= 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([0.5, 2.0, 8.0]), st.floats(-5, 5))
def test_slopes_invariant_under_similarity(seed, c, t):
    rng = np.random.default_rng(seed)
    pts = rng.random((2000, 1)) ** 2
    x = pts[1]
    a = local_dimension(EmpiricalMeasure(pts), x, RadiiGrid(0.01, 0.3, 6)).slope
    b = local_dimension(EmpiricalMeasure(c * pts + t), c * x + t,
                        RadiiGrid(0.01 * c, 0.3 * c, 6)).slope
    assert b == pytest.approx(a, abs=1e-9)


def test_too_few_radii():
    pts = EmpiricalMeasure(np.array([[0.0], [10.0]]))
    with pytest.raises(EstimationError):
        local_dimension(pts, [5.0], RadiiGrid(0.1, 1.0, 5))


def test_grid_invariants():
    g = RadiiGrid.default(3.0, error_bound=1e-4)
    assert g.r_max == pytest.approx(3.0 / 8)
    assert g.r_min == pytest.approx(1e-3)
    assert g.radii.size == 11
    with pytest.raises(DomainError):
        RadiiGrid(0.1, 1.0, 3)
    with pytest.raises(DomainError):
        g.check_resolution(1e-3)


def test_estimator_api():
    rng = np.random.default_rng(2)
    X = rng.random(20000)
    est = LocalDimensionEstimator(n_levels=8)
    with pytest.raises(NotFittedError):
        est.predict([[0.5]])
    est.fit(X)
    assert clone(est).get_params() == est.get_params()
    assert est.transform([[0.5], [0.2]]).shape == (2, 8)
    assert est.predict([[0.5]])[0] == pytest.approx(1.0, abs=0.1)


def test_point_mass_has_slope_zero():
    test = ExactDimensionalityTest(n_basepoints=20).fit(np.zeros(100))
    assert test.mean_ == 0.0 and test.spread_ == 0.0 and test.passed_


def test_interval_tolerance_decides_verdict():
    rng = np.random.default_rng(3)
    X = rng.random(50000)
    good = ExactDimensionalityTest(50, interval=(0.95, 1.0)).fit(X)
    bad = ExactDimensionalityTest(50, interval=(0.2, 0.3)).fit(X)
    assert good.passed_ and not bad.passed_


def test_report_from_empirical_measure():
    sys_, mu, lam = osc(1 / 3)
    em = sample_limit_set(sys_, lam, mu.fiber, 100000, seed=4)
    rep = exact_dimensionality_test(em, 50, seed=4)
    assert rep.mean == pytest.approx(math.log(2) / math.log(3), abs=0.05)
    assert rep.slopes.size == 50 and rep.verdict == "PASS"


# ----------------------------------------------------------- cylinders

def test_depth_one_images():
    sys_, mu, lam = osc(1 / 3)
    specs = cylinder_specs(sys_, lam, mu.fiber, 1)
    assert [s.word for s in specs] == [(1,), (2,)]
    assert specs[0].image_lo[0] == pytest.approx(0.5) and specs[0].image_hi[0] == pytest.approx(1.5)
    assert sum(s.weight for s in specs) == pytest.approx(1.0)


def test_overlap_case_trivial_at_depth_one():
    sys_, mu, lam = osc(0.6)
    assert cylinder_ball_mass(sys_, lam, mu.fiber, 1, [0.0], 0.01) == (0.0, 1.0)


def test_separated_widths_collapse():
    sys_, mu, lam = osc(1 / 3)
    rng = np.random.default_rng(5)
    for x, r in zip(rng.uniform(-1.5, 1.5, 50), rng.uniform(0.01, 0.5, 50)):
        lo, hi = cylinder_ball_mass(sys_, lam, mu.fiber, 6, [x], r)
        assert hi - lo < 2.0 ** -5


def test_overlap_widths_persist():
    sys_, mu, lam = osc(0.6)
    lo, hi = cylinder_ball_mass(sys_, lam, mu.fiber, 10, [0.3], 0.37)
    assert lo < hi


@settings(max_examples=25, deadline=None)
@given(st.floats(-2.5, 2.5), st.floats(0.01, 1.0), st.integers(1, 9), st.sampled_from([1 / 3, 0.6]))
def test_refinement_is_monotone(x, r, n, rho):
    sys_, mu, lam = osc(rho)
    lo1, hi1 = cylinder_ball_mass(sys_, lam, mu.fiber, n, [x], r)
    lo2, hi2 = cylinder_ball_mass(sys_, lam, mu.fiber, n + 1, [x], r)
    assert lo2 >= lo1 - 1e-12 and hi2 <= hi1 + 1e-12 and lo1 <= hi1


def test_guard():
    sys_, mu, lam = osc(1 / 3)
    with pytest.raises(EnumerationGuardError):
        enumerate_cylinders(sys_, lam, mu.fiber, 30)


def test_moebius_and_planar_cylinders_cover():
    jump = JumpSystem(ContinuedFractionConfig(0.4, 0.4))
    lo, hi = cylinder_ball_mass(jump, 0.4, jump.config.weights(), 3, [0.5], 1.0)
    assert lo == pytest.approx(1.0, abs=1e-11) and hi == pytest.approx(lo)
    discs = DiscSystemConfig((0.7,), (0.25,), (8,), epsilon=0.1)
    sys_, mu = build_system(discs)
    lo, hi = cylinder_ball_mass(sys_, 1.0, mu.fiber, 2, [0.0, 0.0], 2.0)
    assert lo == pytest.approx(1.0) and hi == pytest.approx(1.0)
    lo, hi = cylinder_ball_mass(sys_, 1.0, mu.fiber, 2, [0.0, 0.0], 0.05)
    assert lo == hi == 0.0
