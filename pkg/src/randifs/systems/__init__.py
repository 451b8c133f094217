"""Concrete random systems and their analytic helpers."""
from ..measures import ProductMeasureSpec
from .continued_fraction import (LYONS_LOWER, ContinuedFractionConfig, JumpSystem,
                                 cf_ball_overlap_count, cf_fixed_point, cf_invariance_residual,
                                 cf_overlap_count, cf_overlap_predicate, certified_overlap_k,
                                 jump_by_composition, jump_derivative, jump_derivative_bounds,
                                 jump_transform, jump_weights, lyapunov_bounds_cf,
                                 lyons_bound_audit, max_reach, parabolic_maps, sample_parabolic,
                                 separated_regime)
from .discs import DiscSystem, DiscSystemConfig, disc_overlap_count
from .kahane_salem import (TwoMapSystem, CountableRatioSystem, KahaneSalemSystem,
                           KahaneSalemConfig)


def build_system(config):
    """Return ``(system, product_measure)`` for a system config."""
    if isinstance(config, KahaneSalemConfig):
        from .kahane_salem import build
        sys = build(config)
        return sys, ProductMeasureSpec(sys.driver, config.q)
    if isinstance(config, ContinuedFractionConfig):
        sys = JumpSystem(config)
        return sys, ProductMeasureSpec(sys.driver, config.weights())
    if isinstance(config, DiscSystemConfig):
        sys = DiscSystem(config)
        return sys, ProductMeasureSpec(sys.driver, config.fiber_weights())
    raise TypeError(f"unsupported config type {type(config).__name__}")


__all__ = [
    "build_system", "KahaneSalemConfig", "ContinuedFractionConfig", "DiscSystemConfig",
    "TwoMapSystem", "CountableRatioSystem", "KahaneSalemSystem", "JumpSystem", "DiscSystem",
    "jump_transform", "jump_by_composition", "jump_derivative", "jump_derivative_bounds",
    "cf_overlap_count", "cf_overlap_predicate", "cf_ball_overlap_count", "max_reach",
    "certified_overlap_k", "cf_fixed_point", "separated_regime", "cf_invariance_residual",
    "sample_parabolic", "parabolic_maps", "jump_weights", "lyapunov_bounds_cf",
    "lyons_bound_audit", "disc_overlap_count", "LYONS_LOWER",
]
