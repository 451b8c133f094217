"""Simulation and dimension estimation for random countable IFS with overlaps."""
from .exceptions import ConfigError, DomainError, EnumerationGuardError, EstimationError
from .kernel import (Alphabet, BernoulliShiftDriver, ContractionMap, DomainBox,
                     EmpiricalMeasure, IntervalDriver, RandomIFS, ShiftParameter,
                     SymbolSequence, compose_randomized, project_point, sample_limit_set)
from .measures import (EntropyBounds, LyapunovEstimate, ProductMeasureSpec, dimension_formula,
                       entropy_bounds, lyapunov_birkhoff, lyapunov_closed_form)
from .weights import BernoulliWeights, shannon_entropy
from .dimension import (ExactDimensionalityTest, LocalDimensionEstimator, RadiiGrid,
                        cylinder_ball_mass, empirical_ball_mass, exact_dimensionality_test,
                        local_dimension)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DomainError", "EnumerationGuardError", "EstimationError",
    "Alphabet", "BernoulliShiftDriver", "ContractionMap", "DomainBox", "EmpiricalMeasure",
    "IntervalDriver", "RandomIFS", "ShiftParameter", "SymbolSequence", "compose_randomized",
    "project_point", "sample_limit_set", "EntropyBounds", "LyapunovEstimate",
    "ProductMeasureSpec", "dimension_formula", "entropy_bounds", "lyapunov_birkhoff",
    "lyapunov_closed_form", "BernoulliWeights", "shannon_entropy", "ExactDimensionalityTest",
    "LocalDimensionEstimator", "RadiiGrid", "cylinder_ball_mass", "empirical_ball_mass",
    "exact_dimensionality_test", "local_dimension",
]
