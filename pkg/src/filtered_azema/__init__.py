"""
Filtering a Brownian signal through sign-switched observations.

Simulation of the coupled scenarios, closed-form filters and conditional laws,
and a Monte Carlo oracle that checks them statistically.
"""
__version__ = "0.1.0"

from .filters import (DEFAULT_CONSTANT, ConstantMode, MeanderConstant, MomentMode,
                      conditional_density_first_kind, conditional_law_second_kind,
                      conditional_moment_first_kind, filter_first_kind, filter_second_kind,
                      first_kind_series, second_kind_series, sign_posterior)
from .oracle import McReport
from .paths import SamplePath, Seed, TimeGrid
from .solvers import (CoupledScenario, ScenarioBatch, ScenarioKind, ScenarioStream,
                      scenario_batch, solve_driftless_z, solve_first_kind_euler,
                      solve_first_kind_exact, solve_second_kind)

__all__ = [
    "ConstantMode", "CoupledScenario", "DEFAULT_CONSTANT", "McReport", "MeanderConstant",
    "MomentMode", "SamplePath", "ScenarioBatch", "ScenarioKind", "ScenarioStream", "Seed",
    "TimeGrid", "conditional_density_first_kind", "conditional_law_second_kind",
    "conditional_moment_first_kind", "filter_first_kind", "filter_second_kind",
    "first_kind_series", "scenario_batch", "second_kind_series", "sign_posterior",
    "solve_driftless_z", "solve_first_kind_euler", "solve_first_kind_exact",
    "solve_second_kind",
]
