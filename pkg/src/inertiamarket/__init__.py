"""Energy and inertia co-optimization laboratory.

Builds RoCoF-constrained unit-commitment problems, clears them with a
built-in LP/MILP engine, extracts prices from a restricted LP re-solve,
and settles inertia providers under three payment schemes.
"""

from .model import GridParams, Scenario, ScenarioError, SyncGenerator, ViUnit, validate
from .uc import TwoStepResult, UcInfeasibleError, UcSolution, UcVariant, two_step_pipeline

__version__ = "0.1.0"

__all__ = [
    "GridParams",
    "Scenario",
    "ScenarioError",
    "SyncGenerator",
    "TwoStepResult",
    "UcInfeasibleError",
    "UcSolution",
    "UcVariant",
    "ViUnit",
    "two_step_pipeline",
    "validate",
    "__version__",
]
