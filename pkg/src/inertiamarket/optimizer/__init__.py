"""Generic LP / MILP solving with dual extraction.

A solve owns its model exclusively while running; independent solves are
safe to run concurrently. Tolerances: constraint feasibility and
integrality 1e-6, objective agreement 1e-6 relative.
"""

from .backends import BuiltinSolver, ScipySolver, Solver, default_solver, get_solver
from .bnb import BranchAndBoundError, solve_milp
from .linmodel import (
    EQ,
    GE,
    LE,
    Constraint,
    LinearModel,
    ModelError,
    Solution,
    Variable,
    fix_binaries,
    lp_text,
)
from .simplex import SimplexError, solve_lp

__all__ = [
    "BuiltinSolver",
    "BranchAndBoundError",
    "Constraint",
    "EQ",
    "GE",
    "LE",
    "LinearModel",
    "ModelError",
    "ScipySolver",
    "SimplexError",
    "Solution",
    "Solver",
    "Variable",
    "default_solver",
    "fix_binaries",
    "get_solver",
    "lp_text",
    "solve_lp",
    "solve_milp",
]
