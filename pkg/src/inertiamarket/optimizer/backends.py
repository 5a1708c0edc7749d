"""Solver backends behind a neutral interface.

Every backend consumes the same :class:`LinearModel` and returns the same
:class:`Solution`, so larger instances can delegate to an external engine
without touching callers. The built-in simplex / branch-and-bound pair is
the default and the only backend the test suite requires.
"""

from __future__ import annotations

import math
from typing import Protocol

import numpy as np

from . import bnb, simplex
from .linmodel import EQ, GE, LE, LinearModel, Solution


class Solver(Protocol):
    def solve_lp(self, model: LinearModel) -> Solution: ...

    def solve_milp(self, model: LinearModel) -> Solution: ...


class BuiltinSolver:
    """Default engine: dense bounded-variable simplex plus branch and bound."""

    name = "builtin"

    def solve_lp(self, model: LinearModel) -> Solution:
        return simplex.solve_lp(model)

    def solve_milp(self, model: LinearModel) -> Solution:
        return bnb.solve_milp(model)


class ScipySolver:
    """Delegation example backed by :mod:`scipy.optimize` (HiGHS).

    Useful for large scheduling instances; requires the ``delegated``
    extra. LP duals follow the same dObj/dRHS convention as the built-in
    engine; MILP solves return no duals, like the built-in one.
    """

    name = "scipy"

    def solve_lp(self, model: LinearModel) -> Solution:
        from scipy.optimize import linprog

        parts = _split(model)
        res = linprog(
            c=parts["c"],
            A_ub=parts["A_ub"],
            b_ub=parts["b_ub"],
            A_eq=parts["A_eq"],
            b_eq=parts["b_eq"],
            bounds=parts["bounds"],
            method="highs",
        )
        if res.status == 2:
            return Solution(status="infeasible")
        if res.status == 3:
            return Solution(status="unbounded")
        if not res.success:
            return Solution(status="infeasible")
        duals: dict[str, float] = {}
        for (kind, pos), label in parts["row_map"].items():
            marg = res.ineqlin.marginals if kind == "ub" else res.eqlin.marginals
            value = float(marg[pos])
            duals[label] = -value if parts["flipped"].get(label) else value
        values = {name: float(res.x[j]) for j, name in enumerate(parts["names"])}
        reduced = {
            name: float(res.lower.marginals[j] + res.upper.marginals[j])
            for j, name in enumerate(parts["names"])
        }
        return Solution(
            status="optimal",
            objective_value=float(res.fun),
            values=values,
            duals=duals,
            reduced_costs=reduced,
        )

    def solve_milp(self, model: LinearModel) -> Solution:
        from scipy.optimize import Bounds, LinearConstraint, milp

        parts = _split(model)
        constraints = []
        if parts["A_ub"] is not None:
            constraints.append(
                LinearConstraint(parts["A_ub"], -np.inf, parts["b_ub"])
            )
        if parts["A_eq"] is not None:
            constraints.append(
                LinearConstraint(parts["A_eq"], parts["b_eq"], parts["b_eq"])
            )
        lo = np.array([b[0] if b[0] is not None else -np.inf for b in parts["bounds"]])
        up = np.array([b[1] if b[1] is not None else np.inf for b in parts["bounds"]])
        res = milp(
            c=parts["c"],
            constraints=constraints,
            bounds=Bounds(lo, up),
            integrality=parts["integrality"],
        )
        if res.status == 2:
            return Solution(status="infeasible")
        if res.status == 3:
            return Solution(status="unbounded")
        if not res.success:
            return Solution(status="infeasible")
        x = res.x.copy()
        ints = parts["integrality"].astype(bool)
        x[ints] = np.round(x[ints])
        values = {name: float(x[j]) for j, name in enumerate(parts["names"])}
        return Solution(
            status="optimal",
            objective_value=float(parts["c"] @ x),
            values=values,
        )


def _split(model: LinearModel) -> dict:
    """Rewrite rows as A_ub x <= b_ub plus A_eq x = b_eq for scipy."""
    compiled = model.compile()
    rows_ub, rhs_ub, rows_eq, rhs_eq = [], [], [], []
    row_map: dict[tuple[str, int], str] = {}
    flipped: dict[str, bool] = {}
    for i, rel in enumerate(compiled.relations):
        label = compiled.row_labels[i]
        if rel == EQ:
            row_map[("eq", len(rows_eq))] = label
            rows_eq.append(compiled.A[i])
            rhs_eq.append(compiled.rhs[i])
        elif rel == LE:
            row_map[("ub", len(rows_ub))] = label
            rows_ub.append(compiled.A[i])
            rhs_ub.append(compiled.rhs[i])
        else:  # GE: flip to <= and flip the reported dual back
            row_map[("ub", len(rows_ub))] = label
            flipped[label] = True
            rows_ub.append(-compiled.A[i])
            rhs_ub.append(-compiled.rhs[i])
    bounds = [
        (
            None if not math.isfinite(lo) else lo,
            None if not math.isfinite(up) else up,
        )
        for lo, up in zip(compiled.lower, compiled.upper)
    ]
    return {
        "c": compiled.c,
        "A_ub": np.array(rows_ub) if rows_ub else None,
        "b_ub": np.array(rhs_ub) if rhs_ub else None,
        "A_eq": np.array(rows_eq) if rows_eq else None,
        "b_eq": np.array(rhs_eq) if rhs_eq else None,
        "bounds": bounds,
        "integrality": compiled.integral.astype(int),
        "names": compiled.var_names,
        "row_map": row_map,
        "flipped": flipped,
    }


_DEFAULT = BuiltinSolver()


def default_solver() -> Solver:
    return _DEFAULT


def get_solver(name: str) -> Solver:
    if name == "builtin":
        return BuiltinSolver()
    if name == "scipy":
        return ScipySolver()
    raise ValueError(f"unknown solver backend {name!r}")
