"""Branch and bound over the bounded-variable simplex.

Best-bound node selection with deterministic ordering; branching picks the
most fractional integral variable, ties broken by lowest variable index.
A round-and-resolve heuristic at the root supplies an early incumbent so
pruning bites immediately on scheduling instances.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from .linmodel import CompiledModel, LinearModel, Solution
from .simplex import _RawResult, solve_compiled_lp

_INT_TOL = 1e-6
_PRUNE_REL = 1e-9
_MAX_NODES = 500_000


class BranchAndBoundError(RuntimeError):
    pass


def solve_milp(model: LinearModel) -> Solution:
    """Solve the mixed-integer model to proven optimality.

    Integral variable values in the returned solution are rounded exactly;
    duals and reduced costs are not defined for MILP solves and come back
    empty. Infeasible and unbounded instances are reported via ``status``.
    """
    compiled = model.compile()
    int_idx = np.flatnonzero(compiled.integral)
    if int_idx.size == 0:
        from .simplex import solve_lp

        return solve_lp(model)

    priorities = compiled.branch_priority[int_idx]

    root = solve_compiled_lp(compiled)
    if root.status != "optimal":
        return Solution(status=root.status)

    incumbent: _RawResult | None = None
    inc_obj = math.inf

    heur = _round_and_resolve(compiled, root, int_idx)
    if heur is not None:
        incumbent, inc_obj = heur, heur.objective

    counter = 0
    heap: list[tuple[float, int, np.ndarray, np.ndarray]] = []
    heapq.heappush(
        heap, (root.objective, counter, compiled.lower.copy(), compiled.upper.copy())
    )

    nodes = 0
    while heap:
        est, _, lo, up = heapq.heappop(heap)
        if est >= inc_obj - _prune_gap(inc_obj):
            continue
        nodes += 1
        if nodes > _MAX_NODES:
            raise BranchAndBoundError("node limit exceeded")

        res = solve_compiled_lp(compiled, lo, up)
        if res.status == "unbounded":
            return Solution(status="unbounded")
        if res.status != "optimal":
            continue
        if res.objective >= inc_obj - _prune_gap(inc_obj):
            continue

        frac = _fractionality(res.x, int_idx, priorities)
        if frac is None:
            incumbent, inc_obj = res, res.objective
            continue

        j = frac
        lo_f, up_f = lo.copy(), up.copy()
        up_f[j] = math.floor(res.x[j] + _INT_TOL)
        lo_c, up_c = lo.copy(), up.copy()
        lo_c[j] = math.ceil(res.x[j] - _INT_TOL)
        counter += 1
        heapq.heappush(heap, (res.objective, counter, lo_f, up_f))
        counter += 1
        heapq.heappush(heap, (res.objective, counter, lo_c, up_c))

    if incumbent is None:
        return Solution(status="infeasible")
    return _finish(incumbent, compiled, int_idx)


def _prune_gap(inc_obj: float) -> float:
    return _PRUNE_REL * max(1.0, abs(inc_obj))


def _fractionality(
    x: np.ndarray, int_idx: np.ndarray, priorities: np.ndarray | None = None
) -> int | None:
    """Index of the branching variable, or None when all are integral.

    Candidates are the fractional integral variables of the highest branch
    priority present; among them the most fractional (closest to one half)
    wins, ties broken by lowest variable index.
    """
    vals = x[int_idx]
    frac = np.abs(vals - np.round(vals))
    worst = np.flatnonzero(frac > _INT_TOL)
    if worst.size == 0:
        return None
    if priorities is not None:
        top = priorities[worst].max()
        worst = worst[priorities[worst] == top]
    dist = np.abs(frac[worst] - 0.5)
    return int(int_idx[worst[np.argmin(dist)]])


def _round_and_resolve(
    compiled: CompiledModel, root: _RawResult, int_idx: np.ndarray
) -> _RawResult | None:
    """Cheap feasibility dive: push mostly-on integral variables to their
    ceiling and re-solve, letting dependent binaries settle; finish with a
    full rounding. Returns a feasible integral solution or None."""
    lo = compiled.lower.copy()
    up = compiled.upper.copy()
    res = root
    for _ in range(4):
        frac_idx = int_idx[
            np.abs(res.x[int_idx] - np.round(res.x[int_idx])) > _INT_TOL
        ]
        if frac_idx.size == 0:
            return res
        raised = False
        for j in frac_idx:
            target = math.ceil(res.x[j] - 0.5)
            if target > lo[j]:
                lo[j] = float(target)
                raised = True
        if not raised:
            # Everything rounds down; nothing left to push, try full fixing.
            break
        res = solve_compiled_lp(compiled, lo, up)
        if res.status != "optimal":
            return None
    vals = np.maximum(lo[int_idx], np.round(res.x[int_idx]))
    lo[int_idx] = vals
    up[int_idx] = vals
    final = solve_compiled_lp(compiled, lo, up)
    if final.status != "optimal":
        return None
    if _fractionality(final.x, int_idx) is not None:
        return None
    return final


def _finish(raw: _RawResult, compiled: CompiledModel, int_idx: np.ndarray) -> Solution:
    x = raw.x.copy()
    x[int_idx] = np.round(x[int_idx])
    values = {name: float(x[j]) for j, name in enumerate(compiled.var_names)}
    return Solution(
        status="optimal",
        objective_value=float(compiled.c @ x),
        values=values,
        duals={},
        reduced_costs={},
    )
