"""Bounded-variable two-phase revised simplex with dual extraction.

The engine works on the compiled dense form of a model. Each row gets a
slack whose bounds encode the relation; infeasible starting rows get an
artificial driven out in phase 1. Nonbasic variables rest at a bound (or
at zero when free) and the basis inverse is maintained explicitly with
rank-one updates plus periodic refactorization.

Pivoting is deterministic: Dantzig pricing with lowest-index tie breaks,
falling back to Bland's rule after a run of degenerate steps so cycling
cannot occur. Under dual degeneracy the reported duals are those of the
basis the simplex terminates with.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linmodel import GE, LE, CompiledModel, LinearModel, Solution

_PIVOT_TOL = 1e-9
_DUAL_TOL = 1e-7
_FEAS_TOL = 1e-7
_DEGENERATE_RUN = 200
_REFACTOR_EVERY = 150
_MAX_ITERS_FACTOR = 60


class SimplexError(RuntimeError):
    pass


@dataclass
class _RawResult:
    status: str
    x: np.ndarray | None = None  # structural values
    duals: np.ndarray | None = None  # per row, dObj/dRHS
    reduced: np.ndarray | None = None  # per structural variable
    objective: float | None = None


def solve_lp(model: LinearModel) -> Solution:
    """Solve the LP relaxation of ``model`` and return primal and dual data.

    Integrality flags are ignored. Infeasible or unbounded instances are
    reported through ``Solution.status``, never raised.
    """
    compiled = model.compile()
    raw = solve_compiled_lp(compiled)
    return _to_solution(raw, compiled)


def _to_solution(raw: _RawResult, compiled: CompiledModel) -> Solution:
    if raw.status != "optimal":
        return Solution(status=raw.status)
    values = {name: float(raw.x[j]) for j, name in enumerate(compiled.var_names)}
    duals = {label: float(raw.duals[i]) for i, label in enumerate(compiled.row_labels)}
    reduced = {
        name: float(raw.reduced[j]) for j, name in enumerate(compiled.var_names)
    }
    return Solution(
        status="optimal",
        objective_value=float(raw.objective),
        values=values,
        duals=duals,
        reduced_costs=reduced,
    )


def solve_compiled_lp(
    compiled: CompiledModel,
    lower: np.ndarray | None = None,
    upper: np.ndarray | None = None,
) -> _RawResult:
    """Solve with optional bound overrides (used by branch and bound)."""
    lo_s = compiled.lower if lower is None else lower
    up_s = compiled.upper if upper is None else upper
    if np.any(lo_s > up_s + 1e-12):
        return _RawResult(status="infeasible")

    n = compiled.A.shape[1]
    m = compiled.A.shape[0]
    if m == 0:
        return _solve_bounds_only(compiled, lo_s, up_s)

    # Column layout: structural | slacks | artificials.
    slack_lo = np.zeros(m)
    slack_up = np.zeros(m)
    for i, rel in enumerate(compiled.relations):
        if rel == LE:
            slack_lo[i], slack_up[i] = 0.0, math.inf
        elif rel == GE:
            slack_lo[i], slack_up[i] = -math.inf, 0.0
        else:
            slack_lo[i], slack_up[i] = 0.0, 0.0

    lo = np.concatenate([lo_s, slack_lo, np.zeros(m)])
    up = np.concatenate([up_s, slack_up, np.full(m, math.inf)])

    x = np.zeros(n + 2 * m)
    x[: n + m] = _start_value(lo[: n + m], up[: n + m])

    residual = compiled.rhs - compiled.A @ x[:n] - x[n : n + m]
    sigma = np.where(residual >= 0.0, 1.0, -1.0)

    A_full = np.zeros((m, n + 2 * m))
    A_full[:, :n] = compiled.A
    A_full[:, n : n + m] = np.eye(m)
    A_full[:, n + m :] = np.diag(sigma)

    # Seed the basis with slacks wherever the starting point already
    # satisfies the row; only violated rows carry an artificial.
    basis = np.empty(m, dtype=int)
    diag = np.empty(m)
    any_artificial = False
    for i in range(m):
        r = residual[i]
        if slack_lo[i] - _FEAS_TOL <= r <= slack_up[i] + _FEAS_TOL:
            basis[i] = n + i
            x[n + i] = r
            diag[i] = 1.0
        else:
            basis[i] = n + m + i
            x[n + m + i] = abs(r)
            diag[i] = sigma[i]
            any_artificial = True

    state = _State(
        A=A_full,
        b=compiled.rhs,
        lo=lo,
        up=up,
        x=x,
        basis=basis,
        n_struct=n,
    )
    state.binv = np.diag(diag)

    if any_artificial:
        # Phase 1: minimize total artificial mass.
        c1 = np.zeros(n + 2 * m)
        c1[n + m :] = 1.0
        status = state.iterate(c1)
        if status != "optimal":
            raise SimplexError("phase 1 cannot be unbounded")
        state.recompute_basics()
        if float(c1 @ state.x) > 1e-6:
            return _RawResult(status="infeasible")
        # Artificials still basic at zero would pollute the duals of their
        # rows; swap in a real column wherever one exists (redundant rows
        # keep theirs, pinned at zero).
        state.drive_out_artificials(n + m)

    # Phase 2: original costs; artificials pinned to zero.
    state.up[n + m :] = 0.0
    nonbasic_art = np.setdiff1d(np.arange(n + m, n + 2 * m), state.basis)
    state.x[nonbasic_art] = 0.0
    c2 = np.zeros(n + 2 * m)
    c2[:n] = compiled.c
    status = state.iterate(c2)
    if status == "unbounded":
        return _RawResult(status="unbounded")

    state.recompute_basics()
    y = c2[state.basis] @ state.binv
    reduced_all = c2 - y @ state.A
    return _RawResult(
        status="optimal",
        x=state.x[:n].copy(),
        duals=y.copy(),
        reduced=reduced_all[:n].copy(),
        objective=float(compiled.c @ state.x[:n]),
    )


def _start_value(lo: np.ndarray, up: np.ndarray) -> np.ndarray:
    """Finite bound nearest zero; zero for free variables."""
    val = np.where(np.isfinite(lo), lo, np.where(np.isfinite(up), up, 0.0))
    # Prefer an upper bound when it is closer to zero than the lower one.
    both = np.isfinite(lo) & np.isfinite(up)
    val = np.where(both & (np.abs(up) < np.abs(lo)), up, val)
    return val


def _solve_bounds_only(
    compiled: CompiledModel, lo: np.ndarray, up: np.ndarray
) -> _RawResult:
    x = _start_value(lo, up)
    for j, cost in enumerate(compiled.c):
        if cost > 0:
            if not np.isfinite(lo[j]):
                return _RawResult(status="unbounded")
            x[j] = lo[j]
        elif cost < 0:
            if not np.isfinite(up[j]):
                return _RawResult(status="unbounded")
            x[j] = up[j]
    return _RawResult(
        status="optimal",
        x=x,
        duals=np.zeros(0),
        reduced=compiled.c.copy(),
        objective=float(compiled.c @ x),
    )


class _State:
    def __init__(self, A, b, lo, up, x, basis, n_struct):
        self.A = A
        self.b = b
        self.lo = lo
        self.up = up
        self.x = x
        self.basis = basis
        self.n_struct = n_struct
        self.m = A.shape[0]
        self.ncols = A.shape[1]
        self.binv = np.eye(self.m)
        self.pivots_since_refactor = 0
        self._outer_buf = np.empty((self.m, self.m))
        # Static column norms for approximate steepest-edge pricing.
        self._price_weight = 1.0 / np.sqrt(1.0 + (A * A).sum(axis=0))

    def refactorize(self) -> None:
        B = self.A[:, self.basis]
        try:
            self.binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded by pivoting
            raise SimplexError("singular basis") from exc
        self.pivots_since_refactor = 0
        self.recompute_basics()

    def recompute_basics(self) -> None:
        mask = np.ones(self.ncols, dtype=bool)
        mask[self.basis] = False
        rhs_eff = self.b - self.A[:, mask] @ self.x[mask]
        self.x[self.basis] = self.binv @ rhs_eff

    def drive_out_artificials(self, n_real: int) -> None:
        """Degenerate pivots replacing basic zero-artificials by real columns."""
        for r in range(self.m):
            if self.basis[r] < n_real:
                continue
            row = self.binv[r] @ self.A[:, :n_real]
            nonbasic = np.ones(n_real, dtype=bool)
            nonbasic[self.basis[self.basis < n_real]] = False
            candidates = np.flatnonzero(nonbasic & (np.abs(row) > 1e-7))
            if candidates.size == 0:
                continue
            j = int(candidates[0])
            w = self.binv @ self.A[:, j]
            self.x[self.basis[r]] = 0.0
            self.basis[r] = j
            self._update_binv(w, r)

    def iterate(self, c: np.ndarray) -> str:
        in_basis = np.zeros(self.ncols, dtype=bool)
        in_basis[self.basis] = True
        degenerate_run = 0
        bland = False
        max_iters = _MAX_ITERS_FACTOR * (self.ncols + self.m)

        movable_range = self.up - self.lo > _PIVOT_TOL
        finite_lo = np.isfinite(self.lo)
        finite_up = np.isfinite(self.up)
        is_free = ~finite_lo & ~finite_up

        for _ in range(max_iters):
            y = c[self.basis] @ self.binv
            d = c - y @ self.A

            movable = ~in_basis & movable_range
            at_lower = movable & finite_lo & (np.abs(self.x - self.lo) <= 1e-9)
            free = movable & is_free
            at_upper = movable & ~at_lower & ~free

            can_up = (at_lower | free) & (d < -_DUAL_TOL)
            can_down = at_upper & (d > _DUAL_TOL)
            candidates = np.flatnonzero(can_up | can_down | (free & (d > _DUAL_TOL)))
            if candidates.size == 0:
                return "optimal"

            if bland:
                j = int(candidates[0])
            else:
                scores = np.abs(d[candidates]) * self._price_weight[candidates]
                j = int(candidates[np.argmax(scores)])
            direction = 1.0 if d[j] < 0 else -1.0

            w = self.binv @ self.A[:, j]
            step, leave_pos, leave_to_upper = self._ratio_test(j, direction, w, bland)
            if step is None:
                return "unbounded"

            if step < _PIVOT_TOL:
                degenerate_run += 1
                if degenerate_run >= _DEGENERATE_RUN:
                    bland = True
            else:
                degenerate_run = 0

            # Apply the move.
            self.x[self.basis] -= direction * step * w
            self.x[j] += direction * step

            if leave_pos is None:
                # Bound flip: snap to the exact opposite bound, no basis change.
                self.x[j] = self.up[j] if direction > 0 else self.lo[j]
                continue

            leaving = self.basis[leave_pos]
            self.x[leaving] = self.up[leaving] if leave_to_upper else self.lo[leaving]
            in_basis[leaving] = False
            in_basis[j] = True
            self.basis[leave_pos] = j
            self._update_binv(w, leave_pos)

            self.pivots_since_refactor += 1
            if self.pivots_since_refactor >= _REFACTOR_EVERY:
                self.refactorize()

        raise SimplexError("iteration limit exceeded; possible numerical cycling")

    def _ratio_test(self, j: int, direction: float, w: np.ndarray, bland: bool):
        """Largest step for the entering column; returns (step, leave_pos, to_upper).

        ``leave_pos`` is None when the entering variable flips to its other
        bound without a basis change; step None signals unboundedness.
        """
        best = self.up[j] - self.lo[j]  # own range (inf allowed)
        leave_pos = None
        leave_to_upper = False

        delta = -direction * w  # change in basic values per unit step
        xb = self.x[self.basis]
        lo_b = self.lo[self.basis]
        up_b = self.up[self.basis]

        dec = delta < -_PIVOT_TOL
        inc = delta > _PIVOT_TOL
        with np.errstate(invalid="ignore", divide="ignore"):
            t_dec = np.where(dec, (xb - lo_b) / (-delta), np.inf)
            t_inc = np.where(inc, (up_b - xb) / delta, np.inf)
        t_dec = np.where(np.isnan(t_dec), np.inf, t_dec)
        t_inc = np.where(np.isnan(t_inc), np.inf, t_inc)
        t_rows = np.minimum(t_dec, t_inc)
        t_rows = np.maximum(t_rows, 0.0)

        if t_rows.size:
            t_min = float(np.min(t_rows))
            if t_min < best:
                ties = np.flatnonzero(t_rows <= t_min + 1e-12)
                if bland:
                    # Bland anti-cycling: lowest leaving column index among ties.
                    pos = int(ties[np.argmin(self.basis[ties])])
                else:
                    pos = int(ties[0])
                best = t_rows[pos]
                leave_pos = pos
                leave_to_upper = t_inc[pos] <= t_dec[pos]
        if not math.isfinite(best):
            return None, None, False
        return float(best), leave_pos, leave_to_upper

    def _update_binv(self, w: np.ndarray, r: int) -> None:
        piv = w[r]
        if abs(piv) < _PIVOT_TOL:
            # Should be unreachable: the ratio test only picks rows with a
            # usable pivot. Rebuild defensively; raises if truly singular.
            self.refactorize()
            return
        pivrow = self.binv[r] / piv
        np.multiply.outer(w, pivrow, out=self._outer_buf)
        self.binv -= self._outer_buf
        self.binv[r] = pivrow
