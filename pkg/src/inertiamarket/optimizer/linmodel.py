"""Linear model container shared by every solver backend.

A :class:`LinearModel` is a plain description of ``min c'x`` subject to
linear rows and variable bounds, with optional integrality flags. It is
deliberately solver-agnostic: the built-in simplex, branch and bound, and
any delegated backend all consume the same structure and produce the same
:class:`Solution`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LE, EQ, GE = "<=", "=", ">="
_RELATIONS = (LE, EQ, GE)


@dataclass
class Variable:
    name: str
    lower: float = 0.0
    upper: float = math.inf
    integral: bool = False
    # Branch-and-bound picks among fractional integral variables of the
    # highest priority class first; derived binaries (startup indicators)
    # get a lower priority so branching targets the drivers.
    branch_priority: int = 0


@dataclass
class Constraint:
    coeffs: dict[str, float]
    relation: str
    rhs: float
    label: str


class ModelError(ValueError):
    """Raised for malformed models: unknown variables, bad bounds, dup labels."""


@dataclass
class Solution:
    """Result of a solve.

    ``duals`` maps constraint labels to dObj/dRHS of the terminating basis
    (LP solves only; the basis the simplex ends with defines the reported
    duals under degeneracy). ``reduced_costs`` maps variable names to
    ``c_j - y'A_j``. Both are empty for MILP solves.
    """

    status: str  # "optimal" | "infeasible" | "unbounded"
    objective_value: float | None = None
    values: dict[str, float] = field(default_factory=dict)
    duals: dict[str, float] = field(default_factory=dict)
    reduced_costs: dict[str, float] = field(default_factory=dict)

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


class LinearModel:
    """Mutable builder for an LP/MILP instance (minimization)."""

    def __init__(self, name: str = "") -> None:
        self.name = name
        self.variables: list[Variable] = []
        self._var_index: dict[str, int] = {}
        self.objective: dict[str, float] = {}
        self.constraints: list[Constraint] = []
        self._labels: set[str] = set()

    # -- construction -------------------------------------------------

    def add_variable(
        self,
        name: str,
        lower: float = 0.0,
        upper: float = math.inf,
        integral: bool = False,
        cost: float = 0.0,
        branch_priority: int = 0,
    ) -> str:
        if name in self._var_index:
            raise ModelError(f"variable {name!r} declared twice")
        if lower > upper:
            raise ModelError(f"variable {name!r}: lower bound {lower} > upper {upper}")
        self._var_index[name] = len(self.variables)
        self.variables.append(Variable(name, lower, upper, integral, branch_priority))
        if cost:
            self.objective[name] = self.objective.get(name, 0.0) + cost
        return name

    def add_cost(self, name: str, coeff: float) -> None:
        if name not in self._var_index:
            raise ModelError(f"objective references undeclared variable {name!r}")
        self.objective[name] = self.objective.get(name, 0.0) + coeff

    def add_constraint(
        self, coeffs: dict[str, float], relation: str, rhs: float, label: str
    ) -> None:
        if relation not in _RELATIONS:
            raise ModelError(f"unknown relation {relation!r}")
        if label in self._labels:
            raise ModelError(f"constraint label {label!r} used twice")
        for name in coeffs:
            if name not in self._var_index:
                raise ModelError(
                    f"constraint {label!r} references undeclared variable {name!r}"
                )
        self._labels.add(label)
        self.constraints.append(Constraint(dict(coeffs), relation, float(rhs), label))

    # -- introspection ------------------------------------------------

    def variable(self, name: str) -> Variable:
        return self.variables[self._var_index[name]]

    @property
    def integral_names(self) -> list[str]:
        return [v.name for v in self.variables if v.integral]

    def copy(self) -> "LinearModel":
        out = LinearModel(self.name)
        for v in self.variables:
            out.add_variable(v.name, v.lower, v.upper, v.integral, branch_priority=v.branch_priority)
        out.objective = dict(self.objective)
        for c in self.constraints:
            out.add_constraint(dict(c.coeffs), c.relation, c.rhs, c.label)
        return out

    def relax_integrality(self) -> "LinearModel":
        out = self.copy()
        for v in out.variables:
            v.integral = False
        return out

    # -- dense form for the numerical engines --------------------------

    def compile(self) -> "CompiledModel":
        n = len(self.variables)
        m = len(self.constraints)
        c = np.zeros(n)
        for name, coeff in self.objective.items():
            c[self._var_index[name]] = coeff
        A = np.zeros((m, n))
        rhs = np.zeros(m)
        relations: list[str] = []
        for i, row in enumerate(self.constraints):
            for name, coeff in row.coeffs.items():
                A[i, self._var_index[name]] += coeff
            rhs[i] = row.rhs
            relations.append(row.relation)
        lower = np.array([v.lower for v in self.variables], dtype=float)
        upper = np.array([v.upper for v in self.variables], dtype=float)
        integral = np.array([v.integral for v in self.variables], dtype=bool)
        priority = np.array([v.branch_priority for v in self.variables], dtype=int)
        return CompiledModel(
            c=c,
            A=A,
            rhs=rhs,
            relations=relations,
            lower=lower,
            upper=upper,
            integral=integral,
            branch_priority=priority,
            var_names=[v.name for v in self.variables],
            row_labels=[r.label for r in self.constraints],
        )


@dataclass
class CompiledModel:
    c: np.ndarray
    A: np.ndarray
    rhs: np.ndarray
    relations: list[str]
    lower: np.ndarray
    upper: np.ndarray
    integral: np.ndarray
    branch_priority: np.ndarray
    var_names: list[str]
    row_labels: list[str]


def fix_binaries(model: LinearModel, assignment: dict[str, float]) -> LinearModel:
    """Clamp every integral variable to its assigned value and drop integrality.

    The assignment must cover every integral variable; a missing entry is an
    error naming the variable. Extra entries for continuous variables are
    ignored.
    """
    missing = [name for name in model.integral_names if name not in assignment]
    if missing:
        raise ModelError(
            "fix_binaries: no assignment for integral variable(s) "
            + ", ".join(sorted(missing))
        )
    out = model.copy()
    for v in out.variables:
        if v.integral:
            val = float(round(assignment[v.name]))
            v.lower = val
            v.upper = val
            v.integral = False
    return out


def lp_text(model: LinearModel) -> str:
    """Debug dump: variables, bounds and constraints, one per line."""

    def term(coeff: float, name: str) -> str:
        sign = "-" if coeff < 0 else "+"
        return f"{sign} {abs(coeff):g} {name}"

    lines = [f"\\ model {model.name or '(unnamed)'}", "minimize"]
    obj = " ".join(
        term(model.objective.get(v.name, 0.0), v.name)
        for v in model.variables
        if model.objective.get(v.name, 0.0)
    )
    lines.append(f"  obj: {obj or '0'}")
    lines.append("subject to")
    for con in model.constraints:
        body = " ".join(term(c, n) for n, c in sorted(con.coeffs.items()) if c)
        lines.append(f"  {con.label}: {body or '0'} {con.relation} {con.rhs:g}")
    lines.append("bounds")
    for v in model.variables:
        lines.append(f"  {v.lower:g} <= {v.name} <= {v.upper:g}")
    integrals = " ".join(model.integral_names)
    if integrals:
        lines.append("binary")
        lines.append(f"  {integrals}")
    lines.append("end")
    return "\n".join(lines) + "\n"
