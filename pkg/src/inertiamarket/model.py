"""Domain data types: generators, virtual-inertia units, grid parameters, scenarios.

Everything here is immutable after construction and safe to share across
concurrent workers. Validation never raises on bad data; it returns the
list of violations so callers can aggregate and report them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class SyncGenerator:
    """A conventional synchronous generator.

    ``inertia_const`` is the per-unit inertia constant H in seconds on the
    machine base; the rotor contribution used throughout the package is
    ``2 * H * p_max`` (MW s^2).
    """

    id: str
    p_max: float  # MW
    p_min: float  # MW
    fuel_cost: float  # EUR/MWh
    startup_cost: float  # EUR
    inertia_const: float  # s
    min_up: int = 1  # hours
    min_down: int = 1  # hours

    @property
    def rotor_inertia(self) -> float:
        """Inertia contribution 2*H*Pmax when committed, in MW s^2."""
        return 2.0 * self.inertia_const * self.p_max


@dataclass(frozen=True)
class ViUnit:
    """A converter-interfaced unit (battery) offering virtual inertia.

    Provision is continuous: a power allocation ``p`` in [p_min, p_max]
    yields ``2 * H * p`` MW s^2 of synthetic inertia, bid at ``bid_cost``
    EUR per MW s^2 per hour. VI units are always online.
    """

    id: str
    p_max: float  # MW
    inertia_const: float  # s
    bid_cost: float = 50.0  # EUR/(MW s^2)
    p_min: float = 0.0  # MW

    @property
    def max_inertia(self) -> float:
        return 2.0 * self.inertia_const * self.p_max


@dataclass(frozen=True)
class GridParams:
    """System-wide frequency parameters.

    ``pu_base`` optionally overrides the MW base used to convert the
    per-unit disturbance into inertia requirements. When left unset the
    base is derived from the fleet: total SG capacity, plus total VI
    capacity whenever virtual inertia participates in the formulation.
    """

    f0: float = 50.0  # Hz
    rocof_limit: float = 0.25  # Hz/s
    pu_base: float | None = None  # MW


@dataclass(frozen=True)
class Scenario:
    """A complete market-clearing case: fleet, time series and grid data.

    ``load`` and ``wind`` map node / farm ids to hourly MWh series of
    length ``horizon``; ``disturbance`` is the per-unit power imbalance
    the system must survive at each hour.
    """

    name: str
    horizon: int
    generators: tuple[SyncGenerator, ...]
    vi_units: tuple[ViUnit, ...] = ()
    load: dict[str, tuple[float, ...]] = field(default_factory=dict)
    wind: dict[str, tuple[float, ...]] = field(default_factory=dict)
    disturbance: tuple[float, ...] = ()
    grid: GridParams = field(default_factory=GridParams)
    profiles_placeholder: bool = False

    @property
    def sg_capacity(self) -> float:
        return sum(g.p_max for g in self.generators)

    @property
    def vi_capacity(self) -> float:
        return sum(v.p_max for v in self.vi_units)

    def pu_base(self, vi_enabled: bool) -> float:
        """MW base for the per-unit disturbance under the active formulation."""
        if self.grid.pu_base is not None:
            return self.grid.pu_base
        base = self.sg_capacity
        if vi_enabled:
            base += self.vi_capacity
        return base

    def net_load(self) -> list[float]:
        """Hourly load minus wind, summed over nodes and farms (single bus)."""
        out = []
        for t in range(self.horizon):
            load = sum(series[t] for series in self.load.values())
            wind = sum(series[t] for series in self.wind.values())
            out.append(load - wind)
        return out

    def generator(self, unit_id: str) -> SyncGenerator:
        for g in self.generators:
            if g.id == unit_id:
                return g
        raise KeyError(unit_id)

    def with_vi_bids(self, bid: float) -> "Scenario":
        """Copy of the scenario with every VI unit bidding ``bid``."""
        return replace(
            self, vi_units=tuple(replace(v, bid_cost=bid) for v in self.vi_units)
        )

    def with_disturbance(self, disturbance: tuple[float, ...]) -> "Scenario":
        return replace(self, disturbance=tuple(disturbance))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "horizon": self.horizon,
            "generators": [
                {
                    "id": g.id,
                    "p_max": g.p_max,
                    "p_min": g.p_min,
                    "fuel_cost": g.fuel_cost,
                    "startup_cost": g.startup_cost,
                    "inertia_const": g.inertia_const,
                    "min_up": g.min_up,
                    "min_down": g.min_down,
                }
                for g in self.generators
            ],
            "vi_units": [
                {
                    "id": v.id,
                    "p_max": v.p_max,
                    "p_min": v.p_min,
                    "inertia_const": v.inertia_const,
                    "bid_cost": v.bid_cost,
                }
                for v in self.vi_units
            ],
            "load": {n: list(s) for n, s in self.load.items()},
            "wind": {w: list(s) for w, s in self.wind.items()},
            "disturbance": list(self.disturbance),
            "grid": {
                "f0": self.grid.f0,
                "rocof_limit": self.grid.rocof_limit,
                **(
                    {"pu_base": self.grid.pu_base}
                    if self.grid.pu_base is not None
                    else {}
                ),
            },
            **({"profiles_placeholder": True} if self.profiles_placeholder else {}),
        }


class ScenarioError(ValueError):
    """A scenario is structurally unusable; carries the aggregated violations."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


def _finite(x: float) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def validate(scenario: Scenario) -> list[str]:
    """Check every structural invariant; returns an empty list iff clean.

    Violations are data, not failures: the caller decides whether to
    abort, warn or aggregate.
    """
    v: list[str] = []
    if scenario.horizon <= 0:
        v.append("horizon must be a positive hour count")

    seen: set[str] = set()
    for g in scenario.generators:
        tag = f"generator {g.id}"
        if g.id in seen:
            v.append(f"{tag}: duplicate unit id")
        seen.add(g.id)
        if not (_finite(g.p_max) and _finite(g.p_min)) or g.p_min < 0 or g.p_max < g.p_min:
            v.append(f"{tag}: requires p_max >= p_min >= 0")
        if not _finite(g.fuel_cost) or g.fuel_cost < 0:
            v.append(f"{tag}: fuel_cost must be >= 0")
        if not _finite(g.startup_cost) or g.startup_cost < 0:
            v.append(f"{tag}: startup_cost must be >= 0")
        if not _finite(g.inertia_const) or g.inertia_const <= 0:
            v.append(f"{tag}: inertia_const must be > 0")
        if g.min_up < 1 or g.min_down < 1:
            v.append(f"{tag}: min_up and min_down must be >= 1 hour")

    for u in scenario.vi_units:
        tag = f"vi unit {u.id}"
        if u.id in seen:
            v.append(f"{tag}: duplicate unit id")
        seen.add(u.id)
        if not _finite(u.p_max) or u.p_max <= 0:
            v.append(f"{tag}: p_max must be > 0")
        if not _finite(u.p_min) or u.p_min < 0 or u.p_min > u.p_max:
            v.append(f"{tag}: requires 0 <= p_min <= p_max")
        if not _finite(u.inertia_const) or u.inertia_const <= 0:
            v.append(f"{tag}: inertia_const must be > 0")
        if not _finite(u.bid_cost) or u.bid_cost < 0:
            v.append(f"{tag}: bid_cost must be >= 0")

    if not scenario.generators:
        v.append("scenario needs at least one synchronous generator")
    elif scenario.sg_capacity <= 0:
        v.append("total SG capacity must be > 0")

    for kind, series_map in (("load", scenario.load), ("wind", scenario.wind)):
        for name, series in series_map.items():
            if len(series) != scenario.horizon:
                v.append(
                    f"{kind} series {name}: length {len(series)} != horizon {scenario.horizon}"
                )
            if any(not _finite(x) or x < 0 for x in series):
                v.append(f"{kind} series {name}: values must be finite and >= 0")

    if len(scenario.disturbance) != scenario.horizon:
        v.append(
            f"disturbance: length {len(scenario.disturbance)} != horizon {scenario.horizon}"
        )
    if any(not _finite(d) or abs(d) >= 1 for d in scenario.disturbance):
        v.append("disturbance: per-unit values must satisfy |dP| < 1")

    grid = scenario.grid
    if not _finite(grid.f0) or grid.f0 <= 0:
        v.append("grid: f0 must be > 0")
    if not _finite(grid.rocof_limit) or grid.rocof_limit <= 0:
        v.append("grid: rocof_limit must be > 0")
    if grid.pu_base is not None and (not _finite(grid.pu_base) or grid.pu_base <= 0):
        v.append("grid: pu_base must be > 0 when given")

    return v
