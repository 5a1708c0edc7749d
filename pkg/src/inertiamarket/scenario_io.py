"""Scenario file ingestion: strict JSON parsing with path-aware errors."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .model import GridParams, Scenario, ScenarioError, SyncGenerator, ViUnit, validate

BUNDLED = ("small_system", "rts96")


class ScenarioParseError(ValueError):
    """Malformed scenario document: bad JSON, unknown keys or wrong types."""


_GEN_FIELDS = {
    "id": str,
    "p_max": float,
    "p_min": float,
    "fuel_cost": float,
    "startup_cost": float,
    "inertia_const": float,
    "min_up": int,
    "min_down": int,
}
_GEN_DEFAULTS = {"min_up": 1, "min_down": 1}
_VI_FIELDS = {
    "id": str,
    "p_max": float,
    "p_min": float,
    "inertia_const": float,
    "bid_cost": float,
}
_VI_DEFAULTS = {"p_min": 0.0, "bid_cost": 50.0}
_GRID_FIELDS = {"f0": float, "rocof_limit": float, "pu_base": float}
_GRID_DEFAULTS = {"f0": 50.0, "rocof_limit": 0.25, "pu_base": None}
_TOP_KEYS = {
    "name",
    "horizon",
    "generators",
    "vi_units",
    "load",
    "wind",
    "disturbance",
    "grid",
    "profiles_placeholder",
}


def parse_scenario(text: str, name_hint: str = "scenario") -> Scenario:
    """Parse and validate a scenario JSON document.

    Unknown fields are rejected with their paths; type and structural
    problems are aggregated into one error. A scenario that parses but
    breaks an invariant raises :class:`ScenarioError` listing every
    violation.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(
            f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(doc, dict):
        raise ScenarioParseError("scenario document must be a JSON object")

    errors: list[str] = []
    for key in doc:
        if key not in _TOP_KEYS:
            errors.append(f"unknown field: {key}")

    name = _expect(doc, "name", str, name_hint, errors)
    horizon = _expect(doc, "horizon", int, None, errors)
    if horizon is None and "horizon" not in doc:
        errors.append("missing field: horizon")

    gens = []
    for i, entry in enumerate(_expect_list(doc, "generators", errors)):
        parsed = _parse_record(entry, _GEN_FIELDS, _GEN_DEFAULTS, f"generators[{i}]", errors)
        if parsed is not None:
            gens.append(SyncGenerator(**parsed))
    vis = []
    for i, entry in enumerate(_expect_list(doc, "vi_units", errors, optional=True)):
        parsed = _parse_record(entry, _VI_FIELDS, _VI_DEFAULTS, f"vi_units[{i}]", errors)
        if parsed is not None:
            vis.append(ViUnit(**parsed))

    load = _parse_series_map(doc.get("load", {}), "load", errors)
    wind = _parse_series_map(doc.get("wind", {}), "wind", errors)
    disturbance = _parse_numbers(doc.get("disturbance", []), "disturbance", errors)

    grid_doc = doc.get("grid", {})
    grid = GridParams()
    if isinstance(grid_doc, dict):
        parsed = _parse_record(
            grid_doc, _GRID_FIELDS, _GRID_DEFAULTS, "grid", errors, allow_none={"pu_base"}
        )
        if parsed is not None:
            grid = GridParams(**parsed)
    else:
        errors.append("grid: must be an object")

    placeholder = doc.get("profiles_placeholder", False)
    if not isinstance(placeholder, bool):
        errors.append("profiles_placeholder: must be a boolean")
        placeholder = False

    if errors:
        raise ScenarioParseError("; ".join(errors))

    scenario = Scenario(
        name=name or name_hint,
        horizon=horizon,
        generators=tuple(gens),
        vi_units=tuple(vis),
        load=load,
        wind=wind,
        disturbance=tuple(disturbance),
        grid=grid,
        profiles_placeholder=placeholder,
    )
    violations = validate(scenario)
    if violations:
        raise ScenarioError(violations)
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    """Load a scenario from a file, or from the bundled set by name."""
    p = Path(path)
    if not p.exists() and p.suffix == "" and p.name in BUNDLED:
        return load_bundled(p.name)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read {p}: {exc.strerror}") from None
    return parse_scenario(text, name_hint=p.stem)


def load_bundled(name: str) -> Scenario:
    """Load one of the scenarios shipped with the package."""
    if name not in BUNDLED:
        raise ScenarioParseError(
            f"unknown bundled scenario {name!r}; available: {', '.join(BUNDLED)}"
        )
    text = resources.files("inertiamarket.data").joinpath(f"{name}.json").read_text()
    return parse_scenario(text, name_hint=name)


def dump_scenario(scenario: Scenario) -> str:
    """Serialize a scenario to the same JSON dialect ``parse_scenario`` reads."""
    return json.dumps(scenario.to_dict(), indent=2, sort_keys=True) + "\n"


def _expect(doc, key, typ, default, errors):
    if key not in doc:
        return default
    val = doc[key]
    if typ is float and isinstance(val, (int, float)) and not isinstance(val, bool):
        return float(val)
    if typ is int and isinstance(val, int) and not isinstance(val, bool):
        return val
    if typ is str and isinstance(val, str):
        return val
    errors.append(f"{key}: expected {typ.__name__}")
    return default


def _expect_list(doc, key, errors, optional=False):
    if key not in doc:
        if not optional:
            errors.append(f"missing field: {key}")
        return []
    val = doc[key]
    if not isinstance(val, list):
        errors.append(f"{key}: expected a list")
        return []
    return val


def _parse_record(entry, fields, defaults, path, errors, allow_none=frozenset()):
    if not isinstance(entry, dict):
        errors.append(f"{path}: expected an object")
        return None
    out = {}
    bad = False
    for key, val in entry.items():
        if key not in fields:
            errors.append(f"{path}.{key}: unknown field")
            bad = True
    for key, typ in fields.items():
        if key in entry:
            val = entry[key]
            if key in allow_none and val is None:
                out[key] = None
            elif typ is float and isinstance(val, (int, float)) and not isinstance(val, bool):
                out[key] = float(val)
            elif typ is int and isinstance(val, int) and not isinstance(val, bool):
                out[key] = val
            elif typ is str and isinstance(val, str):
                out[key] = val
            else:
                errors.append(f"{path}.{key}: expected {typ.__name__}")
                bad = True
        elif key in defaults:
            out[key] = defaults[key]
        else:
            errors.append(f"{path}.{key}: missing")
            bad = True
    return None if bad else out


def _parse_series_map(doc, path, errors):
    if not isinstance(doc, dict):
        errors.append(f"{path}: expected an object of named series")
        return {}
    out = {}
    for name, series in doc.items():
        vals = _parse_numbers(series, f"{path}.{name}", errors)
        out[name] = tuple(vals)
    return out


def _parse_numbers(doc, path, errors):
    if not isinstance(doc, list):
        errors.append(f"{path}: expected a list of numbers")
        return []
    out = []
    for i, v in enumerate(doc):
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            out.append(float(v))
        else:
            errors.append(f"{path}[{i}]: expected a number")
    return out
