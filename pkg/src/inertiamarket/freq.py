"""Closed-form post-contingency frequency metrics.

The aggregate low-inertia system response to a step imbalance ``delta_p``
(per unit) admits closed forms for the three metrics that matter for
scheduling: the maximum instantaneous rate of change of frequency, the
quasi steady-state deviation, and the frequency nadir. All functions are
pure; values are per unit unless converted with :func:`to_hz`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class FrequencyResponseParams:
    """Aggregate system parameters of the frequency response model.

    ``zeta``, ``omega_n`` and ``t_m`` (damping ratio, natural frequency,
    nadir time) are inputs supplied by the caller; this package never
    derives them from the other parameters.
    """

    M: float  # aggregate inertia, s
    D: float  # damping, p.u.
    R_g: float  # aggregate droop gain, p.u.
    F_g: float  # fraction of power from high-pressure turbines, p.u.
    T: float  # turbine time constant, s
    zeta: float  # damping ratio
    omega_n: float  # natural frequency, rad/s
    t_m: float  # time of nadir, s

    def __post_init__(self) -> None:
        if self.M <= 0:
            raise ValueError("aggregate inertia M must be > 0")
        if self.D <= 0:
            raise ValueError("damping D must be > 0")
        if self.R_g < 0 or self.F_g < 0:
            raise ValueError("droop and turbine fraction must be >= 0")
        if self.T < 0:
            raise ValueError("turbine time constant must be >= 0")
        if self.zeta <= 0 or self.omega_n <= 0 or self.t_m < 0:
            raise ValueError("zeta, omega_n must be > 0 and t_m >= 0")


def rocof_max(delta_p: float, M: float) -> float:
    """Maximum instantaneous RoCoF ``-delta_p / M`` in p.u./s."""
    if M <= 0:
        raise ValueError("aggregate inertia M must be > 0")
    return -delta_p / M


def steady_state_dev(delta_p: float, D: float, R_g: float) -> float:
    """Quasi steady-state frequency deviation ``-delta_p / (D + R_g)`` in p.u."""
    if D + R_g <= 0:
        raise ValueError("D + R_g must be > 0")
    return -delta_p / (D + R_g)


def nadir(delta_p: float, params: FrequencyResponseParams) -> float:
    """Largest transient frequency deviation after the disturbance, in p.u.

    Reduces to :func:`steady_state_dev` when the turbine constant is zero
    or the droop gain equals the turbine fraction.
    """
    p = params
    if p.R_g < p.F_g:
        raise ValueError("droop gain must be >= turbine fraction (negative radicand)")
    overshoot = math.sqrt(p.T * (p.R_g - p.F_g) / p.M) * math.exp(
        -p.zeta * p.omega_n * p.t_m
    )
    return -delta_p / (p.D + p.R_g) * (1.0 + overshoot)


def min_inertia_for_rocof(delta_p: float, f0: float, rocof_limit: float) -> float:
    """Smallest aggregate inertia (s) keeping RoCoF within ``rocof_limit``.

    Inverts the scheduling constraint ``(rocof_limit / f0) * M >= |delta_p|``.
    """
    if rocof_limit <= 0:
        raise ValueError("rocof_limit must be > 0")
    if f0 <= 0:
        raise ValueError("f0 must be > 0")
    return abs(delta_p) * f0 / rocof_limit


def to_hz(value_pu: float, f0: float = 50.0) -> float:
    """Convert a per-unit frequency quantity to Hz (the human-facing unit)."""
    return value_pu * f0
