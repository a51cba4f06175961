"""User job generation: per-user Bernoulli arrivals with two job classes.

The target average load rho is translated into a per-user arrival
probability through the closed-form inverse of the offered-load equation
for the default class mix (short jobs are light and urgent, long jobs heavy
and patient).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .env import Job
from .errors import ConfigurationError

__all__ = [
    "JobClassSpec",
    "WorkloadParams",
    "LoadSchedule",
    "arrival_probability",
    "sample_arrivals",
    "load_at",
]


@dataclass(frozen=True)
class JobClassSpec:
    name: str
    exec_lo: int
    exec_hi: int
    demand_lo: int
    demand_hi: int
    deadline: int
    probability: float


def default_specs(capacity: int = 20, p_short: float = 0.2,
                  t_short: int = 4, t_long: int = 8) -> tuple:
    """Short and long job classes, ranges scaled off the server capacity."""
    c_lo, c_hi = capacity // 4, capacity // 2
    return (
        JobClassSpec("short", max(1, capacity // 20), 3 * capacity // 20,
                     c_lo, c_hi, t_short, p_short),
        JobClassSpec("long", 2 * capacity // 5, 3 * capacity // 5,
                     c_lo, c_hi, t_long, 1.0 - p_short),
    )


@dataclass
class WorkloadParams:
    n_user: int = 1000
    p_short: float = 0.2
    capacity: int = 20
    specs: tuple = field(default=())

    def __post_init__(self):
        if self.n_user < 1:
            raise ConfigurationError("n_user must be >= 1")
        if not 0.0 <= self.p_short <= 1.0:
            raise ConfigurationError("p_short must lie in [0, 1]")
        if not self.specs:
            self.specs = default_specs(self.capacity, self.p_short)
        total = sum(s.probability for s in self.specs)
        if abs(total - 1.0) > 1e-9:
            raise ConfigurationError(f"class probabilities sum to {total}, expected 1")


@dataclass(frozen=True)
class LoadSchedule:
    kind: str = "constant"      # "constant" | "ramp"
    rho_start: float = 0.3
    rho_end: float = 0.3
    episodes: int = 1000

    def __post_init__(self):
        if self.kind not in ("constant", "ramp"):
            raise ConfigurationError(f"unknown load schedule kind {self.kind!r}")


def arrival_probability(rho: float, params: WorkloadParams) -> float:
    """Per-user Bernoulli probability that offers average load `rho`.

    Inverts rho = (3/8) * n_user * p * (1/2 - 2*p_short/5), which is the
    offered resource-time per slot of the default class mix normalized by
    capacity * horizon.
    """
    if rho < 0 or rho > 1:
        raise ConfigurationError(f"rho={rho} outside (0, 1]")
    denom = (3.0 / 8.0) * params.n_user * (0.5 - 2.0 * params.p_short / 5.0)
    if denom <= 0:
        raise ConfigurationError("load equation degenerate for these parameters")
    p = rho / denom
    if p >= 1.0:
        raise ConfigurationError(f"rho={rho} infeasible: needs per-user probability {p} >= 1")
    return p


def sample_arrivals(rng: np.random.Generator, p: float, params: WorkloadParams) -> list:
    """Draw this slot's arrivals; each user emits a job with probability p.

    The arrival count is drawn as one Binomial(n_user, p) variate, which is
    distributionally identical to n_user independent Bernoulli draws.
    """
    if p <= 0.0:
        return []
    n = int(rng.binomial(params.n_user, p))
    jobs = []
    specs = params.specs
    for _ in range(n):
        u = rng.random()
        acc = 0.0
        spec = specs[-1]
        for s in specs:
            acc += s.probability
            if u < acc:
                spec = s
                break
        e = int(rng.integers(spec.exec_lo, spec.exec_hi + 1))
        c = int(rng.integers(spec.demand_lo, spec.demand_hi + 1))
        jobs.append(Job(e, c, 0, spec.deadline))
    return jobs


def load_at(schedule: LoadSchedule, episode: int) -> float:
    """Average load for the given training episode (clamped past the end)."""
    if schedule.kind == "constant":
        return schedule.rho_start
    if schedule.episodes <= 1 or episode >= schedule.episodes - 1:
        return schedule.rho_end
    if episode < 0:
        return schedule.rho_start
    frac = episode / (schedule.episodes - 1)
    return schedule.rho_start + (schedule.rho_end - schedule.rho_start) * frac
