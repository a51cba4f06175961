"""Meta-scheduling of training jobs.

Training the scheduler's own network costs server resources: a training
job reserves `train_demand` units for one slot, and only then do gradient
updates run.  Two live strategies decide when to pay that cost — a fixed
period (PTS) and an adaptive score over the hypothetical post-insertion
state (ATS) — plus a zero-cost periodic baseline used as an upper bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .agent import DdqnAgent
from .env import EnvParams, SystemState, insert_training_job

__all__ = [
    "REASON_PERIODIC",
    "REASON_PERCENTILE",
    "REASON_GATE_FALLBACK",
    "REASON_NO_CAPACITY",
    "REASON_IDLE",
    "TrainingDecision",
    "PtsState",
    "AtsState",
    "pts_decide",
    "ats_psi",
    "phi_measure",
    "ats_decide",
    "ideal_decide",
    "with_insertion",
]

REASON_PERIODIC = "periodic"
REASON_PERCENTILE = "percentile"
REASON_GATE_FALLBACK = "gate-fallback"
REASON_NO_CAPACITY = "no-capacity-skip"
REASON_IDLE = "idle"


@dataclass(frozen=True)
class TrainingDecision:
    train: bool
    state: Optional[SystemState]  # post-insertion state; None for the zero-cost baseline
    reason: str


@dataclass
class PtsState:
    """Fixed-period trigger; fires every `period` slots regardless of state."""

    period: int = 50

    def __post_init__(self):
        if self.period < 1:
            raise ValueError("training period must be >= 1")


def pts_decide(pts: PtsState, slot: int) -> TrainingDecision:
    if slot % pts.period == 0:
        return TrainingDecision(True, None, REASON_PERIODIC)
    return TrainingDecision(False, None, REASON_IDLE)


def ideal_decide(slot: int, period: int) -> TrainingDecision:
    """Periodic trigger that reserves nothing: training is free."""
    if slot % period == 0:
        return TrainingDecision(True, None, REASON_PERIODIC)
    return TrainingDecision(False, None, REASON_IDLE)


def with_insertion(decision: TrainingDecision, state: SystemState,
                   params: EnvParams) -> TrainingDecision:
    """Attach the post-insertion state to a firing decision.

    Downgrades to a no-capacity skip when the grid cannot host the
    training job this slot.
    """
    if not decision.train:
        return decision
    inserted = insert_training_job(state, params)
    if inserted is None:
        return TrainingDecision(False, None, REASON_NO_CAPACITY)
    return TrainingDecision(True, inserted, decision.reason)


def _max_q(agent: DdqnAgent, state: SystemState) -> float:
    return float(agent.q_values(agent.encoder.encode(state)).max())


def ats_psi(agent: DdqnAgent, state: SystemState, params: EnvParams,
            beta: float) -> Optional[float]:
    """Training-favorability score of the current state.

    psi = max_a Q(s*, a) + beta * (max_a Q(s*, a) - max_a Q(s, a)) with s*
    the hypothetical post-insertion state; None when s* is infeasible.
    """
    inserted = insert_training_job(state, params)
    if inserted is None:
        return None
    m_star = _max_q(agent, inserted)
    return m_star + beta * (m_star - _max_q(agent, state))


def phi_measure(agent: DdqnAgent, state: SystemState,
                params: EnvParams) -> Optional[float]:
    """Reliability yardstick: max_a Q(s*, a) minus the mean of Q(s, .)."""
    inserted = insert_training_job(state, params)
    if inserted is None:
        return None
    q_now = agent.q_values(agent.encoder.encode(state))
    return _max_q(agent, inserted) - float(q_now.mean())


@dataclass
class AtsState:
    """Adaptive trigger: train in states scoring above the recent-psi percentile.

    The percentile rule only runs once the psi window is full and the last
    observed TD error is small against the phi yardstick; otherwise the
    embedded periodic trigger takes over.
    """

    psi_capacity: int = 1000
    percentile: float = 0.99
    beta: float = 0.4
    fallback: PtsState = field(default_factory=PtsState)
    gate_passes: int = 0
    gate_fails: int = 0
    percentile_triggers: int = 0

    def __post_init__(self):
        if not 0.0 < self.percentile < 1.0:
            raise ValueError("percentile must lie in (0, 1)")
        self._psi = np.empty(self.psi_capacity)
        self._size = 0
        self._pos = 0

    @property
    def psi_full(self) -> bool:
        return self._size == self.psi_capacity

    def record_psi(self, value: float) -> None:
        self._psi[self._pos] = value
        self._pos = (self._pos + 1) % self.psi_capacity
        self._size = min(self._size + 1, self.psi_capacity)

    def psi_threshold(self) -> float:
        return float(np.quantile(self._psi[:self._size], self.percentile))


def ats_decide(ats: AtsState, agent: DdqnAgent, state: SystemState,
               last_delta: float, slot: int, params: EnvParams,
               features: np.ndarray = None) -> TrainingDecision:
    """One adaptive training decision for this slot.

    Scores the hypothetical insertion, records it, and either applies the
    percentile rule (gate permitting) or falls back to the periodic
    trigger.  The input state is never modified.  `features` may carry the
    already-encoded current state to avoid re-encoding.
    """
    inserted = insert_training_job(state, params)
    if inserted is None:
        return TrainingDecision(False, None, REASON_NO_CAPACITY)

    if features is None:
        features = agent.encoder.encode(state)
    q_now = agent.q_values(features)
    m_star = _max_q(agent, inserted)
    psi = m_star + ats.beta * (m_star - float(q_now.max()))
    ats.record_psi(psi)

    if not ats.psi_full:
        if pts_decide(ats.fallback, slot).train:
            return TrainingDecision(True, inserted, REASON_PERIODIC)
        return TrainingDecision(False, None, REASON_IDLE)

    phi = m_star - float(q_now.mean())
    if abs(last_delta) <= phi:
        ats.gate_passes += 1
        if psi > ats.psi_threshold():
            ats.percentile_triggers += 1
            return TrainingDecision(True, inserted, REASON_PERCENTILE)
        return TrainingDecision(False, None, REASON_IDLE)

    ats.gate_fails += 1
    if pts_decide(ats.fallback, slot).train:
        return TrainingDecision(True, inserted, REASON_GATE_FALLBACK)
    return TrainingDecision(False, None, REASON_IDLE)


INITIAL_DELTA = math.inf  # before any greedy transition the gate must fail
