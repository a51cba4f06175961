"""Discrete-time model of a single MEC server.

The server owns a finite job buffer and a grid of already-reserved
resources over the next `horizon` slots.  One scheduling decision is taken
per slot: serve one buffered job (reserving its resources at the earliest
feasible start) or do nothing.  Buffered jobs age every slot and are
dropped once they outlive their deadline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "Job",
    "EnvParams",
    "SystemState",
    "StepInfo",
    "empty_state",
    "delay_penalty",
    "deadline_count",
    "find_start",
    "is_valid",
    "reward",
    "schedule_job",
    "insert_training_job",
    "advance",
    "step",
]


@dataclass(frozen=True)
class Job:
    """One computational request.

    exec_time: slots of server time needed once scheduled (e).
    demand: resource units held for the whole execution (c).
    waited: slots already spent in the buffer (w).
    deadline: maximum wait before the job is dropped (T).
    """

    exec_time: int
    demand: int
    waited: int
    deadline: int


@dataclass
class EnvParams:
    capacity: int = 20        # total resource units per slot (C)
    buffer_size: int = 10     # buffer slots (L)
    horizon: int = 20         # reservation look-ahead in slots (M)
    sigma: float = 0.1        # weight of the expiry penalty
    train_demand: int = 20    # resources one training job reserves (c_tr)
    scale_reward: bool = True  # divide exec_time by capacity in the reward

    def __post_init__(self):
        if self.capacity < 1 or self.buffer_size < 1 or self.horizon < 1:
            raise ValueError("capacity, buffer_size and horizon must be >= 1")
        if not 1 <= self.train_demand <= self.capacity:
            raise ValueError("train_demand must lie in [1, capacity]")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    @property
    def n_actions(self) -> int:
        return self.buffer_size + 1

    @property
    def void_action(self) -> int:
        # Actions 0..L-1 address buffer slots; index L is the void action.
        return self.buffer_size


@dataclass
class SystemState:
    """Buffer contents plus the reserved-resource grid."""

    buffer: list  # length buffer_size, entries Job or None
    grid: np.ndarray  # shape (horizon,), ints in [0, capacity]

    def copy(self) -> "SystemState":
        return SystemState(list(self.buffer), self.grid.copy())


@dataclass
class StepInfo:
    valid: bool            # a job was actually served this slot
    served_phi: Optional[float]  # its delay satisfaction, None if nothing served
    discarded: int         # jobs dropped at the deadline during advance
    rejected: int          # arrivals bounced off a full buffer


def empty_state(params: EnvParams) -> SystemState:
    return SystemState([None] * params.buffer_size,
                       np.zeros(params.horizon, dtype=np.int64))


def delay_penalty(waited: int, deadline: int) -> float:
    """Satisfaction of a job entering service after `waited` of `deadline` slots.

    Full satisfaction below half the deadline, then linear decay to zero.
    """
    if waited < deadline / 2:
        return 1.0
    if waited < deadline:
        return 2.0 * (1.0 - waited / deadline)
    return 0.0


def deadline_count(state: SystemState, action: int) -> int:
    """Number of buffered jobs whose deadline expires this slot.

    A job expires when its incremented wait exceeds the deadline.  The slot
    addressed by `action` is excluded (void action excludes nothing).
    """
    total = 0
    for j, job in enumerate(state.buffer):
        if job is None or j == action:
            continue
        if job.waited + 1 > job.deadline:
            total += 1
    return total


def find_start(grid: np.ndarray, exec_time: int, demand: int, capacity: int) -> Optional[int]:
    """Earliest start slot with `demand` units free for `exec_time` consecutive slots."""
    run = 0
    for m in range(grid.shape[0]):
        if grid[m] + demand <= capacity:
            run += 1
            if run == exec_time:
                return m - exec_time + 1
        else:
            run = 0
    return None


def is_valid(state: SystemState, index: int, params: EnvParams):
    """Whether buffer slot `index` can be scheduled, and its earliest start.

    Raises on an out-of-range index; the void action is never "valid" in
    this sense and must not be passed here.
    """
    if not 0 <= index < params.buffer_size:
        raise IndexError(f"buffer index {index} outside [0, {params.buffer_size})")
    job = state.buffer[index]
    if job is None:
        return False, None
    start = find_start(state.grid, job.exec_time, job.demand, params.capacity)
    return start is not None, start


def reward(state: SystemState, action: int, params: EnvParams) -> float:
    """Per-slot reward: service value of a valid action minus the expiry penalty."""
    r = -params.sigma * deadline_count(state, action)
    if 0 <= action < params.buffer_size:
        valid, _ = is_valid(state, action, params)
        if valid:
            job = state.buffer[action]
            gain = job.exec_time / params.capacity if params.scale_reward else float(job.exec_time)
            r += gain * delay_penalty(job.waited, job.deadline)
    return r


def schedule_job(state: SystemState, index: int, params: EnvParams) -> SystemState:
    """Reserve resources for buffer slot `index` at its earliest start and empty the slot."""
    valid, start = is_valid(state, index, params)
    if not valid:
        raise ValueError(f"buffer slot {index} cannot be scheduled")
    job = state.buffer[index]
    grid = state.grid.copy()
    grid[start:start + job.exec_time] += job.demand
    buf = list(state.buffer)
    buf[index] = None
    return SystemState(buf, grid)


def insert_training_job(state: SystemState, params: EnvParams) -> Optional[SystemState]:
    """Reserve `train_demand` units for one slot at the earliest feasible moment.

    Returns the post-insertion state, or None when no slot within the
    horizon has enough free capacity.  The input state is not modified, so
    this can also score hypothetical insertions.
    """
    start = find_start(state.grid, 1, params.train_demand, params.capacity)
    if start is None:
        return None
    grid = state.grid.copy()
    grid[start] += params.train_demand
    return SystemState(list(state.buffer), grid)


def advance(state: SystemState, arrivals: list) -> tuple:
    """Move the system one slot forward.

    Shifts the grid left (tail zeroed), ages every buffered job, drops the
    ones past their deadline, then admits arrivals into the lowest-index
    free slots in arrival order.  Returns (state, discarded, rejected).
    """
    grid = np.empty_like(state.grid)
    grid[:-1] = state.grid[1:]
    grid[-1] = 0

    buf = []
    discarded = 0
    for job in state.buffer:
        if job is None:
            buf.append(None)
            continue
        w = job.waited + 1
        if w > job.deadline:
            discarded += 1
            buf.append(None)
        else:
            buf.append(Job(job.exec_time, job.demand, w, job.deadline))

    placed = 0
    if arrivals:
        n = len(arrivals)
        for i in range(len(buf)):
            if placed == n:
                break
            if buf[i] is None:
                buf[i] = arrivals[placed]
                placed += 1
    rejected = len(arrivals) - placed
    return SystemState(buf, grid), discarded, rejected


def step(state: SystemState, action: int, arrivals: list, params: EnvParams):
    """One full slot: reward the action, apply it if valid, then advance.

    Invalid or void actions schedule nothing but still incur the expiry
    penalty.  Returns (next_state, reward, StepInfo).
    """
    valid = False
    served_phi = None
    r = -params.sigma * deadline_count(state, action)
    if 0 <= action < params.buffer_size:
        valid, _ = is_valid(state, action, params)
    if valid:
        job = state.buffer[action]
        served_phi = delay_penalty(job.waited, job.deadline)
        gain = job.exec_time / params.capacity if params.scale_reward else float(job.exec_time)
        r += gain * served_phi
        state = schedule_job(state, action, params)
    next_state, discarded, rejected = advance(state, arrivals)
    return next_state, r, StepInfo(valid, served_phi, discarded, rejected)
