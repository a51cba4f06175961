"""Double-DQN decision making for the MEC scheduler.

State encoding, the exploration schedule, reward-weighted replay sampling
and the double-Q update.  Action indices 0..L-1 address buffer slots and
index L is the void action, matching the network output layout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import nn
from .env import SystemState

__all__ = [
    "AgentParams",
    "StateEncoder",
    "EpsilonSchedule",
    "ReplayBuffer",
    "Transition",
    "DdqnAgent",
    "TrainStats",
    "epsilon_at",
    "per_weights",
    "sample_indices",
]


@dataclass(frozen=True)
class AgentParams:
    gamma: float = 0.95
    batch_size: int = 16
    batches_per_job: int = 10   # gradient batches processed per training job
    tau: float = 0.005
    learning_rate: float = 1e-3
    replay_capacity: int = 100_000
    hidden: tuple = (128, 128)
    soft_update_per_batch: bool = True

    def __post_init__(self):
        # gamma = 0 is a legal degenerate discount (pure myopia)
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if self.batch_size < 1 or self.batches_per_job < 1:
            raise ValueError("batch sizes must be >= 1")


@dataclass(frozen=True)
class StateEncoder:
    """Flattens a SystemState into [0, 1] features.

    Per buffer slot: (e/horizon, c/capacity, w/t_max, T/t_max), zeros when
    empty; then the grid occupancy g(m)/capacity for each future slot.
    """

    buffer_size: int
    horizon: int
    capacity: int
    t_max: int = 8

    @property
    def dim(self) -> int:
        return 4 * self.buffer_size + self.horizon

    def encode(self, state: SystemState) -> np.ndarray:
        head = [0.0] * (4 * self.buffer_size)
        for i, job in enumerate(state.buffer):
            if job is None:
                continue
            k = 4 * i
            head[k] = job.exec_time / self.horizon
            head[k + 1] = job.demand / self.capacity
            head[k + 2] = job.waited / self.t_max
            head[k + 3] = job.deadline / self.t_max
        out = np.empty(self.dim)
        out[:4 * self.buffer_size] = head
        np.divide(state.grid, self.capacity, out=out[4 * self.buffer_size:])
        return out


@dataclass(frozen=True)
class EpsilonSchedule:
    """Exploration rate over training episodes.

    "sigmoid" is a reverse sigmoid from eps_max down to eps_min over the
    decay window, "exponential" an exponential decay, "constant" a flat
    tail value.  Past decay_end every kind returns the tail.
    """

    kind: str = "sigmoid"
    eps_max: float = 1.0
    eps_min: float = 0.1
    decay_end: int = 350
    midpoint: float = None
    steepness: float = None
    tail: float = 0.1

    def __post_init__(self):
        if self.kind not in ("sigmoid", "exponential", "constant"):
            raise ValueError(f"unknown epsilon schedule {self.kind!r}")
        if self.midpoint is None:
            object.__setattr__(self, "midpoint", self.decay_end / 2.0)
        if self.steepness is None:
            # exp(+-steepness*decay_end/2) ~ e^7, pinning the curve to
            # within 1% of eps_max at 0 and of eps_min at decay_end.
            object.__setattr__(self, "steepness", 14.0 / self.decay_end)


def epsilon_at(schedule: EpsilonSchedule, episode: int) -> float:
    if schedule.kind == "constant" or episode >= schedule.decay_end:
        return schedule.tail
    if schedule.kind == "sigmoid":
        z = schedule.steepness * (episode - schedule.midpoint)
        return schedule.eps_min + (schedule.eps_max - schedule.eps_min) / (1.0 + math.exp(z))
    rate = math.log(schedule.eps_max / schedule.eps_min) / schedule.decay_end
    return max(schedule.eps_min, schedule.eps_max * math.exp(-rate * episode))


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    done: bool


class ReplayBuffer:
    """FIFO ring of transitions with a reward cache for sampling weights."""

    def __init__(self, capacity: int, feature_dim: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.states = np.empty((capacity, feature_dim))
        self.actions = np.empty(capacity, dtype=np.int64)
        self.rewards = np.empty(capacity)
        self.next_states = np.empty((capacity, feature_dim))
        self.dones = np.empty(capacity, dtype=bool)
        self.size = 0
        self._pos = 0

    def __len__(self) -> int:
        return self.size

    def push(self, state, action, reward, next_state, done) -> None:
        i = self._pos
        self.states[i] = state
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_states[i] = next_state
        self.dones[i] = done
        self._pos = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def get(self, i: int) -> Transition:
        if not 0 <= i < self.size:
            raise IndexError(i)
        return Transition(self.states[i].copy(), int(self.actions[i]),
                          float(self.rewards[i]), self.next_states[i].copy(),
                          bool(self.dones[i]))


def per_weights(buffer: ReplayBuffer) -> np.ndarray:
    """Reward-based sampling weights, exp(r_i - max_j r_j); max weight is 1."""
    if len(buffer) == 0:
        raise ValueError("empty replay buffer")
    r = buffer.rewards[:buffer.size]
    return np.exp(r - r.max())


def sample_indices(buffer: ReplayBuffer, rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw n transition indices with probability proportional to their weight."""
    weights = per_weights(buffer)
    return rng.choice(len(buffer), size=n, replace=True, p=weights / weights.sum())


@dataclass
class TrainStats:
    batches: int
    mean_loss: float


class DdqnAgent:
    """Policy/target network pair with reward-prioritized replay."""

    def __init__(self, encoder: StateEncoder, params: AgentParams,
                 rng: np.random.Generator):
        self.encoder = encoder
        self.params = params
        self.n_actions = encoder.buffer_size + 1
        sizes = (encoder.dim, *params.hidden, self.n_actions)
        self.policy = nn.init_mlp(sizes, rng)
        self.target = nn.clone(self.policy)
        self.adam = nn.AdamState.for_net(self.policy, lr=params.learning_rate)
        self.buffer = ReplayBuffer(params.replay_capacity, encoder.dim)

    # -- acting ---------------------------------------------------------

    def q_values(self, features: np.ndarray) -> np.ndarray:
        return nn.forward(self.policy, features)

    def select_action(self, features: np.ndarray, epsilon: float,
                      rng: np.random.Generator):
        """Epsilon-greedy action; returns (action, was_greedy).

        Greedy ties resolve to the lowest action index.
        """
        if rng.random() < epsilon:
            return int(rng.integers(self.n_actions)), False
        q = self.q_values(features)
        return int(np.argmax(q)), True

    # -- learning -------------------------------------------------------

    def store(self, state, action, reward, next_state, done) -> None:
        self.buffer.push(state, action, reward, next_state, done)

    def _bootstrap(self, next_states: np.ndarray) -> np.ndarray:
        """Target-network value of the policy-greedy action, per row."""
        return nn.double_q(self.policy, self.target, next_states)

    def bootstrap_value(self, next_state: np.ndarray) -> float:
        return float(nn.double_q(self.policy, self.target, next_state))

    def td_error(self, state, action, reward, next_state, terminal=False) -> float:
        """Double-Q residual: r + gamma * Qhat(s', argmax Q(s', .)) - Q(s, a)."""
        y = reward
        if not terminal:
            y = reward + self.params.gamma * self.bootstrap_value(next_state)
        return y - float(self.q_values(state)[action])

    def train_once(self, rng: np.random.Generator):
        """One training job: batches_per_job prioritized double-Q updates.

        Returns TrainStats, or None when the buffer has fewer transitions
        than one batch.
        """
        p = self.params
        buf = self.buffer
        if len(buf) < p.batch_size:
            return None
        idx = sample_indices(buf, rng, p.batches_per_job * p.batch_size)
        idx = idx.reshape(p.batches_per_job, p.batch_size)
        ones = np.ones(p.batch_size)
        losses = np.empty(p.batches_per_job)
        for k in range(p.batches_per_job):
            rows = idx[k]
            boot = self._bootstrap(buf.next_states[rows])
            y = buf.rewards[rows] + p.gamma * boot * ~buf.dones[rows]
            losses[k] = nn.backward_and_step(self.policy, self.adam,
                                             buf.states[rows], buf.actions[rows],
                                             y, ones)
            if p.soft_update_per_batch:
                nn.soft_update(self.target, self.policy, p.tau)
        if not p.soft_update_per_batch:
            nn.soft_update(self.target, self.policy, p.tau)
        return TrainStats(p.batches_per_job, float(losses.mean()))

    # -- persistence ----------------------------------------------------

    def save_weights(self, path) -> None:
        nn.save_params(self.policy, path)

    def load_weights(self, path) -> None:
        net = nn.load_params(path)
        if net.sizes != self.policy.sizes:
            raise ValueError(f"weight file sizes {net.sizes} != agent {self.policy.sizes}")
        self.policy = net
        self.target = nn.clone(net)

    def param_checksum(self) -> bytes:
        import hashlib
        h = hashlib.sha256()
        for arr in self.policy.param_arrays() + self.target.param_arrays():
            h.update(arr.tobytes())
        return h.digest()
