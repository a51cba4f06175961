"""Experiment orchestration: seeded runs, episode loops, CSV output.

A run executes `n_train` training episodes followed by `n_test` greedy
evaluation episodes, per seed.  Each phase writes one CSV per seed plus a
mean/standard-error summary across seeds.  Everything is deterministic in
(config, seed).
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .agent import AgentParams, DdqnAgent, EpsilonSchedule, StateEncoder, epsilon_at
from .baselines import sjf_select
from .env import EnvParams, empty_state, step
from .errors import ConfigurationError
from .training import (
    REASON_NO_CAPACITY,
    AtsState,
    PtsState,
    ats_decide,
    ideal_decide,
    pts_decide,
    with_insertion,
)
from .workload import LoadSchedule, WorkloadParams, arrival_probability, load_at, sample_arrivals

__all__ = [
    "CSV_COLUMNS",
    "POLICIES",
    "ExperimentConfig",
    "EpisodeMetrics",
    "SeedComponents",
    "build_components",
    "run_episode",
    "run_seed",
    "run_experiment",
    "write_csv",
    "write_summary",
    "parse_config_file",
    "resolve_config",
    "config_text",
]

POLICIES = ("sjf", "pts", "ats", "ideal", "fixed")
SCENARIOS = ("stationary", "dynamic")

CSV_COLUMNS = [
    "episode", "rho", "epsilon", "mean_reward", "running_mean_reward",
    "running_sum_reward", "served", "discarded", "rejected",
    "training_jobs", "mean_abs_td",
]

# keys whose defaults depend on the scenario (stationary, dynamic)
_SCENARIO_DEFAULTS = {
    "n_train": (1000, 1500),
    "epsilon_schedule": ("sigmoid", "constant"),
}


@dataclass
class ExperimentConfig:
    scenario: str = "stationary"
    policy: str = "pts"
    seeds: tuple = (1, 2, 3)
    out_dir: str = "results"
    # server
    capacity: int = 20
    buffer_size: int = 10
    horizon: int = 20
    sigma: float = 0.1
    train_demand: int = 20
    scale_reward: bool = True
    # workload
    n_user: int = 1000
    p_short: float = 0.2
    t_short: int = 4
    t_long: int = 8
    rho: float = 0.3
    rho_start: float = 0.1
    rho_end: float = 0.3
    # episodes
    n_train: int = -1          # -1: scenario default
    n_test: int = 100
    n_slot: int = 1000
    # agent
    gamma: float = 0.95
    batch_size: int = 16
    batches_per_job: int = 10
    tau: float = 0.005
    learning_rate: float = 1e-3
    replay_capacity: int = 100_000
    hidden: tuple = (128, 128)
    # exploration
    epsilon_schedule: str = ""  # empty: scenario default
    epsilon_max: float = 1.0
    epsilon_min: float = 0.1
    epsilon_decay_end: int = 350
    # training meta-schedulers
    train_period: int = 50
    ats_beta: float = 0.4
    psi_capacity: int = 1000
    psi_percentile: float = 0.99
    ideal_period: int = 10
    # pre-trained weights (fixed policy / eval); {seed} is substituted
    weights: str = ""

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigurationError(f"unknown scenario {self.scenario!r}")
        if self.policy not in POLICIES:
            raise ConfigurationError(f"unknown policy {self.policy!r}")
        idx = SCENARIOS.index(self.scenario)
        if self.n_train < 0:
            self.n_train = _SCENARIO_DEFAULTS["n_train"][idx]
        if not self.epsilon_schedule:
            self.epsilon_schedule = _SCENARIO_DEFAULTS["epsilon_schedule"][idx]
        if self.policy == "fixed" and not self.weights:
            raise ConfigurationError("policy=fixed needs a weights file")
        if not self.seeds:
            raise ConfigurationError("need at least one seed")
        if self.n_slot < 1 or self.n_test < 0 or self.n_train < 0:
            raise ConfigurationError("episode counts out of range")

    def env_params(self) -> EnvParams:
        return EnvParams(self.capacity, self.buffer_size, self.horizon,
                         self.sigma, self.train_demand, self.scale_reward)

    def workload_params(self) -> WorkloadParams:
        from .workload import default_specs
        specs = default_specs(self.capacity, self.p_short, self.t_short, self.t_long)
        return WorkloadParams(self.n_user, self.p_short, self.capacity, specs)

    def agent_params(self) -> AgentParams:
        return AgentParams(self.gamma, self.batch_size, self.batches_per_job,
                           self.tau, self.learning_rate, self.replay_capacity,
                           tuple(self.hidden))

    def load_schedule(self) -> LoadSchedule:
        if self.scenario == "stationary":
            return LoadSchedule("constant", self.rho, self.rho, self.n_train)
        return LoadSchedule("ramp", self.rho_start, self.rho_end, self.n_train)

    def eval_rho(self) -> float:
        return self.rho if self.scenario == "stationary" else self.rho_end


# -- config file handling -------------------------------------------------

def parse_config_file(path) -> dict:
    """Flat `key = value` lines; '#' starts a comment."""
    mapping = {}
    try:
        with open(path) as f:
            for lineno, raw in enumerate(f, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigurationError(f"{path}:{lineno}: expected key = value")
                key, value = line.split("=", 1)
                mapping[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return mapping


_TUPLE_INT_KEYS = {"seeds", "hidden"}


def _coerce(key: str, value: str, target_type):
    if key in _TUPLE_INT_KEYS:
        return tuple(int(v.strip()) for v in value.split(",") if v.strip())
    if target_type is bool:
        low = value.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ConfigurationError(f"{key}: expected a boolean, got {value!r}")
    if target_type is int:
        return int(value)
    if target_type is float:
        return float(value)
    return value


def resolve_config(mapping: dict, overrides=()) -> ExperimentConfig:
    """Build a config from string key/value pairs; unknown keys are rejected."""
    fields = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
    merged = dict(mapping)
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not key=value")
        key, value = item.split("=", 1)
        merged[key.strip()] = value.strip()
    kwargs = {}
    for key, value in merged.items():
        if key not in fields:
            raise ConfigurationError(f"unknown config key {key!r}")
        base_type = type(getattr(ExperimentConfig, key, ""))
        if key in ("n_train",):
            base_type = int
        try:
            kwargs[key] = _coerce(key, value, base_type)
        except (ValueError, TypeError) as exc:
            raise ConfigurationError(f"bad value for {key}: {value!r} ({exc})") from exc
    return ExperimentConfig(**kwargs)


def config_text(cfg: ExperimentConfig) -> str:
    """Canonical `key = value` dump of the resolved configuration."""
    lines = []
    for f in dataclasses.fields(ExperimentConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


# -- metrics ---------------------------------------------------------------

@dataclass
class EpisodeMetrics:
    episode: int
    rho: float
    epsilon: float
    mean_reward: float
    running_mean_reward: float
    running_sum_reward: float
    served: int
    discarded: int
    rejected: int
    training_jobs: int     # slots in which a training job occupied the grid
    mean_abs_td: float
    # not serialized: bookkeeping for invariants and diagnostics
    generated: int = 0
    buffered_end: int = 0
    training_events: int = 0   # decisions that fired (includes zero-cost ones)
    training_skips: int = 0    # decisions lost to a full grid


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows, path) -> None:
    with open(path, "w") as f:
        f.write(",".join(CSV_COLUMNS) + "\n")
        for row in rows:
            f.write(",".join(_fmt(getattr(row, c)) for c in CSV_COLUMNS) + "\n")


def write_summary(rows_per_seed, path) -> None:
    """Across-seed mean and standard error per episode for every column."""
    if not rows_per_seed:
        raise ValueError("no rows to summarize")
    n_eps = min(len(rows) for rows in rows_per_seed)
    n_seeds = len(rows_per_seed)
    cols = [c for c in CSV_COLUMNS if c != "episode"]
    header = ["episode"]
    for c in cols:
        header += [f"{c}_mean", f"{c}_se"]
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for i in range(n_eps):
            out = [str(rows_per_seed[0][i].episode)]
            for c in cols:
                vals = np.array([float(getattr(rows[i], c)) for rows in rows_per_seed])
                mean = float(vals.mean())
                se = float(vals.std(ddof=1) / math.sqrt(n_seeds)) if n_seeds > 1 else 0.0
                out += [repr(mean), repr(se)]
            f.write(",".join(out) + "\n")


# -- seeded run -------------------------------------------------------------

@dataclass
class SeedComponents:
    cfg: ExperimentConfig
    seed: int
    env: EnvParams
    workload: WorkloadParams
    encoder: StateEncoder = None
    agent: DdqnAgent = None
    pts: PtsState = None
    ats: AtsState = None
    schedule: EpsilonSchedule = None
    rng_workload: np.random.Generator = None
    rng_explore: np.random.Generator = None
    rng_replay: np.random.Generator = None
    last_greedy_delta: float = math.inf
    learns: bool = False


def build_components(cfg: ExperimentConfig, seed: int) -> SeedComponents:
    ss = np.random.SeedSequence(seed)
    init_ss, wl_ss, explore_ss, replay_ss = ss.spawn(4)
    comp = SeedComponents(
        cfg=cfg, seed=seed, env=cfg.env_params(), workload=cfg.workload_params(),
        rng_workload=np.random.Generator(np.random.PCG64(wl_ss)),
        rng_explore=np.random.Generator(np.random.PCG64(explore_ss)),
        rng_replay=np.random.Generator(np.random.PCG64(replay_ss)),
    )
    if cfg.policy != "sjf":
        comp.encoder = StateEncoder(cfg.buffer_size, cfg.horizon, cfg.capacity,
                                    t_max=max(cfg.t_short, cfg.t_long))
        comp.agent = DdqnAgent(comp.encoder, cfg.agent_params(),
                               np.random.Generator(np.random.PCG64(init_ss)))
    if cfg.policy == "pts":
        comp.pts = PtsState(cfg.train_period)
    elif cfg.policy == "ats":
        comp.ats = AtsState(cfg.psi_capacity, cfg.psi_percentile, cfg.ats_beta,
                            PtsState(cfg.train_period))
    if cfg.policy == "fixed":
        comp.agent.load_weights(cfg.weights.replace("{seed}", str(seed)))
    comp.learns = cfg.policy in ("pts", "ats", "ideal")
    comp.schedule = EpsilonSchedule(cfg.epsilon_schedule, cfg.epsilon_max,
                                    cfg.epsilon_min, cfg.epsilon_decay_end,
                                    tail=cfg.epsilon_min)
    return comp


def _decide_training(comp: SeedComponents, state, slot: int, features):
    cfg = comp.cfg
    if cfg.policy == "pts":
        return with_insertion(pts_decide(comp.pts, slot), state, comp.env)
    if cfg.policy == "ideal":
        return ideal_decide(slot, cfg.ideal_period)
    return ats_decide(comp.ats, comp.agent, state, comp.last_greedy_delta,
                      slot, comp.env, features=features)


def run_episode(comp: SeedComponents, episode: int, rho: float,
                train_mode: bool, running: dict) -> EpisodeMetrics:
    """One episode of n_slot decisions; `running` accumulates phase stats."""
    cfg = comp.cfg
    env = comp.env
    agent = comp.agent
    p_arrival = arrival_probability(rho, comp.workload)
    epsilon = 0.0
    if train_mode and comp.learns:
        epsilon = epsilon_at(comp.schedule, episode)

    state = empty_state(env)
    feats = agent.encoder.encode(state) if agent is not None else None

    reward_sum = 0.0
    abs_td_sum = 0.0
    served = discarded = rejected = generated = 0
    training_jobs = training_events = training_skips = 0

    for slot in range(cfg.n_slot):
        if train_mode and comp.learns:
            decision = _decide_training(comp, state, slot, feats)
            if decision.train:
                training_events += 1
                if decision.state is not None:
                    state = decision.state
                    feats = agent.encoder.encode(state)
                    training_jobs += 1
                agent.train_once(comp.rng_replay)
            elif decision.reason == REASON_NO_CAPACITY:
                training_skips += 1

        if agent is None:
            action, greedy = sjf_select(state, env), True
            q = None
        else:
            # one forward serves both the greedy choice and the TD residual
            q = agent.q_values(feats)
            if epsilon > 0.0 and comp.rng_explore.random() < epsilon:
                action = int(comp.rng_explore.integers(agent.n_actions))
                greedy = False
            else:
                action = int(np.argmax(q))
                greedy = True

        arrivals = sample_arrivals(comp.rng_workload, p_arrival, comp.workload)
        next_state, r, info = step(state, action, arrivals, env)

        reward_sum += r
        served += info.valid
        discarded += info.discarded
        rejected += info.rejected
        generated += len(arrivals)

        if agent is not None:
            next_feats = agent.encoder.encode(next_state)
            done = slot == cfg.n_slot - 1
            if train_mode and comp.learns:
                agent.store(feats, action, r, next_feats, done)
            # same residual definition as DdqnAgent.td_error, built from the
            # q-values already at hand
            y = r if done else r + cfg.gamma * agent.bootstrap_value(next_feats)
            delta = y - float(q[action])
            abs_td_sum += abs(delta)
            if greedy:
                comp.last_greedy_delta = delta
            feats = next_feats
        state = next_state

    running["episodes"] += 1
    mean_reward = reward_sum / cfg.n_slot
    running["sum_reward"] += mean_reward
    return EpisodeMetrics(
        episode=episode, rho=rho, epsilon=epsilon,
        mean_reward=mean_reward,
        running_mean_reward=running["sum_reward"] / running["episodes"],
        running_sum_reward=running["sum_reward"],
        served=served, discarded=discarded, rejected=rejected,
        training_jobs=training_jobs,
        mean_abs_td=abs_td_sum / cfg.n_slot,
        generated=generated,
        buffered_end=sum(1 for j in state.buffer if j is not None),
        training_events=training_events, training_skips=training_skips,
    )


def run_seed(cfg: ExperimentConfig, seed: int, out_dir: str):
    """Train then evaluate one seed, streaming CSV rows as episodes finish."""
    comp = build_components(cfg, seed)
    schedule = cfg.load_schedule()
    train_rows, eval_rows = [], []

    train_path = os.path.join(out_dir, f"train_seed{seed}.csv")
    eval_path = os.path.join(out_dir, f"eval_seed{seed}.csv")

    running = {"episodes": 0, "sum_reward": 0.0}
    with open(train_path, "w") as f:
        f.write(",".join(CSV_COLUMNS) + "\n")
        for episode in range(cfg.n_train):
            row = run_episode(comp, episode, load_at(schedule, episode), True, running)
            train_rows.append(row)
            f.write(",".join(_fmt(getattr(row, c)) for c in CSV_COLUMNS) + "\n")
            f.flush()

    if comp.agent is not None:
        comp.agent.save_weights(os.path.join(out_dir, f"weights_seed{seed}.bin"))

    running = {"episodes": 0, "sum_reward": 0.0}
    rho_eval = cfg.eval_rho()
    with open(eval_path, "w") as f:
        f.write(",".join(CSV_COLUMNS) + "\n")
        for k in range(cfg.n_test):
            row = run_episode(comp, cfg.n_train + k, rho_eval, False, running)
            eval_rows.append(row)
            f.write(",".join(_fmt(getattr(row, c)) for c in CSV_COLUMNS) + "\n")
            f.flush()
    return train_rows, eval_rows


def run_experiment(cfg: ExperimentConfig, out_dir: str = None) -> dict:
    """All seeds of one configuration; returns the paths that were written."""
    out = out_dir if out_dir is not None else cfg.out_dir
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "config.txt"), "w") as f:
        f.write(config_text(cfg))

    train_all, eval_all = [], []
    for seed in cfg.seeds:
        train_rows, eval_rows = run_seed(cfg, seed, out)
        train_all.append(train_rows)
        eval_all.append(eval_rows)

    paths = {
        "out_dir": out,
        "train": [os.path.join(out, f"train_seed{s}.csv") for s in cfg.seeds],
        "eval": [os.path.join(out, f"eval_seed{s}.csv") for s in cfg.seeds],
    }
    if cfg.n_train > 0:
        write_summary(train_all, os.path.join(out, "train_summary.csv"))
        paths["train_summary"] = os.path.join(out, "train_summary.csv")
    if cfg.n_test > 0:
        write_summary(eval_all, os.path.join(out, "eval_summary.csv"))
        paths["eval_summary"] = os.path.join(out, "eval_summary.csv")
    return paths
