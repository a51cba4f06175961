"""MEC job-scheduling simulator with a DDQN scheduler that pays for its own training."""

from .agent import AgentParams, DdqnAgent, EpsilonSchedule, ReplayBuffer, StateEncoder
from .env import EnvParams, Job, SystemState
from .harness import ExperimentConfig, run_experiment
from .nn import active_backend
from .workload import JobClassSpec, LoadSchedule, WorkloadParams

__version__ = "0.1.0"

__all__ = [
    "AgentParams",
    "DdqnAgent",
    "EnvParams",
    "EpsilonSchedule",
    "ExperimentConfig",
    "Job",
    "JobClassSpec",
    "LoadSchedule",
    "ReplayBuffer",
    "StateEncoder",
    "SystemState",
    "WorkloadParams",
    "active_backend",
    "run_experiment",
    "__version__",
]
