"""Non-learning scheduling policies."""

from __future__ import annotations

from .env import EnvParams, SystemState, is_valid

__all__ = ["sjf_select"]


def sjf_select(state: SystemState, params: EnvParams) -> int:
    """Shortest Job First over the schedulable buffer entries.

    Ties break on smallest remaining slack (deadline - waited), then lowest
    buffer index.  Returns the void action when nothing fits.
    """
    best = params.void_action
    best_key = None
    for i, job in enumerate(state.buffer):
        if job is None:
            continue
        valid, _ = is_valid(state, i, params)
        if not valid:
            continue
        key = (job.exec_time, job.deadline - job.waited, i)
        if best_key is None or key < best_key:
            best_key = key
            best = i
    return best
