import numpy as np

from mecsched.baselines import sjf_select
from mecsched.env import EnvParams, Job, empty_state, is_valid

PARAMS = EnvParams()


def state_with(jobs, grid=None):
    state = empty_state(PARAMS)
    for i, job in jobs.items():
        state.buffer[i] = job
    if grid is not None:
        state.grid[:len(grid)] = grid
    return state


def test_picks_shortest_schedulable_job():
    state = state_with({0: Job(10, 5, 0, 8), 1: Job(3, 5, 0, 4)})
    assert sjf_select(state, PARAMS) == 1


def test_void_when_nothing_schedulable():
    assert sjf_select(empty_state(PARAMS), PARAMS) == PARAMS.void_action
    blocked = state_with({0: Job(2, 5, 0, 8)})
    blocked.grid[:] = 16
    assert sjf_select(blocked, PARAMS) == PARAMS.void_action


def test_tie_breaks_on_slack_then_index():
    state = state_with({0: Job(3, 5, 0, 8), 1: Job(3, 5, 3, 4)})  # slacks 8 and 1
    assert sjf_select(state, PARAMS) == 1
    state = state_with({2: Job(3, 5, 1, 4), 5: Job(3, 5, 1, 4)})  # identical keys
    assert sjf_select(state, PARAMS) == 2


def test_single_schedulable_job_is_selected():
    state = state_with({4: Job(7, 9, 2, 8)})
    assert sjf_select(state, PARAMS) == 4


def test_never_selects_invalid_action():
    rng = np.random.default_rng(0)
    for _ in range(300):
        state = empty_state(PARAMS)
        for i in rng.choice(10, size=int(rng.integers(0, 6)), replace=False):
            t = int(rng.choice([4, 8]))
            state.buffer[i] = Job(int(rng.integers(1, 13)), int(rng.integers(5, 11)),
                                  int(rng.integers(0, t + 1)), t)
        state.grid[:] = rng.integers(0, 21, size=20)
        action = sjf_select(state, PARAMS)
        if action != PARAMS.void_action:
            ok, _ = is_valid(state, action, PARAMS)
            assert ok
            chosen = state.buffer[action]
            for i, job in enumerate(state.buffer):
                if job is None or i == action:
                    continue
                if is_valid(state, i, PARAMS)[0]:
                    assert job.exec_time >= chosen.exec_time
        else:
            for i, job in enumerate(state.buffer):
                if job is not None:
                    assert not is_valid(state, i, PARAMS)[0]
