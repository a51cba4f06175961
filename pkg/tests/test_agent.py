import math

import numpy as np
import pytest

from mecsched import nn
from mecsched.agent import (
    AgentParams,
    DdqnAgent,
    EpsilonSchedule,
    ReplayBuffer,
    StateEncoder,
    epsilon_at,
    per_weights,
    sample_indices,
)
from mecsched.env import EnvParams, Job, empty_state

ENC = StateEncoder(buffer_size=10, horizon=20, capacity=20, t_max=8)


def tiny_agent(hidden=(8,), seed=0, **kw):
    enc = StateEncoder(buffer_size=1, horizon=1, capacity=20, t_max=8)
    params = AgentParams(hidden=hidden, **kw)
    return DdqnAgent(enc, params, np.random.default_rng(seed))


# -- state encoding -----------------------------------------------------------

def test_encode_empty_system_is_zero():
    state = empty_state(EnvParams())
    feats = ENC.encode(state)
    assert feats.shape == (4 * 10 + 20,)
    assert np.all(feats == 0.0)


def test_encode_single_job_normalization():
    state = empty_state(EnvParams())
    state.buffer[0] = Job(10, 5, 0, 8)
    feats = ENC.encode(state)
    assert tuple(feats[:4]) == (0.5, 0.25, 0.0, 1.0)
    assert np.all(feats[4:] == 0.0)


def test_encode_full_grid_tail():
    state = empty_state(EnvParams())
    state.grid[:] = 20
    feats = ENC.encode(state)
    assert np.all(feats[-20:] == 1.0)
    assert np.all(feats[:-20] == 0.0)


def test_encode_stays_in_unit_interval():
    rng = np.random.default_rng(0)
    params = EnvParams()
    for _ in range(50):
        state = empty_state(params)
        for i in rng.choice(10, size=4, replace=False):
            t = int(rng.choice([4, 8]))
            state.buffer[i] = Job(int(rng.integers(1, 13)), int(rng.integers(5, 11)),
                                  int(rng.integers(0, t + 1)), t)
        state.grid[:] = rng.integers(0, 21, size=20)
        feats = ENC.encode(state)
        assert feats.min() >= 0.0 and feats.max() <= 1.0


# -- epsilon schedule -----------------------------------------------------------

def test_sigmoid_schedule_endpoints_and_midpoint():
    sched = EpsilonSchedule()
    assert epsilon_at(sched, 0) >= 0.99
    assert epsilon_at(sched, 350) == 0.1
    assert epsilon_at(sched, 1000) == 0.1
    assert epsilon_at(sched, 175) == pytest.approx(0.55)
    # just before the tail the curve has decayed to within 1% of the floor
    assert epsilon_at(sched, 349) <= 1.01 * 0.1


def test_schedules_monotone_non_increasing():
    for kind in ("sigmoid", "exponential", "constant"):
        sched = EpsilonSchedule(kind=kind)
        values = [epsilon_at(sched, t) for t in range(600)]
        assert all(a >= b for a, b in zip(values, values[1:]))
        assert all(v == 0.1 for v in values[350:])
        assert all(0.1 <= v <= 1.0 for v in values)


def test_exponential_schedule_shape():
    sched = EpsilonSchedule(kind="exponential")
    assert epsilon_at(sched, 0) == pytest.approx(1.0)
    assert epsilon_at(sched, 350) == 0.1
    # log-linear in between
    assert epsilon_at(sched, 175) == pytest.approx(math.sqrt(0.1), rel=1e-6)


# -- action selection -------------------------------------------------------------

def test_select_action_greedy_and_tie_break():
    agent = tiny_agent()
    feats = np.zeros(agent.encoder.dim)
    q = agent.q_values(feats)
    rng = np.random.default_rng(0)
    action, greedy = agent.select_action(feats, 0.0, rng)
    assert greedy and action == int(np.argmax(q))
    # force a tie between actions 0 and 2 on a 3-action agent
    enc = StateEncoder(buffer_size=2, horizon=1, capacity=20)
    agent3 = DdqnAgent(enc, AgentParams(hidden=()), np.random.default_rng(1))
    agent3.policy.weights[0][:] = 0.0
    agent3.policy.biases[0][:] = np.array([1.0, 0.0, 1.0])
    action, _ = agent3.select_action(np.zeros(enc.dim), 0.0, rng)
    assert action == 0


def test_select_action_uniform_under_full_exploration():
    agent = tiny_agent()
    feats = np.zeros(agent.encoder.dim)
    rng = np.random.default_rng(12)
    n = 100_000
    counts = np.zeros(agent.n_actions)
    for _ in range(n):
        action, greedy = agent.select_action(feats, 1.0, rng)
        assert not greedy
        counts[action] += 1
    expect = n / agent.n_actions
    sigma = math.sqrt(n * (1 / agent.n_actions) * (1 - 1 / agent.n_actions))
    assert np.all(np.abs(counts - expect) < 3.5 * sigma)


# -- replay and weights ---------------------------------------------------------

def fill_buffer(buf, rewards):
    dim = buf.states.shape[1]
    for i, r in enumerate(rewards):
        buf.push(np.full(dim, i, dtype=float), i % 3, r, np.zeros(dim), False)


def test_per_weights_hand_values():
    buf = ReplayBuffer(16, 4)
    fill_buffer(buf, [0.0, -1.0, 2.0])
    w = per_weights(buf)
    assert np.allclose(w, [math.exp(-2), math.exp(-3), 1.0])
    assert w.max() == 1.0


def test_per_weights_uniform_and_singleton():
    buf = ReplayBuffer(8, 2)
    fill_buffer(buf, [0.7])
    assert per_weights(buf).tolist() == [1.0]
    fill_buffer(buf, [0.3, 0.3, 0.3])
    buf2 = ReplayBuffer(8, 2)
    fill_buffer(buf2, [0.3, 0.3, 0.3])
    assert np.allclose(per_weights(buf2), 1.0)


def test_replay_fifo_eviction():
    buf = ReplayBuffer(3, 2)
    fill_buffer(buf, [1.0, 2.0, 3.0, 4.0])
    assert len(buf) == 3
    # oldest (reward 1.0) evicted, slot 0 now holds the newest
    assert sorted(buf.rewards[:3].tolist()) == [2.0, 3.0, 4.0]
    assert buf.get(0).reward == 4.0


def test_sampling_distribution_matches_weights():
    buf = ReplayBuffer(16, 2)
    rewards = [0.0, 0.5, 1.0, -0.5, 0.25, 0.75, -1.0, 0.1, 0.9, 0.33]
    fill_buffer(buf, rewards)
    probs = per_weights(buf)
    probs = probs / probs.sum()
    rng = np.random.default_rng(5)
    n = 100_000
    draws = sample_indices(buf, rng, n)
    counts = np.bincount(draws, minlength=10)
    for i in range(10):
        sigma = math.sqrt(n * probs[i] * (1 - probs[i]))
        assert abs(counts[i] - n * probs[i]) < 3.5 * sigma


# -- td error and training -------------------------------------------------------

def test_td_error_hand_value():
    # delta = r + gamma * Qhat(s', a*) - Q(s, a) = 1 + 0.95*2 - 1.5 = 1.4
    enc = StateEncoder(buffer_size=1, horizon=1, capacity=20)
    agent = DdqnAgent(enc, AgentParams(hidden=()), np.random.default_rng(0))
    agent.policy.weights[0][:] = 0.0
    agent.policy.biases[0][:] = np.array([1.5, 0.0])
    agent.target.weights[0][:] = 0.0
    agent.target.biases[0][:] = np.array([2.0, 0.0])
    s = np.zeros(enc.dim)
    delta = agent.td_error(s, 0, 1.0, s)
    assert delta == pytest.approx(1.4)
    # terminal: bootstrap off
    assert agent.td_error(s, 0, 1.0, s, terminal=True) == pytest.approx(-0.5)


def test_td_error_bellman_consistent_case():
    agent = tiny_agent(hidden=(6,), seed=3)
    agent.target = nn.clone(agent.policy)
    s = np.random.default_rng(1).random(agent.encoder.dim)
    s2 = np.random.default_rng(2).random(agent.encoder.dim)
    q = agent.q_values(s)
    r = float(q[1]) - agent.params.gamma * float(agent.q_values(s2).max())
    assert agent.td_error(s, 1, r, s2) == pytest.approx(0.0, abs=1e-12)


def test_td_error_gamma_zero():
    agent = tiny_agent(gamma=0.0)
    s = np.random.default_rng(3).random(agent.encoder.dim)
    assert agent.td_error(s, 0, 0.0, s) == pytest.approx(-float(agent.q_values(s)[0]))


def test_td_error_matches_train_once_residual():
    # with one stored transition and b=B=1, the training loss is delta^2
    agent = tiny_agent(hidden=(7,), seed=8, batch_size=1, batches_per_job=1)
    rng = np.random.default_rng(4)
    s, s2 = rng.random(agent.encoder.dim), rng.random(agent.encoder.dim)
    agent.store(s, 1, 0.3, s2, False)
    delta = agent.td_error(s, 1, 0.3, s2)
    stats = agent.train_once(np.random.default_rng(0))
    assert stats.mean_loss == pytest.approx(delta ** 2, rel=1e-12)


def test_train_once_insufficient_samples_is_noop():
    agent = tiny_agent(batch_size=4)
    agent.store(np.zeros(agent.encoder.dim), 0, 0.0, np.zeros(agent.encoder.dim), False)
    before = [p.copy() for p in agent.policy.param_arrays()]
    assert agent.train_once(np.random.default_rng(0)) is None
    for p, b in zip(agent.policy.param_arrays(), before):
        assert np.array_equal(p, b)


def test_train_once_single_sample_hand_oracle():
    """b = B = 1 double-Q update against explicit linear-layer arithmetic."""
    enc = StateEncoder(buffer_size=1, horizon=1, capacity=20)
    params = AgentParams(hidden=(), batch_size=1, batches_per_job=1,
                         gamma=0.9, tau=0.01, learning_rate=1e-3)
    agent = DdqnAgent(enc, params, np.random.default_rng(0))
    w0 = np.array([[0.2, -0.1], [0.05, 0.3], [0.0, 0.1], [0.4, -0.2], [0.15, 0.25]])
    b0 = np.array([0.02, -0.03])
    wt = w0 * 0.9
    bt = b0 + 0.01
    agent.policy.weights[0][:] = w0
    agent.policy.biases[0][:] = b0
    agent.target.weights[0][:] = wt
    agent.target.biases[0][:] = bt

    s = np.array([0.5, 0.1, 0.9, 0.0, 0.3])
    s2 = np.array([0.2, 0.8, 0.1, 0.6, 0.0])
    r, a = 0.7, 1
    agent.store(s, a, r, s2, False)
    agent.train_once(np.random.default_rng(0))

    # oracle: plain numpy, no shared code with the kernels
    q2_policy = s2 @ w0 + b0
    a_star = int(np.argmax(q2_policy))
    y = r + 0.9 * float((s2 @ wt + bt)[a_star])
    resid = float((s @ w0 + b0)[a]) - y
    grad_w = np.zeros_like(w0)
    grad_w[:, a] = 2.0 * resid * s
    grad_b = np.zeros_like(b0)
    grad_b[a] = 2.0 * resid
    # first Adam step: p -= lr * g / (|g| + eps)
    lr, eps = 1e-3, 1e-8
    w_expect = w0 - lr * grad_w / (np.abs(grad_w) + eps)
    b_expect = b0 - lr * grad_b / (np.abs(grad_b) + eps)
    # columns with zero gradient stay put
    w_expect[:, 1 - a] = w0[:, 1 - a]
    b_expect[1 - a] = b0[1 - a]
    assert np.allclose(agent.policy.weights[0], w_expect, atol=1e-12)
    assert np.allclose(agent.policy.biases[0], b_expect, atol=1e-12)
    # one soft update against the stepped policy
    assert np.allclose(agent.target.weights[0],
                       0.01 * agent.policy.weights[0] + 0.99 * wt, atol=1e-12)


def test_train_once_terminal_target_is_reward():
    agent = tiny_agent(hidden=(), batch_size=1, batches_per_job=1, seed=2)
    s = np.random.default_rng(0).random(agent.encoder.dim)
    agent.store(s, 0, 0.25, np.zeros(agent.encoder.dim), True)
    q = float(agent.q_values(s)[0])
    stats = agent.train_once(np.random.default_rng(0))
    assert stats.mean_loss == pytest.approx((q - 0.25) ** 2, rel=1e-12)


def test_train_once_gamma_zero_targets_are_rewards():
    agent = tiny_agent(hidden=(6,), gamma=0.0, batch_size=2, batches_per_job=1, seed=5)
    rng = np.random.default_rng(6)
    for _ in range(4):
        agent.store(rng.random(agent.encoder.dim), 0, 0.5,
                    rng.random(agent.encoder.dim), False)
    s = agent.buffer.states[0]
    q = float(agent.q_values(s)[0])
    # delta for any stored sample reduces to r - Q(s, a)
    assert agent.td_error(s, 0, 0.5, agent.buffer.next_states[0]) == pytest.approx(0.5 - q)


def test_target_network_lag_bound():
    agent = tiny_agent(hidden=(8, 8), batch_size=2, batches_per_job=5, seed=7)
    rng = np.random.default_rng(8)
    for _ in range(10):
        agent.store(rng.random(agent.encoder.dim), int(rng.integers(2)),
                    float(rng.random()), rng.random(agent.encoder.dim), False)
    before_t = [p.copy() for p in agent.target.param_arrays()]
    before_p = [p.copy() for p in agent.policy.param_arrays()]
    agent.train_once(np.random.default_rng(1))
    p = agent.params
    for t_new, t_old, p_old in zip(agent.target.param_arrays(), before_t, before_p):
        # per batch the target moves at most tau * gap; Adam moves the policy
        # by about lr per entry per step, so bound the gap accordingly
        gap = np.abs(p_old - t_old).max() + p.batches_per_job * p.learning_rate * 1.2
        assert np.abs(t_new - t_old).max() <= p.tau * p.batches_per_job * gap + 1e-12


def test_agent_save_load_roundtrip(tmp_path):
    agent = tiny_agent(seed=11)
    path = tmp_path / "w.bin"
    agent.save_weights(path)
    other = tiny_agent(seed=99)
    other.load_weights(path)
    feats = np.random.default_rng(0).random(agent.encoder.dim)
    assert np.allclose(other.q_values(feats), agent.q_values(feats))
    assert other.param_checksum() != b""
