import numpy as np
import pytest

from mecsched.errors import ConfigurationError
from mecsched.workload import (
    LoadSchedule,
    WorkloadParams,
    arrival_probability,
    default_specs,
    load_at,
    sample_arrivals,
)

WL = WorkloadParams()  # 1000 users, p_short 0.2, C=20


def test_default_specs_ranges():
    short, long = default_specs(20)
    assert (short.exec_lo, short.exec_hi) == (1, 3)
    assert (long.exec_lo, long.exec_hi) == (8, 12)
    assert (short.demand_lo, short.demand_hi) == (5, 10)
    assert (long.demand_lo, long.demand_hi) == (5, 10)
    assert (short.deadline, long.deadline) == (4, 8)
    assert short.probability + long.probability == 1.0


def test_arrival_probability_hand_values():
    # algebraic inverse of rho = (3/8) * n * p * (1/2 - 2*p_short/5)
    assert arrival_probability(0.3, WL) == pytest.approx(0.3 / 157.5)
    assert arrival_probability(0.3, WL) == pytest.approx(1.9048e-3, rel=1e-4)
    assert arrival_probability(0.1, WL) == pytest.approx(6.349e-4, rel=1e-4)
    assert arrival_probability(0.0, WL) == 0.0


def test_arrival_probability_infeasible():
    with pytest.raises(ConfigurationError):
        arrival_probability(0.9, WorkloadParams(n_user=2))
    with pytest.raises(ConfigurationError):
        arrival_probability(-0.1, WL)


def test_sample_arrivals_degenerate_probabilities():
    rng = np.random.default_rng(0)
    assert sample_arrivals(rng, 0.0, WL) == []
    small = WorkloadParams(n_user=3)
    jobs = sample_arrivals(rng, 1.0, small)
    assert len(jobs) == 3
    for job in jobs:
        assert job.waited == 0
        assert 5 <= job.demand <= 10
        assert job.deadline in (4, 8)
        if job.deadline == 4:
            assert 1 <= job.exec_time <= 3
        else:
            assert 8 <= job.exec_time <= 12


def test_sample_arrivals_mean_rate():
    rng = np.random.default_rng(7)
    p = arrival_probability(0.3, WL)
    n_slots = 20_000
    total = sum(len(sample_arrivals(rng, p, WL)) for _ in range(n_slots))
    mean = total / n_slots
    expect = WL.n_user * p  # ~1.905
    # binomial std per slot ~ sqrt(n p) ~ 1.38; 4 sigma band on the mean
    band = 4 * np.sqrt(WL.n_user * p) / np.sqrt(n_slots)
    assert abs(mean - expect) < band


def test_class_and_moment_statistics():
    rng = np.random.default_rng(3)
    jobs = []
    while len(jobs) < 100_000:
        jobs.extend(sample_arrivals(rng, 0.5, WorkloadParams(n_user=200)))
    jobs = jobs[:100_000]
    short = sum(1 for j in jobs if j.deadline == 4)
    n = len(jobs)
    # 3 sigma binomial bound on the short fraction
    assert abs(short / n - 0.2) < 3 * np.sqrt(0.2 * 0.8 / n)
    mean_e = np.mean([j.exec_time for j in jobs])
    mean_c = np.mean([j.demand for j in jobs])
    assert mean_e == pytest.approx(0.2 * 2 + 0.8 * 10, rel=0.01)
    assert mean_c == pytest.approx(7.5, rel=0.01)


def test_monte_carlo_load_inversion():
    """Offered resource-time per slot over capacity*horizon reproduces rho."""
    rho = 0.3
    p = arrival_probability(rho, WL)
    rng = np.random.default_rng(42)
    n_slots = 200_000
    work = 0.0
    for _ in range(n_slots):
        for job in sample_arrivals(rng, p, WL):
            work += job.exec_time * job.demand
    measured = work / n_slots / (20 * 20)
    assert measured == pytest.approx(rho, rel=0.01)


def test_determinism_same_seed_same_jobs():
    a = [sample_arrivals(np.random.default_rng(11), 0.01, WL) for _ in range(3)]
    b = [sample_arrivals(np.random.default_rng(11), 0.01, WL) for _ in range(3)]
    assert a == b


def test_load_at_constant_and_ramp():
    const = LoadSchedule("constant", 0.3, 0.3, 1000)
    assert load_at(const, 500) == 0.3
    ramp = LoadSchedule("ramp", 0.1, 0.3, 1500)
    assert load_at(ramp, 0) == pytest.approx(0.1)
    assert load_at(ramp, 1499) == pytest.approx(0.3)
    assert load_at(ramp, 1500 + 50) == pytest.approx(0.3)  # clamp past the end
    mid = load_at(ramp, 749)
    assert 0.19 < mid < 0.21
    # monotone along the ramp
    values = [load_at(ramp, e) for e in range(0, 1500, 100)]
    assert all(x <= y for x, y in zip(values, values[1:]))


def test_workload_params_validation():
    with pytest.raises(ConfigurationError):
        WorkloadParams(n_user=0)
    with pytest.raises(ConfigurationError):
        WorkloadParams(p_short=1.5)
