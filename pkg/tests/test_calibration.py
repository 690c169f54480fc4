import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from approachability import calibration as cal
from approachability import games as gm
from approachability.geometry import dist_l1_to_l1ball


def dense_payoff(w, y, m):
    """Independent dense evaluation of coordinate i = w(i)(y - i/m)."""
    w = np.asarray(w, dtype=float)
    return w * (y - np.arange(m + 1) / m)


# ---------------------------------------------------------------------------
# payoff


def test_payoff_point_mass():
    v = cal.calib_payoff(cal.point_mass(4, 1), 1)
    assert np.allclose(v.to_dense(), [0, 0.75, 0, 0, 0])


def test_payoff_exact_prediction_is_zero():
    for i, y in [(0, 0), (4, 1)]:
        assert not np.any(cal.calib_payoff(cal.point_mass(4, i), y).to_dense())


def test_payoff_two_point_mixture():
    w = cal.ForecastDistribution(4, (1, 2), (0.5, 0.5))
    assert np.allclose(cal.calib_payoff(w, 0).to_dense(), [0, -0.125, -0.25, 0, 0])


def test_payoff_matches_game_module():
    g = gm.calibration_game(6)
    w = np.array([0, 0, 0.3, 0.7, 0, 0, 0])
    for y in (0, 1):
        assert np.allclose(cal.calib_payoff(w, y).to_dense(), g.payoff(w, [y]))


def test_payoff_rejects_bad_inputs():
    with pytest.raises(ValueError):
        cal.calib_payoff(cal.point_mass(4, 1), 0.5)
    with pytest.raises(ValueError):
        cal.calib_payoff(np.array([0.5, 0.6, 0.0]), 1)
    with pytest.raises(ValueError):
        cal.ForecastDistribution(4, (1, 2), (0.7, 0.7))


# ---------------------------------------------------------------------------
# oracle


def test_oracle_low_branch():
    w = cal.oracle_w_from_theta(np.array([-0.2, 0.9, 0.1, 0.3, 0.0]), 4)
    assert w.indices == (0,) and w.weights == (1.0,) and w.branch == "low"
    assert w.probes == 1


def test_oracle_high_branch():
    w = cal.oracle_w_from_theta(np.full(5, 0.4), 4)
    assert w.indices == (4,) and w.branch == "high"


def test_oracle_bracket_example():
    m = 4
    theta = np.array([0.5, 0.5, -0.5, -0.25, -1.0])
    w = cal.oracle_w_from_theta(theta, m)
    assert w.indices == (1, 2)
    assert w.weights == pytest.approx((0.5, 0.5))
    closed_form = (1 / m) / (1 / theta[1] - 1 / theta[2])
    for y in (0, 1):
        val = dense_payoff(w.to_dense(), y, m) @ theta
        assert val == pytest.approx(0.0625)
        assert val == pytest.approx(closed_form)
        assert val <= 0.5 / m


def test_oracle_zero_right_end_gives_point_mass():
    w = cal.oracle_w_from_theta(np.array([0.3, 0.2, 0.0, -0.5, -0.5]), 4)
    assert w.indices == (2,) and w.weights == (1.0,)


def test_oracle_errors():
    with pytest.raises(ValueError):
        cal.oracle_w_from_theta(np.array([0.5, 1.5, -0.2]), 2)
    with pytest.raises(ValueError):
        cal.oracle_w_from_theta(np.zeros(4), 4)
    # tolerance 1e-12 on the cube constraint
    cal.oracle_w_from_theta(np.array([1 + 1e-13, -1.0, -1.0]), 2)


cube_theta = st.integers(1, 40).flatmap(
    lambda m: st.tuples(st.just(m), st.lists(st.floats(-1, 1), min_size=m + 1, max_size=m + 1)))


@given(cube_theta)
def test_oracle_properties(args):
    m, theta = args
    theta = np.array(theta)
    w = cal.oracle_w_from_theta(theta, m)
    dense = w.to_dense()
    assert len(w.indices) <= 2
    assert np.all(dense >= 0) and abs(dense.sum() - 1) <= 1e-12
    for y in (0, 1):
        assert dense_payoff(dense, y, m) @ theta <= 0.5 / m + 1e-12
    if w.branch == "bracket" and len(w.indices) == 2:
        i, j = w.indices
        assert j == i + 1 and theta[i] > 0 >= theta[j]
    assert w.probes <= cal.probe_budget(m)


def test_probe_budget_matches_stated_bound_for_powers_of_two():
    for k in range(0, 12):
        m = 2**k
        assert cal.probe_budget(m) == cal.spec_probe_budget(m)
    # for other m Algorithm 3 can need one extra probe
    assert cal.probe_budget(10) == cal.spec_probe_budget(10) + 1


def test_probe_count_is_tight_on_a_worst_case():
    m = 64
    theta = np.where(np.arange(m + 1) <= m - 2, 0.5, -0.5)
    assert cal.oracle_w_from_theta(theta, m).probes == cal.probe_budget(m)


def test_oracle_with_callable_probe_counts_reads():
    theta = np.linspace(0.9, -0.9, 17)
    reads = []

    def probe(i):
        reads.append(i)
        return theta[i]

    w = cal.oracle_w_from_theta(probe, 16)
    assert w.probes == len(reads)
    assert reads[:2] == [0, 16]


# ---------------------------------------------------------------------------
# calibration state and rate


def state_from(m, levels, outcomes):
    st_ = cal.CalibrationState(m)
    for lvl, y in zip(levels, outcomes):
        st_.record(lvl, y)
    return st_


def test_rate_perfect_forecaster():
    s = state_from(2, [1] * 6, [0, 1] * 3)
    assert np.array_equal(s.calibration_vector(), np.zeros(3))
    assert cal.calibration_rate(s) == 0.0
    assert cal.calibration_rate(s, raw=True)[1] == pytest.approx(-0.25)


def test_rate_hand_count():
    s = state_from(2, [0, 0, 2, 2], [1, 1, 1, 1])
    assert np.allclose(s.calibration_vector(), [0.5, 0, 0])
    assert cal.calibration_rate(s) == pytest.approx(0.25)


def test_rate_needs_rounds():
    with pytest.raises(ValueError):
        cal.calibration_rate(cal.CalibrationState(3))


@given(st.integers(1, 30).flatmap(
    lambda m: st.tuples(st.just(m), st.lists(st.tuples(st.integers(0, m), st.integers(0, 1)), min_size=1))))
def test_rate_equals_l1_distance(args):
    m, rounds = args
    s = state_from(m, *zip(*rounds))
    assert s.counts.sum() == s.rounds
    assert np.all((0 <= s.outcome_sums) & (s.outcome_sums <= s.counts))
    c = s.calibration_vector()
    assert abs(cal.calibration_rate(s) - dist_l1_to_l1ball(c, (1 / m) / 2)) <= 1e-15
    # independent recount straight from the rounds
    expect = np.zeros(m + 1)
    for i in range(m + 1):
        ys = [y for lvl, y in rounds if lvl == i]
        if ys:
            expect[i] = len(ys) / len(rounds) * abs(i / m - np.mean(ys))
    assert np.allclose(c, expect, atol=1e-12)


def test_nearest_level_is_a_response_on_a_fine_grid():
    m = 10
    for y in np.linspace(0, 1, 1001):
        i = int(np.argmin(np.abs(np.arange(m + 1) / m - y)))
        assert np.abs(dense_payoff(np.eye(m + 1)[i], y, m)).sum() <= 0.5 / m + 1e-12


# ---------------------------------------------------------------------------
# forecaster


def test_first_round_forecasts_zero():
    f = cal.CalibratedForecaster(10, seed=3)
    p, w = cal.forecaster_step(f)
    assert p == 0.0 and w.indices == (0,)


def test_deterministic_replay(rng):
    ys = rng.integers(0, 2, 300).tolist()
    runs = []
    for _ in range(2):
        f = cal.CalibratedForecaster(10, seed=42)
        ps = [cal.forecaster_step(f)[0]]
        for y in ys[:-1]:
            ps.append(cal.forecaster_step(f, y)[0])
        runs.append(ps)
    assert runs[0] == runs[1]


def test_average_payoff_is_expected_signed_vector(rng):
    m = 8
    f = cal.CalibratedForecaster(m, seed=1)
    ws, ys = [], []
    for _ in range(400):
        _, w = f.forecast()
        y = int(rng.random() < 0.3)
        f.observe(y)
        ws.append(w.to_dense())
        ys.append(y)
    expect = np.mean([dense_payoff(w, y, m) for w, y in zip(ws, ys)], axis=0)
    assert np.allclose(f.payoff_sum / 400, expect, atol=1e-12)


def test_degenerate_sampling_matches_realised_vector():
    m = 5
    f = cal.CalibratedForecaster(m, seed=0)
    for _ in range(200):
        _, w = f.forecast()
        assert len(w.indices) == 1
        f.observe(1)
    assert np.allclose(f.payoff_sum / 200, f.state.signed_vector(), atol=1e-15)


def test_observe_validation():
    f = cal.CalibratedForecaster(3)
    with pytest.raises(RuntimeError):
        f.observe(1)
    f.forecast()
    with pytest.raises(ValueError):
        f.observe(2)


def test_expected_rate_is_bounded_by_average_regret(rng):
    f = cal.CalibratedForecaster(10, seed=5)
    for t in range(1, 2001):
        _, w = f.forecast()
        f.observe(int(w.mean < 0.5) if t % 2 else int(rng.random() < 0.7))
        assert f.expected_rate() <= f.regret() / t + 1e-9
    assert f.diameter == pytest.approx(2 * math.sqrt(11))
