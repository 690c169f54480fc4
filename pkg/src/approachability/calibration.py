"""Efficient (l1, eps)-calibrated forecasting.

The forecaster approaches the l1 ball of radius eps/2 in the calibration game
by running sparse OGD on the cube ``[-1, 1]^(m+1)`` and converting each
iterate into a forecast distribution with a binary-search oracle. A round
costs O(log m) oracle probes plus O(1) learner work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import dist_l1_to_l1ball
from .olo import SparseCubeOGD, SparseVector, StepSchedule

GRAD_BOUND = math.sqrt(2.0)


def spec_probe_budget(m):
    """``ceil(log2(m + 1)) + 1``."""
    return math.ceil(math.log2(m + 1)) + 1


def probe_budget(m):
    """Worst-case probes of the oracle: both endpoints plus a bisection of ``[0, m]``."""
    return 2 + math.ceil(math.log2(m)) if m > 1 else 2


@dataclass(frozen=True)
class ForecastDistribution:
    """Distribution over the grid ``{0, 1/m, ..., 1}`` with at most two atoms."""

    m: int
    indices: tuple
    weights: tuple
    probes: int = 0
    branch: str = ""

    def __post_init__(self):
        if len(self.indices) != len(self.weights) or not 1 <= len(self.indices) <= 2:
            raise ValueError("a forecast distribution has one or two atoms")
        if any(w < 0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError(f"invalid forecast weights {self.weights}")
        if any(not 0 <= i <= self.m for i in self.indices):
            raise ValueError("forecast index outside the grid")

    def to_dense(self):
        w = np.zeros(self.m + 1)
        for i, p in zip(self.indices, self.weights):
            w[i] += p
        return w

    @property
    def mean(self):
        return sum(i * p for i, p in zip(self.indices, self.weights)) / self.m

    def sample(self, u):
        """Inverse-CDF draw of a grid index from a uniform ``u`` in [0, 1)."""
        if len(self.indices) == 1 or u < self.weights[0]:
            return self.indices[0]
        return self.indices[1]


def point_mass(m, i, probes=0, branch="point"):
    return ForecastDistribution(m, (i,), (1.0,), probes, branch)


def calib_payoff(w, y, m=None):
    """Sparse payoff with coordinate ``i`` equal to ``w(i) (y - i/m)``."""
    if y not in (0, 1, 0.0, 1.0):
        raise ValueError(f"outcome must be 0 or 1, got {y!r}")
    if isinstance(w, ForecastDistribution):
        m = w.m
        pairs = zip(w.indices, w.weights)
    else:
        w = np.asarray(w, dtype=float)
        if m is None:
            m = w.size - 1
        if w.size != m + 1 or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("w must be a distribution on m + 1 levels")
        pairs = ((int(i), float(w[i])) for i in np.flatnonzero(w))
    return SparseVector(m + 1, {i: p * (y - i / m) for i, p in pairs if p != 0.0})


def oracle_w_from_theta(theta, m):
    """Forecast distribution satisfying ``<payoff(w, y), theta> <= 1/(2m)`` for y in {0, 1}.

    ``theta`` is an array or a callable ``i -> theta(i)``; each read counts as
    one probe and the count is stored on the result.
    """
    if callable(theta):
        read = theta
    else:
        arr = np.asarray(theta, dtype=float)
        if arr.shape != (m + 1,):
            raise ValueError(f"theta must have length {m + 1}, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("theta must be finite")
        read = arr.__getitem__
    probes = 0

    def probe(i):
        nonlocal probes
        probes += 1
        v = float(read(i))
        if abs(v) > 1.0 + 1e-12:
            raise ValueError(f"theta({i}) = {v} lies outside the unit cube")
        return v

    t0 = probe(0)
    if t0 <= 0.0:
        return point_mass(m, 0, probes, "low")
    tm = probe(m)
    if tm >= 0.0:
        return point_mass(m, m, probes, "high")
    # invariant: theta(lo) > 0 >= theta(hi)
    lo, hi, a, b = 0, m, t0, tm
    while hi - lo > 1:
        mid = (lo + hi) // 2
        v = probe(mid)
        if v > 0.0:
            lo, a = mid, v
        else:
            hi, b = mid, v
    if b == 0.0:
        return point_mass(m, hi, probes, "bracket")
    # w(lo) = (1/a) / (1/a - 1/b), rewritten to avoid reciprocals
    w_lo = -b / (a - b)
    w_hi = a / (a - b)
    return ForecastDistribution(m, (lo, hi), (w_lo, w_hi), probes, "bracket")


def oracle_value_bound(theta, w):
    """Exact ``max_{y in {0,1}} <payoff(w, y), theta>``."""
    theta = np.asarray(theta, dtype=float)
    return max(sum(theta[i] * v for i, v in calib_payoff(w, y).entries.items()) for y in (0, 1))


@dataclass
class CalibrationState:
    """Per-level forecast counts and outcome sums."""

    m: int
    counts: np.ndarray = field(default=None)
    outcome_sums: np.ndarray = field(default=None)
    rounds: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be a positive integer")
        if self.counts is None:
            self.counts = np.zeros(self.m + 1, dtype=np.int64)
        if self.outcome_sums is None:
            self.outcome_sums = np.zeros(self.m + 1, dtype=np.int64)

    @property
    def eps(self):
        return 1.0 / self.m

    def record(self, level, y):
        self.counts[level] += 1
        self.outcome_sums[level] += int(y)
        self.rounds += 1

    def calibration_vector(self):
        """``c(i) = (n_i / T) |i/m - rho_i|``; unused levels contribute 0."""
        if self.rounds < 1:
            raise ValueError("calibration vector is undefined before the first round")
        n = self.counts.astype(float)
        levels = np.arange(self.m + 1) / self.m
        used = self.counts > 0
        rho = np.zeros(self.m + 1)
        rho[used] = self.outcome_sums[used] / n[used]
        c = np.zeros(self.m + 1)
        c[used] = n[used] / self.rounds * np.abs(levels[used] - rho[used])
        return c

    def signed_vector(self):
        """Average realized payoff ``(1/T) sum_t (y_t - p_t) e_{p_t}``."""
        levels = np.arange(self.m + 1) / self.m
        return (self.outcome_sums - self.counts * levels) / self.rounds


def calibration_rate(state, raw=False):
    """Clamped rate ``max(0, ||c_T||_1 - eps/2)``; ``raw=True`` also returns the unclamped value."""
    c = state.calibration_vector()
    value = float(np.abs(c).sum()) - state.eps / 2
    clamped = max(0.0, value)
    return (clamped, value) if raw else clamped


class CalibratedForecaster:
    """Sparse OGD on the unit cube driving the binary-search oracle.

    Call ``forecast()`` to get the round's grid index, then ``observe(y)``.
    The learner is charged ``-payoff(w_t, y_t)`` with the forecast
    distribution, not the sampled level.
    """

    def __init__(self, m, seed=0, schedule="anytime", horizon=None, eta=None):
        if int(m) != m or m < 1:
            raise ValueError("m must be a positive integer")
        self.m = int(m)
        self.diameter = 2.0 * math.sqrt(self.m + 1)
        self.schedule = StepSchedule(schedule, self.diameter, GRAD_BOUND, horizon, eta)
        self.learner = SparseCubeOGD(self.m + 1, 1.0, self.schedule, GRAD_BOUND)
        self.state = CalibrationState(self.m)
        self.rng = np.random.Generator(np.random.Philox(seed))
        self.seed = seed
        self.payoff_sum = np.zeros(self.m + 1)
        self.max_loss_norm = 0.0
        self.pending = None
        self.last_distribution = None

    def forecast(self):
        if self.pending is not None:
            raise RuntimeError("forecast() called twice without observe()")
        w = oracle_w_from_theta(self.learner.value, self.m)
        level = w.sample(self.rng.random())
        self.pending = (w, level)
        self.last_distribution = w
        return level, w

    def observe(self, y):
        if self.pending is None:
            raise RuntimeError("observe() called before forecast()")
        if y not in (0, 1):
            raise ValueError(f"outcome must be 0 or 1, got {y!r}")
        w, level = self.pending
        self.pending = None
        payoff = calib_payoff(w, y)
        for i, v in payoff.entries.items():
            self.payoff_sum[i] += v
        loss = -payoff
        self.max_loss_norm = max(self.max_loss_norm, math.sqrt(sum(v * v for v in loss.entries.values())))
        self.learner.update(loss)
        self.state.record(level, y)
        return payoff

    @property
    def rounds(self):
        return self.state.rounds

    def regret(self):
        return self.learner.regret()

    def expected_rate(self):
        """l1 distance from the average expected payoff to the eps/2 ball."""
        return dist_l1_to_l1ball(self.payoff_sum / self.state.rounds, 0.5 / self.m)

    def rate(self, raw=False):
        return calibration_rate(self.state, raw)


def forecaster_step(forecaster, y_prev=None):
    """Reveal the previous outcome (if any), then forecast; returns ``(p_t, w_t)``."""
    if y_prev is not None:
        forecaster.observe(y_prev)
    level, w = forecaster.forecast()
    return level / forecaster.m, w
