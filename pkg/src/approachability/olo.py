"""Online linear optimization: projected online gradient descent and regret.

The learners follow the usual protocol: ``predict()`` emits the current
point, ``update(loss)`` charges the loss against that point and moves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import TAU_GEOM, Box, as_vector, linear_minimize


class GradientBoundError(ValueError):
    """An observed loss vector exceeded the configured norm bound."""


@dataclass(frozen=True)
class StepSchedule:
    """Step sizes for OGD.

    ``anytime``: eta_t = D / (G sqrt(t)); ``fixed``: eta = D / (G sqrt(T));
    ``constant``: eta_t = eta.
    """

    kind: str = "anytime"
    diameter: float = 1.0
    grad_bound: float = 1.0
    horizon: int | None = None
    eta: float | None = None

    def __post_init__(self):
        if self.kind not in ("anytime", "fixed", "constant"):
            raise ValueError(f"unknown schedule {self.kind!r}")
        if self.kind == "fixed" and not self.horizon:
            raise ValueError("fixed schedule needs a horizon")
        if self.kind == "constant" and (self.eta is None or self.eta <= 0):
            raise ValueError("constant schedule needs eta > 0")
        if self.kind != "constant" and (self.diameter <= 0 or self.grad_bound <= 0):
            raise ValueError("diameter and grad_bound must be positive")

    def __call__(self, t):
        if self.kind == "constant":
            return self.eta
        if self.kind == "fixed":
            return self.diameter / (self.grad_bound * math.sqrt(self.horizon))
        return self.diameter / (self.grad_bound * math.sqrt(t))


@dataclass
class RegretLedger:
    """Running totals from which regret is recomputed exactly."""

    dimension: int
    cumulative_cost: float = 0.0
    rounds: int = 0
    cost_sum: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.cost_sum is None:
            self.cost_sum = np.zeros(self.dimension)

    def record(self, loss, point):
        self.cumulative_cost += float(loss @ point)
        self.cost_sum += loss
        self.rounds += 1

    def record_sparse(self, loss, point_values):
        self.cumulative_cost += sum(v * p for v, p in zip(loss.values(), point_values))
        for i, v in loss.items():
            self.cost_sum[i] += v
        self.rounds += 1

    def regret(self, body):
        return regret(self, body)


def regret(ledger, body):
    """``sum <f_t, x_t> - min_{x in body} <sum f_t, x>``; may be negative."""
    if ledger.rounds < 1:
        raise ValueError("regret is undefined before the first round")
    best = linear_minimize(body, ledger.cost_sum)
    return ledger.cumulative_cost - float(ledger.cost_sum @ best)


class OnlineGradientDescent:
    """Projected online gradient descent over a compact convex body.

    Starts at the origin, or at its projection when the origin is outside
    the body. If ``grad_bound`` is given, a loss with larger Euclidean norm is
    rejected rather than clipped.
    """

    def __init__(self, body, schedule=None, grad_bound=None):
        if body.is_cone:
            raise ValueError("OGD needs a compact decision body")
        self.body = body
        if schedule is None:
            schedule = StepSchedule("anytime", body.diameter or 1.0, grad_bound or 1.0)
        self.schedule = schedule
        self.grad_bound = grad_bound
        start = np.zeros(body.dimension)
        if not body.contains(start):
            start = body.project(start)
        self.point = start
        self.round_index = 0
        self.ledger = RegretLedger(body.dimension)

    def predict(self):
        return self.point.copy()

    def update(self, loss):
        loss = as_vector(loss, self.body.dimension, "loss")
        if self.grad_bound is not None:
            n = float(np.linalg.norm(loss))
            if n > self.grad_bound * (1 + 1e-12):
                raise GradientBoundError(f"loss norm {n} exceeds configured bound {self.grad_bound}")
        self.ledger.record(loss, self.point)
        self.round_index += 1
        eta = self.schedule(self.round_index)
        self.point = self.body.project(self.point - eta * loss)
        return self.point.copy()

    def regret(self):
        return regret(self.ledger, self.body)


def ogd_step(learner, loss):
    """One OGD round: charge ``loss`` at the current point, then step."""
    if learner is None:
        raise ValueError("learner is not initialised")
    return learner.update(loss)


@dataclass(frozen=True)
class SparseVector:
    """A vector of length ``dim`` given by its nonzero entries."""

    dim: int
    entries: dict

    def __post_init__(self):
        for i, v in self.entries.items():
            if not 0 <= i < self.dim:
                raise ValueError(f"index {i} out of range for dimension {self.dim}")
            if not math.isfinite(v):
                raise ValueError("sparse vector has a non-finite entry")

    @property
    def nnz(self):
        return sum(1 for v in self.entries.values() if v != 0.0)

    def to_dense(self):
        out = np.zeros(self.dim)
        for i, v in self.entries.items():
            out[i] = v
        return out

    def __neg__(self):
        return SparseVector(self.dim, {i: -v for i, v in self.entries.items()})


class SparseCubeOGD:
    """OGD on the cube ``[-r, r]^d`` with losses of at most two nonzeros.

    Only the nonzero coordinates of the iterate are stored, and one round
    reads and writes only the coordinates the loss touches, so a round costs
    O(1) and memory is O(min(T, d)).
    """

    MAX_NNZ = 2

    def __init__(self, dimension, radius=1.0, schedule=None, grad_bound=None):
        self.dimension = int(dimension)
        self.radius = float(radius)
        self.body = Box(np.full(self.dimension, -self.radius), np.full(self.dimension, self.radius))
        if schedule is None:
            schedule = StepSchedule("anytime", self.body.diameter, grad_bound or 1.0)
        self.schedule = schedule
        self.grad_bound = grad_bound
        self.theta = {}
        self.round_index = 0
        self.ledger = RegretLedger(self.dimension)
        self.last_writes = 0
        self.last_clamps = 0

    def value(self, i):
        return self.theta.get(i, 0.0)

    def predict(self):
        out = np.zeros(self.dimension)
        for i, v in self.theta.items():
            out[i] = v
        return out

    @property
    def stored(self):
        return len(self.theta)

    def update(self, loss):
        if not isinstance(loss, SparseVector):
            raise TypeError("SparseCubeOGD.update expects a SparseVector")
        if loss.dim != self.dimension:
            raise ValueError(f"loss has dimension {loss.dim}, expected {self.dimension}")
        if len(loss.entries) > self.MAX_NNZ:
            raise ValueError(f"sparse loss has {len(loss.entries)} entries, at most {self.MAX_NNZ} allowed")
        if self.grad_bound is not None:
            n = math.sqrt(sum(v * v for v in loss.entries.values()))
            if n > self.grad_bound * (1 + 1e-12):
                raise GradientBoundError(f"loss norm {n} exceeds configured bound {self.grad_bound}")
        current = [self.value(i) for i in loss.entries]
        self.ledger.record_sparse(loss.entries, current)
        self.round_index += 1
        eta = self.schedule(self.round_index)
        writes = clamps = 0
        for (i, v), old in zip(loss.entries.items(), current):
            if v == 0.0:
                continue
            new = old - eta * v
            writes += 1
            if new > self.radius:
                new = self.radius
                clamps += 1
            elif new < -self.radius:
                new = -self.radius
                clamps += 1
            if new == 0.0:
                self.theta.pop(i, None)
            else:
                self.theta[i] = new
        self.last_writes = writes
        self.last_clamps = clamps
        return self

    def regret(self):
        # min over the cube of <F, theta> is -r ||F||_1
        return self.ledger.cumulative_cost + self.radius * float(np.abs(self.ledger.cost_sum).sum())


def sparse_ogd_step(learner, loss):
    """Sparse counterpart of ``ogd_step`` on the cube; returns the new iterate."""
    learner.update(loss)
    return learner.predict()


def is_feasible(learner, tol=TAU_GEOM):
    return learner.body.contains(learner.predict(), tol)
