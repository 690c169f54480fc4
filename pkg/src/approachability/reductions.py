"""The two conversions between approachability and online linear optimization.

``OLOToApproach`` turns an OLO learner plus a halfspace oracle into an
approachability strategy; ``ApproachToOLO`` turns an approachability strategy
into an OLO learner. Both check their guarantee at every round and keep a
per-round log from which the checks can be recomputed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .calibration import oracle_w_from_theta
from .games import ApproachSet, BiaffineGame, MinimaxError, scalar_sup, solve_scalar_minimax
from .olo import OnlineGradientDescent, RegretLedger, StepSchedule

CHECK_SLACK = 1e-9


class HalfspaceUnsatisfiable(RuntimeError):
    """No strategy keeps the payoff in the halfspace ``{z : <theta, z> <= 0}``."""

    def __init__(self, theta, value):
        theta = np.asarray(theta, dtype=float)
        super().__init__(f"halfspace not satisfiable at theta={np.array2string(theta, precision=6)}: "
                         f"minimax value {value:.6g} > 0")
        self.theta = theta
        self.value = value


class BoundViolation(AssertionError):
    """A proven per-round inequality failed beyond its slack."""

    def __init__(self, name, t, lhs, rhs):
        super().__init__(f"{name} violated at round {t}: {lhs:.12g} > {rhs:.12g}")
        self.name, self.t, self.lhs, self.rhs = name, t, lhs, rhs


def wrap_lifted(game, target):
    """Prepend a constant 1 to the payoff and lift the target to ``{1} x S``."""
    k = game.payoff_dim
    A = np.concatenate([np.zeros((1,) + game.A.shape[1:]), game.A])
    b = np.vstack([np.zeros((1, game.x_body.dimension)), game.b])
    c = np.vstack([np.zeros((1, game.y_body.dimension)), game.c])
    d = np.concatenate([[1.0], game.d])
    lifted = BiaffineGame(game.x_body, game.y_body, A, b, c, d, name=f"lifted({game.name})")
    assert lifted.payoff_dim == k + 1
    body = target.body if isinstance(target, ApproachSet) else target
    return lifted, ApproachSet(geo.LiftedSet(body), "l2")


# ---------------------------------------------------------------------------
# halfspace oracles


def default_halfspace_oracle(game, theta, tol=1e-6):
    """Some ``x`` with ``sup_y <theta, payoff(x, y)> <= tol``.

    Vertices of X are tried first (in index order); otherwise the scalar
    minimax problem along ``theta`` is solved.
    """
    theta = geo.as_vector(theta, game.payoff_dim, "theta")
    X = game.x_body
    if not np.any(theta):
        return geo.linear_minimize(X, np.zeros(X.dimension))
    V = X.vertices()
    if V is not None:
        for v in V:
            if scalar_sup(game, theta, v) <= tol:
                return v.copy()
    try:
        sol = solve_scalar_minimax(game, theta, tol=tol / 10)
    except MinimaxError as exc:
        raise HalfspaceUnsatisfiable(theta, exc.gap) from exc
    if sol.value > tol:
        raise HalfspaceUnsatisfiable(theta, sol.value)
    return sol.x


@dataclass
class MinimaxOracle:
    """Halfspace oracle backed by the scalar minimax solver."""

    tol: float = 1e-6

    def __call__(self, game, theta):
        return default_halfspace_oracle(game, theta, self.tol)


@dataclass
class LiftedConeOracle:
    """Exact oracle for the game ``<f, x> (+) -f`` against ``cone({1} x K)^0``.

    A direction in ``cone({1} x K)`` has the form ``a (1, u)`` with ``u in K``
    and playing ``x = u`` makes the scalarised payoff vanish for every ``f``.
    """

    body: geo.ConvexBody
    tol: float = 0.0

    def __call__(self, game, theta):
        theta = np.asarray(theta, dtype=float)
        if theta[0] <= 1e-15 * max(1.0, float(np.abs(theta).max())):
            return geo.linear_minimize(self.body, np.zeros(self.body.dimension))
        return self.body.project(theta[1:] / theta[0])


@dataclass
class CalibrationHalfspaceOracle:
    """The binary-search forecast oracle used on the lifted calibration game.

    For ``theta`` in the polar of ``cone({1} x B_1(eps/2))`` the output ``w``
    keeps ``<theta, 1 (+) payoff(w, y)>`` nonpositive for both outcomes.
    """

    m: int
    tol: float = 1e-12

    def __call__(self, game, theta):
        rest = np.clip(np.asarray(theta, dtype=float)[1:], -1.0, 1.0)
        return oracle_w_from_theta(rest, self.m).to_dense()


# ---------------------------------------------------------------------------
# Algorithm 2: OLO -> approachability


@dataclass
class RoundLog:
    t: int
    theta: np.ndarray
    x: np.ndarray
    y: np.ndarray
    payoff: np.ndarray
    average: np.ndarray
    dist_to_cone: float
    dist_to_set: float
    regret: float
    bound_cone: float
    bound_set: float
    oracle_value: float
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        out = {k: getattr(self, k) for k in ("t", "dist_to_cone", "dist_to_set", "regret",
                                             "bound_cone", "bound_set", "oracle_value")}
        for k in ("theta", "x", "y", "payoff", "average"):
            out[k] = getattr(self, k).tolist()
        out.update(self.extra)
        return out


def default_learner_factory(grad_bound):
    def factory(body):
        schedule = StepSchedule("anytime", 2.0 * body.norm_bound, grad_bound)
        return OnlineGradientDescent(body, schedule, grad_bound=grad_bound)
    return factory


class OLOToApproach:
    """Approachability strategy built from an OLO learner over ``cone(S)^0 ∩ B_2(1)``.

    ``target`` is either a lifted set ``{1} x S'`` (the game must then have a
    constant first payoff coordinate; see ``wrap_lifted``) or a closed convex
    cone, in which case the distance is measured to the cone itself.
    """

    def __init__(self, game, target, learner_factory=None, oracle=None, tol=1e-6, strict=True,
                 keep_log=True):
        if not isinstance(target, ApproachSet):
            target = ApproachSet(target)
        body = target.body
        if body.dimension != game.payoff_dim:
            raise ValueError("target and payoff dimensions differ")
        if body.is_cone:
            self.cone = body
            self.set_norm = 0.0
            self.factor = 1.0
        else:
            if not isinstance(body, geo.LiftedSet):
                raise ValueError("target must be a lifted set {1} x S (use wrap_lifted) or a cone")
            if not game.is_lifted():
                raise ValueError("game payoffs must have first coordinate identically 1")
            self.cone = geo.LiftedCone(body.base)
            self.set_norm = body.base.norm_bound
            self.factor = 1.0 + self.set_norm
        self.game = game
        self.target = target
        self.K = geo.ConeBallIntersection(geo.polar(self.cone), 1.0)
        self.grad_bound = game.payoff_bound()
        factory = learner_factory or default_learner_factory(self.grad_bound)
        self.learner = factory(self.K)
        self.oracle = oracle or MinimaxOracle(tol)
        self.tol = float(getattr(self.oracle, "tol", tol))
        self.strict = strict
        self.keep_log = keep_log
        self.payoff_sum = np.zeros(game.payoff_dim)
        self.t = 0
        self.log = []
        self.violations = []
        self.last = None
        self._pending = None

    def act(self):
        """Query the learner for ``theta_t`` and the oracle for ``x_t``."""
        if self._pending is not None:
            raise RuntimeError("act() called twice without observe()")
        theta = self.learner.predict()
        x = self.game.x_body.project(self.oracle(self.game, theta))
        value = scalar_sup(self.game, theta, x)
        if value > self.tol + CHECK_SLACK:
            raise HalfspaceUnsatisfiable(theta, value)
        self._pending = (theta, x, value)
        return x

    def observe(self, y):
        if self._pending is None:
            raise RuntimeError("observe() called before act()")
        theta, x, value = self._pending
        self._pending = None
        y = geo.as_vector(y, self.game.y_body.dimension, "y")
        payoff = self.game.payoff(x, y)
        self.learner.update(-payoff)
        self.t += 1
        self.payoff_sum += payoff
        avg = self.payoff_sum / self.t
        d_cone = geo.dist_to_cone_dual(self.cone, avg)
        d_set = geo.distance(self.target.body, avg)
        regret = self.learner.regret()
        bound_cone = regret / self.t + self.tol
        bound_set = self.factor * bound_cone
        self._check("dist-to-cone <= regret/T + tol", d_cone, bound_cone)
        self._check("dist-to-set <= (1+|S|)(regret/T + tol)", d_set, bound_set)
        if self.target.body.is_cone:
            self._check("dual distance = primal distance", abs(d_cone - d_set), 0.0)
        else:
            self._check("lifting sandwich (lower)", d_cone, d_set)
            self._check("lifting sandwich (upper)", d_set, self.factor * d_cone)
        rec = RoundLog(self.t, theta, x, y, payoff, avg, d_cone, d_set, regret,
                       bound_cone, bound_set, value)
        self.last = rec
        if self.keep_log:
            self.log.append(rec)
        return rec

    def _check(self, name, lhs, rhs):
        if lhs > rhs + CHECK_SLACK:
            err = BoundViolation(name, self.t, lhs, rhs)
            self.violations.append(err)
            if self.strict:
                raise err

    def play(self, adversary, T):
        """Run ``T`` rounds; ``adversary(history)`` returns ``y_t`` from past records."""
        for _ in range(T):
            self.act()
            self.observe(adversary(self.log if self.keep_log else [self.last]))
        return self.last


def olo_to_approach(game, target, learner_factory=None, oracle=None, tol=1e-6):
    return OLOToApproach(game, target, learner_factory, oracle, tol)


# ---------------------------------------------------------------------------
# Algorithm 1: approachability -> OLO


def olo_game(body, cost_bound=1.0):
    """``payoff(x, f) = <f, x> (+) -f`` with costs ``f`` in ``[-cost_bound, cost_bound]^n``."""
    n = body.dimension
    A = np.zeros((n + 1, n, n))
    A[0] = np.eye(n)
    c = np.zeros((n + 1, n))
    c[1:] = -np.eye(n)
    return BiaffineGame(body, geo.hypercube(cost_bound, n), A, None, c, name="olo")


def olo_target(body):
    """``cone({1} x K)^0``."""
    return ApproachSet(geo.PolarCone(geo.LiftedCone(body)))


class ApproachToOLO:
    """OLO learner whose point at round t is the approachability strategy's ``x_t``.

    By default the strategy is ``OLOToApproach`` with OGD and the exact
    lifted-cone oracle, which gives the round trip.
    """

    def __init__(self, body, approach_factory=None, cost_bound=1.0, strict=True, keep_log=True):
        if body.is_cone:
            raise ValueError("the decision set must be compact")
        self.body = body
        self.game = olo_game(body, cost_bound)
        self.target = olo_target(body)
        if approach_factory is None:
            def approach_factory(game, target):
                return OLOToApproach(game, target, oracle=LiftedConeOracle(body), tol=0.0,
                                     strict=strict, keep_log=keep_log)
        self.algorithm = approach_factory(self.game, self.target)
        self.factor = 1.0 + body.norm_bound
        self.tol = float(getattr(self.algorithm, "tol", 0.0))
        self.ledger = RegretLedger(body.dimension)
        self.strict = strict
        self.keep_log = keep_log
        self.point = None
        self.log = []
        self.violations = []
        self.last = None

    def predict(self):
        if self.point is None:
            x = self.algorithm.act()
            if not self.body.contains(x, 1e-9):
                raise ValueError(f"approachability strategy emitted a point outside K: {x}")
            self.point = np.asarray(x, dtype=float)
        return self.point.copy()

    def update(self, loss):
        x = self.predict()
        loss = geo.as_vector(loss, self.body.dimension, "loss")
        self.ledger.record(loss, x)
        inner = self.algorithm.observe(loss)
        self.point = None
        t = self.ledger.rounds
        regret = self.ledger.regret(self.body)
        d_t = inner.dist_to_set
        bound = self.factor * d_t
        rec = {"t": t, "x": x.tolist(), "loss": loss.tolist(), "regret": regret,
               "regret_over_t": regret / t, "dist": d_t, "bound": bound,
               "inner_regret": inner.regret, "composed_bound": self.factor * inner.bound_set}
        if regret / t > bound + CHECK_SLACK + self.tol:
            err = BoundViolation("regret/T <= (1+|K|) D_T", t, regret / t, bound)
            self.violations.append(err)
            if self.strict:
                raise err
        self.last = rec
        if self.keep_log:
            self.log.append(rec)
        return rec

    def regret(self):
        return self.ledger.regret(self.body)


def approach_to_olo(body, approach_factory=None, cost_bound=1.0):
    return ApproachToOLO(body, approach_factory, cost_bound)


def calibration_instance(m):
    """Lifted calibration game, lifted l1-ball target and the binary-search oracle."""
    from .games import calibration_game
    game = calibration_game(m)
    lifted, target = wrap_lifted(game, geo.L1Ball(m + 1, 0.5 / m))
    return lifted, target, CalibrationHalfspaceOracle(m)


__all__ = [
    "ApproachToOLO", "BoundViolation", "CalibrationHalfspaceOracle", "HalfspaceUnsatisfiable",
    "LiftedConeOracle", "MinimaxOracle", "OLOToApproach", "RoundLog", "approach_to_olo",
    "calibration_instance", "default_halfspace_oracle", "olo_game", "olo_target",
    "olo_to_approach", "wrap_lifted",
]

