"""Adversaries, simulation runners, the invariant suite and log writers."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
import re
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import calibration as cal
from . import games as gm
from . import geometry as geo
from . import olo
from . import reductions as red

CAL_SCHEMA = "approachability.calibration/1"
RED_SCHEMA = "approachability.reduction/1"
OLO_SCHEMA = "approachability.olo/1"
SEED_ENV = "APPROACHABILITY_SEED"


def default_seed():
    return int(os.environ.get(SEED_ENV, "0"))


# ---------------------------------------------------------------------------
# adversaries


@dataclass
class AdversaryView:
    """What an adversary may look at before choosing ``y_t``.

    ``forecast_mean`` is the mean of the forecast distribution, a function
    of revealed outcomes only; the sampled forecast of the current round is
    never exposed. ``score(y)`` is the post-round distance if ``y`` is played.
    """

    t: int
    past_forecasts: list
    past_outcomes: list
    forecast_mean: float | None = None
    candidates: list | None = None
    score: object = None


class HistoryView:
    """Read-only view of the first ``n`` entries of a growing list."""

    def __init__(self, items, n):
        self._items, self._n = items, n

    def __len__(self):
        return self._n

    def __getitem__(self, i):
        if isinstance(i, slice):
            return self._items[:self._n][i]
        if i < 0:
            i += self._n
        if not 0 <= i < self._n:
            raise IndexError(i)
        return self._items[i]

    def __iter__(self):
        return iter(self._items[:self._n])


class Adversary:
    name = "adversary"

    def __call__(self, view):
        raise NotImplementedError


class FixedSequence(Adversary):
    name = "fixed_sequence"

    def __init__(self, values):
        self._it = iter(values)

    def __call__(self, view):
        try:
            return next(self._it)
        except StopIteration:
            raise EOFError("fixed sequence exhausted") from None


class IIDBernoulli(Adversary):
    """Each coordinate takes its upper value with probability ``p``."""

    name = "iid_bernoulli"

    def __init__(self, p=0.5, seed=0, lo=0.0, hi=1.0):
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        self.p = p
        self.lo, self.hi = lo, hi
        self.rng = np.random.Generator(np.random.Philox(seed))

    def __call__(self, view):
        if view.candidates is None:
            return int(self.rng.random() < self.p)
        lo, hi = self.lo, self.hi
        return np.where(self.rng.random(len(lo)) < self.p, hi, lo)


class UniformBox(Adversary):
    name = "uniform"

    def __init__(self, lo, hi, seed=0):
        self.lo, self.hi = np.asarray(lo, float), np.asarray(hi, float)
        self.rng = np.random.Generator(np.random.Philox(seed))

    def __call__(self, view):
        return self.rng.uniform(self.lo, self.hi)


class AdaptiveOpposite(Adversary):
    """Outcome 1 exactly when the expected forecast is below 1/2."""

    name = "adaptive_opposite"

    def __call__(self, view):
        if view.forecast_mean is None:
            raise ValueError("adaptive_opposite needs a forecasting context")
        return int(view.forecast_mean < 0.5)


class AdaptiveWorstDirection(Adversary):
    """Grid search for the move that maximises the post-round distance."""

    name = "adaptive_worst_direction"

    def __call__(self, view):
        best, best_score = None, -math.inf
        for y in view.candidates:
            s = view.score(y)
            if s > best_score + 1e-15:
                best, best_score = y, s
        return best


def parse_adversary(spec, seed=0, y_body=None):
    """Build an adversary from ``iid:P``, ``opposite``, ``worst``, ``uniform``
    or ``fixed:PATH`` / ``fixed:0,1,1``."""
    kind, _, arg = spec.partition(":")
    kind = kind.strip().lower()
    if kind in ("iid", "iid_bernoulli"):
        p = float(arg) if arg else 0.5
        if y_body is not None:
            if not isinstance(y_body, geo.Box):
                raise ValueError("iid adversary needs a box strategy set")
            return IIDBernoulli(p, seed, y_body.lo, y_body.hi)
        return IIDBernoulli(p, seed)
    if kind in ("opposite", "adaptive_opposite"):
        return AdaptiveOpposite()
    if kind in ("worst", "adaptive_worst_direction"):
        return AdaptiveWorstDirection()
    if kind == "uniform":
        if not isinstance(y_body, geo.Box):
            raise ValueError("uniform adversary needs a box strategy set")
        return UniformBox(y_body.lo, y_body.hi, seed)
    if kind in ("fixed", "fixed_sequence"):
        if not arg:
            raise ValueError("fixed adversary needs a file or a comma-separated list")
        if re.fullmatch(r"[01](,[01])*", arg):
            return FixedSequence(parse_outcome(v) for v in arg.split(","))
        return FixedSequence(read_outcomes(Path(arg).read_text().splitlines()))
    raise ValueError(f"unknown adversary {spec!r}")


def parse_outcome(token):
    token = token.strip()
    if token not in ("0", "1"):
        raise ValueError(f"outcome must be 0 or 1, got {token!r}")
    return int(token)


def read_outcomes(lines):
    for line in lines:
        if line.strip():
            yield parse_outcome(line)


# ---------------------------------------------------------------------------
# run records and writers


@dataclass
class Check:
    name: str
    passed: bool
    lhs: float
    rhs: float

    @property
    def margin(self):
        return self.rhs - self.lhs

    def as_dict(self):
        return {"name": self.name, "passed": self.passed, "lhs": self.lhs, "rhs": self.rhs,
                "margin": self.margin}


@dataclass
class RunRecord:
    schema: str
    config: dict
    seed: int
    rounds: list = field(default_factory=list)
    final: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def check(self, name, lhs, rhs, slack=red.CHECK_SLACK):
        c = Check(name, bool(lhs <= rhs + slack), float(lhs), float(rhs))
        self.checks.append(c)
        return c

    def summary(self):
        return {"schema": self.schema, "config": self.config, "seed": self.seed,
                "final": self.final, "checks": [c.as_dict() for c in self.checks],
                "passed": self.passed}


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return " ".join(_cell(float(u)) for u in np.ravel(v))
    return str(v)


def write_csv(record, stream, columns=None):
    """Header comment with the schema, then one RFC-4180 row per round."""
    rows = record.rounds
    if columns is None:
        columns = list(rows[0]) if rows else []
    stream.write(f"#schema={record.schema}\r\n")
    w = csv.writer(stream, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r[c]) for c in columns])


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    raise TypeError(f"cannot serialise {type(v)}")


def write_jsonl(record, stream):
    """Header record carrying schema and config, then one record per round, then a summary."""
    stream.write(json.dumps({"schema": record.schema, "config": record.config, "seed": record.seed},
                            default=_jsonable) + "\n")
    for r in record.rounds:
        stream.write(json.dumps(r, default=_jsonable) + "\n")
    stream.write(json.dumps({"summary": record.summary()}, default=_jsonable) + "\n")


def render(record, fmt):
    buf = io.StringIO()
    (write_csv if fmt == "csv" else write_jsonl)(record, buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# calibration runs


CAL_COLUMNS = ["t", "p", "y", "rate", "rate_raw", "expected_rate", "regret", "probes"]


def run_calibration(m=10, T=10_000, adversary="iid:0.5", seed=None, schedule="anytime",
                    keep_rounds=True, on_round=None):
    """Run the forecaster for up to ``T`` rounds (fewer if a fixed sequence ends).

    Per-round invariants raise ``BoundViolation``; end-of-run bounds are
    recorded as checks on the returned record.
    """
    seed = default_seed() if seed is None else seed
    if isinstance(adversary, str):
        adv_name = adversary
        adversary = parse_adversary(adversary, seed + 1)
    else:
        adv_name = adversary.name
    fc = cal.CalibratedForecaster(m, seed, schedule, horizon=T if schedule == "fixed" else None)
    half_eps = 0.5 / m
    budget = cal.probe_budget(m)
    config = {"m": m, "T": T, "adversary": adv_name, "schedule": schedule,
              "diameter": fc.diameter, "grad_bound_config": cal.GRAD_BOUND, "probe_budget": budget}
    record = RunRecord(CAL_SCHEMA, config, seed)
    start = time.perf_counter()
    past_p, past_y = [], []
    max_probes = max_touch = 0
    for t in range(1, T + 1):
        level, w = fc.forecast()
        view = AdversaryView(t, HistoryView(past_p, t - 1), HistoryView(past_y, t - 1),
                             forecast_mean=w.mean, candidates=None,
                             score=lambda y, w=w: _cal_score(fc, w, y))
        if isinstance(adversary, AdaptiveWorstDirection):
            view.candidates = [0, 1]
        try:
            y = int(adversary(view))
        except EOFError:
            fc.pending = None
            break
        # oracle guarantee at the current iterate, for both outcomes
        for yy in (0, 1):
            g = sum(fc.learner.value(i) * v for i, v in cal.calib_payoff(w, yy).entries.items())
            if g > half_eps + 1e-12:
                raise red.BoundViolation("oracle guarantee", t, g, half_eps)
        if w.probes > budget:
            raise red.BoundViolation("probe budget", t, w.probes, budget)
        fc.observe(y)
        touched = fc.learner.last_writes + fc.learner.last_clamps
        if touched > 4:
            raise red.BoundViolation("sparse update touches", t, touched, 4)
        max_probes = max(max_probes, w.probes)
        max_touch = max(max_touch, touched)
        regret = fc.regret()
        exp_rate = fc.expected_rate()
        if exp_rate > regret / t + red.CHECK_SLACK:
            raise red.BoundViolation("expected rate <= regret/T", t, exp_rate, regret / t)
        past_p.append(level / m)
        past_y.append(y)
        if keep_rounds or on_round is not None:
            rate, raw = fc.rate(raw=True)
            row = {"t": t, "p": level / m, "y": y, "rate": rate, "rate_raw": raw,
                   "expected_rate": exp_rate, "regret": regret, "probes": w.probes}
            if keep_rounds:
                record.rounds.append(row)
            if on_round is not None:
                on_round(row)
    T_done = fc.rounds
    record.elapsed = time.perf_counter() - start
    if T_done == 0:
        raise ValueError("no rounds were played")
    rate, raw = fc.rate(raw=True)
    regret = fc.regret()
    G = fc.max_loss_norm
    gd_bound = G * fc.diameter / math.sqrt(T_done)
    unused = int(np.sum(fc.state.counts == 0))
    record.final = {"T": T_done, "rate": rate, "rate_raw": raw, "expected_rate": fc.expected_rate(),
                    "regret": regret, "regret_over_T": regret / T_done, "G": G, "D": fc.diameter,
                    "GD_over_sqrtT": gd_bound, "max_probes": max_probes, "max_touched": max_touch,
                    "stored_coordinates": fc.learner.stored, "unused_levels": unused,
                    "diameter_sqrt_1_over_eps": math.sqrt(m),
                    "elapsed_s": record.elapsed}
    record.check("rate <= regret/T", rate, regret / T_done)
    record.check("regret/T <= G D / sqrt(T)", regret / T_done, gd_bound)
    return record


def _cal_score(fc, w, y):
    s = fc.payoff_sum.copy()
    for i, v in cal.calib_payoff(w, y).entries.items():
        s[i] += v
    return geo.dist_l1_to_l1ball(s / (fc.rounds + 1), 0.5 / fc.m)


# ---------------------------------------------------------------------------
# reduction runs


def parse_body(spec):
    """``simplex:N``, ``cube:N[:R]``, ``l2ball:N[:R]``, ``l1ball:N[:R]`` or a JSON file."""
    if Path(spec).exists():
        return geo.body_from_dict(json.loads(Path(spec).read_text()))
    kind, *args = spec.split(":")
    n = int(args[0]) if args else 2
    r = float(args[1]) if len(args) > 1 else 1.0
    if kind == "simplex":
        return geo.Simplex(n)
    if kind in ("cube", "hypercube"):
        return geo.hypercube(r, n)
    if kind in ("l2ball", "ball"):
        return geo.L2Ball(n, r)
    if kind == "l1ball":
        return geo.L1Ball(n, r)
    raise ValueError(f"unknown body {spec!r}")


def resolve_game(spec, m=10):
    """Builtin game name or game file; returns ``(game, target_or_None, oracle_or_None)``."""
    builtin = gm.bundled_games(m)
    if spec in builtin:
        game, target = builtin[spec]
        if spec == "calibration":
            lifted, lt, oracle = red.calibration_instance(m)
            return lifted, lt, oracle
        return game, target, None
    game, target = gm.load_game(spec)
    return game, target, None


def _grid_candidates(body, n=5):
    V = body.vertices()
    if V is not None and V.shape[0] <= 64:
        return list(V)
    return list(gm.grid_points(body, n))


def run_reduction_check(direction="o2a", game="diagonal", target=None, T=1000, adversary="iid:0.5",
                        tol=1e-6, seed=None, body="simplex:3", m=10, keep_rounds=True,
                        on_round=None):
    """Run one reduction and check its bound inequality at every round."""
    seed = default_seed() if seed is None else seed
    if direction == "o2a":
        return _run_o2a(game, target, T, adversary, tol, seed, m, keep_rounds, on_round)
    if direction == "a2o":
        return _run_a2o(body, T, adversary, seed, keep_rounds, on_round)
    raise ValueError(f"unknown direction {direction!r}")


def _run_o2a(game_spec, target_spec, T, adversary, tol, seed, m, keep_rounds, on_round):
    if isinstance(game_spec, gm.BiaffineGame):
        game, target, oracle = game_spec, target_spec, None
    else:
        game, target, oracle = resolve_game(game_spec, m)
        if target_spec is not None:
            target = target_spec if isinstance(target_spec, gm.ApproachSet) else gm.load_target(target_spec)
            oracle = None if not game.is_lifted() else oracle
    if target is None:
        raise ValueError("no target given and the game file has none")
    if not target.body.is_cone and not isinstance(target.body, geo.LiftedSet):
        game, target = red.wrap_lifted(game, target)
    alg = red.OLOToApproach(game, target, oracle=oracle or red.MinimaxOracle(tol), tol=tol,
                            keep_log=False)
    adv_name = adversary if isinstance(adversary, str) else adversary.name
    if isinstance(adversary, str):
        adversary = parse_adversary(adversary, seed + 1, game.y_body)
    config = {"direction": "o2a", "game": game.name, "target": geo.body_to_dict(target.body),
              "T": T, "adversary": adv_name, "tol": alg.tol, "factor": alg.factor}
    record = RunRecord(RED_SCHEMA, config, seed)
    start = time.perf_counter()
    worst = -math.inf
    candidates = _grid_candidates(game.y_body)
    for t in range(1, T + 1):
        x = alg.act()

        def score(y, x=x):
            p = game.payoff(x, y)
            return geo.distance(target.body, (alg.payoff_sum + p) / (alg.t + 1))

        view = AdversaryView(t, [], [], candidates=candidates, score=score)
        rec = alg.observe(adversary(view))
        worst = max(worst, rec.dist_to_set - rec.bound_set)
        row = {"t": t, "dist_to_cone": rec.dist_to_cone, "dist_to_set": rec.dist_to_set,
               "regret": rec.regret, "bound_cone": rec.bound_cone, "bound_set": rec.bound_set,
               "oracle_value": rec.oracle_value, "theta": rec.theta, "x": rec.x, "y": rec.y}
        if keep_rounds:
            record.rounds.append(row)
        if on_round is not None:
            on_round(row)
    record.elapsed = time.perf_counter() - start
    last = alg.last
    record.final = {"T": T, "dist_to_set": last.dist_to_set, "dist_to_cone": last.dist_to_cone,
                    "regret": last.regret, "bound_set": last.bound_set,
                    "worst_margin": -worst, "elapsed_s": record.elapsed}
    record.check("D_T <= (1+|S|)(regret/T + tol) at every round", worst, 0.0)
    return record


def _run_a2o(body_spec, T, adversary, seed, keep_rounds, on_round):
    body = parse_body(body_spec) if isinstance(body_spec, str) else body_spec
    learner = red.ApproachToOLO(body, keep_log=False)
    y_body = learner.game.y_body
    adv_name = adversary if isinstance(adversary, str) else adversary.name
    if isinstance(adversary, str):
        adversary = parse_adversary("uniform" if adversary.startswith("iid") else adversary,
                                    seed + 1, y_body)
    config = {"direction": "a2o", "body": geo.body_to_dict(body), "T": T, "adversary": adv_name,
              "factor": learner.factor}
    record = RunRecord(RED_SCHEMA, config, seed)
    start = time.perf_counter()
    worst = -math.inf
    candidates = _grid_candidates(y_body)
    for t in range(1, T + 1):
        x = learner.predict()

        def score(f, x=x):
            return float(learner.ledger.cumulative_cost + f @ x)

        view = AdversaryView(t, [], [], candidates=candidates, score=score)
        rec = learner.update(adversary(view))
        worst = max(worst, rec["regret_over_t"] - rec["bound"])
        row = {k: rec[k] for k in ("t", "regret", "regret_over_t", "dist", "bound", "inner_regret",
                                   "composed_bound")}
        if keep_rounds:
            record.rounds.append(row)
        if on_round is not None:
            on_round(row)
    record.elapsed = time.perf_counter() - start
    last = learner.last
    record.final = {"T": T, "regret": last["regret"], "regret_over_T": last["regret_over_t"],
                    "D_T": last["dist"], "bound": last["bound"], "composed_bound": last["composed_bound"],
                    "worst_margin": -worst, "elapsed_s": record.elapsed}
    record.check("regret/T <= (1+|K|) D_T at every round", worst, 0.0)
    return record


# ---------------------------------------------------------------------------
# standalone OGD


def run_olo(body="cube:11", T=10_000, seed=None, losses="pm1", schedule="anytime",
            keep_rounds=True, on_round=None):
    """OGD against random losses, checking ``regret_t <= D G sqrt(t)`` every round.

    ``losses`` is ``pm1`` (independent random signs) or ``uniform`` on the
    unit cube.
    """
    seed = default_seed() if seed is None else seed
    body = parse_body(body) if isinstance(body, str) else body
    n = body.dimension
    rng = np.random.Generator(np.random.Philox(seed))
    G = math.sqrt(n)
    D = body.diameter
    sched = olo.StepSchedule(schedule, D, G, horizon=T if schedule == "fixed" else None)
    learner = olo.OnlineGradientDescent(body, sched, grad_bound=G)
    record = RunRecord(OLO_SCHEMA, {"body": geo.body_to_dict(body), "T": T, "losses": losses,
                                    "schedule": schedule, "D": D, "G": G}, seed)
    worst = -math.inf
    g_seen = 0.0
    start = time.perf_counter()
    for t in range(1, T + 1):
        if losses == "pm1":
            f = rng.choice([-1.0, 1.0], size=n)
        elif losses == "uniform":
            f = rng.uniform(-1.0, 1.0, size=n)
        else:
            raise ValueError(f"unknown loss family {losses!r}")
        g_seen = max(g_seen, float(np.linalg.norm(f)))
        learner.update(f)
        reg = learner.regret()
        bound = D * g_seen * math.sqrt(t)
        worst = max(worst, reg - bound)
        if not body.contains(learner.point, geo.TAU_GEOM):
            raise red.BoundViolation("feasibility", t, 1.0, 0.0)
        row = {"t": t, "regret": reg, "bound": bound}
        if keep_rounds:
            record.rounds.append(row)
        if on_round is not None:
            on_round(row)
    record.elapsed = time.perf_counter() - start
    record.final = {"T": T, "regret": learner.regret(), "G_measured": g_seen, "D": D,
                    "worst_margin": -worst, "elapsed_s": record.elapsed}
    record.check("regret_t <= D G sqrt(t) at every round", worst, 0.0)
    return record


# ---------------------------------------------------------------------------
# invariant suite


def _random_cone(rng, dim):
    k = int(rng.integers(1, 2 * dim + 1))
    return geo.GeneratedCone(rng.normal(size=(k, dim)))


def verify_geometry(seed=0, cones=20, points=50):
    rng = np.random.default_rng(seed)
    worst_dual = worst_polar = worst_idem = 0.0
    for _ in range(cones):
        C = _random_cone(rng, int(rng.integers(3, 7)))
        G = C.generators()
        for _ in range(points):
            x = rng.normal(size=C.dimension) * 3
            p = C.project(x)
            r = x - p
            worst_dual = max(worst_dual, abs(geo.dist_to_cone_dual(C, x) - np.linalg.norm(r)))
            worst_polar = max(worst_polar, abs(r @ p), float((G @ r).max(initial=0.0)))
            worst_idem = max(worst_idem, float(np.abs(C.project(p) - p).max()))
    worst_sandwich = -math.inf
    for K in (geo.Simplex(3), geo.hypercube(1.0, 2), geo.L2Ball(3, 1.0)):
        L = geo.lift(K)
        for _ in range(points):
            x = rng.normal(size=K.dimension) * 3
            lo = geo.distance(L, np.concatenate(([1.0], x)))
            mid = geo.distance(K, x)
            worst_sandwich = max(worst_sandwich, lo - mid, mid - (1 + K.norm_bound) * lo)
    return [
        ("geometry: dual distance = projection distance", worst_dual <= 1e-9, worst_dual),
        ("geometry: residual lies in the polar cone", worst_polar <= 1e-9, worst_polar),
        ("geometry: projection is idempotent", worst_idem <= 1e-12, worst_idem),
        ("geometry: lifting sandwich", worst_sandwich <= 1e-9, worst_sandwich),
    ]


def structural_thetas(m):
    """Cube points hitting every oracle branch: both early exits and every bracket."""
    out = []
    for i in range(m + 1):
        th = np.linspace(0.9, -0.9, m + 1)
        if i == 0:
            th[0] = -0.5
        elif i == m:
            th = np.full(m + 1, 0.5)
            th[1:m] = -0.5
        else:
            th = np.where(np.arange(m + 1) <= i - 1, 0.6, -0.4)
            th[i] = 0.0
        out.append(th)
    for i in range(m):
        th = np.where(np.arange(m + 1) <= i, 0.7, -0.3)
        out.append(th)
    return out


def verify_oracle(m=16, samples=10_000, seed=0):
    rng = np.random.default_rng(seed)
    half_eps = 0.5 / m
    worst = -math.inf
    bad_bracket = 0
    max_probes = 0
    thetas = itertools.chain(structural_thetas(m), (rng.uniform(-1, 1, m + 1) for _ in range(samples)))
    for th in thetas:
        w = cal.oracle_w_from_theta(th, m)
        worst = max(worst, cal.oracle_value_bound(th, w) - half_eps)
        max_probes = max(max_probes, w.probes)
        if w.branch == "bracket" and len(w.indices) == 2:
            i, j = w.indices
            if not (j == i + 1 and th[i] > 0 >= th[j]):
                bad_bracket += 1
    return [
        (f"oracle: <payoff, theta> <= eps/2 (m={m})", worst <= 1e-12, worst),
        ("oracle: brackets satisfy theta(i) > 0 >= theta(i+1)", bad_bracket == 0, bad_bracket),
        (f"oracle: probes <= {cal.probe_budget(m)}", max_probes <= cal.probe_budget(m), max_probes),
    ]


def verify_satisfiability(m=10):
    out = []
    for name, (game, target) in gm.bundled_games(m).items():
        r = gm.check_response_satisfiable(game, target)
        h = gm.check_halfspace_satisfiable(game, target)
        out.append((f"satisfiability checkers agree on {name} game", bool(r) == bool(h),
                    f"response={bool(r)} halfspace={bool(h)} (sampled evidence)"))
    return out


def verify_olo(seed=0, rounds=500):
    rng = np.random.default_rng(seed)
    d = 11
    sched = olo.StepSchedule("anytime", 2 * math.sqrt(d), math.sqrt(2))
    dense = olo.OnlineGradientDescent(geo.hypercube(1.0, d), sched)
    sparse = olo.SparseCubeOGD(d, 1.0, sched)
    mismatches = 0
    for _ in range(rounds):
        idx = rng.choice(d, 2, replace=False)
        v = rng.normal(size=2)
        sv = olo.SparseVector(d, {int(idx[0]): float(v[0]), int(idx[1]): float(v[1])})
        dense.update(sv.to_dense())
        sparse.update(sv)
        mismatches += int(not np.array_equal(dense.predict(), sparse.predict()))
    return [("olo: sparse and dense OGD iterates identical", mismatches == 0, mismatches)]


def verify_calibration_claim(seed=0, states=200):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(states):
        m = int(rng.integers(1, 30))
        st = cal.CalibrationState(m)
        for _ in range(int(rng.integers(1, 60))):
            st.record(int(rng.integers(0, m + 1)), int(rng.integers(0, 2)))
        worst = max(worst, abs(cal.calibration_rate(st) - geo.dist_l1_to_l1ball(st.calibration_vector(), 0.5 / m)))
    return [("calibration: rate = l1 distance of c_T to the eps/2 ball", worst <= 1e-15, worst)]


def verify_suite(seed=0):
    """All desk-scale invariant checks as ``(name, passed, detail)`` triples."""
    results = []
    results += verify_geometry(seed)
    results += verify_oracle(seed=seed)
    results += verify_olo(seed)
    results += verify_calibration_claim(seed)
    results += verify_satisfiability()
    return results
