"""Biaffine vector-payoff games and desk-scale satisfiability checkers.

A game maps strategies ``x in X`` and ``y in Y`` to a payoff vector whose
k-th coordinate is ``x^T A_k y + b_k^T x + c_k^T y + d_k``. The checkers here
sample ``Y`` and the set of directions, so a ``False`` answer comes with a
witness while a ``True`` answer is evidence only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import linprog

from . import geometry as geo
from .geometry import TAU_GEOM, as_vector

GAME_SCHEMA = "approachability.game/1"
MAX_VERTEX_PAIRS = 1 << 16


class MinimaxError(RuntimeError):
    """The scalar minimax solver did not certify the requested tolerance."""

    def __init__(self, message, gap):
        super().__init__(f"{message} (achieved gap {gap:.3e})")
        self.gap = gap


class BiaffineGame:
    def __init__(self, x_body, y_body, A, b=None, c=None, d=None, name=""):
        A = np.asarray(A, dtype=float)
        if A.ndim != 3 or A.shape[1:] != (x_body.dimension, y_body.dimension):
            raise ValueError(
                f"A must have shape (d, {x_body.dimension}, {y_body.dimension}), got {A.shape}")
        k = A.shape[0]
        self.x_body = x_body
        self.y_body = y_body
        self.payoff_dim = k
        self.A = A
        self.b = np.zeros((k, x_body.dimension)) if b is None else np.asarray(b, dtype=float).reshape(k, -1)
        self.c = np.zeros((k, y_body.dimension)) if c is None else np.asarray(c, dtype=float).reshape(k, -1)
        self.d = np.zeros(k) if d is None else np.asarray(d, dtype=float).reshape(k)
        for arr in (self.A, self.b, self.c, self.d):
            if not np.all(np.isfinite(arr)):
                raise ValueError("game coefficients must be finite")
            arr.setflags(write=False)
        self.name = name
        self._payoff_bound = None

    def __repr__(self):
        return (f"BiaffineGame({self.name or 'unnamed'}: X={self.x_body.kind}[{self.x_body.dimension}], "
                f"Y={self.y_body.kind}[{self.y_body.dimension}], d={self.payoff_dim})")

    def payoff(self, x, y, check=True):
        x = as_vector(x, self.x_body.dimension, "x")
        y = as_vector(y, self.y_body.dimension, "y")
        if check:
            if not self.x_body.contains(x, 1e-8):
                raise ValueError("x is outside the player's strategy set")
            if not self.y_body.contains(y, 1e-8):
                raise ValueError("y is outside the adversary's strategy set")
        return np.einsum("knm,n,m->k", self.A, x, y) + self.b @ x + self.c @ y + self.d

    def affine_in_x(self, y):
        """``(J, o)`` with ``payoff(x, y) = J @ x + o``."""
        J = np.einsum("knm,m->kn", self.A, y) + self.b
        return J, self.c @ y + self.d

    def scalarize(self, direction):
        """Coefficients ``(M, bx, cy, c0)`` of ``<direction, payoff(x, y)>``."""
        th = as_vector(direction, self.payoff_dim, "direction")
        return (np.einsum("k,knm->nm", th, self.A), th @ self.b, th @ self.c, float(th @ self.d))

    def payoff_bound(self):
        """Max Euclidean norm of the payoff; exact over vertex pairs for polytopes."""
        if self._payoff_bound is None:
            VX, VY = self.x_body.vertices(), self.y_body.vertices()
            if VX is None or VY is None or VX.shape[0] * VY.shape[0] > MAX_VERTEX_PAIRS:
                rng = np.random.default_rng(0)
                VX = _sample_points(self.x_body, 64, rng) if VX is None else VX
                VY = _sample_points(self.y_body, 64, rng) if VY is None else VY
                slack = 1.05
            else:
                slack = 1.0
            P = (np.einsum("knm,in,jm->ijk", self.A, VX, VY) + (VX @ self.b.T)[:, None, :]
                 + (VY @ self.c.T)[None, :, :] + self.d)
            self._payoff_bound = slack * float(np.linalg.norm(P, axis=-1).max())
        return self._payoff_bound

    def is_lifted(self):
        """True if the first payoff coordinate is identically 1."""
        return (self.payoff_dim >= 1 and not self.A[0].any() and not self.b[0].any()
                and not self.c[0].any() and self.d[0] == 1.0)

    def to_dict(self):
        return {
            "schema": GAME_SCHEMA,
            "name": self.name,
            "x_body": geo.body_to_dict(self.x_body),
            "y_body": geo.body_to_dict(self.y_body),
            "payoff_dim": self.payoff_dim,
            "coefficients": {"A": self.A.tolist(), "b": self.b.tolist(),
                             "c": self.c.tolist(), "d": self.d.tolist()},
        }

    @classmethod
    def from_dict(cls, spec):
        if spec.get("schema", GAME_SCHEMA) != GAME_SCHEMA:
            raise ValueError(f"unsupported game schema {spec.get('schema')!r}")
        X = geo.body_from_dict(spec["x_body"])
        Y = geo.body_from_dict(spec["y_body"])
        co = spec["coefficients"]
        k = int(spec.get("payoff_dim", len(co["A"])))
        A = np.asarray(co.get("A", np.zeros((k, X.dimension, Y.dimension))), dtype=float)
        if A.size == 0:
            A = np.zeros((k, X.dimension, Y.dimension))
        return cls(X, Y, A, co.get("b"), co.get("c"), co.get("d"), name=spec.get("name", ""))


def _sample_points(body, n, rng):
    pts = rng.normal(size=(n, body.dimension)) * 2.0 * max(body.norm_bound, 1.0)
    return np.array([body.project(p) for p in pts])


def eval_payoff(game, x, y):
    """Payoff vector of the game at ``(x, y)``; strategies must be feasible."""
    return game.payoff(x, y)


@dataclass(frozen=True)
class ApproachSet:
    """Target set with the norm used to measure distance to it."""

    body: geo.ConvexBody
    distance_norm: str = "l2"

    def __post_init__(self):
        if self.distance_norm not in ("l2", "l1"):
            raise ValueError("distance_norm must be 'l2' or 'l1'")

    @property
    def dimension(self):
        return self.body.dimension

    def distance(self, z):
        if self.distance_norm == "l2":
            return geo.distance(self.body, z)
        body = self.body
        z = as_vector(z, body.dimension)
        if isinstance(body, geo.L1Ball):
            return geo.dist_l1_to_l1ball(z, body.radius)
        if isinstance(body, geo.Box):
            return float(np.abs(z - body.project(z)).sum())
        if isinstance(body, geo.Polytope) and body.vertices().shape[0] == 1:
            return float(np.abs(z - body.vertices()[0]).sum())
        raise NotImplementedError(f"l1 distance to a {body.kind} is not supported")

    def to_dict(self):
        return {"body": geo.body_to_dict(self.body), "norm": self.distance_norm}

    @classmethod
    def from_dict(cls, spec):
        return cls(geo.body_from_dict(spec["body"]), spec.get("norm", "l2"))


# ---------------------------------------------------------------------------
# scalar minimax


@dataclass
class MinimaxSolution:
    """``x`` guarantees ``sup_y f(x, y) <= value``; ``value - lower <= gap``."""

    x: np.ndarray
    value: float
    lower: float
    y: np.ndarray
    method: str
    iterations: int = 0

    @property
    def gap(self):
        return self.value - self.lower


def _sup_over_y(game, coeffs, x):
    M, bx, cy, c0 = coeffs
    grad_y = M.T @ x + cy
    y = game.y_body.linear_minimize(-grad_y)
    return float(grad_y @ y + bx @ x + c0), y


def _inf_over_x(game, coeffs, y):
    M, bx, cy, c0 = coeffs
    grad_x = M @ y + bx
    x = game.x_body.linear_minimize(grad_x)
    return float(grad_x @ x + cy @ y + c0), x


def scalar_sup(game, direction, x):
    """Exact ``sup_{y in Y} <direction, payoff(x, y)>``."""
    return _sup_over_y(game, game.scalarize(direction), as_vector(x, game.x_body.dimension))[0]


def _solve_vertex_lp(game, coeffs):
    VX, VY = game.x_body.vertices(), game.y_body.vertices()
    M, bx, cy, c0 = coeffs
    P = VX @ M @ VY.T + (VX @ bx)[:, None] + (VY @ cy)[None, :] + c0
    nx, ny = P.shape
    # min t  s.t.  P^T lam <= t, sum(lam) = 1, lam >= 0
    cost = np.zeros(nx + 1)
    cost[-1] = 1.0
    A_ub = np.hstack([P.T, -np.ones((ny, 1))])
    A_eq = np.hstack([np.ones((1, nx)), np.zeros((1, 1))])
    res = linprog(cost, A_ub=A_ub, b_ub=np.zeros(ny), A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * nx + [(None, None)], method="highs")
    if res.status != 0:
        raise MinimaxError(f"vertex LP failed: {res.message}", math.inf)
    lam = np.maximum(res.x[:nx], 0.0)
    lam /= lam.sum()
    mu = np.maximum(-np.asarray(res.ineqlin.marginals), 0.0)
    mu = mu / mu.sum() if mu.sum() > 0 else np.full(ny, 1.0 / ny)
    return lam @ VX, mu @ VY


def _self_play(game, coeffs, tol, max_iter, check_every=50):
    """Both players run projected OGD; the averaged iterates are returned."""
    M, bx, cy, c0 = coeffs
    X, Y = game.x_body, game.y_body
    gx = float(np.linalg.norm(M, 2)) * Y.norm_bound + float(np.linalg.norm(bx)) + 1e-12
    gy = float(np.linalg.norm(M, 2)) * X.norm_bound + float(np.linalg.norm(cy)) + 1e-12
    x = X.project(np.zeros(X.dimension))
    y = Y.project(np.zeros(Y.dimension))
    xs, ys = np.zeros_like(x), np.zeros_like(y)
    gap = math.inf
    for t in range(1, max_iter + 1):
        xs += x
        ys += y
        gradx = M @ y + bx
        grady = M.T @ x + cy
        x = X.project(x - X.diameter / (gx * math.sqrt(t)) * gradx)
        y = Y.project(y + Y.diameter / (gy * math.sqrt(t)) * grady)
        if t % check_every == 0 or t == max_iter:
            xa, ya = xs / t, ys / t
            upper, _ = _sup_over_y(game, coeffs, xa)
            lower, _ = _inf_over_x(game, coeffs, ya)
            gap = upper - lower
            if gap <= tol:
                return xa, ya, t
    raise MinimaxError(f"self-play did not reach tolerance {tol} in {max_iter} rounds", gap)


def solve_scalar_minimax(game, direction, tol=1e-6, max_iter=100_000, method="auto"):
    """Solve ``min_x max_y <direction, payoff(x, y)>`` to duality gap ``tol``.

    ``method="lp"`` solves the equivalent matrix game over the vertices of X
    and Y (exact for polytopes); ``"self_play"`` runs no-regret self-play and
    works for any bodies. ``"auto"`` picks the LP when both bodies are
    polytopes of manageable size. Either way the gap is certified by exact
    best responses before returning.
    """
    direction = as_vector(direction, game.payoff_dim, "direction")
    X, Y = game.x_body, game.y_body
    if not np.any(direction):
        x = geo.linear_minimize(X, np.zeros(X.dimension))
        y = geo.linear_minimize(Y, np.zeros(Y.dimension))
        return MinimaxSolution(x, 0.0, 0.0, y, "trivial")
    coeffs = game.scalarize(direction)
    if method == "auto":
        VX, VY = X.vertices(), Y.vertices()
        small = VX is not None and VY is not None and VX.shape[0] * VY.shape[0] <= MAX_VERTEX_PAIRS
        method = "lp" if small else "self_play"
    iterations = 0
    if method == "lp":
        x, y = _solve_vertex_lp(game, coeffs)
    elif method == "self_play":
        x, y, iterations = _self_play(game, coeffs, tol, max_iter)
    else:
        raise ValueError(f"unknown minimax method {method!r}")
    x = X.project(x)
    upper, _ = _sup_over_y(game, coeffs, x)
    lower, _ = _inf_over_x(game, coeffs, Y.project(y))
    if upper - lower > tol:
        raise MinimaxError(f"minimax gap above tolerance {tol}", upper - lower)
    return MinimaxSolution(x, upper, lower, y, method, iterations)


# ---------------------------------------------------------------------------
# satisfiability checkers


def grid_points(body, n):
    """Deterministic grid of roughly ``n`` points per axis inside ``body``."""
    if n < 2:
        raise ValueError("grid resolution must be >= 2")
    if isinstance(body, geo.Simplex):
        pts = []
        k = n - 1
        for comp in _compositions(k, body.dimension):
            pts.append(np.array(comp, dtype=float) / k)
        return np.array(pts)
    lo = -body.norm_bound * np.ones(body.dimension)
    hi = body.norm_bound * np.ones(body.dimension)
    if isinstance(body, geo.Box):
        lo, hi = body.lo, body.hi
    axes = [np.linspace(lo[i], hi[i], n) for i in range(body.dimension)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, body.dimension)
    if isinstance(body, geo.Box):
        return mesh
    pts = np.array([body.project(p) for p in mesh])
    return np.unique(np.round(pts, 12), axis=0)


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass
class ResponseReport:
    satisfiable: bool
    witnesses: list = field(default_factory=list)
    failing_y: np.ndarray | None = None
    failing_distance: float = 0.0
    evidence_only: bool = True

    def __bool__(self):
        return self.satisfiable


def best_response_distance(game, target, y, tol=1e-9, max_iter=5000):
    """Search ``x in X`` minimising the distance from ``payoff(x, y)`` to the target.

    Vertices of X are tried first; then accelerated projected gradient on
    half the squared Euclidean distance, which is smooth and convex in x.
    Returns ``(x, distance)`` with the distance in the target's norm.
    """
    X = game.x_body
    J, o = game.affine_in_x(y)
    best_x, best_d = None, math.inf
    V = X.vertices()
    starts = [] if V is None else list(V)
    starts.append(X.project(np.zeros(X.dimension)))
    for v in starts:
        dv = target.distance(J @ v + o)
        if dv < best_d:
            best_x, best_d = v, dv
    if best_d <= tol:
        return best_x, best_d
    L = float(np.linalg.norm(J, 2)) ** 2
    if L == 0.0:
        return best_x, best_d
    x = best_x.copy()
    z = x.copy()
    t = 1.0
    prev_obj = math.inf
    for _ in range(max_iter):
        r = J @ z + o
        grad = J.T @ (r - target.body.project(r))
        x_new = X.project(z - grad / L)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        z = x_new + ((t - 1.0) / t_new) * (x_new - x)
        x, t = x_new, t_new
        dx = target.distance(J @ x + o)
        if dx < best_d:
            best_x, best_d = x.copy(), dx
        if best_d <= tol:
            break
        obj = geo.distance(target.body, J @ x + o)
        if obj > prev_obj:
            z, t = x.copy(), 1.0
        prev_obj = obj
    return best_x, best_d


def check_response_satisfiable(game, target, y_grid=11, tol=1e-6):
    """For every grid point ``y`` look for ``x_y`` landing within ``tol`` of the target."""
    report = ResponseReport(True)
    for y in grid_points(game.y_body, y_grid):
        x, dist = best_response_distance(game, target, y, tol=tol * 1e-3)
        report.witnesses.append((y, x, dist))
        if dist > tol:
            report.satisfiable = False
            report.failing_y = y
            report.failing_distance = dist
            report.evidence_only = False
            return report
    return report


@dataclass
class HalfspaceReport:
    satisfiable: bool
    worst_margin: float
    worst_direction: np.ndarray
    margins: list = field(default_factory=list)

    def __bool__(self):
        return self.satisfiable


def sample_directions(dim, n, seed=0):
    """Signed coordinate axes followed by seeded random unit vectors."""
    dirs = []
    for i in range(dim):
        for s in (1.0, -1.0):
            e = np.zeros(dim)
            e[i] = s
            dirs.append(e)
    rng = np.random.default_rng(seed)
    while len(dirs) < n:
        v = rng.normal(size=dim)
        nv = np.linalg.norm(v)
        if nv > 1e-12:
            dirs.append(v / nv)
    return dirs[:max(n, 2 * dim)]


def check_halfspace_satisfiable(game, target, directions=64, tol=1e-6, seed=0):
    """Test sampled halfspaces ``{z : <theta, z> <= h_S(theta)}`` containing the target.

    A halfspace is satisfiable when the scalar game along ``theta`` has
    value at most the support function ``h_S(theta)``.
    """
    worst, worst_dir = -math.inf, None
    margins = []
    for theta in sample_directions(game.payoff_dim, directions, seed):
        h = geo.support(target.body, theta)
        sol = solve_scalar_minimax(game, theta, tol=tol * 1e-2)
        margin = sol.value - h
        margins.append(margin)
        if margin > worst:
            worst, worst_dir = margin, theta
    return HalfspaceReport(worst <= tol, worst, worst_dir, margins)


# ---------------------------------------------------------------------------
# bundled games


def calibration_game(m):
    """Forecast distribution ``w`` on m+1 levels vs outcome ``y in [0, 1]``."""
    n = m + 1
    A = np.zeros((n, n, 1))
    b = np.zeros((n, n))
    for i in range(n):
        A[i, i, 0] = 1.0
        b[i, i] = -i / m
    return BiaffineGame(geo.Simplex(n), geo.Box([0.0], [1.0]), A, b, name=f"calibration(m={m})")


def calibration_target(m):
    return ApproachSet(geo.L1Ball(m + 1, 0.5 / m), "l1")


def identity_game():
    """``payoff(x, y) = (x, y)`` on ``[0, 1] x [0, 1]``."""
    A = np.zeros((2, 1, 1))
    b = np.array([[1.0], [0.0]])
    c = np.array([[0.0], [1.0]])
    return BiaffineGame(geo.Box([0.0], [1.0]), geo.Box([0.0], [1.0]), A, b, c, name="identity")


def diagonal_target():
    return ApproachSet(geo.Polytope([[0.0, 0.0], [1.0, 1.0]]))


def unreachable_target(point=(2.0, 2.0)):
    return ApproachSet(geo.Polytope([list(point)]))


def bundled_games(m=10):
    """The three reference (game, target) pairs keyed by name."""
    return {
        "calibration": (calibration_game(m), calibration_target(m)),
        "diagonal": (identity_game(), diagonal_target()),
        "unreachable": (identity_game(), unreachable_target()),
    }


def save_game(path, game, target=None):
    spec = game.to_dict()
    if target is not None:
        spec["target"] = target.to_dict()
    Path(path).write_text(json.dumps(spec, indent=2), encoding="utf-8")


def load_game(path):
    """Read a game file; returns ``(game, target_or_None)``."""
    spec = json.loads(Path(path).read_text(encoding="utf-8"))
    game = BiaffineGame.from_dict(spec)
    target = ApproachSet.from_dict(spec["target"]) if "target" in spec else None
    return game, target


def load_target(path):
    spec = json.loads(Path(path).read_text(encoding="utf-8"))
    if "body" not in spec:
        spec = {"body": spec}
    return ApproachSet.from_dict(spec)


def check_biaffine(game, n=20, seed=0, tol=1e-9):
    """Largest deviation from biaffinity over random mixtures."""
    rng = np.random.default_rng(seed)
    X, Y = game.x_body, game.y_body
    worst = 0.0
    for _ in range(n):
        x1, x2 = _sample_points(X, 2, rng)
        y1, y2 = _sample_points(Y, 2, rng)
        a = rng.random()
        lhs = game.payoff(a * x1 + (1 - a) * x2, y1, check=False)
        rhs = a * game.payoff(x1, y1, check=False) + (1 - a) * game.payoff(x2, y1, check=False)
        worst = max(worst, float(np.abs(lhs - rhs).max()))
        lhs = game.payoff(x1, a * y1 + (1 - a) * y2, check=False)
        rhs = a * game.payoff(x1, y1, check=False) + (1 - a) * game.payoff(x1, y2, check=False)
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst


__all__ = [
    "ApproachSet", "BiaffineGame", "HalfspaceReport", "MinimaxError", "MinimaxSolution",
    "ResponseReport", "TAU_GEOM", "bundled_games", "calibration_game", "calibration_target",
    "check_biaffine", "check_halfspace_satisfiable", "check_response_satisfiable",
    "diagonal_target", "eval_payoff", "grid_points", "identity_game", "load_game", "load_target",
    "save_game", "scalar_sup", "solve_scalar_minimax", "unreachable_target",
]
