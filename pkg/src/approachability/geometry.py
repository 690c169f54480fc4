"""Convex bodies, convex cones and their polars.

Every body exposes membership, Euclidean projection, linear minimization and
a norm bound. Cones additionally expose their polar, and the distance to a
cone can be computed either directly (through the projection) or through the
dual formulation ``max <theta, x>`` over unit vectors ``theta`` of the polar
cone. The two routes are implemented with different algorithms so that each
can be used to check the other.

All objects are immutable after construction.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import lsq_linear

from ._qp import min_norm_point, project_polyhedral_cone

TAU_GEOM = 1e-10


def as_vector(x, dim=None, name="x"):
    """Validate ``x`` as a finite 1-d float vector of dimension ``dim``."""
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise ValueError(f"{name} must be a vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"{name} has dimension {v.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def project_simplex(v, z=1.0):
    """Projection onto ``{w >= 0, sum(w) = z}`` by sorting."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - z
    ind = np.arange(1, v.shape[0] + 1)
    cond = u - css / ind > 0
    rho = ind[cond][-1]
    tau = css[cond][-1] / rho
    return np.maximum(v - tau, 0.0)


class ConvexBody:
    """Base class. Subclasses set ``dimension`` and implement the queries."""

    kind = "body"
    is_cone = False
    dimension: int

    def project(self, x):
        raise NotImplementedError

    def contains(self, x, tol=TAU_GEOM):
        x = as_vector(x, self.dimension)
        return bool(np.linalg.norm(self.project(x) - x) <= tol)

    def linear_minimize(self, f):
        raise NotImplementedError

    @property
    def norm_bound(self):
        raise NotImplementedError

    @property
    def diameter(self):
        """Upper bound on the Euclidean diameter."""
        return 2.0 * self.norm_bound

    def vertices(self):
        """Extreme points as rows, or ``None`` if the body is not a polytope."""
        return None

    def _check_bounded(self, what):
        if self.is_cone:
            raise ValueError(f"{what} is undefined on the unbounded {self.kind}")

    def __repr__(self):
        return f"{type(self).__name__}(dimension={self.dimension})"


def _lowest_index_vertex_argmin(V, f):
    vals = V @ f
    return V[int(np.argmin(vals))].copy()


class Simplex(ConvexBody):
    """Probability simplex ``{w >= 0, sum(w) = 1}`` in R^d."""

    kind = "simplex"

    def __init__(self, dimension):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = int(dimension)

    def project(self, x):
        return project_simplex(as_vector(x, self.dimension))

    def contains(self, x, tol=TAU_GEOM):
        x = as_vector(x, self.dimension)
        return bool(x.min() >= -tol and abs(x.sum() - 1.0) <= tol)

    def linear_minimize(self, f):
        f = as_vector(f, self.dimension, "f")
        out = np.zeros(self.dimension)
        out[int(np.argmin(f))] = 1.0
        return out

    @property
    def norm_bound(self):
        return 1.0

    @property
    def diameter(self):
        return math.sqrt(2.0) if self.dimension > 1 else 0.0

    def vertices(self):
        return np.eye(self.dimension)


class Box(ConvexBody):
    """Axis-aligned box ``[lo, hi]``; ``hypercube(r, d)`` is ``[-r, r]^d``."""

    kind = "box"

    def __init__(self, lo, hi):
        lo = as_vector(lo, name="lo")
        hi = as_vector(hi, lo.shape[0], "hi")
        if np.any(hi < lo):
            raise ValueError("box needs lo <= hi")
        self.lo = lo
        self.hi = hi
        self.lo.setflags(write=False)
        self.hi.setflags(write=False)
        self.dimension = lo.shape[0]

    @property
    def radius(self):
        if np.all(self.lo == -self.hi) and np.all(self.hi == self.hi[0]):
            return float(self.hi[0])
        return None

    def project(self, x):
        return np.clip(as_vector(x, self.dimension), self.lo, self.hi)

    def contains(self, x, tol=TAU_GEOM):
        x = as_vector(x, self.dimension)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def linear_minimize(self, f):
        f = as_vector(f, self.dimension, "f")
        return np.where(f < 0, self.hi, self.lo).astype(float)

    @property
    def norm_bound(self):
        return float(np.linalg.norm(np.maximum(np.abs(self.lo), np.abs(self.hi))))

    @property
    def diameter(self):
        return float(np.linalg.norm(self.hi - self.lo))

    def vertices(self):
        # Vertex index = bit pattern, bit set means "hi"; index 0 is all-lo.
        rows = []
        for bits in itertools.product((0, 1), repeat=self.dimension):
            rows.append(np.where(np.array(bits[::-1], dtype=bool), self.hi, self.lo))
        return np.array(rows, dtype=float)


def hypercube(radius, dimension):
    return Box(np.full(dimension, -float(radius)), np.full(dimension, float(radius)))


class L2Ball(ConvexBody):
    kind = "l2_ball"

    def __init__(self, dimension, radius=1.0):
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        self.dimension = int(dimension)
        self.radius = float(radius)

    def project(self, x):
        x = as_vector(x, self.dimension)
        n = np.linalg.norm(x)
        if n <= self.radius:
            return x.copy()
        return x * (self.radius / n)

    def contains(self, x, tol=TAU_GEOM):
        return bool(np.linalg.norm(as_vector(x, self.dimension)) <= self.radius + tol)

    def linear_minimize(self, f):
        f = as_vector(f, self.dimension, "f")
        n = np.linalg.norm(f)
        if n == 0.0:
            return np.zeros(self.dimension)
        return -self.radius * f / n

    @property
    def norm_bound(self):
        return self.radius


class L1Ball(ConvexBody):
    kind = "l1_ball"

    def __init__(self, dimension, radius=1.0):
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        self.dimension = int(dimension)
        self.radius = float(radius)

    def project(self, x):
        x = as_vector(x, self.dimension)
        if np.abs(x).sum() <= self.radius:
            return x.copy()
        if self.radius == 0.0:
            return np.zeros(self.dimension)
        return np.sign(x) * project_simplex(np.abs(x), self.radius)

    def contains(self, x, tol=TAU_GEOM):
        return bool(np.abs(as_vector(x, self.dimension)).sum() <= self.radius + tol)

    def linear_minimize(self, f):
        f = as_vector(f, self.dimension, "f")
        return _lowest_index_vertex_argmin(self.vertices(), f)

    @property
    def norm_bound(self):
        return self.radius

    def vertices(self):
        rows = []
        for i in range(self.dimension):
            for s in (1.0, -1.0):
                e = np.zeros(self.dimension)
                e[i] = s * self.radius
                rows.append(e)
        return np.array(rows)


class Polytope(ConvexBody):
    """Convex hull of finitely many points (rows of ``vertices``)."""

    kind = "polytope"

    def __init__(self, vertices):
        V = np.atleast_2d(np.asarray(vertices, dtype=float))
        if V.shape[0] == 0 or not np.all(np.isfinite(V)):
            raise ValueError("polytope needs at least one finite vertex")
        self._V = V
        self._V.setflags(write=False)
        self.dimension = V.shape[1]

    def project(self, x):
        x = as_vector(x, self.dimension)
        if self._V.shape[0] == 1:
            return self._V[0].copy()
        p, _ = min_norm_point(self._V - x)
        return p + x

    def linear_minimize(self, f):
        return _lowest_index_vertex_argmin(self._V, as_vector(f, self.dimension, "f"))

    @property
    def norm_bound(self):
        return float(np.linalg.norm(self._V, axis=1).max())

    @property
    def diameter(self):
        V = self._V
        d = np.linalg.norm(V[:, None, :] - V[None, :, :], axis=-1)
        return float(d.max())

    def vertices(self):
        return self._V.copy()


class LiftedSet(ConvexBody):
    """The compact set ``{1} x base`` sitting in dimension ``d + 1``."""

    kind = "lifted_set"

    def __init__(self, base):
        if base.is_cone:
            raise ValueError("lifted set needs a compact base")
        self.base = base
        self.dimension = base.dimension + 1

    def project(self, x):
        x = as_vector(x, self.dimension)
        return np.concatenate(([1.0], self.base.project(x[1:])))

    def linear_minimize(self, f):
        f = as_vector(f, self.dimension, "f")
        return np.concatenate(([1.0], self.base.linear_minimize(f[1:])))

    @property
    def norm_bound(self):
        return math.sqrt(1.0 + self.base.norm_bound**2)

    @property
    def diameter(self):
        return self.base.diameter

    def vertices(self):
        V = self.base.vertices()
        if V is None:
            return None
        return np.hstack([np.ones((V.shape[0], 1)), V])


# ---------------------------------------------------------------------------
# cones


class Cone(ConvexBody):
    is_cone = True

    def linear_minimize(self, f):
        raise ValueError(f"linear minimization over the unbounded {self.kind} is undefined")

    @property
    def diameter(self):
        return math.inf

    def polar(self):
        return PolarCone(self)

    def project_polar(self, x):
        """Projection onto the polar cone; defaults to Moreau's decomposition."""
        x = as_vector(x, self.dimension)
        return x - self.project(x)


class OrthantCone(Cone):
    """Nonnegative orthant; its generating slice is the simplex."""

    kind = "orthant_cone"

    def __init__(self, dimension):
        self.dimension = int(dimension)

    def project(self, x):
        return np.maximum(as_vector(x, self.dimension), 0.0)

    def project_polar(self, x):
        return np.minimum(as_vector(x, self.dimension), 0.0)

    @property
    def norm_bound(self):
        return 1.0

    def generators(self):
        return np.eye(self.dimension)


class GeneratedCone(Cone):
    """``{G^T lam : lam >= 0}`` for generator rows ``G``.

    Projection is a nonnegative least-squares problem over the generator
    weights. The polar ``{theta : G theta <= 0}`` is projected onto with an
    independent active-set method.
    """

    kind = "finitely_generated_cone"

    def __init__(self, generators, dimension=None, slice_norm=None):
        G = np.asarray(generators, dtype=float)
        if G.size == 0:
            if dimension is None:
                raise ValueError("dimension is required for a cone with no generators")
            G = np.zeros((0, int(dimension)))
        G = np.atleast_2d(G)
        if not np.all(np.isfinite(G)):
            raise ValueError("generators must be finite")
        self._G = G
        self._G.setflags(write=False)
        self.dimension = G.shape[1]
        self._slice_norm = slice_norm

    def generators(self):
        return self._G.copy()

    def project(self, x):
        x = as_vector(x, self.dimension)
        if self._G.shape[0] == 0:
            return np.zeros(self.dimension)
        lam = lsq_linear(self._G.T, x, bounds=(0.0, np.inf), method="bvls", tol=1e-14).x
        return self._G.T @ lam

    def project_polar(self, x):
        x = as_vector(x, self.dimension)
        if self._G.shape[0] == 0:
            return x.copy()
        return project_polyhedral_cone(self._G, x)

    def contains(self, x, tol=TAU_GEOM):
        x = as_vector(x, self.dimension)
        return bool(np.linalg.norm(self.project(x) - x) <= tol * max(1.0, np.linalg.norm(x)))

    @property
    def norm_bound(self):
        if self._slice_norm is not None:
            return self._slice_norm
        if self._G.shape[0] == 0:
            return 0.0
        return float(np.linalg.norm(self._G, axis=1).max())


class SecondOrderCone(Cone):
    """``{(t, z) : ||z||_2 <= r t}``, the lifting of an l2 ball of radius r."""

    kind = "second_order_cone"

    def __init__(self, dimension, slope=1.0, slice_norm=None):
        if dimension < 2:
            raise ValueError("second-order cone needs dimension >= 2")
        self.dimension = int(dimension)
        self.slope = float(slope)
        self._slice_norm = slice_norm

    @staticmethod
    def _project(x, a):
        # cone {(t, z): ||z|| <= a t}, a >= 0
        t, z = x[0], x[1:]
        s = np.linalg.norm(z)
        if s <= a * t:
            return x.copy()
        if a * s <= -t:
            return np.zeros_like(x)
        c = (t + a * s) / (1.0 + a * a)
        out = np.empty_like(x)
        out[0] = c
        out[1:] = (a * c / s) * z if s > 0 else 0.0
        return out

    def project(self, x):
        x = as_vector(x, self.dimension)
        if self.slope == 0.0:
            return np.concatenate(([max(x[0], 0.0)], np.zeros(self.dimension - 1)))
        return self._project(x, self.slope)

    def project_polar(self, x):
        # polar is {(t, z): ||z|| <= -t / a}; reflect t and use slope 1/a
        x = as_vector(x, self.dimension)
        if self.slope == 0.0:
            return np.concatenate(([min(x[0], 0.0)], x[1:]))
        y = x.copy()
        y[0] = -y[0]
        p = self._project(y, 1.0 / self.slope)
        p[0] = -p[0]
        return p

    @property
    def norm_bound(self):
        if self._slice_norm is not None:
            return self._slice_norm
        return 1.0 + self.slope


class PolarCone(Cone):
    """``{theta : <theta, x> <= 0 for all x in base}`` for a cone ``base``."""

    kind = "polar_cone"

    def __init__(self, base):
        if not base.is_cone:
            raise ValueError("polar cone needs a cone as base")
        self.base = base
        self.dimension = base.dimension

    def project(self, x):
        return self.base.project_polar(x)

    def project_polar(self, x):
        # (C^0)^0 = C, reached through Moreau's decomposition w.r.t. C^0 so
        # that it exercises the polar projection rather than the base one.
        x = as_vector(x, self.dimension)
        return x - self.base.project_polar(x)

    def polar(self):
        return self.base

    @property
    def norm_bound(self):
        return math.inf


class LiftedCone(Cone):
    """``cone({1} x base)`` for a compact ``base``."""

    kind = "lifted_cone"

    def __init__(self, base):
        if base.is_cone:
            raise ValueError("cannot lift an unbounded body")
        self.base = base
        self.dimension = base.dimension + 1
        V = base.vertices()
        slice_norm = 1.0 + base.norm_bound
        if V is not None:
            lifted = np.hstack([np.ones((V.shape[0], 1)), V])
            self._inner = GeneratedCone(lifted, slice_norm=slice_norm)
        elif isinstance(base, L2Ball):
            self._inner = SecondOrderCone(self.dimension, base.radius, slice_norm=slice_norm)
        else:
            raise ValueError(f"lifting of a {base.kind} is not supported")

    def project(self, x):
        return self._inner.project(x)

    def project_polar(self, x):
        return self._inner.project_polar(x)

    def contains(self, x, tol=TAU_GEOM):
        return self._inner.contains(x, tol)

    def generators(self):
        return self._inner.generators()

    @property
    def norm_bound(self):
        return 1.0 + self.base.norm_bound


class ConeBallIntersection(ConvexBody):
    """``C ∩ B_2(radius)`` for a closed convex cone ``C``.

    For a cone and a ball centred at the origin, projecting onto the cone
    and then onto the ball is the exact projection onto the intersection.
    """

    kind = "cone_ball"

    def __init__(self, cone, radius=1.0):
        if not cone.is_cone:
            raise ValueError("expected a cone")
        self.cone = cone
        self.radius = float(radius)
        self.dimension = cone.dimension

    def project(self, x):
        p = self.cone.project(as_vector(x, self.dimension))
        n = np.linalg.norm(p)
        if n > self.radius:
            p = p * (self.radius / n)
        return p

    def linear_minimize(self, f):
        # argmin over C ∩ B of <f, .> is the normalised projection of -f on C
        f = as_vector(f, self.dimension, "f")
        u = self.cone.project(-f)
        n = np.linalg.norm(u)
        if n <= TAU_GEOM * max(1.0, np.linalg.norm(f)):
            return np.zeros(self.dimension)
        return u * (self.radius / n)

    @property
    def norm_bound(self):
        return self.radius


# ---------------------------------------------------------------------------
# module-level operations


def project(body, x):
    """Euclidean projection of ``x`` onto ``body``."""
    return body.project(as_vector(x, body.dimension))


def distance(body, x):
    """Euclidean distance from ``x`` to ``body``."""
    x = as_vector(x, body.dimension)
    return float(np.linalg.norm(x - body.project(x)))


def linear_minimize(body, f):
    """``argmin_{x in body} <f, x>``; ties go to the lowest-index vertex."""
    if body.is_cone:
        raise ValueError(f"linear minimization over the unbounded {body.kind} is undefined")
    return body.linear_minimize(f)


def support(body, theta):
    """``max_{z in body} <theta, z>``."""
    theta = as_vector(theta, body.dimension, "theta")
    return float(-(-theta) @ linear_minimize(body, -theta))


def polar(cone):
    if not cone.is_cone:
        raise ValueError(f"{cone.kind} is not a cone")
    return cone.polar()


def dual_certificate(cone, x):
    """Maximiser and value of ``<theta, x>`` over the polar's unit ball.

    Returns ``(value, theta)``; ``theta`` is zero when ``x`` is in the cone.
    """
    if not cone.is_cone:
        raise ValueError(f"dual distance needs a cone, got {cone.kind}")
    x = as_vector(x, cone.dimension)
    q = cone.project_polar(x)
    n = float(np.linalg.norm(q))
    if n <= 1e-12 * max(1.0, float(np.linalg.norm(x))):
        return 0.0, np.zeros(cone.dimension)
    theta = q / n
    return max(0.0, float(theta @ x)), theta


def dist_to_cone_dual(cone, x):
    """``max <theta, x>`` over ``theta`` in the polar cone with norm <= 1."""
    return dual_certificate(cone, x)[0]


def lift(body):
    """The cone generated by ``{1} x body``."""
    if body.is_cone:
        raise ValueError("cannot lift an unbounded body")
    return LiftedCone(body)


def dist_l1_to_l1ball(x, radius):
    """l1 distance from ``x`` to the l1 ball of the given radius."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    x = as_vector(x)
    return max(0.0, float(np.sum(np.abs(x))) - radius)


# ---------------------------------------------------------------------------
# (de)serialisation used by the game file format


def body_to_dict(body):
    if isinstance(body, Simplex):
        return {"kind": "simplex", "dim": body.dimension}
    if isinstance(body, Box):
        r = body.radius
        if r is not None:
            return {"kind": "hypercube", "dim": body.dimension, "radius": r}
        return {"kind": "box", "lo": body.lo.tolist(), "hi": body.hi.tolist()}
    if isinstance(body, L2Ball):
        return {"kind": "l2_ball", "dim": body.dimension, "radius": body.radius}
    if isinstance(body, L1Ball):
        return {"kind": "l1_ball", "dim": body.dimension, "radius": body.radius}
    if isinstance(body, Polytope):
        return {"kind": "polytope", "vertices": body.vertices().tolist()}
    if isinstance(body, LiftedSet):
        return {"kind": "lifted_set", "base": body_to_dict(body.base)}
    if isinstance(body, OrthantCone):
        return {"kind": "orthant_cone", "dim": body.dimension}
    if isinstance(body, GeneratedCone):
        return {"kind": "finitely_generated_cone", "dim": body.dimension,
                "generators": body.generators().tolist()}
    if isinstance(body, LiftedCone):
        return {"kind": "lifted_cone", "base": body_to_dict(body.base)}
    if isinstance(body, PolarCone):
        return {"kind": "polar_cone", "base": body_to_dict(body.base)}
    raise TypeError(f"cannot serialise {body!r}")


def body_from_dict(spec):
    kind = spec.get("kind")
    if kind == "simplex":
        return Simplex(spec["dim"])
    if kind == "hypercube":
        return hypercube(spec.get("radius", 1.0), spec["dim"])
    if kind == "box":
        return Box(spec["lo"], spec["hi"])
    if kind == "l2_ball":
        return L2Ball(spec["dim"], spec.get("radius", 1.0))
    if kind == "l1_ball":
        return L1Ball(spec["dim"], spec.get("radius", 1.0))
    if kind == "polytope":
        return Polytope(spec["vertices"])
    if kind == "point":
        return Polytope([spec["point"]])
    if kind == "lifted_set":
        return LiftedSet(body_from_dict(spec["base"]))
    if kind == "orthant_cone":
        return OrthantCone(spec["dim"])
    if kind == "finitely_generated_cone":
        return GeneratedCone(spec["generators"], dimension=spec.get("dim"))
    if kind == "lifted_cone":
        return LiftedCone(body_from_dict(spec["base"]))
    if kind == "polar_cone":
        return PolarCone(body_from_dict(spec["base"]))
    raise ValueError(f"unknown body kind {kind!r}")
