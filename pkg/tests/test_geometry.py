import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog, minimize

from approachability import geometry as geo

finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


def vec(n):
    return st.lists(finite, min_size=n, max_size=n).map(np.array)


def brute_cone_projection(G, x):
    """Independent oracle: bound-constrained quasi-Newton on the generator weights."""
    def f(lam):
        r = G.T @ lam - x
        return 0.5 * r @ r, G @ r
    best = None
    for start in (np.zeros(G.shape[0]), np.ones(G.shape[0])):
        res = minimize(f, start, jac=True, method="L-BFGS-B", bounds=[(0, None)] * G.shape[0],
                       options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 10_000})
        if best is None or res.fun < best.fun:
            best = res
    return G.T @ best.x


# ---------------------------------------------------------------------------
# project


def test_project_hypercube_clamps():
    p = geo.project(geo.hypercube(1.0, 2), [1.7, -0.3])
    assert np.array_equal(p, [1.0, -0.3])


def test_project_orthant():
    p = geo.project(geo.OrthantCone(2), [-3.0, 4.0])
    assert np.array_equal(p, [0.0, 4.0])


def test_project_simplex_fixed_point():
    x = np.full(3, 1 / 3)
    assert np.allclose(geo.project(geo.Simplex(3), x), x, atol=1e-15)


def test_project_simplex_matches_constrained_solver(rng):
    S = geo.Simplex(4)
    for _ in range(20):
        x = rng.normal(size=4) * 2
        res = minimize(lambda z: 0.5 * np.sum((z - x) ** 2), np.full(4, 0.25), method="SLSQP",
                       bounds=[(0, 1)] * 4, constraints=[{"type": "eq", "fun": lambda z: z.sum() - 1}],
                       options={"ftol": 1e-14})
        assert np.allclose(S.project(x), res.x, atol=1e-6)


def test_project_errors():
    with pytest.raises(ValueError):
        geo.project(geo.Simplex(3), [1.0, 2.0])
    with pytest.raises(ValueError):
        geo.project(geo.Simplex(2), [np.nan, 0.0])
    with pytest.raises(ValueError):
        geo.project(geo.hypercube(1.0, 2), [np.inf, 0.0])


def test_generated_cone_projection_matches_brute_force(rng):
    for _ in range(15):
        d = int(rng.integers(2, 5))
        G = rng.normal(size=(int(rng.integers(1, 6)), d))
        C = geo.GeneratedCone(G)
        x = rng.normal(size=d) * 3
        assert np.allclose(C.project(x), brute_cone_projection(G, x), atol=1e-6)


BODIES = [
    geo.Simplex(3),
    geo.hypercube(1.0, 3),
    geo.Box([0.0, -1.0, 2.0], [1.0, 0.5, 3.0]),
    geo.L2Ball(3, 1.5),
    geo.L1Ball(3, 0.7),
    geo.Polytope([[0, 0, 0], [1, 0, 0], [0, 2, 1], [1, 1, 1]]),
]


@pytest.mark.parametrize("body", BODIES, ids=lambda b: b.kind)
@given(x=vec(3))
def test_projection_is_a_nearest_member(body, x):
    p = body.project(x)
    assert body.contains(p)
    assert np.allclose(body.project(p), p, atol=1e-12)
    assert np.linalg.norm(p) <= body.norm_bound + 1e-9
    V = body.vertices()
    members = V if V is not None else [body.linear_minimize(e) for e in np.eye(3)]
    for z in members:
        assert np.linalg.norm(p - x) <= np.linalg.norm(z - x) + geo.TAU_GEOM


@given(x=vec(4))
def test_cone_projection_idempotent_and_polar_residual(x):
    G = np.array([[1.0, 0, 0, 0], [1, 1, 0, 0], [0, 1, 1, 1], [-1, 0, 1, 0]])
    C = geo.GeneratedCone(G)
    p = C.project(x)
    r = x - p
    assert np.allclose(C.project(p), p, atol=1e-12)
    assert abs(r @ p) <= 1e-9 * max(1.0, np.linalg.norm(x) ** 2)
    assert np.all(G @ r <= 1e-9 * max(1.0, np.linalg.norm(x)))


# ---------------------------------------------------------------------------
# polar cones


def test_polar_members_are_nonpositive_on_base(rng):
    G = rng.normal(size=(4, 3))
    C = geo.GeneratedCone(G)
    P = geo.polar(C)
    for _ in range(100):
        theta = P.project(rng.normal(size=3) * 2)
        assert np.all(G @ theta <= geo.TAU_GEOM)


def test_double_polar_returns_base_members(rng):
    G = rng.normal(size=(3, 3))
    C = geo.GeneratedCone(G)
    double = geo.polar(geo.PolarCone(C))
    assert double is C
    via_moreau = geo.PolarCone(C).project_polar
    for _ in range(50):
        z = rng.random(3) @ G
        assert np.allclose(via_moreau(z), z, atol=1e-9)


def test_orthant_polar_is_negative_orthant():
    P = geo.polar(geo.OrthantCone(3))
    assert np.array_equal(P.project([1.0, -2.0, 3.0]), [0.0, -2.0, 0.0])


# ---------------------------------------------------------------------------
# dual distance


def test_dual_distance_inside_cone_is_zero():
    C = geo.GeneratedCone([[1.0, 0.0], [1.0, 1.0]])
    assert geo.dist_to_cone_dual(C, [2.0, 1.0]) == 0.0


def test_dual_distance_orthant():
    x = np.array([-3.0, 4.0])
    C = geo.OrthantCone(2)
    assert geo.dist_to_cone_dual(C, x) == pytest.approx(3.0, abs=1e-12)
    assert geo.dist_to_cone_dual(C, x) == pytest.approx(np.linalg.norm(x - C.project(x)), abs=1e-12)


def test_dual_distance_matches_brute_force_r3(rng):
    for _ in range(10):
        G = rng.normal(size=(int(rng.integers(1, 5)), 3))
        x = rng.normal(size=3) * 2
        C = geo.GeneratedCone(G)
        brute = np.linalg.norm(x - brute_cone_projection(G, x))
        assert geo.dist_to_cone_dual(C, x) == pytest.approx(brute, abs=1e-6)
        assert geo.dist_to_cone_dual(C, x) == pytest.approx(geo.distance(C, x), abs=1e-9)


def test_dual_certificate_is_a_unit_polar_vector(rng):
    C = geo.GeneratedCone(rng.normal(size=(3, 4)))
    x = rng.normal(size=4) * 3
    value, theta = geo.dual_certificate(C, x)
    if value > 0:
        assert np.linalg.norm(theta) == pytest.approx(1.0)
        assert np.all(C.generators() @ theta <= 1e-9)
        assert theta @ x == pytest.approx(value)


def test_dual_distance_second_order_cone(rng):
    K = geo.L2Ball(2, 1.0)
    C = geo.lift(K)
    for _ in range(50):
        x = rng.normal(size=3) * 2
        assert geo.dist_to_cone_dual(C, x) == pytest.approx(geo.distance(C, x), abs=1e-9)


def test_dual_distance_needs_a_cone():
    with pytest.raises(ValueError):
        geo.dist_to_cone_dual(geo.Simplex(2), [0.0, 1.0])


def test_degenerate_cone_is_origin():
    C = geo.GeneratedCone(np.zeros((0, 3)), dimension=3)
    x = np.array([1.0, -2.0, 2.0])
    assert np.array_equal(C.project(x), np.zeros(3))
    assert geo.dist_to_cone_dual(C, x) == pytest.approx(3.0)


# ---------------------------------------------------------------------------
# lift


def test_lift_point_is_a_ray():
    C = geo.lift(geo.Polytope([[0.5]]))
    assert np.allclose(C.generators(), [[1.0, 0.5]])
    assert C.contains([2.0, 1.0])
    assert not C.contains([1.0, 1.0])


def test_lift_segment_generators():
    C = geo.lift(geo.hypercube(1.0, 1))
    assert {tuple(g) for g in C.generators()} == {(1.0, -1.0), (1.0, 1.0)}
    assert C.norm_bound == 2.0


@pytest.mark.parametrize("K", [geo.Simplex(3), geo.hypercube(1.0, 2), geo.L2Ball(3, 1.0)],
                         ids=lambda b: b.kind)
def test_lifting_sandwich(K, rng):
    C = geo.lift(K)
    for _ in range(100):
        x = rng.normal(size=K.dimension) * 3
        lo = geo.distance(C, np.concatenate(([1.0], x)))
        mid = geo.distance(K, x)
        assert lo <= mid + 1e-9
        assert mid <= (1 + K.norm_bound) * lo + 1e-9


def test_lift_rejects_cones():
    with pytest.raises(ValueError):
        geo.lift(geo.OrthantCone(2))


# ---------------------------------------------------------------------------
# l1 distance


def l1_distance_lp(x, r):
    """min ||x - y||_1 over ||y||_1 <= r as an LP in (y, s, u)."""
    n = len(x)
    # variables: y (n), s (n) with |x - y| <= s, u (n) with |y| <= u
    c = np.concatenate([np.zeros(n), np.ones(n), np.zeros(n)])
    I, Z = np.eye(n), np.zeros((n, n))
    A = np.vstack([np.hstack([-I, -I, Z]), np.hstack([I, -I, Z]), np.hstack([I, Z, -I]),
                   np.hstack([-I, Z, -I]), np.concatenate([np.zeros(2 * n), np.ones(n)])[None]])
    b = np.concatenate([-x, x, np.zeros(2 * n), [r]])
    res = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * n + [(0, None)] * 2 * n, method="highs")
    return res.fun


def test_l1_distance_examples():
    assert geo.dist_l1_to_l1ball(np.zeros(3), 0.4) == 0.0
    x = np.array([0.2, -0.1, 0.05])
    assert geo.dist_l1_to_l1ball(x, 0.1) == pytest.approx(0.25, abs=1e-15)
    assert l1_distance_lp(x, 0.1) == pytest.approx(0.25, abs=1e-9)
    assert geo.dist_l1_to_l1ball(np.array([0.3, -0.2]), 0.5) == 0.0


@given(x=vec(4), r=st.floats(min_value=0, max_value=5))
def test_l1_distance_matches_lp(x, r):
    # HiGHS works to a feasibility tolerance of about 1e-7, so compare at 1e-6
    assert geo.dist_l1_to_l1ball(x, r) == pytest.approx(l1_distance_lp(x, r), abs=1e-6)


def test_l1_distance_errors():
    with pytest.raises(ValueError):
        geo.dist_l1_to_l1ball([1.0], -1.0)
    with pytest.raises(ValueError):
        geo.dist_l1_to_l1ball([np.nan], 1.0)


# ---------------------------------------------------------------------------
# linear minimisation


def test_linear_minimize_examples():
    assert np.array_equal(geo.linear_minimize(geo.Simplex(3), [3.0, 1.0, 2.0]), [0, 1, 0])
    assert np.array_equal(geo.linear_minimize(geo.hypercube(1.0, 2), [0.5, -2.0]), [-1, 1])
    x = geo.linear_minimize(geo.L2Ball(2, 1.0), [3.0, 4.0])
    assert np.allclose(x, [-0.6, -0.8])
    angles = np.linspace(0, 2 * np.pi, 100_001)
    grid = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    assert np.allclose(grid[np.argmin(grid @ [3.0, 4.0])], x, atol=1e-4)


def test_linear_minimize_ties_go_to_lowest_index():
    assert np.array_equal(geo.linear_minimize(geo.Simplex(3), [1.0, 0.0, 0.0]), [0, 1, 0])
    assert np.array_equal(geo.linear_minimize(geo.Simplex(3), np.zeros(3)), [1, 0, 0])
    P = geo.Polytope([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
    assert np.array_equal(P.linear_minimize([0.0, 1.0]), [1.0, 0.0])


def test_linear_minimize_matches_vertex_enumeration(rng):
    box = geo.Box([-1.0, 0.0, 2.0], [1.0, 3.0, 2.5])
    verts = np.array(list(itertools.product([-1, 1], [0, 3], [2, 2.5])), dtype=float)
    for _ in range(50):
        f = rng.normal(size=3)
        assert f @ box.linear_minimize(f) == pytest.approx((verts @ f).min())


def test_linear_minimize_rejects_cones():
    with pytest.raises(ValueError):
        geo.linear_minimize(geo.OrthantCone(2), [1.0, 1.0])


def test_support_function():
    assert geo.support(geo.L1Ball(3, 2.0), [1.0, -3.0, 0.5]) == pytest.approx(6.0)
    assert geo.support(geo.Simplex(3), [1.0, -3.0, 0.5]) == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# cone ∩ ball and serialisation


def test_cone_ball_projection_matches_solver(rng):
    C = geo.GeneratedCone(rng.normal(size=(3, 3)))
    K = geo.ConeBallIntersection(C, 1.0)
    G = C.generators()
    for _ in range(10):
        x = rng.normal(size=3) * 3
        cons = [{"type": "ineq", "fun": lambda lam: 1 - np.sum((G.T @ lam) ** 2)}]
        res = minimize(lambda lam: np.sum((G.T @ lam - x) ** 2), np.full(3, 0.01), method="SLSQP",
                       bounds=[(0, None)] * 3, constraints=cons, options={"ftol": 1e-14, "maxiter": 500})
        assert np.linalg.norm(K.project(x) - x) <= np.linalg.norm(G.T @ res.x - x) + 1e-6


@pytest.mark.parametrize("body", BODIES + [geo.lift(geo.Simplex(2)), geo.OrthantCone(3),
                                           geo.PolarCone(geo.OrthantCone(2)),
                                           geo.LiftedSet(geo.Simplex(2))],
                         ids=lambda b: b.kind)
def test_body_dict_round_trip(body, rng):
    clone = geo.body_from_dict(geo.body_to_dict(body))
    assert clone.kind == body.kind and clone.dimension == body.dimension
    for _ in range(5):
        x = rng.normal(size=body.dimension)
        assert np.allclose(clone.project(x), body.project(x), atol=1e-12)
