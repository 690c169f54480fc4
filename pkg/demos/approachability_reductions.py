"""Approachability from online linear optimization, and back.

Run with ``python demos/approachability_reductions.py``.
"""
# %%
import numpy as np

from approachability import games as gm
from approachability import geometry as geo
from approachability import reductions as red

# %% [markdown]
# The game pays (x, y) for x, y in [0, 1]. The diagonal segment is
# approachable: after seeing y the player can copy it. There is no single
# x that works against every y, so the set is not one-shot satisfiable.

# %%
game, target = gm.bundled_games()["diagonal"]
print("response-satisfiable:", bool(gm.check_response_satisfiable(game, target)))
print("halfspace-satisfiable:", bool(gm.check_halfspace_satisfiable(game, target)))

# %% [markdown]
# Running OGD on the polar-cone directions, with a minimax halfspace oracle,
# drives the average payoff to the diagonal even against the worst outcome
# chosen after seeing x.

# %%
lg, lt = red.wrap_lifted(game, target)
alg = red.olo_to_approach(lg, lt)
for t in range(1, 2001):
    x = alg.act()
    alg.observe([1.0 - x[0]])
    if t in (10, 100, 1000, 2000):
        r = alg.last
        print(f"t={t:5d}  dist={r.dist_to_set:.5f}  bound={r.bound_set:.5f}")

# %% [markdown]
# A point target off the payoff range cannot be approached; the oracle fails
# and reports the direction it could not satisfy.

# %%
bad = red.OLOToApproach(*red.wrap_lifted(*gm.bundled_games()["unreachable"]))
try:
    for _ in range(10):
        bad.act()
        bad.observe([0.0])
except red.HalfspaceUnsatisfiable as exc:
    print("unsatisfiable at theta =", np.round(exc.theta, 3))

# %% [markdown]
# The reverse direction builds an OLO learner on the simplex out of the
# approachability algorithm above. Its regret is bounded by the distance of
# the internal game's average payoff to the target cone.

# %%
K = geo.Simplex(3)
learner = red.approach_to_olo(K)
rng = np.random.default_rng(0)
for t in range(1, 2001):
    learner.predict()
    info = learner.update(rng.uniform(-1, 1, 3))
    if t in (100, 1000, 2000):
        print(f"t={t:5d}  regret/t={info['regret_over_t']:.4f}  (1+|K|) D_t={info['bound']:.4f}")
