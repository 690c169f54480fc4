"""Cones, polars and the lifting trick.

Run with ``python demos/cone_geometry.py``.
"""
# %%
import numpy as np

from approachability import geometry as geo

rng = np.random.default_rng(0)

# %% [markdown]
# The distance to a cone can be computed by projecting onto the cone or by
# maximising over unit directions of its polar. The two use different solvers.

# %%
C = geo.GeneratedCone(rng.normal(size=(6, 4)))
for _ in range(3):
    x = rng.normal(size=4) * 2
    primal = np.linalg.norm(x - C.project(x))
    print(f"projection {primal:.10f}   dual {geo.dist_to_cone_dual(C, x):.10f}")

# %% [markdown]
# Lifting a compact set K to the cone over {1} x K turns set distance into
# cone distance, up to a factor 1 + |K|.

# %%
for K in (geo.Simplex(3), geo.hypercube(1.0, 3), geo.L2Ball(3, 1.0)):
    x = rng.normal(size=3) * 2
    lo = geo.distance(geo.lift(K), np.concatenate(([1.0], x)))
    mid = geo.distance(K, x)
    print(f"{type(K).__name__:8s} {lo:.4f} <= {mid:.4f} <= {(1 + K.norm_bound) * lo:.4f}")
