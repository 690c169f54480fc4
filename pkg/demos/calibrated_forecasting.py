"""Calibrated forecasting of a binary sequence.

Run with ``python demos/calibrated_forecasting.py``. The forecaster is driven
by sparse OGD on the cube of directions and a binary-search halfspace oracle.
"""
# %%
import math

import numpy as np

from approachability import calibration as cal
from approachability import harness as hn

# %% [markdown]
# A single run against an adversary that always pushes the outcome away from
# the forecaster's mean. The realised rate, the expected rate and the average
# regret are logged every round.

# %%
rec = hn.run_calibration(m=10, T=5000, adversary="opposite", seed=0)
for t in (10, 100, 1000, 5000):
    row = rec.rounds[t - 1]
    print(f"t={t:5d}  rate={row['rate']:.4f}  expected={row['expected_rate']:.4f}  "
          f"regret/t={row['regret'] / t:.4f}")
for c in rec.checks:
    print(f"{c.name}: {c.lhs:.4f} vs {c.rhs:.4f} -> {'ok' if c.passed else 'violated'}")

# %% [markdown]
# The average regret decays like 1/sqrt(T), so the rate does too.

# %%
for T in (250, 1000, 4000):
    f = hn.run_calibration(m=10, T=T, adversary="iid:0.3", seed=1, keep_rounds=False).final
    print(f"T={T:5d}  regret/T={f['regret_over_T']:.4f}  GD/sqrt(T)={f['GD_over_sqrtT']:.4f}  "
          f"regret/T*sqrt(T)={f['regret_over_T'] * math.sqrt(T):.3f}")

# %% [markdown]
# Each round costs a handful of probes of the direction vector and touches at
# most four coordinates of the learner state, whatever the grid size.

# %%
for m in (4, 64, 1024):
    f = hn.run_calibration(m=m, T=2000, adversary="iid:0.5", seed=0, keep_rounds=False).final
    print(f"m={m:5d}  max probes={f['max_probes']}  budget={cal.spec_probe_budget(m)}  "
          f"max touched={f['max_touched']}  stored={f['stored_coordinates']}")

# %% [markdown]
# The forecaster can also be stepped by hand.

# %%
fc = cal.CalibratedForecaster(10, seed=3)
rng = np.random.default_rng(0)
p, _ = cal.forecaster_step(fc)
for _ in range(2000):
    p, _ = cal.forecaster_step(fc, int(rng.random() < 0.7))
print("last forecast", p, "rate", round(fc.rate(), 4))
