"""
How soon does a word come back?
===============================

The first return of the cylinder of a word of length n is its smallest
period.  For a positive-entropy source the ratio tau/n creeps up to 1;
for an irrational rotation it stays strictly between 0 and 1.
"""

# %%
import numpy as np

from returntimes import (cylinder_return_time, generate_bernoulli_word, make_builtin_map,
                         sample_initial_point, scan_scales)

# %% [markdown]
# Fair coin flips are the symbolic model of the doubling map.

# %%
for n in (10, 30, 100, 300):
    ratios = np.array([cylinder_return_time(generate_bernoulli_word(2, [0.5, 0.5], n, s)) / n
                       for s in range(200)])
    print(f"Bernoulli  n={n:4d}  mean tau/n = {ratios.mean():.3f}  min = {ratios.min():.3f}")

# %% [markdown]
# The golden rotation coded by the partition at 1 - alpha has zero entropy.
# Its words are Sturmian and have many short periods.

# %%
rot = make_builtin_map("rotation")
ns = [10, 30, 100, 300, 1000]
series = [scan_scales("cylinder-return", rot, sample_initial_point(rot, s), ns, seed=s)
          for s in range(32)]
ratios = np.array([s.values for s in series], dtype=float) / ns
for n, col in zip(ns, ratios.T):
    print(f"rotation   n={n:4d}  mean tau/n = {col.mean():.3f}  range [{col.min():.3f}, {col.max():.3f}]")

# %%
# the periods that occur are Fibonacci numbers
print(sorted({int(v) for s in series for v in s.values}))
