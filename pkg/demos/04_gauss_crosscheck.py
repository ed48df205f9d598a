"""
Dimension equals entropy over Lyapunov exponent
===============================================

For the Gauss map all three quantities can be estimated independently.
Entropy comes from repetitions of continued-fraction digits, the exponent
from a Birkhoff sum of log|T'|, and the dimension from point returns.
"""

# %%
import math

import numpy as np

from returntimes import hofbauer_crosscheck, lyapunov_birkhoff, make_builtin_map
from returntimes import sample_initial_point, scan_scales
from returntimes.estimators import dimension_ensemble, entropy_ow_from_series

# a billion branches keeps truncation rare along 10^5-step orbits
gauss = make_builtin_map("gauss", [10**9])

# %%
lam = lyapunov_birkhoff(gauss, range(16), 10**5)
print(f"lambda = {lam.mean:.4f}  (pi^2 / (6 ln 2) = {math.pi**2 / (6 * math.log(2)):.4f})")

# %%
reps = [scan_scales("repetition", gauss, sample_initial_point(gauss, s), [1, 2, 3, 4], seed=s,
                    scan_limit=10**7) for s in range(32)]
h = entropy_ow_from_series(reps, correction="euler")
print(f"h = {h.mean:.4f} from n = {h.per_seed[0].extras['n']}, "
      f"{len(h.failures)} words without a repetition")

# %%
radii = list(np.geomspace(10**-1.5, 1e-5, 8))
d = dimension_ensemble([scan_scales("point-return", gauss, sample_initial_point(gauss, 500 + s),
                                    radii, seed=s) for s in range(32)])
report = hofbauer_crosscheck(h, lam, d)
print(f"d = {d.mean:.4f}, h / lambda = {report.ratio:.4f}, gap = {report.discrepancy:.4f}")
