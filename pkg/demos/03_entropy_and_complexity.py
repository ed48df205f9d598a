"""
Entropy from repetitions and from compression
=============================================

Two routes to the entropy of a source: the time R_n until the opening
n symbols reappear grows like exp(n h), and the number of LZ76 phrases
c(n) grows like n h / log n.
"""

# %%
import numpy as np

from returntimes import complexity_rate, entropy_ow, generate_bernoulli_word
from returntimes.recurrence import repetition_series

log2 = np.log(2)

# %%
word = generate_bernoulli_word(2, [0.5, 0.5], 10**6, 0)
s = repetition_series(word, [4, 8, 12, 16])
for row in s.rows:
    print(f"n={row.scale:2d}  R_n = {row.value:7d}  log R_n / n = {np.log(row.value) / row.scale:.3f}")

# %%
words = [generate_bernoulli_word(2, [0.5, 0.5], 10**6, s) for s in range(16)]
for cor in ("none", "euler"):
    agg = entropy_ow(words, [8, 12, 16], correction=cor)
    print(f"ensemble ({cor:5s}): {agg.mean / log2:.3f} log 2")

# %% [markdown]
# A biased coin has entropy below log 2; both estimators should see it.

# %%
p = 0.2
h = -(p * np.log(p) + (1 - p) * np.log(1 - p))
biased = [generate_bernoulli_word(2, [1 - p, p], 10**6, 100 + s) for s in range(16)]
print(f"true h = {h:.4f}")
print(f"repetition: {entropy_ow(biased, [10, 20]).mean:.4f}")
print(f"LZ76      : {np.mean([complexity_rate(w) for w in biased]):.4f}")
print(f"LZ76 code-length form: {np.mean([complexity_rate(w, 'codelength') for w in biased]):.4f}")

# %% [markdown]
# A periodic word compresses to almost nothing.

# %%
print(f"(001)*: {complexity_rate(np.resize([0, 0, 1], 10**6)):.2e} nats/symbol")
