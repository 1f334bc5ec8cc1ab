"""Watching the corner law approach the uniform law as N grows.

Run with ``python3 demos/04_convergence.py``. Takes a few seconds.
"""

# %%
import math

from haar_modular import (
    LocalRing,
    RngStream,
    TruncatedPoly,
    ZmRing,
    chi_squared_test,
    convergence_sweep,
    empirical_dist,
    gf,
    sample_truncated,
)

# %% [markdown]
# Exact sweep over F_2: the distance halves with every extra row.

# %%
print(convergence_sweep(ZmRing(2), 1, range(2, 9), "exact").to_csv())

# %% [markdown]
# Monte Carlo sweeps estimate the distance from samples. The plug-in
# estimate carries an upward bias of order sqrt(cells / draws), so once the
# true distance falls below that level the column stops shrinking and only
# reflects sampling noise.

# %%
draws = 10**5
for ring in (ZmRing(12), LocalRing(TruncatedPoly(gf(2), 2))):
    res = convergence_sweep(ring, 1, [2, 4, 8, 16], "mc", draws=draws, seed=0)
    cells = ring.order
    # expected plug-in TV when the true law is exactly uniform
    noise = 0.5 * cells * math.sqrt(2 * (1 / cells) * (1 - 1 / cells) / (math.pi * draws))
    print(ring.label, [f"{float(t):.5f}" for t in res.tv_values], f"typical noise level ~{noise:.5f}")

# %% [markdown]
# A goodness-of-fit test against the uniform law on M_1(F_16) at N = 8.

# %%
emp = empirical_dist(sample_truncated(gf(2, 4), 8, 1, draws, RngStream(0)))
print(chi_squared_test(emp))
