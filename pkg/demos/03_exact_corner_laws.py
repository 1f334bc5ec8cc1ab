"""Exact laws of the upper-left corner, from enumeration and from fiber counts.

Run with ``python3 demos/03_exact_corner_laws.py``.
"""

# %%
from fractions import Fraction

from haar_modular import (
    ZmRing,
    corner_fiber_bounds,
    corner_fiber_count_invertible,
    exact_corner_dist,
    gf,
    order_gl,
    order_gl_field,
    tv_to_uniform,
)

# %% [markdown]
# Group orders, checked against enumeration where that is cheap.

# %%
for ring, n in [(ZmRing(6), 2), (gf(2, 2), 2), (ZmRing(4), 2), (ZmRing(360), 3)]:
    print(f"|GL_{n}({ring.label})| = {order_gl(ring, n)}")

# %% [markdown]
# The 1x1 corner of a Haar matrix in GL_N(Z/4). Odd corners are twice as
# likely as even ones at N = 2, and the gap closes as N grows.

# %%
for n in (2, 3):
    d = exact_corner_dist(ZmRing(4), n, 1)
    print(f"N={n}:", {k[0]: str(v) for k, v in d.probs.items()}, "TV to uniform", tv_to_uniform(d))

# %% [markdown]
# Over F_q an invertible corner W has a fiber of fixed size: the top-right
# block is free and the lower rows avoid the span of the upper rows.

# %%
print("fiber of [[1]] in GL_3(F_2):", corner_fiber_count_invertible(2, 3, 1, [[1]]), "of", order_gl_field(2, 3))

# %% [markdown]
# Every corner, invertible or not, has a fiber between two products. Their
# ratio bounds how far apart any two corner probabilities can be, and tends
# to 1 as N grows with S fixed.

# %%
for n in (3, 6, 12, 24):
    b = corner_fiber_bounds(2, n, 1)
    print(f"N={n:2d}: P(W1)/P(W2) >= {float(b.ratio_lower):.10f}")

# %% [markdown]
# For m = 2 and S = 1 the distance to uniform has the closed form
# 1 / (2 (2^N - 1)).

# %%
for n in range(2, 11):
    tv = tv_to_uniform(exact_corner_dist(ZmRing(2), n, 1, "formula"))
    assert tv == Fraction(1, 2 * (2**n - 1))
    print(f"N={n:2d}: TV = {tv}")
