"""Broken samplers, to show the uniformity tests have teeth.

Run with ``python3 demos/05_negative_controls.py``.
"""

# %%
from haar_modular import RngStream, ZmRing, chi_squared_test, exact_corner_dist, gf
from haar_modular.sampling import sample_chain_without_span_check, sample_gl, sample_nonzero_det
from haar_modular.stats import EmpiricalDist

draws = 10**5

# %% [markdown]
# Over Z/4, "determinant nonzero" is the wrong test: det = 2 is nonzero yet
# not a unit. The sampler that uses it leaks singular matrices.

# %%
z4 = ZmRing(4)
ref = exact_corner_dist(z4, 2, 2)
for name, x in [
    ("correct", sample_gl(z4, 2, RngStream(0), size=draws)),
    ("det != 0", sample_nonzero_det(z4, 2, RngStream(0), size=draws)),
]:
    print(f"{name:>10}:", chi_squared_test(EmpiricalDist.from_array(z4, x), ref))

# %% [markdown]
# Skipping the span check in the row chain over F_2 lets the second row
# repeat the first one.

# %%
f2 = gf(2)
x = sample_chain_without_span_check(f2, 2, RngStream(0), size=draws)
print("no span check:", chi_squared_test(EmpiricalDist.from_array(f2, x), exact_corner_dist(f2, 2, 2)))
