"""Drawing Haar (uniform) matrices from GL_N over finite rings.

Run with ``python3 demos/02_sampling.py``.
"""

# %%
import numpy as np

from haar_modular import RngStream, ZmRing, gf, sample_gl_field_chain, sample_gl_zm, sample_truncated
from haar_modular.matrices import invertible_array
from haar_modular.sampling import sample_gl_field_reject

# %% [markdown]
# Over a field, rows are drawn one at a time; a candidate row lying in the
# span of the previous rows is redrawn. The output is always invertible.

# %%
f3 = gf(3)
chain = sample_gl_field_chain(f3, 2, RngStream(1), size=48_000)
print("chain sampler, all invertible:", bool(invertible_array(f3, chain).all()))

# %% [markdown]
# An independent oracle draws uniform matrices until one is invertible.
# About 48 of the 81 matrices in M_2(F_3) are accepted.

# %%
reject, attempts = sample_gl_field_reject(f3, 2, RngStream(2), size=48_000, return_attempts=True)
print(f"rejection sampler acceptance rate {48_000 / attempts:.4f} (exact 48/81 = {48 / 81:.4f})")

keys = lambda a: np.unique(a.reshape(len(a), -1), axis=0, return_counts=True)[1]
print("per-element counts, chain:", keys(chain).min(), "to", keys(chain).max())
print("per-element counts, reject:", keys(reject).min(), "to", keys(reject).max())

# %% [markdown]
# For composite m the sampler draws one matrix per prime power (a field
# draw lifted by a uniform multiple of p) and glues them with the CRT.

# %%
z12 = ZmRing(12)
x = sample_gl_zm(z12, 3, RngStream(0))
print("a Haar draw from GL_3(Z/12):")
print(x.entries)
print("mod 4 and mod 3 parts are invertible:", bool(invertible_array(ZmRing(4), x.entries % 4)), bool(invertible_array(ZmRing(3), x.entries % 3)))

# %% [markdown]
# When only the upper-left S x S corner matters, only the first S rows are
# ever generated, so large N costs O(N S) memory per draw.

# %%
batch = sample_truncated(z12, 500, 2, 1000, RngStream(0))
print("corner batch:", batch.corners.shape, "header:", batch.header())
