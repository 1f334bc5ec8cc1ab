"""Arithmetic in Z/mZ, finite fields and finite local rings.

Run with ``python3 demos/01_rings.py``.
"""

# %%
import numpy as np

from haar_modular import LocalRing, PrimePower, TruncatedPoly, ZmRing, crt_combine, crt_split, factorize, gf

# %% [markdown]
# A modulus splits into prime powers, and Z/mZ splits with it. Every
# residue is a tuple of residues modulo the prime powers.

# %%
z360 = ZmRing(360)
print("360 =", " * ".join(f"{p}^{r}" for p, r in factorize(360).factors))
x = np.arange(360)
parts = crt_split(x, z360)
assert np.array_equal(crt_combine(parts, z360), x)
print("crt_split(7) over Z/360:", [int(p[7]) for p in parts])

# %% [markdown]
# Units of Z/mZ are exactly the residues whose components are all units.

# %%
units = np.flatnonzero(z360.is_unit(x))
print("phi(360) =", len(units))

# %% [markdown]
# GF(p^n) elements are integers whose base-p digits are polynomial
# coefficients, constant term first. The default modulus is the smallest
# irreducible monic polynomial.

# %%
f16 = gf(2, 4)
print("GF(16) modulus coefficients:", f16.poly)
g = f16.primitive_element
powers = [1]
for _ in range(14):
    powers.append(int(f16.mul(powers[-1], g)))
print("a generator reaches", len(set(powers)), "nonzero elements")

# %% [markdown]
# Two local rings with the same residue field F_2 and ideal of size 2:
# Z/4 and F_2[t]/(t^2). They differ additively (1 + 1 = 2 in Z/4 but
# 0 in F_2[t]/(t^2)) yet both have units = elements with odd residue.

# %%
for ring in (LocalRing(PrimePower(2, 2)), LocalRing(TruncatedPoly(gf(2), 2))):
    xs = np.arange(ring.order)
    print(ring.label, "1+1 =", int(ring.add(1, 1)), "units:", xs[np.asarray(ring.is_unit(xs))].tolist())
