"""Line bundle cohomology and Ext between TCI objects.

Run with ``python3 demos/02_cohomology_and_ext.py``.
"""

# %%
import numpy as np

from arithtoric.divclass import canonical_divisor, cohomology
from arithtoric.excol import TCIObject, build_ct_collection, ext_dims, ext_table, line_bundle
from arithtoric.fan import build_an_fan

dp6 = build_an_fan(2)

# %% [markdown]
# h^i(O(D)) from reduced homology of the subcomplexes cut out by each
# character. The anticanonical bundle of dP6 has 7 sections.
print("h(-K) =", list(cohomology(dp6, (1,) * 6)))
print("h(K)  =", list(cohomology(dp6, canonical_divisor(dp6))))

# %% [markdown]
# Serre duality on a few random divisors.
rng = np.random.default_rng(0)
k = canonical_divisor(dp6)
for _ in range(5):
    d = [int(x) for x in rng.integers(-3, 4, size=6)]
    print(d, list(cohomology(dp6, d)), list(cohomology(dp6, [a - b for a, b in zip(k, d)])))

# %% [markdown]
# Ext between a torus-fixed point (the Koszul quotient by two adjacent rays)
# and line bundles.
pt = TCIObject(dp6, (0,) * 6, (0, 3))
o = line_bundle(dp6, (0,) * 6)
print("Ext(O, pt) =", list(ext_dims(o, pt)), " Ext(pt, O) =", list(ext_dims(pt, o)), " Ext(pt, pt) =",
      list(ext_dims(pt, pt)))

# %% [markdown]
# The six-object collection on dP6: its Euler-pairing Gram matrix is upper
# unitriangular.
c = build_ct_collection(2)
t = ext_table(c)
print(c.labels)
print(np.array(t.gram()))
