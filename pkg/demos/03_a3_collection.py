"""Verifying the 24-object symmetric collection on X(A_3).

Run with ``python3 demos/03_a3_collection.py`` (about 10 seconds).
"""

# %%
import time

from arithtoric.excol import build_ct_collection, numerical_fullness, verify_exceptional_collection

c = build_ct_collection(3)
for lab, o in zip(c.labels, c.objects):
    print(f"{lab:28s} chi={list(o.chi)} vanishing={list(o.vanishing)}")

# %%
t0 = time.perf_counter()
rep = verify_exceptional_collection(c)
print(f"Ext table of {len(c)}x{len(c)} pairs in {time.perf_counter() - t0:.1f} s")
print("exceptional:", rep.passed, " strong:", rep.strong)
full = numerical_fullness(c, table=rep.table)
print("numerically full:", full.passed, " determinant:", full.determinant)

# %% [markdown]
# Blocks of mutually orthogonal consecutive objects (greedy).
for b in rep.blocks:
    print([c.labels[i] for i in b])

# %% [markdown]
# The only higher Ext in the collection.
for (i, j), d in sorted(rep.table.dims.items()):
    if i != j and any(d.dims[1:]):
        print(c.labels[i], "->", c.labels[j], list(d))
