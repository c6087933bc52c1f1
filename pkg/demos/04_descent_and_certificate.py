"""Galois descent under a C2 x C2 action and the no-rational-point certificate.

Run with ``python3 demos/04_descent_and_certificate.py``.
"""

# %%
from arithtoric import bundle
from arithtoric.arith import BiquadraticField, sha_norm_one_biquadratic
from arithtoric.descent import descend_collection, no_point_certificate, rationality_check
from arithtoric.excol import build_ct_collection
from arithtoric.gmodule import KLEIN_AUGMENTATION_BASIS, augmentation_ideal, klein_four, module_isomorphic

f = bundle.load_fan("bundled:fan_a3")
c = build_ct_collection(3)
a = bundle.load_action("bundled:action_a3_biquadratic", f)

# %% [markdown]
# The two generators act on N = Z^3 exactly as C2 x C2 acts on its
# augmentation ideal in the basis 1 - s, t - 1, s - st.
print(a.matrix(1).tolist(), a.matrix(2).tolist())
aug = augmentation_ideal(klein_four(), KLEIN_AUGMENTATION_BASIS)
print("intertwiner:", module_isomorphic(aug, a.n_lattice()).tolist())

# %% [markdown]
# Orbits of the collection and the lift obstruction of each orbit.
rep = descend_collection(a, c)
for o in rep.orbits:
    print(len(o.members), [c.labels[i] for i in o.members], "obstruction vanished:", o.obstruction.vanished)

# %% [markdown]
# Pic carries a nontrivial action, so the rationality check is inconclusive.
res = rationality_check(f, a)
print(res.verdict, "H^1(G, Pic) =", res.h1_pic)

# %% [markdown]
# Sha of the norm-one torus for two fields, and the resulting certificates.
for pair in ((5, 29), (5, 13)):
    sha = sha_norm_one_biquadratic(BiquadraticField(*pair))
    cert = no_point_certificate(f, a, c, sha.group, rep)
    print(pair, sha.group, sha.method, "->", "certificate" if cert.issued else cert.reason)
