"""The Weyl-chamber fans of A_1, A_2, A_3 and their symmetry groups.

Run with ``python3 demos/01_fans_and_symmetry.py``.
"""

# %%
from arithtoric.fan import (an_ray_subsets, build_an_fan, divisor_star_fan, fan_aut, fans_isomorphic, is_complete,
                            is_smooth, product_fan, projective_line)

# %% [markdown]
# Rays of X(A_n) are indexed by proper nonempty subsets of {0..n}; maximal
# cones by complete flags of such subsets.
for n in (1, 2, 3):
    f = build_an_fan(n)
    print(f"A_{n}: {f.n_rays} rays, {len(f.max_cones)} maximal cones, "
          f"smooth={is_smooth(f)}, complete={is_complete(f)}")

# %%
a3 = build_an_fan(3)
print([sorted(s) for s in an_ray_subsets(3)])

# %% [markdown]
# The automorphism group of the A_3 fan. Its element-order census, its
# center and the quotient by the center identify it as S_4 x C_2.
aut = fan_aut(a3)
g = aut.group
q = g.quotient(g.center())
print("order", g.order, "center", len(g.center()), "census", g.order_census())
print("quotient census", q.order_census(), "(S_4 has 9 involutions, 8 3-cycles, 6 4-cycles)")

# %% [markdown]
# Divisors over the six middle rays are copies of P^1 x P^1; the others are
# hexagons (degree 6 del Pezzo surfaces).
quadric = product_fan(projective_line(), projective_line())
for i, s in enumerate(an_ray_subsets(3)):
    star = divisor_star_fan(a3, i)
    kind = "P1xP1" if fans_isomorphic(star, quadric) is not None else "dP6"
    print(sorted(s), "->", kind)
