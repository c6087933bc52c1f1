import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from arithtoric.gmodule import (GLattice, KLEIN_AUGMENTATION_BASIS, NotASubgroup, augmentation_ideal, cyclic_group,
                                direct_product, dual, group_from_matrices, h0, h1, klein_four, matrix_group_closure,
                                module_isomorphic, permutation_lattice, regular_lattice, restrict, sha2_omega,
                                sha_omega, sign_lattice, symmetric_group, trivial_lattice)
from arithtoric.zlattice import equal, identity

import oracles


def matrix_lattice(gens):
    mats = matrix_group_closure(gens)
    return GLattice(group_from_matrices(mats), mats[0].shape[0], mats)


def _suite():
    c2, c3, c4, k = cyclic_group(2), cyclic_group(3), cyclic_group(4), klein_four()
    s3, perms = symmetric_group(3)
    c2cube = direct_product(direct_product(c2, c2), c2)
    quat_i = [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]
    quat_j = [[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]]
    return {
        "C2 trivial Z": trivial_lattice(c2),
        "C2 sign": sign_lattice(c2, [1, -1]),
        "C2 by -1 on Z^2": matrix_lattice([[[-1, 0], [0, -1]]]),
        "C2 swap Z^2": regular_lattice(c2),
        "C2 on Z^3 swap plus sign": matrix_lattice([[[0, 1, 0], [1, 0, 0], [0, 0, -1]]]),
        "C3 regular": regular_lattice(c3),
        "C3 on A2": matrix_lattice([[[0, -1], [1, -1]]]),
        "C4 rotation": matrix_lattice([[[0, -1], [1, 0]]]),
        "C4 regular": regular_lattice(c4),
        "C4 augmentation": augmentation_ideal(c4),
        "C2xC2 regular": regular_lattice(k),
        "C2xC2 augmentation I": augmentation_ideal(k),
        "C2xC2 J": dual(augmentation_ideal(k)),
        "C2xC2 sign s": sign_lattice(k, [1, -1, 1, -1]),
        "S3 permutation": permutation_lattice(s3, perms),
        "S3 sign": sign_lattice(s3, [1, -1, -1, 1, 1, -1]),
        "S3 augmentation of Z^3": matrix_lattice([[[0, -1], [-1, 0]], [[-1, 1], [0, 1]]]),
        "C6 on A2": matrix_lattice([[[1, -1], [1, 0]]]),
        "D4 on Z^2": matrix_lattice([[[0, -1], [1, 0]], [[1, 0], [0, -1]]]),
        "C2^3 sign": sign_lattice(c2cube, [(-1) ** bin(g).count("1") for g in range(8)]),
        "Q8 on Z^4": matrix_lattice([quat_i, quat_j]),
    }


SUITE = _suite()

# Q8 acts freely on Z^4, so every generator value passes the order relation;
# a smaller box keeps the enumeration cheap.
BOX = {"Q8 on Z^4": 1}


def test_suite_in_scope():
    for l in SUITE.values():
        assert l.rank <= 4 and l.group.order <= 8


def test_s3_sign_is_a_character():
    l = SUITE["S3 sign"]
    g = l.group
    for a in range(6):
        for b in range(6):
            assert l.action[g.mul[a][b]][0, 0] == l.action[a][0, 0] * l.action[b][0, 0]


@pytest.mark.parametrize("name", sorted(SUITE))
def test_h1_matches_bruteforce(name):
    l = SUITE[name]
    inv = h1(l)
    assert inv.free_rank == 0
    assert inv.order == oracles.h1_order(l, bound=BOX.get(name, 3))
    assert 2 ** sum(1 for t in inv.torsion if t % 2 == 0) == oracles.h1_two_torsion(l, bound=BOX.get(name, 3))


@pytest.mark.parametrize("name", sorted(SUITE))
def test_sha_omega_matches_bruteforce(name):
    l = SUITE[name]
    assert sha_omega(l).order == oracles.sha_omega_order(l, bound=BOX.get(name, 3))


@pytest.mark.parametrize("name, expected", [
    ("C2 trivial Z", "trivial"),
    ("C2 sign", "Z/2"),
    ("C2xC2 regular", "trivial"),
    ("C2xC2 augmentation I", "Z/4"),
    ("C2xC2 J", "Z/2 + Z/2"),
])
def test_h1_examples(name, expected):
    assert str(h1(SUITE[name])) == expected


def test_h0_ranks():
    k = klein_four()
    assert h0(trivial_lattice(k, 3)).shape[1] == 3
    assert h0(sign_lattice(cyclic_group(2), [1, -1])).shape[1] == 0
    assert h0(augmentation_ideal(k)).shape[1] == 0


def test_restrict():
    l = SUITE["C2xC2 J"]
    full, emb = restrict(l, range(4))
    assert full.group.order == 4 and str(h1(full)) == str(h1(l))
    triv, _ = restrict(l, [0])
    assert h1(triv).is_trivial
    for c in l.group.cyclic_subgroups():
        if len(c) == 2:
            r, _ = restrict(l, c)
            assert r.rank == 3 and r.group.order == 2
    with pytest.raises(NotASubgroup):
        restrict(l, [0, 1, 2])


def test_sha_omega_examples():
    k = klein_four()
    assert sha_omega(regular_lattice(k)).is_trivial
    assert sha_omega(permutation_lattice(*symmetric_group(3))).is_trivial
    assert str(sha_omega(augmentation_ideal(k))) == "Z/2"


def test_sha2_omega_of_norm_one_lattice():
    # Sha^2_omega(G, J) is the group that governs Sha^1 of the norm-one torus
    j = dual(augmentation_ideal(klein_four()))
    assert str(sha2_omega(j)) == "Z/2"
    assert sha_omega(j).is_trivial


def test_klein_augmentation_matrices():
    l = augmentation_ideal(klein_four(), KLEIN_AUGMENTATION_BASIS)
    assert equal(l.action[1], [[-1, 0, 0], [0, 0, -1], [0, -1, 0]])
    assert equal(l.action[2], [[1, 0, 0], [1, -1, 0], [1, 0, -1]])


def test_augmentation_ideal_shapes():
    c2 = augmentation_ideal(cyclic_group(2))
    assert c2.rank == 1 and equal(c2.action[1], [[-1]])
    for g in (cyclic_group(3), klein_four(), symmetric_group(3)[0]):
        assert augmentation_ideal(g).rank == g.order - 1


def test_dual_properties():
    k = klein_four()
    reg = regular_lattice(k)
    d = dual(reg)
    assert all(equal(d.action[g], reg.action[g]) for g in range(4))
    t = trivial_lattice(k, 2)
    assert all(equal(dual(t).action[g], identity(2)) for g in range(4))
    i = augmentation_ideal(k)
    assert module_isomorphic(dual(dual(i)), i) is not None


def test_module_isomorphic():
    c2 = cyclic_group(2)
    l = SUITE["C2xC2 J"]
    assert equal(module_isomorphic(l, l), identity(3))
    assert module_isomorphic(trivial_lattice(c2), sign_lattice(c2, [1, -1])) is None
    # I and J are not isomorphic (different H^1)
    assert module_isomorphic(SUITE["C2xC2 augmentation I"], l) is None


def test_module_isomorphic_finds_nontrivial_intertwiner():
    l = SUITE["C4 rotation"]
    p = np.array([[1, 1], [0, 1]], dtype=object)
    pinv = np.array([[1, -1], [0, 1]], dtype=object)
    conj = GLattice(l.group, 2, [p.dot(a).dot(pinv) for a in l.action])
    q = module_isomorphic(l, conj)
    assert q is not None
    assert all(equal(q.dot(l.action[g]), conj.action[g].dot(q)) for g in range(4))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(sorted(SUITE)))
def test_dual_is_involutive(name):
    l = SUITE[name]
    dd = dual(dual(l))
    assert all(equal(dd.action[g], l.action[g]) for g in range(l.group.order))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(sorted(SUITE)))
def test_h1_killed_by_group_order(name):
    inv = h1(SUITE[name])
    n = SUITE[name].group.order
    assert all(n % t == 0 for t in inv.torsion)


def test_group_structure_helpers():
    s3, _ = symmetric_group(3)
    assert s3.order_census() == {1: 1, 2: 3, 3: 2}
    assert len(s3.center()) == 1
    k = klein_four()
    assert len(k.cyclic_subgroups()) == 4
    assert len(k.subgroups()) == 5
