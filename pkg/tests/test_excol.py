import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from arithtoric.descent import act_on_object
from arithtoric.divclass import canonical_divisor, cohomology
from arithtoric.excol import (Collection, CollectionError, ExtEngine, NotTCI, TCIObject, build_ct_collection,
                              ext_dims, ext_table, find_valid_order, hom_terms, koszul, line_bundle,
                              numerical_fullness, report_from_table, structure_sheaf,
                              verify_exceptional_collection)
from arithtoric.fan import UnsupportedN, build_an_fan, fan_aut, projective_line

SEED = 777


def _random_pairs(f, count, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield (tuple(int(x) for x in rng.integers(-3, 4, size=f.n_rays)),
               tuple(int(x) for x in rng.integers(-3, 4, size=f.n_rays)))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ext_matches_cohomology_on_line_bundles(fans, n):
    f = fans[n]
    for a, b in _random_pairs(f, 100, SEED + n):
        diff = [y - x for x, y in zip(a, b)]
        assert tuple(ext_dims(line_bundle(f, a), line_bundle(f, b))) == tuple(cohomology(f, diff))


def test_p1_examples():
    f = projective_line()
    o, om1 = structure_sheaf(f), line_bundle(f, (-1, 0))
    pt = TCIObject(f, (0, 0), (0,))
    assert tuple(ext_dims(om1, o)) == (2, 0)
    assert tuple(ext_dims(o, om1)) == (0, 0)
    assert tuple(ext_dims(pt, o)) == (0, 1)
    assert tuple(ext_dims(o, pt)) == (1, 0)
    assert tuple(ext_dims(pt, pt)) == (1, 1)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_structure_sheaf_is_exceptional(fans, n):
    o = structure_sheaf(fans[n])
    assert tuple(ext_dims(o, o)) == (1,) + (0,) * n


def _dp6_objects(f, rng, vanishing_sets):
    chi = tuple(int(x) for x in rng.integers(-2, 3, size=f.n_rays))
    return TCIObject(f, chi, vanishing_sets[int(rng.integers(len(vanishing_sets)))])


def test_cone_and_cech_engines_agree_on_dp6():
    f = build_an_fan(2)
    cone, cech = ExtEngine(f, "cone"), ExtEngine(f, "cech")
    rng = np.random.default_rng(SEED)
    vans = [(), (0,), (3,), (0, 3), (1,), (4,), (1, 3)]
    for _ in range(30):
        e, t = _dp6_objects(f, rng, vans), _dp6_objects(f, rng, vans)
        assert tuple(cone.ext_dims(e, t)) == tuple(cech.ext_dims(e, t))


def test_cone_and_cech_engines_agree_on_p1xp1_points():
    from arithtoric.fan import product_fan
    f = product_fan(projective_line(), projective_line())
    cone, cech = ExtEngine(f, "cone"), ExtEngine(f, "cech")
    cones = [c for c in f.cones if len(c) <= 2]
    rng = np.random.default_rng(SEED + 1)
    for _ in range(20):
        objs = [TCIObject(f, tuple(int(x) for x in rng.integers(-2, 3, size=4)),
                          tuple(cones[int(rng.integers(len(cones)))])) for _ in range(2)]
        assert tuple(cone.ext_dims(*objs)) == tuple(cech.ext_dims(*objs))


def test_serre_duality_for_tci_objects_on_dp6():
    f = build_an_fan(2)
    k = canonical_divisor(f)
    rng = np.random.default_rng(SEED + 2)
    vans = [(), (0,), (3,), (0, 3), (1, 3)]
    for _ in range(25):
        e, t = _dp6_objects(f, rng, vans), _dp6_objects(f, rng, vans)
        twisted = TCIObject(f, tuple(a + b for a, b in zip(e.chi, k)), e.vanishing)
        assert tuple(ext_dims(e, t)) == tuple(reversed(tuple(ext_dims(t, twisted))))


def test_ext_is_aut_equivariant_on_a3(fans):
    f = fans[3]
    aut = fan_aut(f)
    from arithtoric.descent import full_aut_action
    a = full_aut_action(f)
    cones = [tuple(sorted(c)) for c in f.cones if len(c) <= 2]
    rng = np.random.default_rng(SEED + 3)
    for _ in range(12):
        objs = [TCIObject(f, tuple(int(x) for x in rng.integers(-1, 2, size=14)),
                          cones[int(rng.integers(len(cones)))]) for _ in range(2)]
        g = int(rng.integers(len(aut)))
        moved = [act_on_object(a, g, o) for o in objs]
        assert tuple(ext_dims(*objs)) == tuple(ext_dims(*moved))


def test_koszul_complexes():
    f = build_an_fan(2)
    lb = koszul(line_bundle(f, (1, 0, 0, 0, 0, 0)))
    assert lb.ranks() == [1]
    pt = koszul(TCIObject(f, (0,) * 6, (0, 3)))
    assert pt.ranks() == [1, 2, 1] and pt.check_d_squared()
    a3 = build_an_fan(3)
    for c in a3.max_cones:
        k = koszul(TCIObject(a3, (0,) * 14, c))
        assert k.ranks() == [1, 3, 3, 1] and k.check_d_squared()
    tor = koszul(TCIObject(a3, (0,) * 14, (4,)))
    assert tor.ranks() == [1, 1]
    assert tor.terms[1][0][1][4] == -1


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 23), st.lists(st.integers(-2, 2), min_size=14, max_size=14))
def test_koszul_d_squared_property(cone_index, chi):
    a3 = build_an_fan(3)
    c = a3.max_cones[cone_index]
    for k in range(len(c) + 1):
        for sub in itertools.combinations(c, k):
            assert koszul(TCIObject(a3, chi, sub)).check_d_squared()


def test_hom_terms_count():
    f = build_an_fan(2)
    e = TCIObject(f, (0,) * 6, (0, 3))
    t = TCIObject(f, (0,) * 6, (1,))
    terms = hom_terms(e, t)
    assert len(terms) == 4 * 2
    assert {x.hom_degree for x in terms} == {-1, 0, 1, 2}


def test_not_tci():
    f = build_an_fan(2)
    with pytest.raises(NotTCI):
        TCIObject(f, (0,) * 6, (1, 4))
    with pytest.raises(NotTCI):
        TCIObject(f, (0,) * 6, (9,))
    with pytest.raises(CollectionError):
        TCIObject(f, (0,) * 5, ())


def test_collection_validation(fans):
    f = fans[1]
    with pytest.raises(CollectionError):
        Collection([], [])
    with pytest.raises(CollectionError):
        Collection([structure_sheaf(f), structure_sheaf(f)], ["O", "O"])
    with pytest.raises(CollectionError):
        Collection.from_dict(build_ct_collection(1).to_dict(), fans[2])


def test_a1_collection(collections):
    c = collections[1]
    assert c.labels == ["O(-1)", "O"]
    rep = verify_exceptional_collection(c)
    assert rep.passed and rep.strong
    full = numerical_fullness(c)
    assert full.passed and full.gram == [[1, 2], [0, 1]]


def test_reversed_a1_collection_locates_violation(collections):
    c = collections[1].reordered([1, 0])
    rep = verify_exceptional_collection(c)
    assert not rep.passed
    assert [(i, j) for i, j, _ in rep.violations] == [(1, 0)]
    assert tuple(rep.violations[0][2]) == (2, 0)
    assert find_valid_order(rep.table) == [1, 0]


def test_a2_collection(collections):
    c = collections[2]
    assert sorted(c.labels) == sorted(["O(-H)", "O(-2H+E1+E2+E3)", "O(-H+E1)", "O(-H+E2)", "O(-H+E3)", "O"])
    rep = verify_exceptional_collection(c)
    assert rep.passed and rep.strong
    full = numerical_fullness(c, table=rep.table)
    assert full.passed and full.size == 6 and full.determinant == 1


def test_a3_collection(collections, a3_table):
    c = collections[3]
    assert len(c) == 24
    assert sum(1 for o in c.objects if o.vanishing) == 6
    rep = report_from_table(a3_table)
    assert rep.passed and all(rep.exceptional_objects) and not rep.violations
    full = numerical_fullness(c, table=a3_table)
    assert full.passed and full.size == full.max_cones == 24
    assert all(full.gram[i][i] == 1 for i in range(24))
    assert full.determinant == 1


def test_a3_torsion_objects_are_exceptional(collections, a3_table):
    c = collections[3]
    for i, o in enumerate(c.objects):
        if o.vanishing:
            assert tuple(a3_table[(i, i)]) == (1, 0, 0, 0)


def test_a3_torsion_block_is_orthogonal(collections, a3_table):
    tors = [i for i, o in enumerate(collections[3].objects) if o.vanishing]
    for i in tors:
        for j in tors:
            if i != j:
                assert a3_table[(i, j)].is_zero


def test_ext_table_parallel_matches_serial(collections):
    c = collections[2]
    assert ext_table(c, jobs=2).dims == ext_table(c, jobs=1).dims


def test_build_ct_collection():
    assert build_ct_collection(1).labels == ["O(-1)", "O"]
    assert len(build_ct_collection(2)) == 6
    with pytest.raises(UnsupportedN):
        build_ct_collection(4)
