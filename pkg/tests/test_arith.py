import pytest
from hypothesis import given, settings, strategies as st
from sympy import primerange

from arithtoric.arith import (BiquadraticField, NotOddPrime, UnsupportedField, decomposition_records, legendre,
                              sha_norm_one_biquadratic, sha_of_character_lattice, zhe_of_norm_one)
from arithtoric.gmodule import klein_four, regular_lattice

PRIMES_1_MOD_4 = [p for p in primerange(5, 120) if p % 4 == 1]


@pytest.mark.parametrize("n, p, expected", [(29, 5, 1), (5, 29, 1), (7, 7, 0), (13, 5, -1), (17, 13, 1), (13, 17, 1)])
def test_legendre(n, p, expected):
    assert legendre(n, p) == expected


@settings(max_examples=60, deadline=None)
@given(st.integers(-500, 500), st.sampled_from(list(primerange(3, 60))))
def test_legendre_matches_square_table(n, p):
    squares = {(x * x) % p for x in range(1, p)}
    expected = 0 if n % p == 0 else (1 if n % p in squares else -1)
    assert legendre(n, p) == expected


@pytest.mark.parametrize("p", [2, 9, 1, -3])
def test_legendre_rejects_non_odd_primes(p):
    with pytest.raises(NotOddPrime):
        legendre(3, p)


@pytest.mark.parametrize("a, b, expected", [(5, 29, "Z/2"), (29, 5, "Z/2"), (5, 13, "trivial"), (13, 17, "Z/2"),
                                            (-3, 5, "trivial")])
def test_sha_values(a, b, expected):
    res = sha_norm_one_biquadratic(BiquadraticField(a, b))
    assert str(res.group) == expected
    assert res.method == ("AllCyclicDecomposition" if expected == "Z/2" else "NoncyclicDecompositionFound")


def test_decomposition_records_for_5_29():
    recs = decomposition_records(BiquadraticField(5, 29))
    assert [(r.p, r.divides, r.other_residue, r.cyclic) for r in recs] == [(5, "a", 1, True), (29, "b", 1, True)]


@pytest.mark.parametrize("a, b", [(6, 10), (5, 5), (5, 45), (1, 5), (3, 5), (5, 65)])
def test_unsupported_fields(a, b):
    with pytest.raises(UnsupportedField):
        sha_norm_one_biquadratic(BiquadraticField(a, b))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(PRIMES_1_MOD_4), st.sampled_from(PRIMES_1_MOD_4))
def test_sha_symmetric_and_consistent(p, q):
    if p == q:
        return
    ab = sha_norm_one_biquadratic(BiquadraticField(p, q))
    ba = sha_norm_one_biquadratic(BiquadraticField(q, p))
    assert ab.group == ba.group
    # for two primes = 1 mod 4, reciprocity makes the two Legendre symbols agree
    assert (str(ab.group) == "Z/2") == (legendre(p, q) == 1)


def test_zhe_and_diagnostic():
    z = zhe_of_norm_one(BiquadraticField(5, 29))
    assert z.label == "Zhe" and str(z.group) == "Z/2"
    assert sha_of_character_lattice(regular_lattice(klein_four())).group.is_trivial


def test_result_serialises():
    d = sha_norm_one_biquadratic(BiquadraticField(5, 29)).to_dict()
    assert d["group"] == "Z/2" and len(d["primes"]) == 2
