"""Biquadratic fields over Q and Sha of their norm-one tori.

For ``K = Q(sqrt a, sqrt b)`` with group ``G = C2 x C2`` the character
lattice of the norm-one torus is ``J = dual(I_G)``.  Unramified places have
cyclic decomposition groups, and every cyclic subgroup occurs among them, so
``Sha^1(Q, T)`` is the dual of ``Sha^2_omega(G, J)`` as long as each ramified
prime has a cyclic decomposition group.  A ramified prime with decomposition
group ``G`` forces ``Sha^1 = 0``.  Only odd ramification is handled
(``a, b = 1 mod 4``), where the decomposition group at ``p | a`` is cyclic
exactly when ``b`` is a square mod ``p``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

from sympy import factorint, isprime

from .gmodule import GLattice, augmentation_ideal, dual, klein_four, sha2_omega
from .zlattice import AbelianGroupInvariants


class NotOddPrime(ValueError):
    """The modulus of a Legendre symbol is not an odd prime."""


class UnsupportedField(ValueError):
    """The biquadratic field is outside the supported domain."""


def legendre(n: int, p: int) -> int:
    """Legendre symbol ``(n / p)`` by Euler's criterion."""
    if p < 3 or not isprime(p):
        raise NotOddPrime(f"{p} is not an odd prime")
    r = pow(n % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def _squarefree(n: int) -> bool:
    return n != 0 and all(e == 1 for e in factorint(abs(n)).values())


@dataclass(frozen=True)
class BiquadraticField:
    """``Q(sqrt a, sqrt b)`` with squarefree, coprime ``a, b = 1 mod 4``."""

    a: int
    b: int

    def __post_init__(self):
        a, b = self.a, self.b
        for x in (a, b):
            if x == 1 or not _squarefree(x):
                raise UnsupportedField(f"{x} is not a squarefree integer different from 1")
            if x % 4 != 1:
                raise UnsupportedField(f"{x} is not 1 mod 4 (ramification at 2 is not handled)")
        if a == b:
            raise UnsupportedField("a and b must differ")
        if gcd(a, b) != 1:
            raise UnsupportedField(f"gcd({a}, {b}) != 1")

    def ramified_primes(self) -> list[int]:
        return sorted(set(factorint(abs(self.a))) | set(factorint(abs(self.b))))

    @property
    def label(self) -> str:
        return f"Q(sqrt({self.a}), sqrt({self.b}))"


@dataclass
class PrimeRecord:
    p: int
    divides: str        # "a" or "b"
    other_residue: int  # Legendre symbol of the other generator mod p
    cyclic: bool

    def to_dict(self) -> dict:
        return {"p": self.p, "divides": self.divides, "legendre_other": self.other_residue,
                "decomposition_group": "cyclic" if self.cyclic else "C2xC2"}


@dataclass
class ShaResult:
    group: AbelianGroupInvariants
    method: str  # "AllCyclicDecomposition" or "NoncyclicDecompositionFound"
    details: list[PrimeRecord] = field(default_factory=list)
    label: str = "Sha1"

    def to_dict(self) -> dict:
        return {"label": self.label, "group": str(self.group), "method": self.method,
                "primes": [d.to_dict() for d in self.details]}


def norm_one_character_lattice() -> GLattice:
    """``J = dual(I_G)`` for ``G = C2 x C2``."""
    return dual(augmentation_ideal(klein_four()))


def decomposition_records(f: BiquadraticField) -> list[PrimeRecord]:
    out = []
    for p in f.ramified_primes():
        if f.a % p == 0:
            s, which = legendre(f.b, p), "a"
        else:
            s, which = legendre(f.a, p), "b"
        out.append(PrimeRecord(p, which, s, s == 1))
    return out


def sha_norm_one_biquadratic(f: BiquadraticField) -> ShaResult:
    """``Sha^1(Q, R^1_{K/Q} G_m)`` via the decomposition-group rule."""
    records = decomposition_records(f)
    if all(r.cyclic for r in records):
        group = sha2_omega(norm_one_character_lattice())
        method = "AllCyclicDecomposition"
    else:
        group = AbelianGroupInvariants()
        method = "NoncyclicDecompositionFound"
    if not (group.is_trivial or (group.free_rank == 0 and group.torsion == (2,))):
        raise AssertionError(f"unexpected Sha value {group}")
    return ShaResult(group, method, records)


def zhe_of_norm_one(f: BiquadraticField) -> ShaResult:
    """``Zhe(Q, T)``, identified with ``Sha^1(Q, T)``."""
    res = sha_norm_one_biquadratic(f)
    res.label = "Zhe"
    return res


def sha_of_character_lattice(l: GLattice) -> ShaResult:
    """Diagnostic: ``Sha^2_omega(G, l)``, the value of Sha^1 when all decomposition groups are cyclic."""
    return ShaResult(sha2_omega(l), "AllCyclicDecomposition", [], "Sha2_omega")
