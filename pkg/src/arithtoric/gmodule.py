"""Finite groups acting on lattices and their low-degree cohomology.

Groups are multiplication tables with the identity at index 0.  A lattice
action assigns an integer matrix to every element, acting on column vectors.
"""

from __future__ import annotations

import itertools
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .zlattice import (
    AbelianGroupInvariants,
    IntMatrix,
    as_int_matrix,
    cokernel,
    determinant,
    equal,
    identity,
    image_basis,
    kernel_basis,
    solve_integer,
    to_tuple,
)


class NotASubgroup(ValueError):
    pass


class Inconclusive(RuntimeError):
    """Bounded isomorphism search ran out without a verdict."""


class FiniteGroup:
    """A finite group given by its multiplication table.

    Args:
        mul: ``mul[a][b]`` is the index of ``a*b``.  Index 0 must be the
            identity.
        generators: indices generating the group; computed if omitted.
        names: optional element labels, used in reports only.
    """

    def __init__(self, mul: Sequence[Sequence[int]], generators: Sequence[int] | None = None,
                 names: Sequence[str] | None = None):
        self.mul = tuple(tuple(int(x) for x in row) for row in mul)
        n = self.order = len(self.mul)
        if n == 0 or any(len(row) != n for row in self.mul):
            raise ValueError("multiplication table must be square and nonempty")
        if any(not 0 <= x < n for row in self.mul for x in row):
            raise ValueError("table entries out of range")
        if any(self.mul[0][a] != a or self.mul[a][0] != a for a in range(n)):
            raise ValueError("element 0 is not the identity")
        for row in self.mul:
            if len(set(row)) != n:
                raise ValueError("table is not a Latin square")
        for a in range(n):
            for b in range(n):
                ab = self.mul[a][b]
                for c in range(n):
                    if self.mul[ab][c] != self.mul[a][self.mul[b][c]]:
                        raise ValueError("multiplication is not associative")
        self.inv = tuple(self.mul[a].index(0) for a in range(n))
        if generators is None:
            generators = self._greedy_generators()
        self.generators = tuple(int(g) for g in generators)
        if len(self.closure(self.generators)) != n:
            raise ValueError("generators do not generate the group")
        self.names = tuple(names) if names is not None else tuple(f"g{i}" for i in range(n))

    def __repr__(self):
        return f"FiniteGroup(order={self.order})"

    def _greedy_generators(self) -> list[int]:
        gens: list[int] = []
        span = {0}
        # prefer high-order elements so the list stays short
        for a in sorted(range(1, self.order), key=lambda a: (-self.element_order(a), a)):
            if a not in span:
                gens.append(a)
                span = self.closure(gens)
                if len(span) == self.order:
                    break
        return gens

    def closure(self, elements: Iterable[int]) -> frozenset[int]:
        elements = list(elements)
        seen = {0}
        queue = deque([0])
        while queue:
            a = queue.popleft()
            for g in elements:
                b = self.mul[a][g]
                if b not in seen:
                    seen.add(b)
                    queue.append(b)
        return frozenset(seen)

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != 0:
            x = self.mul[x][a]
            k += 1
        return k

    def order_census(self) -> dict[int, int]:
        """Number of elements of each order."""
        return dict(sorted(Counter(self.element_order(a) for a in range(self.order)).items()))

    def center(self) -> frozenset[int]:
        return frozenset(a for a in range(self.order)
                         if all(self.mul[a][b] == self.mul[b][a] for b in range(self.order)))

    def is_subgroup(self, elements: Iterable[int]) -> bool:
        s = set(elements)
        if 0 not in s:
            return False
        return all(self.mul[a][b] in s for a in s for b in s) and all(self.inv[a] in s for a in s)

    def subgroup(self, elements: Iterable[int]) -> tuple["FiniteGroup", list[int]]:
        """Subgroup as a standalone group plus the embedding of its indices."""
        elems = sorted(set(elements))
        if not self.is_subgroup(elems):
            raise NotASubgroup(f"{elems} is not closed under multiplication and inverse")
        pos = {a: i for i, a in enumerate(elems)}
        table = [[pos[self.mul[a][b]] for b in elems] for a in elems]
        names = [self.names[a] for a in elems]
        return FiniteGroup(table, names=names), elems

    def cyclic_subgroups(self) -> list[frozenset[int]]:
        subs = {self.closure([a]) for a in range(self.order)}
        return sorted(subs, key=lambda s: (len(s), sorted(s)))

    def subgroups(self) -> list[frozenset[int]]:
        """All subgroups, by closing pairs of cyclic subgroups repeatedly."""
        found = set(self.cyclic_subgroups())
        frontier = set(found)
        while frontier:
            new = set()
            for h in frontier:
                for c in self.cyclic_subgroups():
                    s = self.closure(set(h) | set(c))
                    if s not in found:
                        new.add(s)
            found |= new
            frontier = new
        return sorted(found, key=lambda s: (len(s), sorted(s)))

    def quotient(self, normal: Iterable[int]) -> "FiniteGroup":
        n = frozenset(normal)
        if not self.is_subgroup(n):
            raise NotASubgroup("not a subgroup")
        if any(self.mul[self.mul[g][h]][self.inv[g]] not in n for g in range(self.order) for h in n):
            raise ValueError("subgroup is not normal")
        cosets: list[frozenset[int]] = []
        where: dict[int, int] = {}
        for g in range(self.order):
            if g not in where:
                c = frozenset(self.mul[g][h] for h in n)
                for x in c:
                    where[x] = len(cosets)
                cosets.append(c)
        table = [[where[self.mul[min(a)][min(b)]] for b in cosets] for a in cosets]
        return FiniteGroup(table)

    def word_map(self) -> dict[int, list[int]]:
        """A shortest word in the generators for every element (BFS)."""
        words = {0: []}
        queue = deque([0])
        while queue:
            a = queue.popleft()
            for g in self.generators:
                b = self.mul[a][g]
                if b not in words:
                    words[b] = words[a] + [g]
                    queue.append(b)
        return words


def cyclic_group(n: int) -> FiniteGroup:
    return FiniteGroup([[(a + b) % n for b in range(n)] for a in range(n)],
                       generators=[1] if n > 1 else [])


def klein_four() -> FiniteGroup:
    """C2 x C2 with elements ``e, s, t, st`` (indices 0..3)."""
    # index = s_bit + 2*t_bit
    table = [[a ^ b for b in range(4)] for a in range(4)]
    return FiniteGroup(table, generators=[1, 2], names=["e", "s", "t", "st"])


def direct_product(g: FiniteGroup, h: FiniteGroup) -> FiniteGroup:
    n, m = g.order, h.order
    table = [[g.mul[a // m][b // m] * m + h.mul[a % m][b % m] for b in range(n * m)]
             for a in range(n * m)]
    gens = [a * m for a in g.generators] + list(h.generators)
    return FiniteGroup(table, generators=gens)


def symmetric_group(n: int) -> tuple[FiniteGroup, list[tuple[int, ...]]]:
    """S_n with the identity permutation first; returns the group and the perms."""
    perms = sorted(itertools.permutations(range(n)))
    pos = {p: i for i, p in enumerate(perms)}
    table = [[pos[tuple(p[q[i]] for i in range(n))] for q in perms] for p in perms]
    return FiniteGroup(table), perms


def group_from_matrices(mats: Sequence, check_closed: bool = True) -> FiniteGroup:
    """Group whose elements are the given matrices, in the given order.

    The first matrix must be the identity.
    """
    keys = [to_tuple(m) for m in mats]
    pos = {k: i for i, k in enumerate(keys)}
    if len(pos) != len(keys):
        raise ValueError("duplicate matrices")
    arrs = [as_int_matrix(m) for m in mats]
    table = []
    for a in arrs:
        row = []
        for b in arrs:
            k = to_tuple(a.dot(b))
            if k not in pos:
                raise ValueError("matrix set is not closed under multiplication")
            row.append(pos[k])
        table.append(row)
    return FiniteGroup(table)


def matrix_group_closure(generators: Sequence) -> list[IntMatrix]:
    """All products of the generating matrices, identity first."""
    gens = [as_int_matrix(g) for g in generators]
    n = gens[0].shape[0] if gens else 0
    ident = identity(n)
    out = [ident]
    seen = {to_tuple(ident)}
    queue = deque([ident])
    while queue:
        a = queue.popleft()
        for g in gens:
            b = a.dot(g)
            k = to_tuple(b)
            if k not in seen:
                seen.add(k)
                out.append(b)
                queue.append(b)
    return out


@dataclass
class GLattice:
    """A free Z-module of rank ``rank`` with a linear action of ``group``.

    ``action[g]`` is the matrix of ``g`` on column vectors.
    """

    group: FiniteGroup
    rank: int
    action: list = field(repr=False)

    def __post_init__(self):
        self.action = [as_int_matrix(a, self.rank, self.rank) for a in self.action]
        if len(self.action) != self.group.order:
            raise ValueError("need one matrix per group element")
        for a in self.action:
            if a.shape != (self.rank, self.rank):
                raise ValueError("action matrix has the wrong shape")
        if not equal(self.action[0], identity(self.rank)):
            raise ValueError("identity must act trivially")
        mul = self.group.mul
        for g in range(self.group.order):
            for h in range(self.group.order):
                if not equal(self.action[g].dot(self.action[h]), self.action[mul[g][h]]):
                    raise ValueError(f"action is not a homomorphism at ({g}, {h})")

    @classmethod
    def from_generators(cls, group: FiniteGroup, gen_matrices: dict[int, object]) -> "GLattice":
        """Extend matrices on ``group.generators`` to all elements via words."""
        mats = {g: as_int_matrix(m) for g, m in gen_matrices.items()}
        rank = next(iter(mats.values())).shape[0] if mats else 0
        action = []
        for a, word in sorted(group.word_map().items()):
            m = identity(rank)
            for g in word:
                m = m.dot(mats[g])
            action.append(m)
        return cls(group, rank, action)

    def generator_matrices(self) -> dict[int, IntMatrix]:
        return {g: self.action[g] for g in self.group.generators}


def trivial_lattice(group: FiniteGroup, rank: int = 1) -> GLattice:
    return GLattice(group, rank, [identity(rank)] * group.order)


def sign_lattice(group: FiniteGroup, character: Sequence[int]) -> GLattice:
    """Rank one lattice where element ``g`` acts by ``character[g]`` (+-1)."""
    return GLattice(group, 1, [[[int(c)]] for c in character])


def permutation_lattice(group: FiniteGroup, perms: Sequence[Sequence[int]]) -> GLattice:
    """Lattice Z^n with basis permuted: ``g`` sends ``e_i`` to ``e_{perms[g][i]}``."""
    n = len(perms[0])
    action = []
    for p in perms:
        m = np.zeros((n, n), dtype=object)
        for i, j in enumerate(p):
            m[j, i] = 1
        action.append(m)
    return GLattice(group, n, action)


def regular_lattice(group: FiniteGroup) -> GLattice:
    """Z[G] with left multiplication."""
    return permutation_lattice(group, [group.mul[g] for g in range(group.order)])


def coset_lattice(group: FiniteGroup, subgroup: Iterable[int]) -> GLattice:
    """Permutation lattice Z[G/H] for left cosets."""
    h = sorted(set(subgroup))
    cosets: list[frozenset[int]] = []
    where: dict[int, int] = {}
    for g in range(group.order):
        if g not in where:
            c = frozenset(group.mul[g][x] for x in h)
            for x in c:
                where[x] = len(cosets)
            cosets.append(c)
    perms = [[where[group.mul[g][min(c)]] for c in cosets] for g in range(group.order)]
    return permutation_lattice(group, perms)


# Basis 1 - s, t - 1, s - st of the augmentation ideal of Z[C2 x C2], written
# as coefficient vectors on (e, s, t, st).
KLEIN_AUGMENTATION_BASIS = ((1, -1, 0, 0), (-1, 0, 1, 0), (0, 1, 0, -1))


def augmentation_ideal(group: FiniteGroup, basis: Sequence[Sequence[int]] | None = None) -> GLattice:
    """Kernel of ``Z[G] -> Z`` with left multiplication.

    The default basis is ``g - 1`` for ``g != 1``.  A custom basis is given as
    coefficient vectors on the group elements and must span the ideal.
    """
    n = group.order
    if basis is None:
        basis = []
        for g in range(1, n):
            v = [0] * n
            v[g] += 1
            v[0] -= 1
            basis.append(v)
    B = as_int_matrix(basis).T  # n x (n-1), columns = basis vectors
    if B.shape != (n, n - 1):
        raise ValueError("basis must have |G| - 1 vectors of length |G|")
    if any(sum(B[:, j]) != 0 for j in range(n - 1)):
        raise ValueError("basis vectors must have coefficient sum zero")
    reg = regular_lattice(group)
    action = []
    for g in range(n):
        gb = reg.action[g].dot(B)
        cols = []
        for j in range(n - 1):
            x = solve_integer(B, gb[:, j])
            if x is None:
                raise ValueError("basis does not span the augmentation ideal")
            cols.append(x)
        action.append(as_int_matrix(cols).T if cols else np.zeros((0, 0), dtype=object))
    return GLattice(group, n - 1, action)


def dual(l: GLattice) -> GLattice:
    """Dual lattice with ``g`` acting by ``transpose(action(g^-1))``."""
    return GLattice(l.group, l.rank, [l.action[l.group.inv[g]].T.copy() for g in range(l.group.order)])


def h0(l: GLattice) -> IntMatrix:
    """Saturated basis (as columns) of the fixed sublattice."""
    if l.rank == 0:
        return np.zeros((0, 0), dtype=object)
    blocks = [l.action[g] - identity(l.rank) for g in l.group.generators]
    if not blocks:
        return identity(l.rank)
    return kernel_basis(np.vstack(blocks))


def _cocycle_system(l: GLattice) -> IntMatrix:
    """Matrix whose kernel is Z^1 in coordinates (c_0, ..., c_{n-1}) in L^n.

    Rows encode ``c_{gh} - c_g - g c_h = 0`` for all ordered pairs.
    """
    n, r = l.group.order, l.rank
    rows = []
    for g in range(n):
        for h in range(n):
            gh = l.group.mul[g][h]
            block = np.zeros((r, n * r), dtype=object)
            block[:, gh * r:(gh + 1) * r] += identity(r)
            block[:, g * r:(g + 1) * r] -= identity(r)
            block[:, h * r:(h + 1) * r] -= l.action[g]
            rows.append(block)
    return np.vstack(rows)


def _coboundary_map(l: GLattice) -> IntMatrix:
    """L -> C^1, m |-> (g m - m)_g."""
    return np.vstack([l.action[g] - identity(l.rank) for g in range(l.group.order)])


@dataclass
class CocycleData:
    """Z^1 and B^1 of a lattice, in coordinates.

    ``z1`` columns are a basis of the cocycles inside ``L^|G|``;
    ``b1_in_z1`` expresses the coboundaries of a basis of ``L`` in that basis.
    """

    lattice: GLattice
    z1: IntMatrix
    b1_in_z1: IntMatrix


def cocycles(l: GLattice) -> CocycleData:
    n, r = l.group.order, l.rank
    if r == 0:
        empty = np.zeros((0, 0), dtype=object)
        return CocycleData(l, empty, empty)
    z1 = kernel_basis(_cocycle_system(l))
    b = _coboundary_map(l)
    cols = []
    for j in range(r):
        x = solve_integer(z1, b[:, j])
        if x is None:  # pragma: no cover - Z^1 is saturated and contains B^1
            raise AssertionError("coboundary outside the cocycle lattice")
        cols.append(x)
    b1 = as_int_matrix(cols).T if cols else np.zeros((z1.shape[1], 0), dtype=object)
    b1 = b1.reshape(z1.shape[1], r)
    return CocycleData(l, z1, b1)


def h1(l: GLattice) -> AbelianGroupInvariants:
    """H^1(G, L) as Z^1 / B^1."""
    data = cocycles(l)
    if data.z1.shape[1] == 0:
        return AbelianGroupInvariants()
    inv, _ = cokernel(data.b1_in_z1)
    return inv


def restrict(l: GLattice, subgroup_elements: Iterable[int]) -> tuple[GLattice, list[int]]:
    """Restriction to a subgroup; returns the lattice and the element embedding."""
    sub, emb = l.group.subgroup(subgroup_elements)
    return GLattice(sub, l.rank, [l.action[a] for a in emb]), emb


def restriction_kernel_lattice(l: GLattice, subgroups: Sequence[Iterable[int]]) -> tuple[CocycleData, IntMatrix]:
    """Cocycles whose restriction to every listed subgroup is a coboundary.

    Returns the cocycle data of ``l`` and a basis (columns, in Z^1
    coordinates) of the sublattice of such cocycles.
    """
    data = cocycles(l)
    k = data.z1.shape[1]
    r = l.rank
    if k == 0:
        return data, np.zeros((0, 0), dtype=object)
    blocks = []
    subs = [sorted(set(s)) for s in subgroups]
    for s in subs:
        if not l.group.is_subgroup(s):
            raise NotASubgroup(f"{s} is not a subgroup")
    # unknowns: z (k coords) then one m_S in L per subgroup
    width = k + r * len(subs)
    for si, s in enumerate(subs):
        for h in s:
            row = np.zeros((r, width), dtype=object)
            row[:, :k] = data.z1[h * r:(h + 1) * r, :]
            row[:, k + si * r:k + (si + 1) * r] = -(l.action[h] - identity(r))
            blocks.append(row)
    if not blocks:
        return data, identity(k)
    ker = kernel_basis(np.vstack(blocks))
    proj = ker[:k, :]
    return data, image_basis(proj)


def sha_omega(l: GLattice) -> AbelianGroupInvariants:
    """Kernel of restriction ``H^1(G, L) -> prod over cyclic C of H^1(C, L)``."""
    data, kb = restriction_kernel_lattice(l, l.group.cyclic_subgroups())
    if kb.shape[1] == 0:
        return AbelianGroupInvariants()
    cols = []
    for j in range(data.b1_in_z1.shape[1]):
        x = solve_integer(kb, data.b1_in_z1[:, j])
        if x is None:  # pragma: no cover - coboundaries restrict to coboundaries
            raise AssertionError("coboundary not in the restriction kernel")
        cols.append(x)
    rel = as_int_matrix(cols).T.reshape(kb.shape[1], len(cols)) if cols else np.zeros((kb.shape[1], 0), dtype=object)
    inv, _ = cokernel(rel)
    return inv


def intertwines(p, l1: GLattice, l2: GLattice) -> bool:
    p = as_int_matrix(p)
    return all(equal(p.dot(l1.action[g]), l2.action[g].dot(p)) for g in l1.group.generators)


def _invariant_profile(l: GLattice) -> list:
    prof = []
    for s in l.group.subgroups():
        r, _ = restrict(l, s)
        prof.append((tuple(sorted(s)), h0(r).shape[1], h1(r)))
    return prof


def module_isomorphic(l1: GLattice, l2: GLattice, bound: int = 5,
                      max_candidates: int = 2_000_000) -> Optional[IntMatrix]:
    """Unimodular ``P`` with ``P l1(g) = l2(g) P`` for all ``g``, or ``None``.

    ``None`` is only returned when the two lattices are proven non-isomorphic
    by a subgroup-wise mismatch of fixed ranks or H^1.  If the coefficient
    search over ``[-bound, bound]`` finds nothing, :class:`Inconclusive` is
    raised.
    """
    if l1.group is not l2.group and l1.group.mul != l2.group.mul:
        raise ValueError("lattices over different groups")
    if l1.rank != l2.rank:
        return None
    n = l1.rank
    if intertwines(identity(n), l1, l2):
        return identity(n)
    if _invariant_profile(l1) != _invariant_profile(l2):
        return None
    # P entries p_ij flattened row-major; equations P A1 - A2 P = 0
    eqs = []
    for g in l1.group.generators:
        a1, a2 = l1.action[g], l2.action[g]
        for i in range(n):
            for j in range(n):
                row = [0] * (n * n)
                for k in range(n):
                    row[i * n + k] += a1[k, j]
                    row[k * n + j] -= a2[i, k]
                eqs.append(row)
    basis = kernel_basis(as_int_matrix(eqs)) if eqs else identity(n * n)
    d = basis.shape[1]
    if d == 0:
        return None
    rng = range(-bound, bound + 1)
    coeffs = sorted(itertools.product(rng, repeat=d), key=lambda c: (sum(map(abs, c)), c))
    if len(coeffs) > max_candidates:
        coeffs = coeffs[:max_candidates]
    for c in coeffs:
        if not any(c):
            continue
        flat = basis.dot(np.array(c, dtype=object))
        p = flat.reshape(n, n)
        if abs(determinant(p)) == 1:
            return p
    raise Inconclusive(f"no unimodular intertwiner with coefficients in [-{bound}, {bound}]")


def dimension_shift(l: GLattice) -> GLattice:
    """Cokernel ``Q`` of the diagonal embedding ``L -> Z[G] (x) L``.

    ``Z[G] (x) L`` is induced, so ``H^{i+1}(H, L) = H^i(H, Q)`` for every
    subgroup ``H`` and ``i >= 1``, compatibly with restriction.
    """
    n, r = l.group.order, l.rank
    big = []
    for h in range(n):
        m = np.zeros((n * r, n * r), dtype=object)
        for g in range(n):
            hg = l.group.mul[h][g]
            m[hg * r:(hg + 1) * r, g * r:(g + 1) * r] = l.action[h]
        big.append(m)
    emb = np.vstack([identity(r)] * n)
    inv, proj = cokernel(emb)
    assert not inv.torsion
    section = []
    for j in range(proj.shape[0]):
        e = [0] * proj.shape[0]
        e[j] = 1
        section.append(solve_integer(proj, e))
    s = as_int_matrix(section).T
    return GLattice(l.group, proj.shape[0], [proj.dot(m).dot(s) for m in big])


def sha2_omega(l: GLattice) -> AbelianGroupInvariants:
    """Kernel of ``H^2(G, L) -> prod over cyclic C of H^2(C, L)``.

    Computed as the degree-one kernel of the dimension-shifted lattice.
    """
    return sha_omega(dimension_shift(l))
