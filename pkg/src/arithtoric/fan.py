"""Simplicial fans: construction, validity checks, automorphisms, morphisms."""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Iterable, Sequence

import numpy as np

from .gmodule import FiniteGroup, group_from_matrices
from .zlattice import (
    IntMatrix,
    as_int_matrix,
    determinant,
    identity,
    inverse_unimodular,
    rank,
    smith_normal_form,
    to_tuple,
)


class FanError(ValueError):
    pass


class NotFullDimensional(FanError):
    pass


class UnsupportedN(FanError):
    pass


class NotCompatible(FanError):
    pass


FACE_CHECK_LIMIT = 50


def _primitive(v: Sequence[int]) -> bool:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return g == 1


def _rational_inverse(rows: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    """Inverse of a square integer matrix over Q (Gauss-Jordan)."""
    n = len(rows)
    a = [[Fraction(int(x)) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(rows)]
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            raise ZeroDivisionError("singular matrix")
        a[c], a[p] = a[p], a[c]
        pv = a[c][c]
        a[c] = [x / pv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [row[n:] for row in a]


class Fan:
    """A simplicial fan given by primitive rays and maximal cones.

    Args:
        rank: dimension of the lattice ``N``.
        rays: primitive, pairwise distinct integer vectors.
        max_cones: ray-index sets; every cone must be simplicial.
        check_faces: verify that maximal cones meet along common faces
            (done only when there are at most ``FACE_CHECK_LIMIT`` cones).
    """

    def __init__(self, rank: int, rays: Sequence[Sequence[int]], max_cones: Iterable[Iterable[int]],
                 check_faces: bool = True):
        self.rank = int(rank)
        self.rays = tuple(tuple(int(x) for x in r) for r in rays)
        self.max_cones = tuple(tuple(sorted(int(i) for i in c)) for c in max_cones)
        for r in self.rays:
            if len(r) != self.rank:
                raise FanError(f"ray {r} does not have length {self.rank}")
            if not _primitive(r):
                raise FanError(f"ray {r} is not primitive")
        if len(set(self.rays)) != len(self.rays):
            raise FanError("rays are not distinct")
        if len(set(self.max_cones)) != len(self.max_cones):
            raise FanError("duplicate maximal cones")
        used = set()
        for c in self.max_cones:
            if len(set(c)) != len(c) or any(not 0 <= i < len(self.rays) for i in c):
                raise FanError(f"bad cone {c}")
            if c and rank_of([self.rays[i] for i in c]) != len(c):
                raise FanError(f"cone {c} is not simplicial")
            used.update(c)
        if used != set(range(len(self.rays))):
            raise FanError("some ray lies in no maximal cone")
        self.faces_validated = False
        if check_faces and len(self.max_cones) <= FACE_CHECK_LIMIT:
            self._check_face_intersections()
            self.faces_validated = True

    def __repr__(self):
        return f"Fan(rank={self.rank}, rays={len(self.rays)}, max_cones={len(self.max_cones)})"

    def __eq__(self, other):
        return (isinstance(other, Fan) and self.rank == other.rank and self.rays == other.rays
                and set(self.max_cones) == set(other.max_cones))

    def __hash__(self):
        return hash((self.rank, self.rays, frozenset(self.max_cones)))

    @property
    def n_rays(self) -> int:
        return len(self.rays)

    @cached_property
    def ray_matrix(self) -> IntMatrix:
        """Rays as rows, shape ``(n_rays, rank)``."""
        return as_int_matrix(self.rays, len(self.rays), self.rank)

    @cached_property
    def ray_index(self) -> dict[tuple[int, ...], int]:
        return {r: i for i, r in enumerate(self.rays)}

    @cached_property
    def max_cone_set(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset(c) for c in self.max_cones)

    @cached_property
    def cones(self) -> tuple[frozenset[int], ...]:
        """All cones as ray-index sets (faces of maximal cones), zero cone included."""
        out = set()
        for c in self.max_cones:
            for k in range(len(c) + 1):
                out.update(frozenset(s) for s in itertools.combinations(c, k))
        return tuple(sorted(out, key=lambda s: (len(s), sorted(s))))

    @cached_property
    def _cone_inverses(self) -> dict[tuple[int, ...], list[list[Fraction]]]:
        return {c: _rational_inverse([self.rays[i] for i in c])
                for c in self.max_cones if len(c) == self.rank}

    def cone_coordinates(self, cone: tuple[int, ...], v: Sequence[int]) -> list[Fraction]:
        """Coefficients of ``v`` in the ray basis of a full-dimensional max cone."""
        inv = self._cone_inverses[cone]
        # v = R^T lam with R the ray-row matrix, so lam = (R^{-1})^T v
        return [sum((inv[j][k] * int(v[j]) for j in range(self.rank)), Fraction(0))
                for k in range(self.rank)]

    def containing_max_cone(self, v: Sequence[int]) -> tuple[int, ...] | None:
        """Some full-dimensional max cone containing ``v``, or ``None``."""
        for c in self.max_cones:
            if len(c) != self.rank:
                continue
            if all(x >= 0 for x in self.cone_coordinates(c, v)):
                return c
        return None

    def _check_face_intersections(self) -> None:
        cones = [c for c in self.max_cones]
        for a, b in itertools.combinations(cones, 2):
            if not _meet_in_common_face(self, a, b):
                raise FanError(f"cones {a} and {b} do not meet in a common face")

    # -- serialization --------------------------------------------------
    def to_dict(self) -> dict:
        return {"rank": self.rank, "rays": [list(r) for r in self.rays],
                "max_cones": [list(c) for c in self.max_cones]}

    @classmethod
    def from_dict(cls, d: dict) -> "Fan":
        try:
            return cls(d["rank"], d["rays"], d["max_cones"])
        except (KeyError, TypeError) as exc:
            raise FanError(f"malformed fan document: {exc}") from exc

    def content_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def rank_of(vectors: Sequence[Sequence[int]]) -> int:
    if not vectors:
        return 0
    return rank(as_int_matrix(vectors))


def _meet_in_common_face(f: Fan, a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    """Exact separation test for two simplicial cones.

    They meet in the common face ``cone(a & b)`` iff some functional vanishes
    on the shared rays, is positive on the rest of ``a`` and negative on the
    rest of ``b``.  Such a functional is sought as a positive combination of
    the dual-basis functionals of ``a`` (for a full-dimensional ``a``).
    """
    common = set(a) & set(b)
    ra = [i for i in a if i not in common]
    rb = [i for i in b if i not in common]
    if not ra or not rb:
        return True
    if len(a) != f.rank:
        if len(b) == f.rank:
            return _meet_in_common_face(f, b, a)
        return True
    # coordinates of rays of b in the basis of a
    coords = {j: dict(zip(a, f.cone_coordinates(a, f.rays[j]))) for j in rb}
    # need c > 0 on ra with sum_i c_i * coord_j[i] < 0 for every j in rb
    return _positive_solution([[coords[j][i] for i in ra] for j in rb])


def _positive_solution(rows: list[list[Fraction]]) -> bool:
    """Is there ``c > 0`` with ``row . c < 0`` for every row?

    Exact Fourier-Motzkin on the strict system ``row . c < 0``, ``-c_i < 0``.
    Systems here have at most a handful of variables.
    """
    n = len(rows[0]) if rows else 0
    ineqs = [list(r) for r in rows]
    for i in range(n):
        e = [Fraction(0)] * n
        e[i] = Fraction(-1)
        ineqs.append(e)
    # homogeneous strict system: eliminate variables one at a time
    for k in range(n):
        pos = [r for r in ineqs if r[k] > 0]
        neg = [r for r in ineqs if r[k] < 0]
        zero = [r for r in ineqs if r[k] == 0]
        new = zero
        for p in pos:
            for q in neg:
                new.append([p[t] * (-q[k]) + q[t] * p[k] for t in range(n)])
        ineqs = [r for r in new]
        # a row that became identically zero reads 0 < 0: infeasible
        if any(all(x == 0 for x in r) for r in ineqs):
            return False
    return True


# -- constructions -------------------------------------------------------

def build_an_fan(n: int) -> Fan:
    """Fan of Weyl chambers of A_n in ``Z^{n+1}/Z(1,...,1)``.

    The quotient is realized in ``Z^n`` via the basis ``e_0..e_{n-1}`` (so
    ``e_n = -(e_0 + ... + e_{n-1})``).  Rays are the images of ``e_I`` for
    proper nonempty ``I``, listed by subset size then lexicographically;
    maximal cones are complete flags.
    """
    if n not in (1, 2, 3):
        raise UnsupportedN(f"A_n fans are supported for n in 1..3, got {n}")
    subsets = an_ray_subsets(n)
    rays = [an_ray(n, s) for s in subsets]
    pos = {s: i for i, s in enumerate(subsets)}
    cones = []
    for perm in itertools.permutations(range(n + 1)):
        cones.append(tuple(sorted(pos[frozenset(perm[:k])] for k in range(1, n + 1))))
    return Fan(n, rays, sorted(cones))


def an_ray_subsets(n: int) -> list[frozenset[int]]:
    idx = range(n + 1)
    return [frozenset(s) for k in range(1, n + 1) for s in itertools.combinations(idx, k)]


def an_ray(n: int, subset: Iterable[int]) -> tuple[int, ...]:
    v = [0] * n
    for i in subset:
        if i == n:
            v = [x - 1 for x in v]
        else:
            v[i] += 1
    return tuple(v)


def projective_line() -> Fan:
    return Fan(1, [(1,), (-1,)], [(0,), (1,)])


def product_fan(a: Fan, b: Fan) -> Fan:
    rays = [r + (0,) * b.rank for r in a.rays] + [(0,) * a.rank + r for r in b.rays]
    cones = [tuple(ca) + tuple(a.n_rays + j for j in cb) for ca in a.max_cones for cb in b.max_cones]
    return Fan(a.rank + b.rank, rays, cones)


def point_fan() -> Fan:
    return Fan(0, [], [()])


# -- basic predicates ----------------------------------------------------

def _require_full_dimensional(f: Fan) -> None:
    for c in f.max_cones:
        if len(c) != f.rank:
            raise NotFullDimensional(f"max cone {c} has {len(c)} rays in rank {f.rank}")


def is_smooth(f: Fan) -> bool:
    """Every maximal cone is generated by a lattice basis."""
    _require_full_dimensional(f)
    return all(abs(determinant([f.rays[i] for i in c])) == 1 for c in f.max_cones)


def facet_pairing(f: Fan) -> dict[frozenset[int], list[tuple[int, ...]]]:
    out: dict[frozenset[int], list[tuple[int, ...]]] = {}
    for c in f.max_cones:
        for facet in itertools.combinations(c, f.rank - 1):
            out.setdefault(frozenset(facet), []).append(c)
    return out


def is_complete(f: Fan) -> bool:
    """Every facet lies in exactly two max cones and the adjacency graph is connected."""
    _require_full_dimensional(f)
    if f.rank == 0:
        return len(f.max_cones) == 1
    pairing = facet_pairing(f)
    if any(len(v) != 2 for v in pairing.values()):
        return False
    adj: dict[tuple[int, ...], set] = {c: set() for c in f.max_cones}
    for a, b in pairing.values():
        adj[a].add(b)
        adj[b].add(a)
    seen = {f.max_cones[0]}
    stack = [f.max_cones[0]]
    while stack:
        c = stack.pop()
        for d in adj[c] - seen:
            seen.add(d)
            stack.append(d)
    return len(seen) == len(f.max_cones)


# -- automorphisms -------------------------------------------------------

@dataclass
class FanAut:
    """Automorphism group of a fan.

    ``matrices[k]`` acts on column vectors of ``N``; ``ray_permutations[k][i]``
    is the index of the image of ray ``i``.  Element 0 is the identity, the
    rest are sorted lexicographically by row-major matrix entries.
    """

    fan: Fan
    matrices: list
    ray_permutations: list
    group: FiniteGroup

    def __len__(self):
        return len(self.matrices)

    def index_of(self, m) -> int:
        key = to_tuple(m)
        for k, a in enumerate(self.matrices):
            if to_tuple(a) == key:
                return k
        raise KeyError("matrix is not a fan automorphism")


def ray_permutation(f: Fan, m) -> tuple[int, ...] | None:
    """Permutation of rays induced by ``m``, if ``m`` maps rays to rays and cones to cones."""
    m = as_int_matrix(m, f.rank, f.rank)
    images = f.ray_matrix.dot(m.T) if f.n_rays else np.zeros((0, f.rank), dtype=object)
    perm = []
    for row in images:
        j = f.ray_index.get(tuple(int(x) for x in row))
        if j is None:
            return None
        perm.append(j)
    if len(set(perm)) != len(perm):
        return None
    cones = f.max_cone_set
    for c in f.max_cones:
        if frozenset(perm[i] for i in c) not in cones:
            return None
    return tuple(perm)


_AUT_CACHE: dict = {}


def fan_aut(f: Fan) -> FanAut:
    """All lattice automorphisms preserving the fan.

    Fix one full-dimensional max cone; every automorphism sends it to some
    max cone with some ordering of rays, which pins down the matrix.
    """
    if f not in _AUT_CACHE:
        _AUT_CACHE[f] = _fan_aut(f)
    return _AUT_CACHE[f]


def _fan_aut(f: Fan) -> FanAut:
    _require_full_dimensional(f)
    if f.rank == 0:
        m = np.zeros((0, 0), dtype=object)
        return FanAut(f, [m], [()], group_from_matrices([m]))
    base = f.max_cones[0]
    src = as_int_matrix([f.rays[i] for i in base]).T  # columns = base rays
    src_inv = _rational_inverse([list(row) for row in src])
    found = {}
    for c in f.max_cones:
        for order in itertools.permutations(c):
            tgt = [[Fraction(x) for x in f.rays[i]] for i in order]
            # m * src = tgt (as columns)  =>  m = tgt_cols * src^{-1}
            m_rows = []
            ok = True
            for r in range(f.rank):
                row = []
                for col in range(f.rank):
                    val = sum((tgt[k][r] * src_inv[k][col] for k in range(f.rank)), Fraction(0))
                    if val.denominator != 1:
                        ok = False
                        break
                    row.append(int(val))
                if not ok:
                    break
                m_rows.append(row)
            if not ok:
                continue
            m = as_int_matrix(m_rows)
            if abs(determinant(m)) != 1:
                continue
            perm = ray_permutation(f, m)
            if perm is not None:
                found[to_tuple(m)] = perm
    ident = to_tuple(identity(f.rank))
    keys = [ident] + sorted(k for k in found if k != ident)
    mats = [as_int_matrix(k) for k in keys]
    perms = [found[k] for k in keys]
    return FanAut(f, mats, perms, group_from_matrices(mats))


# -- morphisms and divisors ----------------------------------------------

@dataclass
class FanMorphism:
    matrix: IntMatrix
    source: Fan
    target: Fan
    cone_images: dict  # source max cone -> target max cone containing its image


def check_morphism(m, source: Fan, target: Fan) -> FanMorphism:
    """Verify that ``m : N -> N'`` maps every source cone into a target cone."""
    m = as_int_matrix(m, target.rank, source.rank)
    if m.shape != (target.rank, source.rank):
        raise NotCompatible(f"matrix has shape {m.shape}, expected {(target.rank, source.rank)}")
    images = {}
    for c in source.max_cones:
        ims = [tuple(int(x) for x in m.dot(np.array(source.rays[i], dtype=object))) for i in c]
        hit = None
        for t in target.max_cones:
            if target.rank == 0 or all(
                    all(x >= 0 for x in target.cone_coordinates(t, v)) for v in ims):
                hit = t
                break
        if hit is None:
            raise NotCompatible(f"image of source cone {c} lies in no target cone")
        images[c] = hit
    return FanMorphism(m, source, target, images)


def support_function_data(f: Fan, cone: tuple[int, ...], coeffs: Sequence[int]) -> list[Fraction]:
    """``m`` with ``<m, v_rho> = -a_rho`` for the rays of a full-dimensional cone."""
    inv = _rational_inverse([f.rays[i] for i in cone])
    rhs = [-int(coeffs[i]) for i in cone]
    # rows of ray matrix R, want R m = rhs  =>  m = R^{-1} rhs
    return [sum((inv[r][k] * rhs[k] for k in range(len(cone))), Fraction(0)) for r in range(f.rank)]


def pullback_divisor(morph: FanMorphism, coeffs: Sequence[int]) -> tuple[int, ...]:
    """Pull back a Cartier torus-invariant divisor along a fan morphism."""
    src, tgt, m = morph.source, morph.target, morph.matrix
    if len(coeffs) != tgt.n_rays:
        raise ValueError("divisor does not match the target fan")
    out = []
    for v in src.rays:
        w = [int(x) for x in m.dot(np.array(v, dtype=object))] if tgt.rank else []
        if not any(w):
            out.append(0)
            continue
        cone = tgt.containing_max_cone(w)
        if cone is None:  # pragma: no cover - excluded by check_morphism
            raise NotCompatible(f"image {w} of ray {v} lies in no cone")
        mm = support_function_data(tgt, cone, coeffs)
        val = -sum((mm[k] * w[k] for k in range(tgt.rank)), Fraction(0))
        if val.denominator != 1:
            raise ValueError("divisor is not Cartier on the target")
        out.append(int(val))
    return tuple(out)


@dataclass
class StarFan:
    """Fan of the orbit closure ``V(tau)`` with its bookkeeping.

    ``quotient`` maps ``N`` onto ``N / span(tau)`` (rows), ``ray_map`` sends a
    star ray index to the ray index of the ambient fan it comes from.
    """

    fan: Fan
    cone: tuple[int, ...]
    quotient: IntMatrix
    lift: IntMatrix  # rows: functionals m_k with <m_k, v_i> = delta for rays of tau
    ray_map: tuple[int, ...]


def cone_star_fan(f: Fan, cone: Iterable[int]) -> StarFan:
    """Star of a cone in the quotient lattice ``N / span(cone)``."""
    tau = tuple(sorted(set(int(i) for i in cone)))
    if not any(set(tau) <= set(c) for c in f.max_cones):
        raise FanError(f"{tau} is not a cone of the fan")
    k = len(tau)
    if k == 0:
        return StarFan(f, (), identity(f.rank), np.zeros((0, f.rank), dtype=object),
                       tuple(range(f.n_rays)))
    span = as_int_matrix([f.rays[i] for i in tau]).T  # rank x k
    u, d, v = smith_normal_form(span)
    if any(d[i, i] != 1 for i in range(k)):
        raise FanError(f"cone {tau} is not part of a lattice basis")
    # u span v = [I;0]  =>  last rows of u kill span(tau); first k rows, times v^{-1}...
    quotient = u[k:, :]
    # functionals dual to the rays of tau: (v u)[:k] satisfies (v u span)[:k] = I
    lift = v.dot(u[:k, :]) if k else np.zeros((0, f.rank), dtype=object)
    star_cones = [c for c in f.max_cones if set(tau) <= set(c)]
    rays: list[tuple[int, ...]] = []
    ray_map: list[int] = []
    pos: dict[tuple[int, ...], int] = {}
    cones = []
    for c in star_cones:
        idx = []
        for i in c:
            if i in tau:
                continue
            w = tuple(int(x) for x in quotient.dot(np.array(f.rays[i], dtype=object)))
            if w not in pos:
                pos[w] = len(rays)
                rays.append(w)
                ray_map.append(i)
            elif ray_map[pos[w]] != i:
                raise FanError("two rays collapse onto one star ray")
            idx.append(pos[w])
        cones.append(tuple(idx))
    return StarFan(Fan(f.rank - k, rays, cones), tau, quotient, lift, tuple(ray_map))


def divisor_star_fan(f: Fan, ray_index: int) -> Fan:
    """Fan of the toric divisor ``D_rho`` (star of the ray in ``N / Z v_rho``)."""
    if not 0 <= ray_index < f.n_rays:
        raise FanError(f"no ray with index {ray_index}")
    return cone_star_fan(f, [ray_index]).fan


def fans_isomorphic(a: Fan, b: Fan) -> IntMatrix | None:
    """A lattice isomorphism carrying the fan ``a`` onto ``b``, if one exists."""
    if a.rank != b.rank or a.n_rays != b.n_rays or len(a.max_cones) != len(b.max_cones):
        return None
    if a.rank == 0:
        return identity(0)
    base = a.max_cones[0]
    src_inv = _rational_inverse([list(r) for r in zip(*[a.rays[i] for i in base])])
    for c in b.max_cones:
        for order in itertools.permutations(c):
            rows = []
            ok = True
            for r in range(a.rank):
                row = []
                for col in range(a.rank):
                    val = sum((Fraction(b.rays[order[k]][r]) * src_inv[k][col] for k in range(a.rank)),
                              Fraction(0))
                    if val.denominator != 1:
                        ok = False
                        break
                    row.append(int(val))
                if not ok:
                    break
                rows.append(row)
            if not ok:
                continue
            m = as_int_matrix(rows)
            if abs(determinant(m)) != 1:
                continue
            imgs = [tuple(int(x) for x in m.dot(np.array(v, dtype=object))) for v in a.rays]
            if any(w not in b.ray_index for w in imgs):
                continue
            perm = [b.ray_index[w] for w in imgs]
            if {frozenset(perm[i] for i in cone) for cone in a.max_cones} == b.max_cone_set:
                return m
    return None
