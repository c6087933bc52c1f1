"""TCI-type objects, Koszul resolutions, Ext dimensions and exceptional collections.

An object ``R(chi)/(x_l : l in I)`` is resolved by its Koszul complex of line
bundles, so ``RHom(E, F)`` is the total complex of line-bundle strands
``O(psi - chi + D_S - D_T)``.  Each strand is made explicit per character
``m``:

* ``engine="cone"`` uses the complex of cones whose rays all satisfy
  ``<m, v_rho> >= -a_rho``, graded by codimension (the cellular complex of a
  complete fan).  Monomial maps are inclusions of subcomplexes.
* ``engine="cech"`` uses the Cech complex of the maximal-cone cover, truncated
  at the level needed for degrees ``0..rank``.  It is only practical for fans
  with few maximal cones and serves as a cross-check.
"""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .divclass import (
    CohomologyDims,
    ShellNotVanishing,
    box_points,
    character_box,
    fan_complex,
    sign_masks,
)
from .fan import Fan, FanError, UnsupportedN, is_complete, is_smooth
from .zlattice import determinant, sparse_rank


class NotTCI(ValueError):
    """Vanishing rays do not span a cone of the fan."""


class CollectionError(ValueError):
    """Malformed collection data."""


# -- objects -------------------------------------------------------------

@dataclass(frozen=True)
class TCIObject:
    """The Cox-module datum ``R(chi)/(x_l : l in vanishing)``.

    Args:
        fan: ambient fan.
        chi: divisor coefficients representing the twist.
        vanishing: ray indices; they must span a cone of ``fan``.
    """

    fan: Fan = field(repr=False, compare=False, hash=False)
    chi: tuple[int, ...]
    vanishing: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "chi", tuple(int(a) for a in self.chi))
        object.__setattr__(self, "vanishing", tuple(sorted(set(int(i) for i in self.vanishing))))
        if len(self.chi) != self.fan.n_rays:
            raise CollectionError(f"chi has {len(self.chi)} entries, fan has {self.fan.n_rays} rays")
        if any(not 0 <= i < self.fan.n_rays for i in self.vanishing):
            raise NotTCI(f"vanishing set {self.vanishing} has an invalid ray index")
        if frozenset(self.vanishing) not in set(self.fan.cones):
            raise NotTCI(f"rays {self.vanishing} do not span a cone")

    @property
    def is_line_bundle(self) -> bool:
        return not self.vanishing

    def to_dict(self, label: str) -> dict:
        return {"label": label, "chi": list(self.chi), "vanishing": list(self.vanishing)}


def line_bundle(f: Fan, coeffs: Sequence[int]) -> TCIObject:
    return TCIObject(f, tuple(coeffs), ())


def structure_sheaf(f: Fan) -> TCIObject:
    return TCIObject(f, (0,) * f.n_rays, ())


def _koszul_sign(l: int, s: Iterable[int]) -> int:
    return -1 if sum(1 for x in s if x < l) % 2 else 1


@dataclass
class KoszulComplex:
    """Koszul resolution; ``terms[t]`` lists ``(S, twist)`` with ``|S| = t``.

    ``differentials[t]`` maps term ``t`` to term ``t-1`` as a dict
    ``(S, S - {l}) -> (sign, l)``: multiplication by ``x_l`` with sign.
    """

    obj: TCIObject
    terms: list[list[tuple[tuple[int, ...], tuple[int, ...]]]]
    differentials: list[dict]

    def check_d_squared(self) -> bool:
        """``d∘d = 0`` as signed monomial composition."""
        for t in range(2, len(self.terms)):
            acc: dict = {}
            for (s, s1), (e1, l1) in self.differentials[t].items():
                for (u, u1), (e2, l2) in self.differentials[t - 1].items():
                    if u != s1:
                        continue
                    key = (s, u1)
                    acc[key] = acc.get(key, 0) + e1 * e2
            if any(acc.values()):
                return False
        return True

    def ranks(self) -> list[int]:
        return [len(t) for t in self.terms]


def koszul(t: TCIObject) -> KoszulComplex:
    """Koszul resolution of ``R(chi)/(x_l : l in I)`` by line bundles."""
    I = t.vanishing
    terms = []
    for k in range(len(I) + 1):
        row = []
        for s in itertools.combinations(I, k):
            twist = list(t.chi)
            for l in s:
                twist[l] -= 1
            row.append((s, tuple(twist)))
        terms.append(row)
    diffs: list[dict] = [{}]
    for k in range(1, len(I) + 1):
        d = {}
        for s, _ in terms[k]:
            for l in s:
                rest = tuple(x for x in s if x != l)
                d[(s, rest)] = (_koszul_sign(l, s), l)
        diffs.append(d)
    return KoszulComplex(t, terms, diffs)


# -- Hom total complex ---------------------------------------------------

@dataclass(frozen=True)
class HomTerm:
    s: tuple[int, ...]  # positions in the vanishing set of the source
    t: tuple[int, ...]  # positions in the vanishing set of the target
    divisor: tuple[int, ...]

    @property
    def hom_degree(self) -> int:
        return len(self.s) - len(self.t)


def hom_terms(e: TCIObject, f: TCIObject) -> list[HomTerm]:
    """Strands of ``Hom(K_E, K_F)``: divisors ``psi - chi + D_S - D_T``."""
    base = [b - a for a, b in zip(e.chi, f.chi)]
    out = []
    for ks in range(len(e.vanishing) + 1):
        for s in itertools.combinations(range(len(e.vanishing)), ks):
            for kt in range(len(f.vanishing) + 1):
                for t in itertools.combinations(range(len(f.vanishing)), kt):
                    d = list(base)
                    for i in s:
                        d[e.vanishing[i]] += 1
                    for j in t:
                        d[f.vanishing[j]] -= 1
                    out.append(HomTerm(s, t, tuple(d)))
    return out


def _hom_structure(ni: int, nj: int) -> tuple[list, list]:
    """Positions and the signed monomial maps between Hom strands.

    Returns ``(keys, maps)`` where ``keys[k] = (S, T)`` in the order of
    :func:`hom_terms` and ``maps`` lists ``(src, dst, sign)``.
    """
    keys = [(s, t)
            for ks in range(ni + 1) for s in itertools.combinations(range(ni), ks)
            for kt in range(nj + 1) for t in itertools.combinations(range(nj), kt)]
    pos = {k: i for i, k in enumerate(keys)}
    maps = []
    for (s, t), src in pos.items():
        n = len(s) - len(t)
        for l in t:  # d_F after f
            maps.append((src, pos[(s, tuple(x for x in t if x != l))], _koszul_sign(l, t)))
        for l in range(ni):  # f after d_E
            if l in s:
                continue
            s2 = tuple(sorted(s + (l,)))
            maps.append((src, pos[(s2, t)], (1 if n % 2 else -1) * _koszul_sign(l, s2)))
    return keys, maps


# -- per-character strand complexes --------------------------------------

class _ConeModel:
    """Cone complex of the rays with ``<m, v> + a >= 0``, graded by codimension."""

    name = "cone"

    def __init__(self, f: Fan):
        self.fan = f
        self.fc = fan_complex(f)
        self.rank = f.rank

    def cells(self, mask: int) -> list[int]:
        fc = self.fc
        return [i for i, mk in enumerate(fc.masks) if mk & ~mask == 0]

    def degree(self, cell: int) -> int:
        return self.rank - len(self.fc.simplices[cell])

    def coboundary(self, cell: int) -> list[tuple[int, int]]:
        return self.fc.boundary[cell]

    def max_level(self, ni: int, nj: int) -> int:
        return self.rank


class _CechModel:
    """Cech complex of the maximal-cone cover, truncated at a fixed level."""

    name = "cech"

    def __init__(self, f: Fan, level: int):
        self.fan = f
        self.rank = f.rank
        self.level = level
        cones = [sum(1 << r for r in c) for c in f.max_cones]
        self.sets = []
        self.inter = []
        for k in range(1, min(len(cones), level + 1) + 1):
            for u in itertools.combinations(range(len(cones)), k):
                m = ~0
                for i in u:
                    m &= cones[i]
                self.sets.append(u)
                self.inter.append(m)
        self.index = {u: i for i, u in enumerate(self.sets)}
        self.cob = []
        n = len(cones)
        for u in self.sets:
            out = []
            if len(u) <= level:
                for j in range(n):
                    if j in u:
                        continue
                    w = tuple(sorted(u + (j,)))
                    out.append((self.index[w], (-1) ** sum(1 for x in u if x < j)))
            self.cob.append(out)
        self._inter_arr = np.array(self.inter, dtype=object)

    def cells(self, mask: int) -> list[int]:
        return [i for i, m in enumerate(self.inter) if m & ~mask == 0]

    def degree(self, cell: int) -> int:
        return len(self.sets[cell]) - 1

    def coboundary(self, cell: int) -> list[tuple[int, int]]:
        return self.cob[cell]


def _total_cohomology(model, ni: int, nj: int, patterns: tuple[int, ...]) -> dict[int, int]:
    """Nonzero cohomology dims, by total degree, of the per-character total complex."""
    keys, maps = _hom_structure(ni, nj)
    cells = [model.cells(p) for p in patterns]
    cell_sets = [set(c) for c in cells]
    # basis elements per total degree
    basis: dict[int, dict[tuple[int, int], int]] = {}
    for k, (s, t) in enumerate(keys):
        h = len(s) - len(t)
        for c in cells[k]:
            deg = model.degree(c) + h
            b = basis.setdefault(deg, {})
            b[(k, c)] = len(b)
    out_maps: dict[int, list] = {}
    for src, dst, sign in maps:
        out_maps.setdefault(src, []).append((dst, sign))

    def rank_from(deg: int) -> int:
        src = basis.get(deg)
        tgt = basis.get(deg + 1)
        if not src or not tgt:
            return 0
        rows = []
        for (k, c), _ in src.items():
            row: dict[int, int] = {}
            p = model.degree(c)
            for c2, sg in model.coboundary(c):
                if c2 in cell_sets[k]:
                    j = tgt[(k, c2)]
                    row[j] = row.get(j, 0) + sg
            eps = -1 if p % 2 else 1
            for dst, sg in out_maps.get(k, ()):
                # monomial maps are inclusions of cell complexes
                j = tgt[(dst, c)]
                row[j] = row.get(j, 0) + eps * sg
            rows.append({a: b for a, b in row.items() if b})
        return sparse_rank(rows)

    degrees = sorted(basis)
    ranks = {d: rank_from(d) for d in degrees}
    dims = {}
    for d in degrees:
        v = len(basis[d]) - ranks.get(d, 0) - ranks.get(d - 1, 0)
        if v:
            dims[d] = v
    return dims


class ExtEngine:
    """Computes ``Ext^*(E, F)`` for TCI objects on one smooth complete fan.

    Args:
        fan: the ambient fan.
        engine: ``"cone"`` (default) or ``"cech"``.
    """

    def __init__(self, fan: Fan, engine: str = "cone"):
        if not is_smooth(fan) or not is_complete(fan):
            raise FanError("Ext computation requires a smooth complete fan")
        if engine not in ("cone", "cech"):
            raise ValueError(f"unknown engine {engine!r}")
        self.fan = fan
        self.engine = engine
        self._models: dict = {}
        self._cache: dict = {}

    def _model(self, ni: int, nj: int):
        if self.engine == "cone":
            key = 0
            if key not in self._models:
                self._models[key] = _ConeModel(self.fan)
        else:
            key = self.fan.rank + 1 + nj
            if key not in self._models:
                self._models[key] = _CechModel(self.fan, key)
        return self._models[key]

    def _strand_vanishes(self, model, pattern: int) -> bool:
        return not any(self._complex(model, 0, 0, (pattern,)))

    def _complex(self, model, ni: int, nj: int, patterns: tuple[int, ...]) -> tuple[int, ...]:
        key = (model.name, getattr(model, "level", 0), ni, nj, patterns)
        hit = self._cache.get(key)
        if hit is None:
            dims = _total_cohomology(model, ni, nj, patterns)
            n = model.rank
            # the truncated Cech model carries artifacts above degree rank
            bad = {d: v for d, v in dims.items() if d < 0 or (d > n and model.name == "cone")}
            if bad:
                raise ArithmeticError(f"Ext outside degrees 0..{n}: {bad}")
            hit = tuple(dims.get(d, 0) for d in range(n + 1))
            self._cache[key] = hit
        return hit

    def ext_dims(self, e: TCIObject, f: TCIObject) -> CohomologyDims:
        if e.fan != self.fan or f.fan != self.fan:
            raise ValueError("objects live on a different fan")
        n = self.fan.rank
        if n == 0:
            return CohomologyDims((1,))
        ni, nj = len(e.vanishing), len(f.vanishing)
        model = self._model(ni, nj)
        terms = hom_terms(e, f)
        lo, hi = character_box(self.fan, [t.divisor for t in terms])
        pts, shell = box_points(lo, hi)
        fc = fan_complex(self.fan)
        masks = np.stack([sign_masks(fc, pts, t.divisor, strict_negative=False) for t in terms], axis=1)
        uniq, inverse, counts = np.unique(masks, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.reshape(-1)
        on_shell = np.zeros(len(uniq), bool)
        np.logical_or.at(on_shell, inverse, shell)
        dims = [0] * (n + 1)
        for row, cnt, sh in zip(uniq.tolist(), counts.tolist(), on_shell.tolist()):
            pats = tuple(int(x) for x in row)
            if sh and not all(self._strand_vanishes(model, p) for p in pats):
                raise ShellNotVanishing("character box too small for Ext computation")
            res = self._complex(model, ni, nj, pats)
            for i in range(n + 1):
                dims[i] += cnt * res[i]
        return CohomologyDims(tuple(dims))


_ENGINES: dict = {}


def _engine(f: Fan, engine: str) -> ExtEngine:
    key = (f, engine)
    if key not in _ENGINES:
        _ENGINES[key] = ExtEngine(f, engine)
    return _ENGINES[key]


def ext_dims(e: TCIObject, f: TCIObject, engine: str = "cone") -> CohomologyDims:
    """Dimensions of ``Ext^0..Ext^rank(E, F)``."""
    if e.fan != f.fan:
        raise ValueError("objects live on different fans")
    return _engine(e.fan, engine).ext_dims(e, f)


def euler_pairing(e: TCIObject, f: TCIObject) -> int:
    return ext_dims(e, f).euler


# -- collections ---------------------------------------------------------

@dataclass
class Collection:
    objects: list[TCIObject]
    labels: list[str]

    def __post_init__(self):
        if not self.objects:
            raise CollectionError("collection is empty")
        if len(self.labels) != len(self.objects):
            raise CollectionError("labels and objects differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise CollectionError("labels are not unique")
        fans = {id(o.fan) for o in self.objects}
        if len(fans) > 1 and any(o.fan != self.objects[0].fan for o in self.objects):
            raise CollectionError("objects live on different fans")

    @property
    def fan(self) -> Fan:
        return self.objects[0].fan

    def __len__(self):
        return len(self.objects)

    def reordered(self, order: Sequence[int]) -> "Collection":
        return Collection([self.objects[i] for i in order], [self.labels[i] for i in order])

    def to_dict(self) -> dict:
        return {"fan_hash": self.fan.content_hash(),
                "objects": [o.to_dict(l) for o, l in zip(self.objects, self.labels)]}

    @classmethod
    def from_dict(cls, d: dict, fan: Fan) -> "Collection":
        try:
            if d["fan_hash"] != fan.content_hash():
                raise CollectionError("collection was written for a different fan (hash mismatch)")
            objs = [TCIObject(fan, o["chi"], o.get("vanishing", [])) for o in d["objects"]]
            labels = [str(o["label"]) for o in d["objects"]]
        except (KeyError, TypeError) as exc:
            raise CollectionError(f"malformed collection document: {exc}") from exc
        return cls(objs, labels)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)


def build_ct_collection(n: int) -> Collection:
    """The pinned symmetric collection on ``X(A_n)``, read from the bundled data."""
    if n not in (1, 2, 3):
        raise UnsupportedN(f"collections are bundled for n = 1, 2, 3, not {n}")
    from .bundle import load_collection, load_fan
    return load_collection(f"bundled:ct_a{n}", load_fan(f"bundled:fan_a{n}"))


@dataclass
class ExtTable:
    labels: list[str]
    dims: dict[tuple[int, int], CohomologyDims]

    def __getitem__(self, key: tuple[int, int]) -> CohomologyDims:
        return self.dims[key]

    def gram(self) -> list[list[int]]:
        n = len(self.labels)
        return [[self.dims[(i, j)].euler for j in range(n)] for i in range(n)]

    def permuted(self, order: Sequence[int]) -> "ExtTable":
        return ExtTable([self.labels[i] for i in order],
                        {(a, b): self.dims[(i, j)] for a, i in enumerate(order) for b, j in enumerate(order)})


def _pair_worker(args):
    fan, engine, pairs, objs = args
    eng = ExtEngine(fan, engine)
    return [(i, j, eng.ext_dims(objs[i], objs[j]).dims) for i, j in pairs]


def ext_table(c: Collection, jobs: int = 1, engine: str = "cone") -> ExtTable:
    """All pairwise Ext dimensions; parallel over pairs when ``jobs > 1``."""
    n = len(c)
    pairs = [(i, j) for i in range(n) for j in range(n)]
    out: dict[tuple[int, int], CohomologyDims] = {}
    if jobs <= 1:
        for i, j in pairs:
            out[(i, j)] = ext_dims(c.objects[i], c.objects[j], engine)
    else:
        chunks = [pairs[k::jobs] for k in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            for res in ex.map(_pair_worker, [(c.fan, engine, ch, c.objects) for ch in chunks]):
                for i, j, d in res:
                    out[(i, j)] = CohomologyDims(d)
    return ExtTable(list(c.labels), {k: out[k] for k in sorted(out)})


@dataclass
class ExceptionalReport:
    table: ExtTable
    exceptional_objects: list[bool]
    violations: list[tuple[int, int, tuple[int, ...]]]
    blocks: list[list[int]]
    strong: bool

    @property
    def passed(self) -> bool:
        return all(self.exceptional_objects) and not self.violations

    def to_dict(self) -> dict:
        lab = self.table.labels
        return {
            "passed": self.passed,
            "strong": self.strong,
            "non_exceptional": [lab[i] for i, ok in enumerate(self.exceptional_objects) if not ok],
            "violations": [{"from": lab[i], "to": lab[j], "position": [i, j], "ext": list(d)}
                           for i, j, d in self.violations],
            "blocks": [[lab[i] for i in b] for b in self.blocks],
        }


def _orthogonal(t: ExtTable, i: int, j: int) -> bool:
    return t[(i, j)].is_zero and t[(j, i)].is_zero


def detect_blocks(t: ExtTable) -> list[list[int]]:
    """Greedy maximal contiguous segments of mutually orthogonal objects."""
    n = len(t.labels)
    blocks: list[list[int]] = []
    cur: list[int] = []
    for i in range(n):
        if all(_orthogonal(t, i, j) for j in cur):
            cur.append(i)
        else:
            blocks.append(cur)
            cur = [i]
    if cur:
        blocks.append(cur)
    return blocks


def report_from_table(t: ExtTable) -> ExceptionalReport:
    n = len(t.labels)
    exc = []
    for i in range(n):
        d = t[(i, i)].dims
        exc.append(d[0] == 1 and not any(d[1:]))
    viol = [(i, j, t[(i, j)].dims) for i in range(n) for j in range(i) if not t[(i, j)].is_zero]
    strong = all(not any(t[(i, j)].dims[1:]) for i in range(n) for j in range(n))
    return ExceptionalReport(t, exc, viol, detect_blocks(t), strong)


def verify_exceptional_collection(c: Collection, jobs: int = 1, engine: str = "cone") -> ExceptionalReport:
    """Full Ext table plus exceptionality, orthogonality, blocks and strongness."""
    return report_from_table(ext_table(c, jobs=jobs, engine=engine))


def find_valid_order(t: ExtTable) -> list[int] | None:
    """An order with no backward Ext, by topological sort; ``None`` if cyclic."""
    n = len(t.labels)
    succ = {i: [j for j in range(n) if j != i and not t[(i, j)].is_zero] for i in range(n)}
    indeg = {i: 0 for i in range(n)}
    for i in range(n):
        for j in succ[i]:
            indeg[j] += 1
    ready = sorted(i for i in range(n) if indeg[i] == 0)
    order = []
    while ready:
        i = ready.pop(0)
        order.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
                ready.sort()
    return order if len(order) == n else None


@dataclass
class FullnessReport:
    size: int
    max_cones: int
    gram: list[list[int]]
    upper_triangular: bool
    unit_diagonal: bool
    determinant: int

    @property
    def passed(self) -> bool:
        return self.size == self.max_cones and self.upper_triangular and self.unit_diagonal

    def to_dict(self) -> dict:
        return {"passed": self.passed, "size": self.size, "max_cones": self.max_cones,
                "upper_triangular": self.upper_triangular, "unit_diagonal": self.unit_diagonal,
                "determinant": self.determinant}


def numerical_fullness(c: Collection, table: ExtTable | None = None, jobs: int = 1) -> FullnessReport:
    """Size against the number of maximal cones and the Euler-pairing Gram matrix."""
    t = table if table is not None else ext_table(c, jobs=jobs)
    g = t.gram()
    n = len(g)
    upper = all(g[i][j] == 0 for i in range(n) for j in range(i))
    unit = all(g[i][i] in (1, -1) for i in range(n))
    det = int(determinant(g))
    return FullnessReport(n, len(c.fan.max_cones), g, upper, unit, det)
