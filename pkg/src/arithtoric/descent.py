"""Galois actions on fans and descent of TCI-type collections.

A finite group ``G`` acts on the fan through ``phi : G -> Aut(fan)``.  Objects
``R(chi)/(x_l : l in I)`` are moved by ``g . (chi, I) = (g chi, g I)``.  Two
objects define the same sheaf when ``I`` agrees and ``chi`` has the same
class on the stratum ``V(I)``; orbits and stabilizers are taken for that
relation.  A stabilizer element ``h`` may still move ``chi`` by a class in
``Ker(Pic X -> Pic V(I))``, and the object descends with its stabilizer exactly
when this cocycle is a coboundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .divclass import act_on_divisor, class_group, pic_action, restriction
from .excol import Collection, TCIObject
from .fan import Fan, FanAut, fan_aut
from .gmodule import FiniteGroup, GLattice, cyclic_group, h1, klein_four
from .zlattice import AbelianGroupInvariants, as_int_matrix, equal, identity, kernel_basis, solve_integer


class NotHomomorphism(ValueError):
    """Generator images do not extend to a group homomorphism."""


class NotStable(ValueError):
    """The collection is not stable under the group action."""

    def __init__(self, label: str, element: int):
        super().__init__(f"object {label!r} is moved out of the collection by element {element}")
        self.label = label
        self.element = element


class ActionFileError(ValueError):
    """Malformed Galois action document."""


# -- actions -------------------------------------------------------------

@dataclass
class GaloisAction:
    """``phi : G -> Aut(fan)`` given by fan-aut indices for every element."""

    fan: Fan
    group: FiniteGroup
    images: list[int]
    field_label: Optional[dict] = None
    generator_names: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        aut = self.aut
        if len(self.images) != self.group.order:
            raise NotHomomorphism("need one image per group element")
        if any(not 0 <= x < len(aut) for x in self.images):
            raise NotHomomorphism("image index outside the fan automorphism group")
        mul, amul = self.group.mul, aut.group.mul
        for g in range(self.group.order):
            for h in range(self.group.order):
                if self.images[mul[g][h]] != amul[self.images[g]][self.images[h]]:
                    raise NotHomomorphism(f"relation fails at ({g}, {h})")

    @property
    def aut(self) -> FanAut:
        return fan_aut(self.fan)

    @classmethod
    def from_generators(cls, fan: Fan, group: FiniteGroup, gen_images: dict[int, int],
                        field_label: Optional[dict] = None, names: Optional[dict[str, int]] = None) -> "GaloisAction":
        aut = fan_aut(fan)
        if set(gen_images) != set(group.generators):
            raise NotHomomorphism("images must be given for exactly the generators")
        images = []
        for a, word in sorted(group.word_map().items()):
            x = 0
            for g in word:
                x = aut.group.mul[x][gen_images[g]]
            images.append(x)
        return cls(fan, group, images, field_label, dict(names or {}))

    def matrix(self, g: int):
        return self.aut.matrices[self.images[g]]

    def ray_permutation(self, g: int) -> tuple[int, ...]:
        return self.aut.ray_permutations[self.images[g]]

    def pic_matrix(self, g: int):
        return pic_action(self.fan, self.aut, self.images[g])

    def n_lattice(self) -> GLattice:
        """``N`` as a ``G``-lattice."""
        return GLattice(self.group, self.fan.rank, [self.matrix(g) for g in range(self.group.order)])

    def pic_lattice(self) -> GLattice:
        r = class_group(self.fan).free_rank
        return GLattice(self.group, r, [self.pic_matrix(g) for g in range(self.group.order)])

    def is_trivial(self) -> bool:
        return all(x == 0 for x in self.images)


def trivial_action(fan: Fan) -> GaloisAction:
    return GaloisAction(fan, cyclic_group(1), [0], None, {})


def full_aut_action(fan: Fan) -> GaloisAction:
    aut = fan_aut(fan)
    return GaloisAction(fan, aut.group, list(range(len(aut))), None,
                        {f"g{g}": g for g in aut.group.generators})


# -- action files ----------------------------------------------------------

def _named_group(spec) -> tuple[FiniteGroup, dict[str, int]]:
    if spec == "C2xC2":
        g = klein_four()
        return g, {"s": 1, "t": 2}
    if spec == "C2":
        return cyclic_group(2), {"s": 1}
    if spec == "trivial":
        return cyclic_group(1), {}
    if isinstance(spec, dict) and "table" in spec:
        try:
            g = FiniteGroup(spec["table"], spec.get("generators"))
        except (ValueError, TypeError) as exc:
            raise ActionFileError(f"bad multiplication table: {exc}") from exc
        return g, {f"g{x}": x for x in g.generators}
    raise ActionFileError(f"unknown group {spec!r}")


def action_from_dict(d: dict, fan: Fan) -> GaloisAction:
    """Parse an action document against a fan (aut indices use :func:`fan_aut` order)."""
    try:
        if "fan_hash" in d and d["fan_hash"] != fan.content_hash():
            raise ActionFileError("action was written for a different fan (hash mismatch)")
        group, names = _named_group(d["group"])
        phi = d.get("phi", {})
        aut = fan_aut(fan)
        gen_images = {}
        for name, idx in names.items():
            if name not in phi:
                raise ActionFileError(f"no image for generator {name!r}")
            v = phi[name]
            if isinstance(v, int):
                gen_images[idx] = v
            else:
                try:
                    gen_images[idx] = aut.index_of(as_int_matrix(v, fan.rank, fan.rank))
                except KeyError as exc:
                    raise ActionFileError(f"matrix for {name!r} is not a fan automorphism") from exc
        extra = set(phi) - set(names)
        if extra:
            raise ActionFileError(f"unknown generators {sorted(extra)}")
        label = d.get("field_label")
        return GaloisAction.from_generators(fan, group, gen_images, label, names)
    except (KeyError, TypeError) as exc:
        raise ActionFileError(f"malformed action document: {exc}") from exc


def action_to_dict(a: GaloisAction, group_spec) -> dict:
    out = {"fan_hash": a.fan.content_hash(), "group": group_spec,
           "phi": {name: int(a.images[idx]) for name, idx in sorted(a.generator_names.items())}}
    if a.field_label is not None:
        out["field_label"] = a.field_label
    return out


# -- objects under the action ------------------------------------------------

def act_on_object(a: GaloisAction, g: int, t: TCIObject) -> TCIObject:
    """``(g chi, g I)`` with ``g`` acting through the ray permutation."""
    perm = a.ray_permutation(g)
    return TCIObject(t.fan, act_on_divisor(perm, t.chi), tuple(perm[i] for i in t.vanishing))


def _kernel_of_restriction(f: Fan, vanishing: tuple[int, ...]):
    """Basis (columns, class coordinates) of ``Ker(Pic X -> Pic V(I))`` and the restriction map."""
    r = class_group(f).free_rank
    if not vanishing:
        return np.zeros((r, 0), dtype=object), identity(r)
    res = restriction(f, vanishing)
    pm = res.pic_map
    if pm.shape[0] == 0:
        return identity(r), pm
    return kernel_basis(pm), pm


def sheaf_key(t: TCIObject) -> tuple:
    """Isomorphism key ``(I, class of chi on V(I))``."""
    cls = np.array(class_group(t.fan).cls(t.chi), dtype=object)
    _, pm = _kernel_of_restriction(t.fan, t.vanishing)
    return t.vanishing, tuple(int(x) for x in pm.dot(cls))


@dataclass
class ObstructionResult:
    vanished: bool
    cocycle: dict[int, tuple[int, ...]]  # h -> chi_h in kernel coordinates
    correction: Optional[tuple[int, ...]] = None  # y in kernel coordinates
    stabilized_chi: Optional[tuple[int, ...]] = None

    def to_dict(self) -> dict:
        return {"vanished": self.vanished,
                "cocycle": {str(h): list(v) for h, v in sorted(self.cocycle.items())},
                "stabilized_chi": list(self.stabilized_chi) if self.stabilized_chi is not None else None}


def kernel_action(a: GaloisAction, vanishing: tuple[int, ...], h: int):
    """Matrix of ``h`` on ``Ker(Pic X -> Pic V(I))`` in the kernel basis."""
    kb, _ = _kernel_of_restriction(a.fan, vanishing)
    k = kb.shape[1]
    p = a.pic_matrix(h)
    cols = [solve_integer(kb, p.dot(kb[:, j])) for j in range(k)]
    if any(c is None for c in cols):
        raise NotStable(str(vanishing), h)
    return as_int_matrix(cols).T.reshape(k, k) if k else np.zeros((0, 0), dtype=object)


def coboundary_solution(actions: dict[int, object], cocycle: dict[int, Sequence[int]]) -> Optional[tuple[int, ...]]:
    """``y`` with ``(A_h - 1) y = -c_h`` for every ``h``, or ``None`` if ``c`` is not a coboundary."""
    if not actions:
        return ()
    k = as_int_matrix(next(iter(actions.values()))).shape[0]
    if k == 0:
        return ()
    blocks, rhs = [], []
    for h, m in actions.items():
        blocks.append(as_int_matrix(m, k, k) - identity(k))
        rhs.extend(-int(x) for x in cocycle[h])
    y = solve_integer(np.vstack(blocks), rhs)
    return None if y is None else tuple(int(v) for v in y)


def solve_cocycle(a: GaloisAction, vanishing: tuple[int, ...], stabilizer: Sequence[int],
                  cocycle: dict[int, Sequence[int]]) -> Optional[tuple[int, ...]]:
    """Coboundary solution for a cocycle valued in ``Ker(Pic X -> Pic V(I))``."""
    kb, _ = _kernel_of_restriction(a.fan, vanishing)
    if kb.shape[1] == 0:
        return ()
    return coboundary_solution({h: kernel_action(a, vanishing, h) for h in stabilizer}, cocycle)


def lift_obstruction(a: GaloisAction, t: TCIObject, stabilizer: Sequence[int]) -> ObstructionResult:
    """Decide whether ``chi`` can be corrected inside ``Ker i^*`` to be fixed by the stabilizer.

    The cocycle is ``c_h = h chi - chi`` in kernel coordinates; it vanishes in
    ``H^1(H, Ker i^*)`` iff ``(h - 1) y = -c_h`` is solvable over Z for all ``h``.
    """
    f = t.fan
    cg = class_group(f)
    kb, _ = _kernel_of_restriction(f, t.vanishing)
    chi_cls = np.array(cg.cls(t.chi), dtype=object)
    cocycle: dict[int, tuple[int, ...]] = {}
    for h in stabilizer:
        z = a.pic_matrix(h).dot(chi_cls) - chi_cls
        c = solve_integer(kb, z) if kb.shape[1] else (None if any(z) else [])
        if c is None:
            raise NotStable(str(t), h)
        cocycle[h] = tuple(int(x) for x in c)
    y = solve_cocycle(a, t.vanishing, stabilizer, cocycle)
    if y is None:
        return ObstructionResult(False, cocycle)
    shift = cg.section.dot(kb.dot(np.array(y, dtype=object))) if y else [0] * f.n_rays
    new_chi = tuple(int(x) + int(s) for x, s in zip(t.chi, shift))
    return ObstructionResult(True, cocycle, y, new_chi)


@dataclass
class OrbitRecord:
    members: list[int]
    representative: int
    stabilizer: list[int]
    obstruction: ObstructionResult

    @property
    def etale_degree(self) -> int:
        return len(self.members)


@dataclass
class DescentReport:
    group_order: int
    orbits: list[OrbitRecord]
    labels: list[str]

    @property
    def all_vanished(self) -> bool:
        return all(o.obstruction.vanished for o in self.orbits)

    @property
    def orbit_sizes(self) -> list[int]:
        return [len(o.members) for o in self.orbits]

    def to_dict(self) -> dict:
        return {
            "group_order": self.group_order,
            "all_vanished": self.all_vanished,
            "total": sum(self.orbit_sizes),
            "orbits": [{
                "members": [self.labels[i] for i in o.members],
                "stabilizer": o.stabilizer,
                "etale_algebra": {"gset": f"G/H with |G| = {self.group_order}, |H| = {len(o.stabilizer)}",
                                  "degree": o.etale_degree},
                "obstruction": o.obstruction.to_dict(),
            } for o in self.orbits],
        }


def descend_collection(a: GaloisAction, c: Collection) -> DescentReport:
    """Orbits, stabilizers, étale degrees and lift obstructions of a collection."""
    keys = [sheaf_key(t) for t in c.objects]
    where = {}
    for i, k in enumerate(keys):
        where.setdefault(k, i)
    n = a.group.order
    moved = [[0] * n for _ in c.objects]
    for i, t in enumerate(c.objects):
        for g in range(n):
            j = where.get(sheaf_key(act_on_object(a, g, t)))
            if j is None:
                raise NotStable(c.labels[i], g)
            moved[i][g] = j
    seen: set[int] = set()
    orbits = []
    for i in range(len(c)):
        if i in seen:
            continue
        members = sorted(set(moved[i]))
        seen.update(members)
        stab = [g for g in range(n) if moved[i][g] == i]
        obs = lift_obstruction(a, c.objects[i], stab)
        orbits.append(OrbitRecord(members, i, stab, obs))
    for o in orbits:
        if n % len(o.members) or len(o.members) * len(o.stabilizer) != n:
            raise AssertionError("orbit-stabilizer mismatch")
    return DescentReport(n, orbits, list(c.labels))


# -- rationality and certificates ------------------------------------------

@dataclass
class RationalityResult:
    rational: bool
    pic_matrices: dict[int, list]
    ray_orbits: list[list[int]]
    h1_pic: AbelianGroupInvariants
    rank_pic: int

    @property
    def verdict(self) -> str:
        return "Rational" if self.rational else "Inconclusive"

    def to_dict(self) -> dict:
        out = {"verdict": self.verdict, "h1_pic": str(self.h1_pic),
               "nontrivial_pic_elements": sorted(self.pic_matrices)}
        if self.rational:
            out["certificate"] = {
                "etale_algebra_degrees": [len(o) for o in self.ray_orbits],
                "sequence": "1 -> G_m^r -> R_{E/k} G_m -> T -> 1 with r = rank Pic",
                "rank_pic": self.rank_pic,
            }
        return out


def ray_orbits(a: GaloisAction) -> list[list[int]]:
    seen: set[int] = set()
    out = []
    for r in range(a.fan.n_rays):
        if r in seen:
            continue
        orb = sorted({a.ray_permutation(g)[r] for g in range(a.group.order)})
        seen.update(orb)
        out.append(orb)
    return out


def rationality_check(f: Fan, a: GaloisAction) -> RationalityResult:
    """Rational when Pic carries the trivial action; otherwise inconclusive."""
    if a.fan != f:
        raise ValueError("action is defined on a different fan")
    r = class_group(f).free_rank
    nontrivial = {}
    for g in range(a.group.order):
        m = a.pic_matrix(g)
        if not equal(m, identity(r)):
            nontrivial[g] = [[int(x) for x in row] for row in m]
    return RationalityResult(not nontrivial, nontrivial, ray_orbits(a), h1(a.pic_lattice()), r)


@dataclass
class Certificate:
    issued: bool
    reason: str
    facts: list[str]

    def to_dict(self) -> dict:
        return {"issued": self.issued, "reason": self.reason, "facts": self.facts}


def no_point_certificate(f: Fan, a: GaloisAction, c: Collection, sha: AbelianGroupInvariants,
                         report: Optional[DescentReport] = None) -> Certificate:
    """Chain the descent and Zhe gates into a no-rational-point certificate."""
    if a.is_trivial():
        return Certificate(False, "torus split, Zhe trivial", [])
    if report is None:
        try:
            report = descend_collection(a, c)
        except NotStable as exc:
            return Certificate(False, f"collection not stable: {exc}", [])
    if not report.all_vanished:
        bad = [report.labels[o.representative] for o in report.orbits if not o.obstruction.vanished]
        return Certificate(False, f"lift obstruction does not vanish for {bad}", [])
    if sha.is_trivial:
        return Certificate(False, "Zhe trivial", [])
    facts = [
        f"neutral form: full étale-exceptional collection of {sum(report.orbit_sizes)} objects "
        f"in {len(report.orbits)} Galois orbits, all lift obstructions vanish",
        f"Zhe(k, T) = {sha} is nontrivial, so a torsor U with no rational point exists",
        "the twist of the neutral form by U has no rational point",
        "the twist retains a full étale-exceptional collection",
    ]
    return Certificate(True, "all gates passed", facts)
