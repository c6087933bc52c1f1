"""Torus-invariant divisors, class groups and line-bundle cohomology.

Cohomology uses the standard sign-pattern description: for each character
``m`` the rays with ``<m, v_rho> < -a_rho`` span a full subcomplex ``V`` of
the fan, and ``H^i(X, O(D))_m`` is the reduced cohomology
``H~^{i-1}(V)`` (the empty complex has ``H~^{-1} = k``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import ceil, floor
from typing import Sequence

import numpy as np

from .fan import Fan, FanAut, StarFan, _rational_inverse, cone_star_fan, is_complete, is_smooth
from .zlattice import (
    AbelianGroupInvariants,
    IntMatrix,
    as_int_matrix,
    cokernel,
    identity,
    solve_integer,
    sparse_rank,
)


class ShellNotVanishing(RuntimeError):
    """The padding shell of the character box carried cohomology."""


@dataclass(frozen=True)
class TDivisor:
    fan: Fan = field(repr=False, compare=False, hash=False)
    coeffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(a) for a in self.coeffs))
        if len(self.coeffs) != self.fan.n_rays:
            raise ValueError(f"divisor has {len(self.coeffs)} coefficients, fan has {self.fan.n_rays} rays")

    def __add__(self, other: "TDivisor") -> "TDivisor":
        return TDivisor(self.fan, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "TDivisor") -> "TDivisor":
        return TDivisor(self.fan, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "TDivisor":
        return TDivisor(self.fan, tuple(-a for a in self.coeffs))


def principal_divisor(f: Fan, m: Sequence[int]) -> tuple[int, ...]:
    """Coefficients of ``div(chi^m) = sum <m, v_rho> D_rho``."""
    return tuple(sum(int(a) * int(b) for a, b in zip(m, r)) for r in f.rays)


def canonical_divisor(f: Fan) -> tuple[int, ...]:
    return tuple(-1 for _ in f.rays)


def parse_divisor(text: str, f: Fan) -> tuple[int, ...]:
    """Parse ``"1,0,-2,..."`` into coefficients matching the ray order of ``f``."""
    try:
        coeffs = tuple(int(x) for x in text.replace(" ", "").split(",") if x != "")
    except ValueError as exc:
        raise ValueError(f"cannot parse divisor {text!r}") from exc
    if len(coeffs) != f.n_rays:
        raise ValueError(f"divisor has {len(coeffs)} entries, fan has {f.n_rays} rays")
    return coeffs


# -- class group ---------------------------------------------------------

@dataclass
class ClassGroup:
    """``Cl(X) = Div_T / M``.

    ``class_of`` maps divisor coefficients to free class coordinates;
    ``section`` lifts class coordinates back to divisors.
    """

    fan: Fan
    invariants: AbelianGroupInvariants
    class_of: IntMatrix
    section: IntMatrix

    @property
    def free_rank(self) -> int:
        return self.invariants.free_rank

    @property
    def torsion(self) -> tuple[int, ...]:
        return self.invariants.torsion

    def cls(self, coeffs: Sequence[int]) -> tuple[int, ...]:
        v = np.array([int(a) for a in coeffs], dtype=object)
        return tuple(int(x) for x in self.class_of.dot(v))


_CLASS_GROUPS: dict[Fan, ClassGroup] = {}


def class_group(f: Fan) -> ClassGroup:
    """Cokernel of ``M -> Div``, ``m |-> (<m, v_rho>)_rho``."""
    if f in _CLASS_GROUPS:
        return _CLASS_GROUPS[f]
    pairing = f.ray_matrix if f.n_rays else np.zeros((0, f.rank), dtype=object)
    inv, proj = cokernel(pairing)
    cols = []
    for j in range(proj.shape[0]):
        e = [0] * proj.shape[0]
        e[j] = 1
        cols.append(solve_integer(proj, e))
    section = as_int_matrix(cols).T if cols else np.zeros((f.n_rays, 0), dtype=object)
    section = section.reshape(f.n_rays, proj.shape[0])
    cg = ClassGroup(f, inv, proj, section)
    _CLASS_GROUPS[f] = cg
    return cg


def permutation_matrix(perm: Sequence[int]) -> IntMatrix:
    """Matrix sending coordinate ``i`` to coordinate ``perm[i]``."""
    n = len(perm)
    m = np.zeros((n, n), dtype=object)
    for i, j in enumerate(perm):
        m[j, i] = 1
    return m


def act_on_divisor(perm: Sequence[int], coeffs: Sequence[int]) -> tuple[int, ...]:
    """Push a divisor forward along a ray permutation: ``D_rho |-> D_perm(rho)``."""
    out = [0] * len(coeffs)
    for i, j in enumerate(perm):
        out[j] = int(coeffs[i])
    return tuple(out)


def pic_action(f: Fan, aut: FanAut, element: int) -> IntMatrix:
    """Matrix of a fan automorphism on class-group coordinates."""
    cg = class_group(f)
    return cg.class_of.dot(permutation_matrix(aut.ray_permutations[element])).dot(cg.section)


# -- restriction to orbit closures ---------------------------------------

@dataclass
class Restriction:
    """Restriction ``Pic(X) -> Pic(V(tau))`` for a cone ``tau``."""

    star: StarFan
    divisor_map: IntMatrix  # Div(X) -> Div(V(tau))
    pic_map: IntMatrix      # Pic(X) -> Pic(V(tau)) in class coordinates


def restriction(f: Fan, cone: Sequence[int]) -> Restriction:
    """Restriction of divisors to the orbit closure of a smooth cone.

    A divisor is first moved by a principal divisor so that it vanishes on
    the rays of the cone; its remaining coefficients on the star rays give
    the restricted divisor.
    """
    star = cone_star_fan(f, cone)
    tau = star.cone
    n = f.n_rays
    sf = star.fan
    dm = np.zeros((sf.n_rays, n), dtype=object)
    for j in range(n):
        e = [0] * n
        e[j] = 1
        # subtract div(chi^m) with <m, v_i> = a_i on the rays of tau
        m = [0] * f.rank
        for k, i in enumerate(tau):
            for c in range(f.rank):
                m[c] += e[i] * int(star.lift[k, c])
        shifted = [e[r] - sum(m[c] * f.rays[r][c] for c in range(f.rank)) for r in range(n)]
        for s, r in enumerate(star.ray_map):
            dm[s, j] = shifted[r]
    cg = class_group(f)
    if sf.n_rays:
        scg = class_group(sf)
        pm = scg.class_of.dot(dm).dot(cg.section)
    else:
        pm = np.zeros((0, cg.free_rank), dtype=object)
    return Restriction(star, dm, pm)


# -- cohomology ----------------------------------------------------------

@dataclass(frozen=True)
class CohomologyDims:
    dims: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(x) for x in self.dims))
        if any(x < 0 for x in self.dims):
            raise ValueError("negative dimension")

    @property
    def euler(self) -> int:
        return sum((-1) ** i * d for i, d in enumerate(self.dims))

    @property
    def is_zero(self) -> bool:
        return not any(self.dims)

    def __getitem__(self, i):
        return self.dims[i]

    def __iter__(self):
        return iter(self.dims)

    def __str__(self):
        return "(" + ", ".join(str(d) for d in self.dims) + ")"


class FanComplex:
    """Simplicial complex of cones of a complete simplicial fan.

    Precomputes per-fan data reused across characters.
    """

    def __init__(self, f: Fan):
        self.fan = f
        self.simplices = [tuple(sorted(c)) for c in f.cones]  # includes the empty simplex
        self.index = {s: i for i, s in enumerate(self.simplices)}
        self.masks = [sum(1 << r for r in s) for s in self.simplices]
        self.by_size: dict[int, list[int]] = {}
        for i, s in enumerate(self.simplices):
            self.by_size.setdefault(len(s), []).append(i)
        # boundary of simplex i: list of (face index, sign)
        self.boundary = []
        for s in self.simplices:
            self.boundary.append([(self.index[s[:k] + s[k + 1:]], (-1) ** k) for k in range(len(s))])
        self.ray_rows = f.ray_matrix.astype(np.int64) if f.n_rays else np.zeros((0, f.rank), np.int64)
        self._vertex_cache: dict = {}

    def reduced_homology(self, vertex_mask: int) -> tuple[int, ...]:
        """Ranks of ``H~_k`` of the full subcomplex on ``vertex_mask`` for k = -1..rank-1."""
        hit = self._vertex_cache.get(vertex_mask)
        if hit is not None:
            return hit
        n = self.fan.rank
        chosen = {k: [i for i in self.by_size.get(k, []) if self.masks[i] & ~vertex_mask == 0]
                  for k in range(n + 1)}
        ranks = {}
        for k in range(1, n + 1):
            # boundary from (k-1)-dim simplices (k vertices) to k-1 vertices
            rows = []
            pos = {i: t for t, i in enumerate(chosen[k - 1])}
            for i in chosen[k]:
                rows.append({pos[j]: s for j, s in self.boundary[i]})
            ranks[k] = sparse_rank(rows)
        out = []
        for k in range(0, n + 1):
            # chain group of simplices with k vertices sits in degree k-1
            dim = len(chosen[k]) - ranks.get(k, 0) - ranks.get(k + 1, 0)
            out.append(dim)
        res = tuple(out)
        self._vertex_cache[vertex_mask] = res
        return res


_COMPLEXES: dict[Fan, FanComplex] = {}


def fan_complex(f: Fan) -> FanComplex:
    if f not in _COMPLEXES:
        _COMPLEXES[f] = FanComplex(f)
    return _COMPLEXES[f]


_SYSTEMS: dict[Fan, list] = {}


def _vertex_systems(f: Fan) -> list:
    """Inverses of all invertible rank-by-rank ray subsystems."""
    if f in _SYSTEMS:
        return _SYSTEMS[f]
    out = []
    for idx in itertools.combinations(range(f.n_rays), f.rank):
        try:
            inv = _rational_inverse([f.rays[i] for i in idx])
        except ZeroDivisionError:
            continue
        out.append((idx, inv))
    _SYSTEMS[f] = out
    return out


def character_box(f: Fan, coeffs_list: Sequence[Sequence[int]]) -> tuple[list[int], list[int]]:
    """Bounding box of all vertices of the hyperplane arrangements ``<m, v> = -a``.

    Cohomology of every listed divisor is supported inside this box.
    """
    lo = [0] * f.rank
    hi = [0] * f.rank
    first = True
    for coeffs in coeffs_list:
        for idx, inv in _vertex_systems(f):
            rhs = [-int(coeffs[i]) for i in idx]
            m = [sum((inv[r][k] * rhs[k] for k in range(f.rank)), Fraction(0)) for r in range(f.rank)]
            for c in range(f.rank):
                if first:
                    lo[c], hi[c] = floor(m[c]), ceil(m[c])
                else:
                    lo[c] = min(lo[c], floor(m[c]))
                    hi[c] = max(hi[c], ceil(m[c]))
            first = False
    return lo, hi


def box_points(lo: Sequence[int], hi: Sequence[int], pad: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Integer points of the padded box and a mask marking the padding shell."""
    axes = [np.arange(a - pad, b + pad + 1, dtype=np.int64) for a, b in zip(lo, hi)]
    if not axes:
        return np.zeros((1, 0), np.int64), np.zeros(1, bool)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
    shell = np.zeros(len(grid), bool)
    for c, (a, b) in enumerate(zip(lo, hi)):
        shell |= grid[:, c] < a
        shell |= grid[:, c] > b
    return grid, shell


def sign_masks(fc: FanComplex, points: np.ndarray, coeffs: Sequence[int], strict_negative: bool) -> np.ndarray:
    """Bitmask per character of rays with ``<m,v>+a < 0`` (or ``>= 0``)."""
    vals = points.dot(fc.ray_rows.T) + np.array(coeffs, dtype=np.int64)
    sel = vals < 0 if strict_negative else vals >= 0
    weights = np.array([1 << r for r in range(fc.fan.n_rays)], dtype=object)
    if fc.fan.n_rays <= 62:
        w = np.array([1 << r for r in range(fc.fan.n_rays)], dtype=np.int64)
        return sel.astype(np.int64).dot(w)
    return sel.astype(object).dot(weights)  # pragma: no cover - large fans


def _require_smooth_complete(f: Fan) -> None:
    if not is_smooth(f) or not is_complete(f):
        raise ValueError("cohomology requires a smooth complete fan")


@lru_cache(maxsize=None)
def _checked(f: Fan) -> bool:
    _require_smooth_complete(f)
    return True


def cohomology(f: Fan, d: TDivisor | Sequence[int]) -> CohomologyDims:
    """Dimensions ``h^0..h^rank`` of ``O(D)`` on the toric variety of ``f``."""
    _checked(f)
    coeffs = d.coeffs if isinstance(d, TDivisor) else tuple(int(a) for a in d)
    if len(coeffs) != f.n_rays:
        raise ValueError("divisor does not match the fan")
    n = f.rank
    if n == 0:
        return CohomologyDims((1,))
    fc = fan_complex(f)
    lo, hi = character_box(f, [coeffs])
    pts, shell = box_points(lo, hi)
    masks = sign_masks(fc, pts, coeffs, strict_negative=True)
    dims = [0] * (n + 1)
    uniq, inverse, counts = np.unique(masks, return_inverse=True, return_counts=True)
    shell_hits = np.zeros(len(uniq), bool)
    np.logical_or.at(shell_hits, inverse, shell)
    for u, cnt, on_shell in zip(uniq.tolist(), counts.tolist(), shell_hits.tolist()):
        red = fc.reduced_homology(int(u))
        # H~_{k-1} sits at index k; h^i gets H~^{i-1} = H~_{i-1}
        if on_shell and any(red):
            raise ShellNotVanishing(f"character box too small for divisor {coeffs}")
        for i in range(n + 1):
            dims[i] += cnt * red[i]
    return CohomologyDims(tuple(dims))


def euler_char(f: Fan, d: TDivisor | Sequence[int]) -> int:
    return cohomology(f, d).euler
