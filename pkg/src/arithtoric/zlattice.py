"""Exact integer linear algebra.

Matrices are numpy arrays of ``dtype=object`` holding Python ints, so
intermediate entries never overflow.  The heavy lifting happens on plain
lists of lists; numpy is only the container handed back to callers.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Optional, Sequence

import numpy as np

IntMatrix = np.ndarray


def as_int_matrix(m, rows: int | None = None, cols: int | None = None) -> IntMatrix:
    """Coerce ``m`` into a 2-d object array of Python ints.

    ``rows``/``cols`` are only needed to give shape to empty input.
    """
    if isinstance(m, np.ndarray) and m.dtype == object and m.ndim == 2:
        return m
    arr = np.array(m, dtype=object)
    if arr.size == 0:
        r = rows if rows is not None else (arr.shape[0] if arr.ndim >= 1 else 0)
        c = cols if cols is not None else (arr.shape[1] if arr.ndim == 2 else 0)
        return np.zeros((r, c), dtype=object)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {arr.shape}")
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        out[idx] = int(x)
    return out


def identity(n: int) -> IntMatrix:
    out = np.zeros((n, n), dtype=object)
    for i in range(n):
        out[i, i] = 1
    return out


def _to_lists(m) -> list[list[int]]:
    return [[int(x) for x in row] for row in as_int_matrix(m)]


def _from_lists(a: list[list[int]], rows: int, cols: int) -> IntMatrix:
    out = np.zeros((rows, cols), dtype=object)
    for i, row in enumerate(a):
        for j, x in enumerate(row):
            out[i, j] = x
    return out


@dataclass(frozen=True)
class AbelianGroupInvariants:
    """A finitely generated abelian group ``Z^free_rank + Z/d1 + ... + Z/dk``.

    Invariant factors satisfy ``d1 | d2 | ...`` and every ``di >= 2``.
    """

    free_rank: int = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        t = tuple(int(d) for d in self.torsion)
        if any(d < 2 for d in t):
            raise ValueError("torsion invariant factors must be >= 2")
        if any(t[i + 1] % t[i] for i in range(len(t) - 1)):
            raise ValueError(f"invariant factors {t} do not form a divisibility chain")
        object.__setattr__(self, "torsion", t)

    @classmethod
    def from_diagonal(cls, diag: Sequence[int], ambient: int) -> "AbelianGroupInvariants":
        """Group ``Z^ambient / diag(d)`` for a Smith diagonal ``d``."""
        nz = [abs(int(d)) for d in diag if d != 0]
        return cls(ambient - len(nz), tuple(d for d in nz if d > 1))

    @property
    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    @property
    def order(self) -> Optional[int]:
        if self.free_rank:
            return None
        out = 1
        for d in self.torsion:
            out *= d
        return out

    def __str__(self) -> str:
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        parts.extend(f"Z/{d}" for d in self.torsion)
        return " + ".join(parts) if parts else "trivial"

    def to_dict(self) -> dict:
        return {"free_rank": self.free_rank, "torsion": list(self.torsion)}


def smith_normal_form(m) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return ``(u, d, v)`` with ``u @ m @ v == d``.

    ``u`` and ``v`` are unimodular, ``d`` is diagonal with nonnegative entries
    ``d[0,0] | d[1,1] | ...``.
    """
    A = _to_lists(m)
    r = len(A)
    c = len(A[0]) if r else as_int_matrix(m).shape[1]
    U = [[int(i == j) for j in range(r)] for i in range(r)]
    V = [[int(i == j) for j in range(c)] for i in range(c)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):
        # row[dst] += q * row[src]
        if q:
            rs, rd = A[src], A[dst]
            for k in range(c):
                if rs[k]:
                    rd[k] += q * rs[k]
            us, ud = U[src], U[dst]
            for k in range(r):
                if us[k]:
                    ud[k] += q * us[k]

    def add_col(dst, src, q):
        if q:
            for row in A:
                if row[src]:
                    row[dst] += q * row[src]
            for row in V:
                if row[src]:
                    row[dst] += q * row[src]

    for t in range(min(r, c)):
        best = None
        for i in range(t, r):
            row = A[i]
            for j in range(t, c):
                x = row[j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        swap_rows(t, best[1])
        swap_cols(t, best[2])
        while True:
            p = A[t][t]
            dirty = False
            for i in range(t + 1, r):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
                    if A[i][t]:
                        dirty = True
            for j in range(t + 1, c):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
                    if A[t][j]:
                        dirty = True
            if dirty:
                # move the smallest leftover remainder into the pivot slot
                cand = [(abs(A[i][t]), i, t) for i in range(t + 1, r) if A[i][t]]
                cand += [(abs(A[t][j]), t, j) for j in range(t + 1, c) if A[t][j]]
                _, i, j = min(cand)
                if i != t:
                    swap_rows(t, i)
                else:
                    swap_cols(t, j)
                continue
            bad = None
            for i in range(t + 1, r):
                for j in range(t + 1, c):
                    if A[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
    return _from_lists(U, r, r), _from_lists(A, r, c), _from_lists(V, c, c)


def smith_diagonal(m) -> list[int]:
    _, d, _ = smith_normal_form(m)
    return [d[i, i] for i in range(min(d.shape))]


def _row_echelon(A: list[list[int]], ncols: int) -> list[list[int]]:
    """Integer row echelon form (unimodular row operations); zero rows dropped."""
    A = [list(row) for row in A if any(row)]
    out = []
    col = 0
    while A and col < ncols:
        nz = [row for row in A if row[col]]
        if not nz:
            col += 1
            continue
        rest = [row for row in A if not row[col]]
        while len(nz) > 1:
            nz.sort(key=lambda row: abs(row[col]))
            p = nz[0]
            nxt = [p]
            for row in nz[1:]:
                q = row[col] // p[col]
                new = [a - q * b for a, b in zip(row, p)]
                if new[col]:
                    nxt.append(new)
                elif any(new):
                    rest.append(new)
            nz = nxt
        out.append(nz[0])
        A = rest
        col += 1
    return out


def rank(m) -> int:
    """Exact rank over Q (fraction-free elimination)."""
    rows = [dict((j, int(x)) for j, x in enumerate(row) if x) for row in as_int_matrix(m)]
    return sparse_rank(rows)


def sparse_rank(rows: list[dict[int, int]]) -> int:
    """Exact rank over Q of a matrix given as a list of ``{col: value}`` rows.

    Fraction-free: a row update ``s <- p*s - q*r`` is followed by dividing out
    the content of ``s``.  Rows are consumed; pass copies if you need them.
    """
    rows = [r for r in rows if r]
    rk = 0
    while rows:
        # pick the pivot row/col greedily: short rows, unit entries first
        rows.sort(key=len)
        piv_row = rows[0]
        piv_col = None
        for j, x in piv_row.items():
            if x == 1 or x == -1:
                piv_col = j
                break
        if piv_col is None:
            piv_col = min(piv_row, key=lambda j: abs(piv_row[j]))
        p = piv_row[piv_col]
        rk += 1
        nxt = []
        for s in rows[1:]:
            q = s.get(piv_col)
            if q is None:
                nxt.append(s)
                continue
            new = {}
            if p == 1:
                new = {j: v for j, v in s.items()}
                for j, v in piv_row.items():
                    w = new.get(j, 0) - q * v
                    if w:
                        new[j] = w
                    else:
                        new.pop(j, None)
            else:
                for j in set(s) | set(piv_row):
                    w = p * s.get(j, 0) - q * piv_row.get(j, 0)
                    if w:
                        new[j] = w
                if new:
                    g = 0
                    for v in new.values():
                        g = gcd(g, v)
                        if g == 1:
                            break
                    if g > 1:
                        new = {j: v // g for j, v in new.items()}
            if new:
                nxt.append(new)
        rows = nxt
    return rk


def determinant(m) -> int:
    """Exact determinant via Bareiss elimination."""
    A = _to_lists(m)
    n = len(A)
    if n == 0:
        return 1
    if any(len(row) != n for row in A):
        raise ValueError("determinant of a non-square matrix")
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k]:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def is_unimodular(m) -> bool:
    m = as_int_matrix(m)
    return m.shape[0] == m.shape[1] and abs(determinant(m)) == 1


def inverse_unimodular(m) -> IntMatrix:
    """Integer inverse of a unimodular matrix."""
    m = as_int_matrix(m)
    u, d, v = smith_normal_form(m)
    if m.shape[0] != m.shape[1] or any(d[i, i] != 1 for i in range(d.shape[0])):
        raise ValueError("matrix is not unimodular")
    # u m v = I  =>  m^{-1} = v u
    return v.dot(u)


def kernel_basis(m) -> IntMatrix:
    """Columns form a saturated Z-basis of ``{x : m x = 0}``."""
    m = as_int_matrix(m)
    cols = m.shape[1]
    reduced = _row_echelon(_to_lists(m), cols)
    if not reduced:
        return identity(cols)
    _, d, v = smith_normal_form(_from_lists(reduced, len(reduced), cols))
    rk = sum(1 for i in range(min(d.shape)) if d[i, i] != 0)
    return v[:, rk:]


def image_basis(m) -> IntMatrix:
    """Columns form a Z-basis of the column span of ``m``."""
    m = as_int_matrix(m)
    reduced = _row_echelon(_to_lists(m.T), m.shape[0])
    if not reduced:
        return np.zeros((m.shape[0], 0), dtype=object)
    return _from_lists(reduced, len(reduced), m.shape[0]).T


def cokernel(m) -> tuple[AbelianGroupInvariants, IntMatrix]:
    """Invariants of ``Z^rows / im(m)`` and a projection onto its free part.

    ``proj`` has shape ``(free_rank, rows)``; ``proj @ m == 0`` and ``proj``
    is surjective onto ``Z^free_rank``.
    """
    m = as_int_matrix(m)
    rows = m.shape[0]
    u, d, _ = smith_normal_form(m)
    diag = [d[i, i] for i in range(min(d.shape))]
    inv = AbelianGroupInvariants.from_diagonal(diag, rows)
    rk = sum(1 for x in diag if x != 0)
    return inv, u[rk:, :]


def solve_integer(m, b) -> Optional[np.ndarray]:
    """Some integer ``x`` with ``m @ x == b``, or ``None`` if there is none."""
    m = as_int_matrix(m)
    b = [int(x) for x in np.asarray(b, dtype=object).ravel()]
    if len(b) != m.shape[0]:
        raise ValueError("right-hand side has the wrong length")
    u, d, v = smith_normal_form(m)
    ub = u.dot(np.array(b, dtype=object)) if m.shape[0] else np.zeros(0, dtype=object)
    y = np.zeros(m.shape[1], dtype=object)
    for i in range(m.shape[0]):
        di = d[i, i] if i < min(d.shape) else 0
        if di == 0:
            if ub[i] != 0:
                return None
        else:
            if ub[i] % di:
                return None
            y[i] = ub[i] // di
    return v.dot(y) if m.shape[1] else y


def matmul(*ms) -> IntMatrix:
    out = as_int_matrix(ms[0])
    for m in ms[1:]:
        out = out.dot(as_int_matrix(m))
    return out


def equal(a, b) -> bool:
    a, b = as_int_matrix(a), as_int_matrix(b)
    return a.shape == b.shape and bool(np.all(a == b))


def to_tuple(m) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(x) for x in row) for row in as_int_matrix(m))
