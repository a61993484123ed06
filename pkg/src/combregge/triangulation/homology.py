"""First homology and fundamental-group presentations of the quotient CW complex.

Cells are the vertex, edge and triangle orbits of the gluing, so one-vertex
triangulations need no subdivision.
"""

from __future__ import annotations

from dataclasses import dataclass

from .gluing import GluedTriangulation
from .perm import EDGE_INDEX, FACE_VERTICES
from .skeleton import QuotientSkeleton, skeleton


@dataclass(frozen=True)
class HomologyProfile:
    rank: int
    torsion: tuple[int, ...]

    @property
    def trivial(self) -> bool:
        return self.rank == 0 and not self.torsion

    def __str__(self):
        parts = ["Z"] * self.rank + [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"


def invariant_factors(matrix) -> list[int]:
    """Nonzero diagonal of the Smith normal form, ascending (each divides the next)."""
    a = [list(row) for row in matrix]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    diag = []
    r0 = 0
    while r0 < rows and r0 < cols:
        # Pivot: smallest nonzero absolute value in the remaining block.
        pivot = None
        for i in range(r0, rows):
            for j in range(r0, cols):
                v = a[i][j]
                if v and (pivot is None or abs(v) < abs(a[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        i, j = pivot
        a[r0], a[i] = a[i], a[r0]
        for row in a:
            row[r0], row[j] = row[j], row[r0]
        while True:
            p = a[r0][r0]
            done = True
            for i in range(r0 + 1, rows):
                if a[i][r0]:
                    q = a[i][r0] // p
                    ai, ar = a[i], a[r0]
                    for j in range(r0, cols):
                        ai[j] -= q * ar[j]
                    if ai[r0]:
                        done = False
            for j in range(r0 + 1, cols):
                if a[r0][j]:
                    q = a[r0][j] // p
                    for i in range(r0, rows):
                        a[i][j] -= q * a[i][r0]
                    if a[r0][j]:
                        done = False
            if done:
                # Enforce divisibility into the rest of the block.
                bad = next(
                    ((i, j) for i in range(r0 + 1, rows) for j in range(r0 + 1, cols) if a[i][j] % p),
                    None,
                )
                if bad is None:
                    break
                for j in range(r0, cols):
                    a[r0][j] += a[bad[0]][j]
                continue
            # Move the smallest remaining entry of the pivot row/column to the pivot.
            best = (r0, r0)
            for i in range(r0, rows):
                if a[i][r0] and abs(a[i][r0]) < abs(a[best[0]][best[1]]):
                    best = (i, r0)
            for j in range(r0, cols):
                if a[r0][j] and abs(a[r0][j]) < abs(a[best[0]][best[1]]):
                    best = (r0, j)
            bi, bj = best
            a[r0], a[bi] = a[bi], a[r0]
            for row in a:
                row[r0], row[bj] = row[bj], row[r0]
        diag.append(abs(a[r0][r0]))
        r0 += 1
    return sorted(diag)


def boundary_matrices(tri: GluedTriangulation, skel: QuotientSkeleton | None = None):
    """Return (d1, d2) as lists of rows: d1 is N0 x N1, d2 is N1 x N2."""
    skel = skel or skeleton(tri)
    d1 = [[0] * skel.n1 for _ in range(skel.n0)]
    for e, (tail, head) in enumerate(skel.edge_ends):
        d1[head][e] += 1
        d1[tail][e] -= 1
    d2 = [[0] * skel.n2 for _ in range(skel.n1)]
    for tr, (t, f) in enumerate(_triangle_reps(tri, skel)):
        x, y, z = FACE_VERTICES[f]
        for (u, w), coeff in (((y, z), 1), ((x, z), -1), ((x, y), 1)):
            i = 6 * t + EDGE_INDEX[u][w]
            sign = -coeff if skel.edge_flip[i] else coeff
            d2[skel.edge_of[i]][tr] += sign
    return d1, d2


def _triangle_reps(tri, skel):
    reps = [None] * skel.n2
    for a, tr in enumerate(skel.triangle_of):
        if reps[tr] is None:
            reps[tr] = (a >> 2, a & 3)
    return reps


def homology_h1(tri: GluedTriangulation, skel: QuotientSkeleton | None = None) -> HomologyProfile:
    skel = skel or skeleton(tri)
    _, d2 = boundary_matrices(tri, skel)
    factors = invariant_factors(d2)
    rank = skel.n1 - (skel.n0 - 1) - len(factors)
    return HomologyProfile(rank, tuple(d for d in factors if d > 1))


def pi1_presentation(tri: GluedTriangulation, skel: QuotientSkeleton | None = None):
    """Generators and relators of the fundamental group.

    Generators are edge orbits outside a spanning tree of the 1-skeleton,
    renumbered 0..g-1; each triangle orbit gives a relator, a list of
    (generator, +1/-1) pairs read around its boundary.
    """
    skel = skel or skeleton(tri)
    parent = list(range(skel.n0))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    gen = {}
    for e, (u, w) in enumerate(skel.edge_ends):
        ru, rw = find(u), find(w)
        if ru != rw:
            parent[ru] = rw
        else:
            gen[e] = len(gen)
    relators = []
    for t, f in _triangle_reps(tri, skel):
        x, y, z = FACE_VERTICES[f]
        word = []
        for (u, w), exp in (((x, y), 1), ((y, z), 1), ((x, z), -1)):
            i = 6 * t + EDGE_INDEX[u][w]
            e = skel.edge_of[i]
            if e in gen:
                word.append((gen[e], -exp if skel.edge_flip[i] else exp))
        relators.append(word)
    return len(gen), relators
