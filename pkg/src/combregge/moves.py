"""Pachner (bistellar) moves on facet-gluing triangulations.

Every move is handled by one routine.  Label the vertices of the boundary
of the 4-simplex 0..4, so its tetrahedra are "missing i" for each label i.
A k-(5-k) move takes k tetrahedra of the triangulation, labelled as the
tetrahedra missing the labels in a set S, and replaces them with the
tetrahedra missing the labels outside S.  The region's external faces are
matched by label triples, so outside gluings carry over unchanged.

===== ====================== =============================
kind  labels S               site
===== ====================== =============================
1-4   {4}                    tetrahedron index
2-3   {3, 4}                 triangle orbit
3-2   {0, 1, 2}              edge orbit (edge labels 3, 4)
4-1   {0, 1, 2, 3}           vertex orbit (label 4)
===== ====================== =============================

A move is only applicable when the tetrahedra are pairwise distinct and
every internal face of the pattern is glued exactly as the labels require.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .triangulation.gluing import GluedTriangulation
from .triangulation.perm import EDGE_INDEX, FACE_VERTICES, PERM_INDEX, PERMS
from .triangulation.skeleton import QuotientSkeleton, skeleton

KINDS = ("1-4", "4-1", "2-3", "3-2")
INVERSE_KIND = {"1-4": "4-1", "4-1": "1-4", "2-3": "3-2", "3-2": "2-3"}

_SORTED_LABELS = {j: tuple(x for x in range(5) if x != j) for j in range(5)}
_POS = {j: {lab: i for i, lab in enumerate(_SORTED_LABELS[j])} for j in range(5)}


class InvalidMoveError(ValueError):
    pass


class FVectorDelta(NamedTuple):
    n0: int
    n1: int
    n2: int
    n3: int


_DELTAS = {
    "1-4": FVectorDelta(1, 4, 6, 3),
    "2-3": FVectorDelta(0, 1, 2, 1),
    "3-2": FVectorDelta(0, -1, -2, -1),
    "4-1": FVectorDelta(-1, -4, -6, -3),
}


def fvector_delta(kind: str) -> FVectorDelta:
    return _DELTAS[kind]


def revision(tri: GluedTriangulation) -> int:
    return hash((tri.dest, tri.gluing))


@dataclass(frozen=True)
class PachnerMove:
    kind: str
    site: int
    # (tetrahedron, label of each of its four vertices)
    cells: tuple[tuple[int, tuple[int, int, int, int]], ...]
    revision: int


def _missing(labels):
    return 10 - sum(labels)


def pattern_ok(tri: GluedTriangulation, cells) -> bool:
    tets = [t for t, _ in cells]
    if len(set(tets)) != len(tets):
        return False
    by_missing = {}
    for t, labels in cells:
        if sorted(labels) != list(_SORTED_LABELS[_missing(labels)]):
            return False
        by_missing[_missing(labels)] = (t, labels)
    if len(by_missing) != len(cells):
        return False
    for i, (ta, la) in by_missing.items():
        for j, (tb, lb) in by_missing.items():
            if j <= i:
                continue
            fa = la.index(j)
            fb = lb.index(i)
            d = tri.dest[4 * ta + fa]
            if d != 4 * tb + fb:
                return False
            p = PERMS[tri.gluing[4 * ta + fa]]
            for v in range(4):
                if v != fa and lb[p[v]] != la[v]:
                    return False
    return True


def _cells_14(tri, skel, t):
    return ((t, (0, 1, 2, 3)),)


def _cells_23(tri, skel, a):
    t, f = a >> 2, a & 3
    b = tri.dest[a]
    t2, f2 = b >> 2, b & 3
    if t == t2:
        return None
    la = [0] * 4
    la[f] = 3
    for lab, v in enumerate(FACE_VERTICES[f]):
        la[v] = lab
    p = PERMS[tri.gluing[a]]
    lb = [0] * 4
    lb[f2] = 4
    for v in FACE_VERTICES[f]:
        lb[p[v]] = la[v]
    return ((t, tuple(la)), (t2, tuple(lb)))


def _cells_32(tri, skel, i):
    t0, e = divmod(i, 6)
    u, w = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))[e]
    x, y = (v for v in range(4) if v not in (u, w))
    l0 = [0] * 4
    l0[u], l0[w], l0[x], l0[y] = 3, 4, 1, 2
    cells = [(t0, tuple(l0))]
    # Walk across the face missing label 2, then the face missing label 1.
    cur_t, cur_l = t0, l0
    for leave_label, new_label in ((2, 0), (1, 2)):
        f = cur_l.index(leave_label)
        d = tri.dest[4 * cur_t + f]
        p = PERMS[tri.gluing[4 * cur_t + f]]
        nl = [0] * 4
        for v in range(4):
            nl[p[v]] = new_label if v == f else cur_l[v]
        cur_t, cur_l = d >> 2, nl
        cells.append((cur_t, tuple(nl)))
    return tuple(cells)


def _cells_41(tri, skel, corner):
    t0, c0 = corner >> 2, corner & 3
    l0 = [0] * 4
    l0[c0] = 4
    for lab, v in enumerate(FACE_VERTICES[c0]):
        l0[v] = lab
    cells = [(t0, tuple(l0))]
    for f in range(4):
        if f == c0:
            continue
        d = tri.dest[4 * t0 + f]
        p = PERMS[tri.gluing[4 * t0 + f]]
        nl = [0] * 4
        for v in range(4):
            nl[p[v]] = 3 if v == f else l0[v]
        cells.append((d >> 2, tuple(nl)))
    return tuple(cells)


def move_sites(tri: GluedTriangulation, skel: QuotientSkeleton, kinds=KINDS):
    """All applicable moves as (kind, site, cells) triples, in a fixed order."""
    out = []
    k = tri.tets
    for kind in KINDS:
        if kind not in kinds:
            continue
        if kind == "1-4":
            out.extend(("1-4", t, _cells_14(tri, skel, t)) for t in range(k))
        elif kind == "2-3":
            seen = set()
            for a, tr in enumerate(skel.triangle_of):
                if tr in seen:
                    continue
                seen.add(tr)
                cells = _cells_23(tri, skel, a)
                if cells is not None:
                    out.append(("2-3", tr, cells))
        elif kind == "3-2":
            reps = {}
            for e, d in enumerate(skel.edge_degree):
                if d == 3:
                    reps[e] = None
            if reps:
                for i, e in enumerate(skel.edge_of):
                    if e in reps and reps[e] is None:
                        reps[e] = i
                for e, i in reps.items():
                    cells = _cells_32(tri, skel, i)
                    if pattern_ok(tri, cells):
                        out.append(("3-2", e, cells))
        else:
            targets = {v: None for v, c in enumerate(skel.vertex_corners) if c == 4}
            if targets:
                for c, v in enumerate(skel.vertex_of):
                    if v in targets and targets[v] is None:
                        targets[v] = c
                for v, c in targets.items():
                    cells = _cells_41(tri, skel, c)
                    if pattern_ok(tri, cells):
                        out.append(("4-1", v, cells))
    return out


def enumerate_moves(tri: GluedTriangulation, kinds=KINDS, skel: QuotientSkeleton | None = None):
    skel = skel or skeleton(tri)
    rev = revision(tri)
    return [PachnerMove(kind, site, cells, rev) for kind, site, cells in move_sites(tri, skel, kinds)]


def move_at(tri: GluedTriangulation, kind: str, site: int, skel: QuotientSkeleton | None = None) -> PachnerMove:
    """The move of the given kind at one site; raises InvalidMoveError if not applicable."""
    skel = skel or skeleton(tri)
    cells = None
    if kind == "1-4" and 0 <= site < tri.tets:
        cells = _cells_14(tri, skel, site)
    elif kind == "2-3" and 0 <= site < skel.n2:
        cells = _cells_23(tri, skel, skel.triangle_of.index(site))
    elif kind == "3-2" and 0 <= site < skel.n1 and skel.edge_degree[site] == 3:
        cells = _cells_32(tri, skel, skel.edge_of.index(site))
    elif kind == "4-1" and 0 <= site < skel.n0 and skel.vertex_corners[site] == 4:
        cells = _cells_41(tri, skel, skel.vertex_of.index(site))
    if cells is None or not pattern_ok(tri, cells):
        raise InvalidMoveError(f"no valid {kind} move at site {site}")
    return PachnerMove(kind, site, cells, revision(tri))


def replace_cells(tri: GluedTriangulation, cells) -> GluedTriangulation:
    """Replace the labelled region by its complementary bistellar pattern.

    Surviving tetrahedra keep their relative order; new tetrahedra are
    appended in ascending order of their missing label.
    """
    k = tri.tets
    old = {t: labels for t, labels in cells}
    removed = {_missing(labels) for labels in old.values()}
    added = [j for j in range(5) if j not in removed]
    keep = [t for t in range(k) if t not in old]
    newidx = {t: i for i, t in enumerate(keep)}
    base = len(keep)
    new_tet = {j: base + n for n, j in enumerate(added)}
    size = 4 * (base + len(added))
    dest = [-1] * size
    glu = [-1] * size
    src_dest, src_glu = tri.dest, tri.gluing

    for t in keep:
        for f in range(4):
            d = src_dest[4 * t + f]
            if (d >> 2) not in old:
                dest[4 * newidx[t] + f] = 4 * newidx[d >> 2] + (d & 3)
                glu[4 * newidx[t] + f] = src_glu[4 * t + f]

    for n1, j1 in enumerate(added):
        for j2 in added[n1 + 1:]:
            pos1, pos2 = _POS[j1], _POS[j2]
            perm = [0] * 4
            for lab in range(5):
                if lab not in (j1, j2):
                    perm[pos1[lab]] = pos2[lab]
            perm[pos1[j2]] = pos2[j1]
            q = PERM_INDEX[tuple(perm)]
            a = 4 * new_tet[j1] + pos1[j2]
            b = 4 * new_tet[j2] + pos2[j1]
            dest[a], glu[a] = b, q
            dest[b], glu[b] = a, PERM_INDEX[tuple(perm.index(v) for v in range(4))]

    for t, labels in cells:
        i = _missing(labels)
        for f in range(4):
            j = labels[f]
            if j in removed:
                continue
            pos = _POS[j]
            g = pos[i]
            # new vertex x of tet j -> old vertex of t
            old_of_new = [0] * 4
            for v in range(4):
                old_of_new[pos[labels[v]] if v != f else g] = v
            a_old = 4 * t + f
            d = src_dest[a_old]
            t2, f2 = d >> 2, d & 3
            p = PERMS[src_glu[a_old]]
            a = 4 * new_tet[j] + g
            if t2 in old:
                l2 = old[t2]
                j2 = l2[f2]
                pos2 = _POS[j2]
                i2 = _missing(l2)
                perm = []
                for x in range(4):
                    y = p[old_of_new[x]]
                    perm.append(pos2[i2] if y == f2 else pos2[l2[y]])
                dest[a] = 4 * new_tet[j2] + pos2[i2]
                glu[a] = PERM_INDEX[tuple(perm)]
            else:
                perm = tuple(p[old_of_new[x]] for x in range(4))
                q = PERM_INDEX[perm]
                b = 4 * newidx[t2] + f2
                dest[a], glu[a] = b, q
                dest[b], glu[b] = a, PERM_INDEX[tuple(perm.index(v) for v in range(4))]
    return GluedTriangulation(tuple(dest), tuple(glu))


def apply_move(tri: GluedTriangulation, move: PachnerMove) -> GluedTriangulation:
    if move.revision != revision(tri):
        raise InvalidMoveError("stale move: it was built against a different triangulation")
    if not pattern_ok(tri, move.cells):
        raise InvalidMoveError(f"{move.kind} move at site {move.site} is not applicable")
    return replace_cells(tri, move.cells)


def inverse_move(after: GluedTriangulation, move: PachnerMove, skel: QuotientSkeleton | None = None) -> PachnerMove:
    """The move undoing ``move`` in the triangulation it produced."""
    skel = skel or skeleton(after)
    k = after.tets
    if move.kind == "1-4":
        # New tets missing 0..3 occupy the last four slots; label 4 is vertex 3 of each.
        site = skel.vertex_of[4 * (k - 4) + 3]
    elif move.kind == "4-1":
        site = k - 1
    elif move.kind == "2-3":
        # Last three tets miss labels 0, 1, 2; in the first, labels 3, 4 sit at vertices 2, 3.
        site = skel.edge_of[6 * (k - 3) + EDGE_INDEX[2][3]]
    else:
        # Last two tets miss labels 3, 4; they meet at face 3 of the first.
        site = skel.triangle_of[4 * (k - 2) + 3]
    return move_at(after, INVERSE_KIND[move.kind], site, skel)
