"""Quotient skeleton, manifold validation and simple invariants.

Orbits of vertices, edges and triangles are computed with union-find over
the identifications induced by the face gluings.  Edge orbits carry an
orientation parity so that an edge identified with itself in reverse is
detected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .gluing import GluedTriangulation
from .perm import EDGE_INDEX, EDGES, FACE_EDGES, PERMS, SIGN


class RationalMu(NamedTuple):
    """Mean bone-degree ``6K / N1``, kept as an unreduced integer pair."""

    numerator: int
    denominator: int

    @property
    def value(self) -> float:
        return self.numerator / self.denominator

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def display(self) -> str:
        """Three decimals, rounded half up (exact integer arithmetic)."""
        thousandths = (2000 * self.numerator + self.denominator) // (2 * self.denominator)
        return f"{thousandths // 1000}.{thousandths % 1000:03d}"

    def __str__(self):
        return f"{self.numerator}/{self.denominator}"


@dataclass(frozen=True)
class QuotientSkeleton:
    vertex_of: tuple[int, ...]   # per corner 4t+v
    edge_of: tuple[int, ...]     # per tet-edge 6t+e
    edge_flip: tuple[int, ...]   # orientation of tet-edge relative to its orbit
    triangle_of: tuple[int, ...]  # per face 4t+f
    edge_degree: tuple[int, ...]
    edge_ends: tuple[tuple[int, int], ...]  # (tail vertex orbit, head vertex orbit)
    edge_valid: tuple[bool, ...]
    vertex_corners: tuple[int, ...]
    link_vertices: tuple[int, ...]  # number of edge-ends at each vertex orbit

    @property
    def n0(self):
        return len(self.vertex_corners)

    @property
    def n1(self):
        return len(self.edge_degree)

    @property
    def n2(self):
        return len(self.triangle_of) // 2

    @property
    def n3(self):
        return len(self.triangle_of) // 4

    @property
    def fvector(self):
        return (self.n0, self.n1, self.n2, self.n3)


def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def _find_parity(parent, parity, x):
    acc = 0
    while parent[x] != x:
        acc ^= parity[x]
        x = parent[x]
    return x, acc


def skeleton(tri: GluedTriangulation) -> QuotientSkeleton:
    dest, glu = tri.dest, tri.gluing
    k = len(dest) // 4

    vparent = list(range(4 * k))
    eparent = list(range(6 * k))
    eparity = [0] * (6 * k)
    erank = [0] * (6 * k)
    bad_roots = set()
    for a in range(4 * k):
        b = dest[a]
        if b < a:
            continue
        t, f, t2 = a >> 2, a & 3, b >> 2
        p = PERMS[glu[a]]
        for v in range(4):
            if v != f:
                x, y = _find(vparent, 4 * t + v), _find(vparent, 4 * t2 + p[v])
                if x != y:
                    vparent[max(x, y)] = min(x, y)
        for e in FACE_EDGES[f]:
            u, w = EDGES[e]
            pu, pw = p[u], p[w]
            rel = 1 if pu > pw else 0
            x, px = _find_parity(eparent, eparity, 6 * t + e)
            y, py = _find_parity(eparent, eparity, 6 * t2 + EDGE_INDEX[pu][pw])
            if x == y:
                if px ^ py != rel:
                    bad_roots.add(x)
                continue
            if erank[x] < erank[y]:
                x, y, px, py = y, x, py, px
            eparent[y] = x
            eparity[y] = px ^ py ^ rel
            if erank[x] == erank[y]:
                erank[x] += 1
            if y in bad_roots:
                bad_roots.add(x)

    vid = {}
    vertex_of = []
    for c in range(4 * k):
        r = _find(vparent, c)
        vertex_of.append(vid.setdefault(r, len(vid)))
    vertex_corners = [0] * len(vid)
    for v in vertex_of:
        vertex_corners[v] += 1

    eid = {}
    edge_of = []
    edge_flip = []
    roots = []
    for i in range(6 * k):
        r, par = _find_parity(eparent, eparity, i)
        if r not in eid:
            eid[r] = len(eid)
            roots.append(r)
        edge_of.append(eid[r])
        edge_flip.append(par)
    n1 = len(eid)
    degree = [0] * n1
    ends = [None] * n1
    seen_end = set()
    link_vertices = [0] * len(vid)
    for i in range(6 * k):
        e = edge_of[i]
        degree[e] += 1
        t, (a, b) = divmod(i, 6)[0], EDGES[i % 6]
        tail, head = (a, b) if edge_flip[i] == 0 else (b, a)
        tv, hv = vertex_of[4 * t + tail], vertex_of[4 * t + head]
        if ends[e] is None:
            ends[e] = (tv, hv)
        for bit, vert in ((0, tv), (1, hv)):
            if (e, bit) not in seen_end:
                seen_end.add((e, bit))
                link_vertices[vert] += 1
    valid = [roots[j] not in bad_roots for j in range(n1)]

    tri_of = [0] * (4 * k)
    count = 0
    for a in range(4 * k):
        b = dest[a]
        if a < b:
            tri_of[a] = tri_of[b] = count
            count += 1

    return QuotientSkeleton(
        vertex_of=tuple(vertex_of),
        edge_of=tuple(edge_of),
        edge_flip=tuple(edge_flip),
        triangle_of=tuple(tri_of),
        edge_degree=tuple(degree),
        edge_ends=tuple(ends),
        edge_valid=tuple(valid),
        vertex_corners=tuple(vertex_corners),
        link_vertices=tuple(link_vertices),
    )


def orientation_signs(tri: GluedTriangulation):
    """Return per-tetrahedron signs making every gluing orientation-reversing
    in local coordinates, or None when the triangulation is non-orientable."""
    k = tri.tets
    sign = [0] * k
    sign[0] = 1
    stack = [0]
    while stack:
        t = stack.pop()
        for f in range(4):
            d = tri.dest[4 * t + f]
            u = d >> 2
            want = -sign[t] * SIGN[tri.gluing[4 * t + f]]
            if sign[u] == 0:
                sign[u] = want
                stack.append(u)
            elif sign[u] != want:
                return None
    return sign


def is_orientable(tri: GluedTriangulation) -> bool:
    return orientation_signs(tri) is not None


@dataclass(frozen=True)
class VertexLink:
    vertex: int
    triangles: int
    connected: bool
    closed: bool
    euler: int

    @property
    def is_sphere(self):
        return self.connected and self.closed and self.euler == 2


@dataclass(frozen=True)
class ValidationReport:
    links: tuple[VertexLink, ...]
    invalid_edges: tuple[int, ...]
    orientable: bool
    reasons: tuple[str, ...] = field(default=())

    @property
    def valid(self) -> bool:
        return not self.reasons

    @property
    def verdict(self) -> str:
        return "valid-manifold" if self.valid else "invalid"


def validate_manifold(tri: GluedTriangulation, skel: QuotientSkeleton | None = None) -> ValidationReport:
    skel = skel or skeleton(tri)
    links = []
    reasons = []
    for v, corners in enumerate(skel.vertex_corners):
        # Link triangles = corners; link edges = 3*corners/2 since every face is glued.
        euler = skel.link_vertices[v] - corners // 2
        link = VertexLink(v, corners, True, True, euler)
        links.append(link)
        if not link.is_sphere:
            reasons.append(f"vertex link not a sphere (vertex {v}, euler characteristic {euler})")
    invalid = tuple(e for e, ok in enumerate(skel.edge_valid) if not ok)
    for e in invalid:
        reasons.append(f"edge {e} identified with itself in reverse")
    return ValidationReport(tuple(links), invalid, is_orientable(tri), tuple(reasons))


def mean_bone_degree(tri: GluedTriangulation, skel: QuotientSkeleton | None = None) -> RationalMu:
    skel = skel or skeleton(tri)
    return RationalMu(6 * tri.tets, skel.n1)


class SimplicialCheck(NamedTuple):
    simplicial: bool
    witness: str | None

    def __bool__(self):
        return self.simplicial


def is_simplicial(tri: GluedTriangulation, skel: QuotientSkeleton | None = None) -> SimplicialCheck:
    skel = skel or skeleton(tri)
    k = tri.tets
    tets_seen = {}
    for t in range(k):
        verts = [skel.vertex_of[4 * t + v] for v in range(4)]
        if len(set(verts)) < 4:
            return SimplicialCheck(False, f"tetrahedron with repeated vertex orbit (tet {t})")
        key = frozenset(verts)
        if key in tets_seen:
            return SimplicialCheck(
                False, f"two tetrahedra share all vertices (tets {tets_seen[key]} and {t})"
            )
        tets_seen[key] = t
    edges_seen = {}
    for e, (u, w) in enumerate(skel.edge_ends):
        key = frozenset((u, w))
        if edges_seen.setdefault(key, e) != e:
            return SimplicialCheck(False, f"two edges share both endpoints (edges {edges_seen[key]} and {e})")
    tris_seen = {}
    for a in range(4 * k):
        t, f = a >> 2, a & 3
        key = frozenset(skel.vertex_of[4 * t + v] for v in range(4) if v != f)
        tr = skel.triangle_of[a]
        if tris_seen.setdefault(key, tr) != tr:
            return SimplicialCheck(False, f"two triangles share all vertices (triangles {tris_seen[key]} and {tr})")
    return SimplicialCheck(True, None)
