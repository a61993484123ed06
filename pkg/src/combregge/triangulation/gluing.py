"""Facet-gluing triangulations of closed 3-manifolds and their text format.

A triangulation with K tetrahedra is stored as two flat tuples indexed by
``4*t + f`` (face f of tetrahedron t, i.e. the face opposite vertex f):

* ``dest[4*t + f] = 4*t' + f'`` -- the face it is glued to;
* ``gluing[4*t + f] = p`` -- permutation index; vertex i of t maps to
  vertex ``PERMS[p][i]`` of t'.

Values are immutable; every operation that "changes" a triangulation
returns a new one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .perm import IDENTITY, INVERSE, PERMS, perm_from_string, perm_to_string


class GluingError(ValueError):
    """Raised for malformed gluing text or structurally invalid gluing data."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            where += ": "
        super().__init__(where + message)


@dataclass(frozen=True)
class GluedTriangulation:
    dest: tuple[int, ...]
    gluing: tuple[int, ...]

    def __post_init__(self):
        check_structure(self.dest, self.gluing)

    @classmethod
    def trusted(cls, dest, gluing):
        """Build without structural checks; callers guarantee validity."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "dest", tuple(dest))
        object.__setattr__(obj, "gluing", tuple(gluing))
        return obj

    @classmethod
    def from_gluings(cls, tets, gluings):
        """Build from ``{(t, f): (t2, f2, perm)}`` where perm is a 4-tuple or index.

        Only one direction of each gluing needs to be given.
        """
        size = 4 * tets
        dest = [-1] * size
        glu = [-1] * size
        for (t, f), (t2, f2, p) in gluings.items():
            if not isinstance(p, int):
                p = perm_from_string("".join(str(x) for x in p))
            _assign(dest, glu, 4 * t + f, 4 * t2 + f2, p, tets)
        return cls(tuple(dest), tuple(glu))

    @property
    def tets(self) -> int:
        return len(self.dest) // 4

    def partner(self, t, f):
        d = self.dest[4 * t + f]
        return d >> 2, d & 3, self.gluing[4 * t + f]

    def relabel(self, tet_order, vertex_perms):
        """Return the isomorphic triangulation where old tet ``tet_order[n]``
        becomes tet n and its old vertex ``PERMS[vertex_perms[n]][j]`` becomes
        vertex j."""
        from .perm import COMPOSE

        k = self.tets
        new_of = [0] * k
        for n, old in enumerate(tet_order):
            new_of[old] = n
        dest = [0] * (4 * k)
        glu = [0] * (4 * k)
        for n, old in enumerate(tet_order):
            lam = vertex_perms[n]
            for g in range(4):
                f = PERMS[lam][g]
                d = self.dest[4 * old + f]
                o2, f2 = d >> 2, d & 3
                m = new_of[o2]
                q = COMPOSE[INVERSE[vertex_perms[m]]][COMPOSE[self.gluing[4 * old + f]][lam]]
                dest[4 * n + g] = 4 * m + PERMS[q][g]
                glu[4 * n + g] = q
        return GluedTriangulation(tuple(dest), tuple(glu))

    def to_text(self) -> str:
        return format_gluing_text(self)

    def __repr__(self):
        return f"GluedTriangulation(tets={self.tets})"


def _assign(dest, glu, a, b, p, tets, line=None):
    if not (0 <= a < 4 * tets and 0 <= b < 4 * tets):
        raise GluingError(f"tetrahedron index out of range (tets {tets})", line)
    if a == b:
        raise GluingError(f"face ({a >> 2},{a & 3}) glued to itself", line)
    if PERMS[p][a & 3] != (b & 3):
        raise GluingError(
            f"permutation {perm_to_string(p)} does not carry face {a & 3} to face {b & 3}", line
        )
    for x, y, q in ((a, b, p), (b, a, INVERSE[p])):
        if dest[x] == -1:
            dest[x], glu[x] = y, q
        elif dest[x] != y or glu[x] != q:
            raise GluingError(f"face ({x >> 2},{x & 3}) glued twice inconsistently", line)


def check_structure(dest, gluing):
    size = len(dest)
    if size == 0 or size % 4 or len(gluing) != size:
        raise GluingError("gluing tables must be non-empty and of length 4K")
    for a in range(size):
        b = dest[a]
        if b == -1 or b is None:
            raise GluingError(f"unglued face ({a >> 2},{a & 3})")
        if b == a:
            raise GluingError(f"face ({a >> 2},{a & 3}) glued to itself")
        if not 0 <= b < size:
            raise GluingError(f"face ({a >> 2},{a & 3}) glued out of range")
        p = gluing[a]
        if PERMS[p][a & 3] != (b & 3):
            raise GluingError(f"gluing of face ({a >> 2},{a & 3}) does not match its target face")
        if dest[b] != a or gluing[b] != INVERSE[p]:
            raise GluingError(f"gluing of face ({a >> 2},{a & 3}) is not an involution")
    # Connectivity of the face-adjacency graph.
    k = size // 4
    seen = [False] * k
    seen[0] = True
    stack = [0]
    while stack:
        t = stack.pop()
        for f in range(4):
            u = dest[4 * t + f] >> 2
            if not seen[u]:
                seen[u] = True
                stack.append(u)
    if not all(seen):
        raise GluingError("face-adjacency graph is disconnected")


_HEADER = re.compile(r"^tets\s+(\d+)\s*$")
_LINE = re.compile(r"^(\d+)\s+(\d+)\s*:\s*(\d+)\s+(\d+)\s+(\S+)\s*$")


def parse_gluing_text(text: str) -> GluedTriangulation:
    """Parse the line-based gluing format.

    ::

        # optional comment
        tets 2
        0 0 : 1 0 0123
        ...

    Each line ``t f : t2 f2 p0p1p2p3`` glues face f of tet t to face f2 of
    tet t2, sending vertex i to ``p_i``.
    """
    tets = None
    dest = glu = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if tets is None:
            m = _HEADER.match(line)
            if not m:
                raise GluingError("expected header 'tets K'", lineno, 1)
            tets = int(m.group(1))
            if tets < 1:
                raise GluingError("tetrahedron count must be positive", lineno, 6)
            dest = [-1] * (4 * tets)
            glu = [-1] * (4 * tets)
            continue
        m = _LINE.match(line)
        if not m:
            col = _first_bad_column(raw)
            raise GluingError("expected 't f : t2 f2 perm'", lineno, col)
        t, f, t2, f2 = (int(m.group(i)) for i in range(1, 5))
        if f > 3 or f2 > 3:
            raise GluingError("face index must be 0..3", lineno)
        try:
            p = perm_from_string(m.group(5))
        except ValueError as exc:
            raise GluingError(str(exc), lineno, raw.index(m.group(5)) + 1) from None
        _assign(dest, glu, 4 * t + f, 4 * t2 + f2, p, tets, lineno)
    if tets is None:
        raise GluingError("missing header 'tets K'")
    open_faces = [a for a in range(4 * tets) if dest[a] == -1]
    if open_faces:
        raise GluingError("; ".join(f"unglued face ({a >> 2},{a & 3})" for a in open_faces))
    return GluedTriangulation(tuple(dest), tuple(glu))


def _first_bad_column(raw):
    # Column of the first character that cannot start a valid token sequence.
    tokens = ["\\d+", "\\d+", ":", "\\d+", "\\d+", "[0-3]{4}"]
    pos = 0
    for tok in tokens:
        while pos < len(raw) and raw[pos].isspace():
            pos += 1
        m = re.compile(tok).match(raw, pos)
        if not m:
            return pos + 1
        pos = m.end()
    return pos + 1


def format_gluing_text(tri: GluedTriangulation) -> str:
    """Write each gluing once, from the lexicographically smaller face."""
    lines = [f"tets {tri.tets}"]
    for a, b in enumerate(tri.dest):
        if a < b:
            lines.append(
                f"{a >> 2} {a & 3} : {b >> 2} {b & 3} {perm_to_string(tri.gluing[a])}"
            )
    return "\n".join(lines) + "\n"


def doubled_tetrahedron() -> GluedTriangulation:
    """Two tetrahedra glued along their boundaries by the identity (S^3)."""
    return GluedTriangulation.from_gluings(2, {(0, f): (1, f, IDENTITY) for f in range(4)})


def boundary_of_4_simplex() -> GluedTriangulation:
    """The boundary of the 4-simplex: five tetrahedra, one per omitted vertex."""
    from .perm import PERM_INDEX

    facets = [tuple(v for v in range(5) if v != i) for i in range(5)]
    gluings = {}
    for t, verts in enumerate(facets):
        for f in range(4):
            face = set(verts) - {verts[f]}
            for t2, verts2 in enumerate(facets):
                if t2 != t and face <= set(verts2):
                    f2 = verts2.index((set(verts2) - face).pop())
                    p = []
                    for i in range(4):
                        p.append(f2 if i == f else verts2.index(verts[i]))
                    gluings[(t, f)] = (t2, f2, PERM_INDEX[tuple(p)])
    return GluedTriangulation.from_gluings(5, gluings)
