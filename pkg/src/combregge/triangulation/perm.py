"""Permutations of {0,1,2,3}, addressed by their index in lexicographic order.

All gluing data stores permutation *indices* (0..23); the tables below make
composition, inversion and parity lookups constant-time.
"""

from itertools import permutations

PERMS = tuple(permutations(range(4)))
PERM_INDEX = {p: i for i, p in enumerate(PERMS)}
IDENTITY = 0


def _parity(p):
    inversions = sum(1 for i in range(4) for j in range(i + 1, 4) if p[i] > p[j])
    return -1 if inversions % 2 else 1


# COMPOSE[a][b] is the index of x -> PERMS[a][PERMS[b][x]].
COMPOSE = tuple(
    tuple(PERM_INDEX[tuple(p[q[x]] for x in range(4))] for q in PERMS) for p in PERMS
)
INVERSE = tuple(PERM_INDEX[tuple(p.index(x) for x in range(4))] for p in PERMS)
SIGN = tuple(_parity(p) for p in PERMS)

# Edges of a tetrahedron as sorted vertex pairs, and the reverse lookup.
EDGES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
EDGE_INDEX = [[-1] * 4 for _ in range(4)]
for _i, (_a, _b) in enumerate(EDGES):
    EDGE_INDEX[_a][_b] = EDGE_INDEX[_b][_a] = _i

# Vertices of the face opposite vertex f, ascending.
FACE_VERTICES = tuple(tuple(v for v in range(4) if v != f) for f in range(4))
# Edges lying in the face opposite vertex f.
FACE_EDGES = tuple(
    tuple(EDGE_INDEX[a][b] for a, b in EDGES if f not in (a, b)) for f in range(4)
)


def perm_from_string(text):
    """Parse one-line notation such as ``"1032"``."""
    if len(text) != 4 or sorted(text) != ["0", "1", "2", "3"]:
        raise ValueError(f"not a permutation of 0123: {text!r}")
    return PERM_INDEX[tuple(int(c) for c in text)]


def perm_to_string(index):
    return "".join(str(x) for x in PERMS[index])
