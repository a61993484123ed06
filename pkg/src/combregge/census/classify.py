"""Manifold classification for census slicing.

S^3 is only ever claimed when a Pachner-move simplification reaches a
catalog triangulation of S^3.  Trivial-homology triangulations whose
fundamental group maps onto A5 (the Poincare homology sphere and friends)
are reported unresolved without spending the simplification budget.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

from ..moves import move_sites, replace_cells
from ..triangulation.gluing import GluedTriangulation, boundary_of_4_simplex
from ..triangulation.homology import HomologyProfile, homology_h1, pi1_presentation
from ..triangulation.signature import iso_signature
from ..triangulation.skeleton import skeleton

S3_CONFIRMED = "S3-confirmed"
TRIVIAL_H1_UNRESOLVED = "trivial-H1-unresolved"
OTHER = "other"
UNCLASSIFIED = "unclassified"

RESTARTS = 64
MOVES_PER_RESTART = 10_000


@dataclass(frozen=True)
class ManifoldClass:
    label: str
    homology: HomologyProfile | None = None
    evidence: str = ""

    @property
    def key(self) -> str:
        """Short label used in histogram files."""
        if self.label == OTHER:
            return f"H1={self.homology}".replace(" ", "")
        return self.label

    @property
    def is_s3(self):
        return self.label == S3_CONFIRMED


def derive_seed(master: int, *parts) -> int:
    """Stable 64-bit seed from a master seed and any printable parts."""
    text = ":".join([str(master), *map(str, parts)]).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "little")


@lru_cache(maxsize=1)
def s3_catalog() -> frozenset[str]:
    """Signatures of all trivial-homology triangulations with at most two
    tetrahedra, plus the boundary of the 4-simplex.

    Every closed 3-manifold with a triangulation of at most two tetrahedra is
    S^3, S^2 x S^1 or a lens space, so trivial homology identifies S^3 there.
    """
    from .enumerate import enumerate_all

    sigs = {iso_signature(boundary_of_4_simplex())}
    for k in (1, 2):
        for tri in enumerate_all(k):
            if homology_h1(tri).trivial:
                sigs.add(iso_signature(tri))
    return frozenset(sigs)


# A5 as even permutations of five points.
_A5 = [p for p in permutations(range(5)) if sum(p[i] > p[j] for i in range(5) for j in range(i + 1, 5)) % 2 == 0]
_A5_INDEX = {p: i for i, p in enumerate(_A5)}
_A5_ID = _A5_INDEX[tuple(range(5))]
_A5_MUL = [[_A5_INDEX[tuple(a[b[x]] for x in range(5))] for b in _A5] for a in _A5]
_A5_INV = [_A5_INDEX[tuple(a.index(x) for x in range(5))] for a in _A5]
# One representative of each non-identity conjugacy class: (12)(34), (123), (12345), (12354).
_A5_CLASS_REPS = [
    _A5_INDEX[(1, 0, 3, 2, 4)],
    _A5_INDEX[(1, 2, 0, 3, 4)],
    _A5_INDEX[(1, 2, 3, 4, 0)],
    _A5_INDEX[(1, 2, 4, 0, 3)],
]


def _power(x, e):
    return x if e == 1 else _A5_INV[x]


def _propagate(values, relators):
    """Fill forced generator values; False on a violated relator."""
    changed = True
    while changed:
        changed = False
        for rel in relators:
            unknown = [i for i, (g, _) in enumerate(rel) if values[g] < 0]
            if not unknown:
                acc = _A5_ID
                for g, e in rel:
                    acc = _A5_MUL[acc][_power(values[g], e)]
                if acc != _A5_ID:
                    return False
            elif len(unknown) == 1:
                i = unknown[0]
                pre = _A5_ID
                for g, e in rel[:i]:
                    pre = _A5_MUL[pre][_power(values[g], e)]
                post = _A5_ID
                for g, e in rel[i + 1:]:
                    post = _A5_MUL[post][_power(values[g], e)]
                # pre * x^e * post = 1  =>  x^e = pre^-1 post^-1
                xe = _A5_MUL[_A5_INV[pre]][_A5_INV[post]]
                g, e = rel[i]
                values[g] = _power(xe, e)
                changed = True
    return True


def _search(values, relators):
    if not _propagate(values, relators):
        return None
    try:
        g = values.index(-1)
    except ValueError:
        return values
    for x in range(60):
        trial = list(values)
        trial[g] = x
        found = _search(trial, relators)
        if found is not None:
            return found
    return None


def maps_onto_a5(tri: GluedTriangulation, skel=None) -> bool:
    """True iff the fundamental group has a non-trivial homomorphism to A5.

    For a group with trivial abelianization any such map is onto.
    """
    ngens, relators = pi1_presentation(tri, skel)
    relators = [r for r in relators if r]
    for first in range(ngens):
        for rep in _A5_CLASS_REPS:
            values = [_A5_ID] * first + [rep] + [-1] * (ngens - first - 1)
            if _search(values, relators) is not None:
                return True
    return False


def _catalog_sizes(catalog):
    return {int(sig.split("-")[1]) for sig in catalog}


def simplify_to_catalog(tri: GluedTriangulation, seed: int, restarts=RESTARTS, moves=MOVES_PER_RESTART, catalog=None):
    """Randomised descent with 2-3/3-2/1-4/4-1 moves toward known S^3 triangulations.

    ``catalog`` defaults to the base catalog; callers may extend it with
    triangulations previously confirmed by this routine (each of those has
    its own move path to the base catalog).  Returns the restart index on
    success, or None.
    """
    catalog = s3_catalog() if catalog is None else catalog
    sizes = _catalog_sizes(catalog)
    cap = max(tri.tets + 3, 6)
    for r in range(restarts):
        rng = random.Random(derive_seed(seed, r))
        cur = tri
        for _ in range(moves):
            k = cur.tets
            if k in sizes and iso_signature(cur) in catalog:
                return r
            if k <= 2:
                break
            sites = move_sites(cur, skeleton(cur))
            down = [s for s in sites if s[0] in ("3-2", "4-1")]
            up = [s for s in sites if s[0] == "2-3"]
            if down and (rng.random() < 0.85 or not up or k >= cap):
                choice = rng.choice(down)
            elif up and k < cap:
                choice = rng.choice(up)
            else:
                break
            cur = replace_cells(cur, choice[2])
    return None


def classify_manifold(
    tri: GluedTriangulation, seed: int = 0, restarts=RESTARTS, moves=MOVES_PER_RESTART, known=None
) -> ManifoldClass:
    """Classify by first homology, then try to certify S^3 by simplification.

    ``known`` is an optional set of signatures already confirmed as S^3; it
    is searched together with the base catalog.
    """
    catalog = s3_catalog() if not known else s3_catalog() | frozenset(known)
    skel = skeleton(tri)
    h1 = homology_h1(tri, skel)
    if not h1.trivial:
        return ManifoldClass(OTHER, h1, "non-trivial first homology")
    sig = iso_signature(tri)
    if sig in catalog:
        return ManifoldClass(S3_CONFIRMED, h1, "catalog member")
    base = derive_seed(seed, sig)
    quick = simplify_to_catalog(tri, base, min(2, restarts), min(2000, moves), catalog)
    if quick is not None:
        return ManifoldClass(S3_CONFIRMED, h1, f"simplified to catalog (restart {quick})")
    if maps_onto_a5(tri, skel):
        return ManifoldClass(TRIVIAL_H1_UNRESOLVED, h1, "fundamental group maps onto A5")
    used = simplify_to_catalog(tri, derive_seed(base, "full"), restarts, moves, catalog)
    if used is not None:
        return ManifoldClass(S3_CONFIRMED, h1, f"simplified to catalog (restart {used})")
    return ManifoldClass(TRIVIAL_H1_UNRESOLVED, h1, "simplification budget exhausted")
