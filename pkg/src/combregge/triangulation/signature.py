"""Canonical isomorphism signatures.

A *rooting* is a choice of start tetrahedron and one of its 24 vertex
labelings.  From a rooting, tetrahedra are renumbered in breadth-first
discovery order: faces are scanned as (new tet, new face) ascending, and a
tetrahedron reached for the first time receives the next index together
with the vertex labeling that makes the discovering gluing the identity.
Every gluing is recorded once, at the first face that sees it, as an
integer code::

    0                               gluing to a newly discovered tetrahedron
    1 + 24 * (4 * m + g) + q        gluing to face g of known tetrahedron m
                                    with permutation index q

The 2K codes form the serialization of the rooting.  The signature is the
lexicographically least serialization over all 24K rootings, written as::

    cdt1-<K>-<payload>

where the payload concatenates the codes as fixed-width lower-case base-36
numerals (width = digits needed for 96K).  Because the width is fixed, the
string order of two payloads with equal K matches the order of their code
sequences.
"""

from __future__ import annotations

from .gluing import GluedTriangulation, GluingError
from .perm import COMPOSE, INVERSE, PERMS

_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"
PREFIX = "cdt1"


def serialize(dest, glu, root, sigma, bound=None):
    """Code sequence for one rooting.

    With ``bound`` given, return None as soon as the sequence is known to be
    lexicographically greater than ``bound``.
    """
    k = len(dest) >> 2
    newidx = [-1] * k
    order = [root]
    lam = [sigma]
    newidx[root] = 0
    covered = bytearray(4 * k)
    seq = []
    tight = bound is not None
    nxt = 1
    for n in range(k):
        o = order[n]
        ln = lam[n]
        pln = PERMS[ln]
        for g in range(4):
            if covered[4 * n + g]:
                continue
            a = 4 * o + pln[g]
            d = dest[a]
            o2 = d >> 2
            p = glu[a]
            m = newidx[o2]
            if m == -1:
                m = nxt
                nxt += 1
                newidx[o2] = m
                order.append(o2)
                lam.append(COMPOSE[p][ln])
                code = 0
                covered[4 * m + g] = 1
            else:
                q = COMPOSE[INVERSE[lam[m]]][COMPOSE[p][ln]]
                g2 = PERMS[q][g]
                code = 1 + 24 * (4 * m + g2) + q
                covered[4 * m + g2] = 1
            covered[4 * n + g] = 1
            if tight:
                b = bound[len(seq)]
                if code > b:
                    return None
                if code < b:
                    tight = False
            seq.append(code)
    return seq


def canonical_codes(tri: GluedTriangulation):
    dest, glu = tri.dest, tri.gluing
    best = None
    for root in range(tri.tets):
        for sigma in range(24):
            seq = serialize(dest, glu, root, sigma, best)
            if seq is not None:
                best = seq
    return best


def is_canonical(tri: GluedTriangulation) -> bool:
    """True iff the identity rooting at tet 0 already gives the least codes."""
    dest, glu = tri.dest, tri.gluing
    own = serialize(dest, glu, 0, 0)
    for root in range(tri.tets):
        for sigma in range(24):
            seq = serialize(dest, glu, root, sigma, own)
            if seq is not None and seq != own:
                return False
    return True


def automorphism_count(tri: GluedTriangulation, skel=None) -> int:
    """Order of the combinatorial automorphism group.

    Counts rootings reproducing the serialization of the identity rooting at
    tet 0.  Rootings whose local edge-degree pattern differs from that of
    the reference are skipped without a traversal.
    """
    from .skeleton import skeleton

    skel = skel or skeleton(tri)
    deg = skel.edge_degree
    edge_of = skel.edge_of
    from .perm import EDGES, EDGE_INDEX

    def local(t, sigma):
        p = PERMS[sigma]
        return tuple(deg[edge_of[6 * t + EDGE_INDEX[p[a]][p[b]]]] for a, b in EDGES)

    dest, glu = tri.dest, tri.gluing
    ref = serialize(dest, glu, 0, 0)
    ref_local = local(0, 0)
    count = 0
    for root in range(tri.tets):
        for sigma in range(24):
            if local(root, sigma) != ref_local:
                continue
            seq = serialize(dest, glu, root, sigma, ref)
            if seq == ref:
                count += 1
    return count


def _width(k):
    top = 96 * k
    w = 1
    while 36 ** w <= top:
        w += 1
    return w


def encode_codes(k, codes) -> str:
    w = _width(k)
    parts = []
    for c in codes:
        digits = []
        for _ in range(w):
            c, r = divmod(c, 36)
            digits.append(_DIGITS[r])
        parts.append("".join(reversed(digits)))
    return f"{PREFIX}-{k}-{''.join(parts)}"


def iso_signature(tri: GluedTriangulation) -> str:
    return encode_codes(tri.tets, canonical_codes(tri))


def decode_codes(k, codes) -> GluedTriangulation:
    """Rebuild the triangulation labelled by the rooting that produced ``codes``."""
    dest = [-1] * (4 * k)
    glu = [-1] * (4 * k)
    it = iter(codes)
    used = 1
    for n in range(k):
        if n >= used:
            raise GluingError("signature describes a disconnected gluing")
        for g in range(4):
            a = 4 * n + g
            if dest[a] != -1:
                continue
            try:
                code = next(it)
            except StopIteration:
                raise GluingError("signature payload too short") from None
            if code == 0:
                if used >= k:
                    raise GluingError("signature discovers too many tetrahedra")
                b, q = 4 * used + g, 0
                used += 1
            else:
                x, q = divmod(code - 1, 24)
                b = x
                if b >> 2 >= used or PERMS[q][g] != (b & 3) or dest[b] != -1 or b == a:
                    raise GluingError("signature payload is inconsistent")
            dest[a], glu[a] = b, q
            dest[b], glu[b] = a, INVERSE[q]
    if next(it, None) is not None:
        raise GluingError("signature payload too long")
    return GluedTriangulation(tuple(dest), tuple(glu))


def decode_signature(sig: str) -> GluedTriangulation:
    try:
        prefix, ktext, payload = sig.split("-")
        k = int(ktext)
    except ValueError:
        raise GluingError(f"malformed signature {sig!r}") from None
    if prefix != PREFIX or k < 1:
        raise GluingError(f"malformed signature {sig!r}")
    w = _width(k)
    if len(payload) != 2 * k * w or any(c not in _DIGITS for c in payload):
        raise GluingError(f"malformed signature payload {sig!r}")
    codes = [int(payload[i:i + w], 36) for i in range(0, len(payload), w)]
    return decode_codes(k, codes)
