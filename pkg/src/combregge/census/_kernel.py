"""Compiled backtracking core of the census enumerator.

Gluings are built in breadth-first form: faces are decided in (tet, face)
order and a face either opens a new tetrahedron (identity gluing onto the
same face) or pairs with a later unglued face of an existing tetrahedron.
Three prunings keep the tree small:

* an edge union-find with orientation parity rejects any edge identified
  with itself in reverse as soon as it happens;
* a vertex union-find tracks open corners; when a vertex link closes its
  Euler characteristic must be 2;
* every rooting of the partial gluing is serialized against the identity
  rooting and the branch dies as soon as some rooting is strictly smaller.

With all three, every leaf is a canonical valid closed triangulation.
"""

import numpy as np
from numba import njit

from ..triangulation.perm import COMPOSE, EDGE_INDEX, EDGES, FACE_EDGES, INVERSE, PERMS, SIGN

P = np.array(PERMS, dtype=np.int64)
COMP = np.array(COMPOSE, dtype=np.int64)
INV = np.array(INVERSE, dtype=np.int64)
SGN = np.array(SIGN, dtype=np.int64)
EIDX = np.array(EDGE_INDEX, dtype=np.int64)
EV = np.array(EDGES, dtype=np.int64)
FE = np.array(FACE_EDGES, dtype=np.int64)
# PTO[g, g2] lists the 6 permutations carrying vertex g to g2.
PTO = np.array(
    [[[q for q in range(24) if PERMS[q][g] == g2] for g2 in range(4)] for g in range(4)],
    dtype=np.int64,
)

# Slots of the small counter array shared by the recursion.
ELOG, VLOG, NOUT, NOWN, NODES, STAMP, OVERFLOW = range(7)


@njit(cache=True)
def _find(parent, parity, x):
    acc = 0
    while parent[x] != x:
        acc ^= parity[x]
        x = parent[x]
    return x, acc


@njit(cache=True)
def _vfind(vpar, x):
    while vpar[x] != x:
        x = vpar[x]
    return x


@njit(cache=True)
def _undo_edges(ctr, elog, parent, parity, rank, mark):
    while ctr[ELOG] > mark:
        ctr[ELOG] -= 1
        i = ctr[ELOG]
        y = elog[i, 0]
        parent[y] = y
        parity[y] = 0
        if elog[i, 2]:
            rank[elog[i, 1]] -= 1


@njit(cache=True)
def _glue_edges(a, b, q, ctr, elog, parent, parity, rank):
    t = a >> 2
    f = a & 3
    t2 = b >> 2
    mark = ctr[ELOG]
    for i in range(3):
        e = FE[f, i]
        u = EV[e, 0]
        w = EV[e, 1]
        pu = P[q, u]
        pw = P[q, w]
        rel = 1 if pu > pw else 0
        x, px = _find(parent, parity, 6 * t + e)
        y, py = _find(parent, parity, 6 * t2 + EIDX[pu, pw])
        if x == y:
            if (px ^ py) != rel:
                _undo_edges(ctr, elog, parent, parity, rank, mark)
                return False
            continue
        if rank[x] < rank[y]:
            x, y = y, x
            px, py = py, px
        parent[y] = x
        parity[y] = px ^ py ^ rel
        bumped = 1 if rank[x] == rank[y] else 0
        rank[x] += bumped
        n = ctr[ELOG]
        elog[n, 0] = y
        elog[n, 1] = x
        elog[n, 2] = bumped
        ctr[ELOG] = n + 1
    return True


@njit(cache=True)
def _link_closed_ok(r, used, ctr, vpar, parent, parity, seen):
    ctr[STAMP] += 1
    stamp = ctr[STAMP]
    corners = 0
    ends = 0
    for c in range(4 * used):
        if _vfind(vpar, c) != r:
            continue
        corners += 1
        t = c >> 2
        v = c & 3
        for w in range(4):
            if w == v:
                continue
            root, par = _find(parent, parity, 6 * t + EIDX[v, w])
            key = 2 * root + ((1 if v > w else 0) ^ par)
            if seen[key] != stamp:
                seen[key] = stamp
                ends += 1
    return 2 * ends - corners == 4


@njit(cache=True)
def _undo_verts(ctr, vlog, vpar, vopen, vcnt, mark):
    while ctr[VLOG] > mark:
        ctr[VLOG] -= 1
        i = ctr[VLOG]
        if vlog[i, 0] == 0:
            vopen[vlog[i, 1]] += 1
        else:
            r2 = vlog[i, 1]
            r1 = vlog[i, 2]
            vpar[r2] = r2
            vopen[r1] -= vopen[r2]
            vcnt[r1] -= vcnt[r2]


@njit(cache=True)
def _push_v(ctr, vlog, kind, x, y):
    n = ctr[VLOG]
    vlog[n, 0] = kind
    vlog[n, 1] = x
    vlog[n, 2] = y
    ctr[VLOG] = n + 1


@njit(cache=True)
def _glue_verts(a, b, q, used, ctr, vlog, vpar, vopen, vcnt, parent, parity, seen):
    t = a >> 2
    f = a & 3
    t2 = b >> 2
    touched = np.empty(3, dtype=np.int64)
    n = 0
    for v in range(4):
        if v == f:
            continue
        r1 = _vfind(vpar, 4 * t + v)
        r2 = _vfind(vpar, 4 * t2 + P[q, v])
        vopen[r1] -= 1
        vopen[r2] -= 1
        _push_v(ctr, vlog, 0, r1, 0)
        _push_v(ctr, vlog, 0, r2, 0)
        if r1 != r2:
            if vcnt[r1] < vcnt[r2]:
                r1, r2 = r2, r1
            vpar[r2] = r1
            vopen[r1] += vopen[r2]
            vcnt[r1] += vcnt[r2]
            _push_v(ctr, vlog, 1, r2, r1)
        touched[n] = r1
        n += 1
    for i in range(3):
        r = _vfind(vpar, touched[i])
        if vopen[r] == 0:
            dup = False
            for j in range(i):
                if _vfind(vpar, touched[j]) == r:
                    dup = True
            if not dup and not _link_closed_ok(r, used, ctr, vpar, parent, parity, seen):
                return False
    return True


@njit(cache=True)
def _partial_ok(dest, glu, k, used, own, ctr, newidx, order, lam, covered):
    """False iff some rooting serializes strictly below ``own`` on the decided prefix."""
    nown = ctr[NOWN]
    for root in range(used):
        for sigma in range(24):
            if root == 0 and sigma == 0:
                continue
            for i in range(k):
                newidx[i] = -1
            for i in range(4 * k):
                covered[i] = 0
            newidx[root] = 0
            order[0] = root
            lam[0] = sigma
            nxt = 1
            j = 0
            stop = False
            for n in range(k):
                if n >= nxt:
                    break
                o = order[n]
                ln = lam[n]
                for g in range(4):
                    if covered[4 * n + g]:
                        continue
                    if j >= nown:
                        stop = True
                        break
                    a = 4 * o + P[ln, g]
                    d = dest[a]
                    if d == -1:
                        stop = True
                        break
                    o2 = d >> 2
                    p = glu[a]
                    m = newidx[o2]
                    if m == -1:
                        m = nxt
                        nxt += 1
                        newidx[o2] = m
                        order[m] = o2
                        lam[m] = COMP[p, ln]
                        code = 0
                        covered[4 * m + g] = 1
                    else:
                        qq = COMP[INV[lam[m]], COMP[p, ln]]
                        g2 = P[qq, g]
                        code = 1 + 24 * (4 * m + g2) + qq
                        covered[4 * m + g2] = 1
                    covered[4 * n + g] = 1
                    if code < own[j]:
                        return False
                    if code > own[j]:
                        stop = True
                        break
                    j += 1
                if stop:
                    break
    return True


# The mutually recursive pair is not disk-cached: numba's cache does not
# reload recursive call graphs reliably.
@njit
def _try(pos, b, q, used_after, k, orient, first, dest, glu, sign, ctr, own, elog, parent, parity, rank,
         vlog, vpar, vopen, vcnt, seen, newidx, order, lam, covered, out_dest, out_glu, free_after, code):
    dest[pos] = b
    glu[pos] = q
    dest[b] = pos
    glu[b] = INV[q]
    emark = ctr[ELOG]
    if _glue_edges(pos, b, q, ctr, elog, parent, parity, rank):
        vmark = ctr[VLOG]
        if _glue_verts(pos, b, q, used_after, ctr, vlog, vpar, vopen, vcnt, parent, parity, seen):
            own[ctr[NOWN]] = code
            ctr[NOWN] += 1
            _rec(pos + 1, used_after, free_after, k, orient, -1, dest, glu, sign, ctr, own, elog, parent,
                 parity, rank, vlog, vpar, vopen, vcnt, seen, newidx, order, lam, covered, out_dest, out_glu)
            ctr[NOWN] -= 1
        _undo_verts(ctr, vlog, vpar, vopen, vcnt, vmark)
        _undo_edges(ctr, elog, parent, parity, rank, emark)
    dest[pos] = -1
    dest[b] = -1


@njit
def _rec(pos, used, free, k, orient, first, dest, glu, sign, ctr, own, elog, parent, parity, rank,
         vlog, vpar, vopen, vcnt, seen, newidx, order, lam, covered, out_dest, out_glu):
    ctr[NODES] += 1
    if not _partial_ok(dest, glu, k, used, own, ctr, newidx, order, lam, covered):
        return
    while pos < 4 * used and dest[pos] != -1:
        pos += 1
    if pos == 4 * used:
        if used < k:
            return
        n = ctr[NOUT]
        if n >= out_dest.shape[0]:
            ctr[OVERFLOW] = 1
            return
        for i in range(4 * k):
            out_dest[n, i] = dest[i]
            out_glu[n, i] = glu[i]
        ctr[NOUT] = n + 1
        return
    tn = pos >> 2
    g = pos & 3
    choice = 0
    if used < k:
        if first < 0 or first == choice:
            b = 4 * used + g
            sign[used] = -sign[tn]
            _try(pos, b, 0, used + 1, k, orient, first, dest, glu, sign, ctr, own, elog, parent, parity,
                 rank, vlog, vpar, vopen, vcnt, seen, newidx, order, lam, covered, out_dest, out_glu,
                 free + 2, 0)
    choice += 1
    if free == 2 and used < k:
        return
    for b in range(pos + 1, 4 * used):
        if dest[b] != -1:
            continue
        g2 = b & 3
        t2 = b >> 2
        for i in range(6):
            q = PTO[g, g2, i]
            if orient and SGN[q] != -sign[tn] * sign[t2]:
                continue
            if first < 0 or first == choice:
                _try(pos, b, q, used, k, orient, first, dest, glu, sign, ctr, own, elog, parent, parity,
                     rank, vlog, vpar, vopen, vcnt, seen, newidx, order, lam, covered, out_dest, out_glu,
                     free - 2, 1 + 24 * b + q)
            choice += 1


def root_choices(k, orientable):
    """Branch indices at the first face, the unit of work partitioning."""
    start = 0 if k > 1 else 1
    return list(range(start, 1 + 3 * (3 if orientable else 6)))


def run(k, orientable, first=-1, capacity=1 << 16):
    """Enumerate canonical gluings; returns (dest array, gluing array, nodes)."""
    while True:
        dest = np.full(4 * k, -1, dtype=np.int64)
        glu = np.full(4 * k, -1, dtype=np.int64)
        sign = np.zeros(k, dtype=np.int64)
        sign[0] = 1
        ctr = np.zeros(7, dtype=np.int64)
        own = np.zeros(4 * k, dtype=np.int64)
        elog = np.zeros((6 * k + 1, 3), dtype=np.int64)
        parent = np.arange(6 * k, dtype=np.int64)
        parity = np.zeros(6 * k, dtype=np.int64)
        rank = np.zeros(6 * k, dtype=np.int64)
        vlog = np.zeros((20 * k, 3), dtype=np.int64)
        vpar = np.arange(4 * k, dtype=np.int64)
        vopen = np.full(4 * k, 3, dtype=np.int64)
        vcnt = np.ones(4 * k, dtype=np.int64)
        seen = np.zeros(12 * k, dtype=np.int64)
        newidx = np.zeros(k, dtype=np.int64)
        order = np.zeros(k, dtype=np.int64)
        lam = np.zeros(k, dtype=np.int64)
        covered = np.zeros(4 * k, dtype=np.int64)
        out_dest = np.zeros((capacity, 4 * k), dtype=np.int8)
        out_glu = np.zeros((capacity, 4 * k), dtype=np.int8)
        # The first face has a choice index local to position 0 only.
        _rec(0, 1, 4, k, bool(orientable), first, dest, glu, sign, ctr, own, elog, parent, parity, rank,
             vlog, vpar, vopen, vcnt, seen, newidx, order, lam, covered, out_dest, out_glu)
        if not ctr[OVERFLOW]:
            n = ctr[NOUT]
            return out_dest[:n].copy(), out_glu[:n].copy(), int(ctr[NODES])
        capacity *= 4
