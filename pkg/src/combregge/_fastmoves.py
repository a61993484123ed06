"""Compiled mirror of the Pachner-move layer, used by the sampler's inner loop.

Array layout follows the Python implementation exactly: the same orbit
numbering, the same move order and the same relabelling on application,
so the two routes can be compared move for move in tests.  A move is a
row of 22 integers: kind index (position in ``moves.KINDS``), number of
cells, then (tet, four labels) per cell.
"""

import numpy as np
from numba import njit

from .triangulation.perm import EDGE_INDEX, EDGES, FACE_EDGES, INVERSE, PERMS, COMPOSE

P = np.array(PERMS, dtype=np.int64)
INV = np.array(INVERSE, dtype=np.int64)
COMP = np.array(COMPOSE, dtype=np.int64)
EIDX = np.array(EDGE_INDEX, dtype=np.int64)
EV = np.array(EDGES, dtype=np.int64)
FE = np.array(FACE_EDGES, dtype=np.int64)
PIDX = np.full(256, -1, dtype=np.int64)
for _i, _p in enumerate(PERMS):
    PIDX[_p[0] * 64 + _p[1] * 16 + _p[2] * 4 + _p[3]] = _i

K14, K41, K23, K32 = 0, 1, 2, 3
DELTA_TETS = np.array([3, -3, 1, -1], dtype=np.int64)
MOVE_WIDTH = 22


@njit(cache=True)
def _find(par, x):
    while par[x] != x:
        par[x] = par[par[x]]
        x = par[x]
    return x


@njit(cache=True)
def _union(par, x, y):
    x = _find(par, x)
    y = _find(par, y)
    if x != y:
        if x < y:
            par[y] = x
        else:
            par[x] = y


@njit(cache=True)
def light_skeleton(dest, glu, k, vof, eof, tri_of, edeg, vcorn, vpar, epar, idmap):
    """Orbit ids (first-occurrence order), edge degrees and vertex corner counts.

    Returns (N0, N1, N2).
    """
    for i in range(4 * k):
        vpar[i] = i
    for i in range(6 * k):
        epar[i] = i
    for a in range(4 * k):
        b = dest[a]
        if b < a:
            continue
        t = a >> 2
        f = a & 3
        t2 = b >> 2
        q = glu[a]
        for v in range(4):
            if v != f:
                _union(vpar, 4 * t + v, 4 * t2 + P[q, v])
        for i in range(3):
            e = FE[f, i]
            _union(epar, 6 * t + e, 6 * t2 + EIDX[P[q, EV[e, 0]], P[q, EV[e, 1]]])
    for i in range(6 * k):
        idmap[i] = -1
    n0 = 0
    for c in range(4 * k):
        r = _find(vpar, c)
        if idmap[r] < 0:
            idmap[r] = n0
            vcorn[n0] = 0
            n0 += 1
        vof[c] = idmap[r]
        vcorn[idmap[r]] += 1
    for i in range(6 * k):
        idmap[i] = -1
    n1 = 0
    for i in range(6 * k):
        r = _find(epar, i)
        if idmap[r] < 0:
            idmap[r] = n1
            edeg[n1] = 0
            n1 += 1
        eof[i] = idmap[r]
        edeg[idmap[r]] += 1
    n2 = 0
    for a in range(4 * k):
        b = dest[a]
        if a < b:
            tri_of[a] = n2
            tri_of[b] = n2
            n2 += 1
    return n0, n1, n2


@njit(cache=True)
def _missing(mv, c):
    base = 2 + 5 * c
    return 10 - mv[base + 1] - mv[base + 2] - mv[base + 3] - mv[base + 4]


@njit(cache=True)
def _pos(j, lab):
    return lab if lab < j else lab - 1


@njit(cache=True)
def pattern_ok(dest, glu, mv):
    n = mv[1]
    for c in range(n):
        t = mv[2 + 5 * c]
        for c2 in range(c):
            if mv[2 + 5 * c2] == t:
                return False
    seen = np.zeros(5, dtype=np.int64)
    for c in range(n):
        i = _missing(mv, c)
        if i < 0 or i > 4 or seen[i]:
            return False
        seen[i] = 1
        # labels must be exactly {0..4} minus i
        mask = 0
        for v in range(4):
            lab = mv[2 + 5 * c + 1 + v]
            if lab < 0 or lab > 4 or lab == i:
                return False
            mask |= 1 << lab
        if mask != (31 ^ (1 << i)):
            return False
    for ca in range(n):
        ia = _missing(mv, ca)
        ta = mv[2 + 5 * ca]
        for cb in range(n):
            ib = _missing(mv, cb)
            if ib <= ia:
                continue
            tb = mv[2 + 5 * cb]
            fa = -1
            fb = -1
            for v in range(4):
                if mv[2 + 5 * ca + 1 + v] == ib:
                    fa = v
                if mv[2 + 5 * cb + 1 + v] == ia:
                    fb = v
            if dest[4 * ta + fa] != 4 * tb + fb:
                return False
            q = glu[4 * ta + fa]
            for v in range(4):
                if v != fa and mv[2 + 5 * cb + 1 + P[q, v]] != mv[2 + 5 * ca + 1 + v]:
                    return False
    return True


@njit(cache=True)
def _put_cell(mv, c, t, l0, l1, l2, l3):
    base = 2 + 5 * c
    mv[base] = t
    mv[base + 1] = l0
    mv[base + 2] = l1
    mv[base + 3] = l2
    mv[base + 4] = l3


@njit(cache=True)
def _cells_23(dest, glu, a, mv):
    t = a >> 2
    f = a & 3
    b = dest[a]
    t2 = b >> 2
    f2 = b & 3
    if t == t2:
        return False
    la = np.zeros(4, dtype=np.int64)
    la[f] = 3
    lab = 0
    for v in range(4):
        if v != f:
            la[v] = lab
            lab += 1
    q = glu[a]
    lb = np.zeros(4, dtype=np.int64)
    lb[f2] = 4
    for v in range(4):
        if v != f:
            lb[P[q, v]] = la[v]
    mv[0] = K23
    mv[1] = 2
    _put_cell(mv, 0, t, la[0], la[1], la[2], la[3])
    _put_cell(mv, 1, t2, lb[0], lb[1], lb[2], lb[3])
    return True


@njit(cache=True)
def _cells_32(dest, glu, i, mv):
    t0 = i // 6
    e = i % 6
    u = EV[e, 0]
    w = EV[e, 1]
    cur = np.zeros(4, dtype=np.int64)
    other = 1
    for v in range(4):
        if v == u:
            cur[v] = 3
        elif v == w:
            cur[v] = 4
        else:
            cur[v] = other
            other += 1
    mv[0] = K32
    mv[1] = 3
    _put_cell(mv, 0, t0, cur[0], cur[1], cur[2], cur[3])
    ct = t0
    nl = np.zeros(4, dtype=np.int64)
    for step in range(2):
        leave = 2 if step == 0 else 1
        new = 0 if step == 0 else 2
        f = 0
        for v in range(4):
            if cur[v] == leave:
                f = v
        d = dest[4 * ct + f]
        q = glu[4 * ct + f]
        for v in range(4):
            nl[P[q, v]] = new if v == f else cur[v]
        ct = d >> 2
        for v in range(4):
            cur[v] = nl[v]
        _put_cell(mv, step + 1, ct, cur[0], cur[1], cur[2], cur[3])


@njit(cache=True)
def _cells_41(dest, glu, corner, mv):
    t0 = corner >> 2
    c0 = corner & 3
    l0 = np.zeros(4, dtype=np.int64)
    l0[c0] = 4
    lab = 0
    for v in range(4):
        if v != c0:
            l0[v] = lab
            lab += 1
    mv[0] = K41
    mv[1] = 4
    _put_cell(mv, 0, t0, l0[0], l0[1], l0[2], l0[3])
    nl = np.zeros(4, dtype=np.int64)
    c = 1
    for f in range(4):
        if f == c0:
            continue
        d = dest[4 * t0 + f]
        q = glu[4 * t0 + f]
        for v in range(4):
            nl[P[q, v]] = 3 if v == f else l0[v]
        _put_cell(mv, c, d >> 2, nl[0], nl[1], nl[2], nl[3])
        c += 1


@njit(cache=True)
def list_moves(dest, glu, k, kinds, vof, eof, tri_of, edeg, vcorn, n0, n1, out):
    """Fill ``out`` with every applicable move of the enabled kinds; returns the count."""
    m = 0
    if kinds[K14]:
        for t in range(k):
            out[m, 0] = K14
            out[m, 1] = 1
            _put_cell(out[m], 0, t, 0, 1, 2, 3)
            m += 1
    if kinds[K41]:
        for v in range(n0):
            if vcorn[v] != 4:
                continue
            for c in range(4 * k):
                if vof[c] == v:
                    _cells_41(dest, glu, c, out[m])
                    if pattern_ok(dest, glu, out[m]):
                        m += 1
                    break
    if kinds[K23]:
        last = -1
        for a in range(4 * k):
            if dest[a] > a and tri_of[a] > last:
                last = tri_of[a]
                if _cells_23(dest, glu, a, out[m]):
                    m += 1
    if kinds[K32]:
        for e in range(n1):
            if edeg[e] != 3:
                continue
            for i in range(6 * k):
                if eof[i] == e:
                    _cells_32(dest, glu, i, out[m])
                    if pattern_ok(dest, glu, out[m]):
                        m += 1
                    break
    return m


@njit(cache=True)
def _pidx(p0, p1, p2, p3):
    return PIDX[p0 * 64 + p1 * 16 + p2 * 4 + p3]


@njit(cache=True)
def replace_cells(dest, glu, k, mv, nd, ng, oldpos, newidx):
    """Write the result of applying ``mv`` into (nd, ng); returns the new K."""
    n = mv[1]
    for t in range(k):
        oldpos[t] = -1
    removed = np.zeros(5, dtype=np.int64)
    for c in range(n):
        oldpos[mv[2 + 5 * c]] = c
        removed[_missing(mv, c)] = 1
    new_tet = np.full(5, -1, dtype=np.int64)
    base = 0
    for t in range(k):
        if oldpos[t] < 0:
            newidx[t] = base
            base += 1
    nk = base
    for j in range(5):
        if not removed[j]:
            new_tet[j] = nk
            nk += 1
    for i in range(4 * nk):
        nd[i] = -1
        ng[i] = -1
    for t in range(k):
        if oldpos[t] >= 0:
            continue
        for f in range(4):
            d = dest[4 * t + f]
            if oldpos[d >> 2] < 0:
                nd[4 * newidx[t] + f] = 4 * newidx[d >> 2] + (d & 3)
                ng[4 * newidx[t] + f] = glu[4 * t + f]
    perm = np.zeros(4, dtype=np.int64)
    for j1 in range(5):
        if removed[j1]:
            continue
        for j2 in range(j1 + 1, 5):
            if removed[j2]:
                continue
            for lab in range(5):
                if lab != j1 and lab != j2:
                    perm[_pos(j1, lab)] = _pos(j2, lab)
            perm[_pos(j1, j2)] = _pos(j2, j1)
            q = _pidx(perm[0], perm[1], perm[2], perm[3])
            a = 4 * new_tet[j1] + _pos(j1, j2)
            b = 4 * new_tet[j2] + _pos(j2, j1)
            nd[a] = b
            ng[a] = q
            nd[b] = a
            ng[b] = INV[q]
    old_of_new = np.zeros(4, dtype=np.int64)
    for c in range(n):
        t = mv[2 + 5 * c]
        i = _missing(mv, c)
        for f in range(4):
            j = mv[2 + 5 * c + 1 + f]
            if removed[j]:
                continue
            g = _pos(j, i)
            for v in range(4):
                if v == f:
                    old_of_new[g] = v
                else:
                    old_of_new[_pos(j, mv[2 + 5 * c + 1 + v])] = v
            d = dest[4 * t + f]
            t2 = d >> 2
            f2 = d & 3
            q0 = glu[4 * t + f]
            a = 4 * new_tet[j] + g
            c2 = oldpos[t2]
            if c2 >= 0:
                j2 = mv[2 + 5 * c2 + 1 + f2]
                i2 = _missing(mv, c2)
                for x in range(4):
                    y = P[q0, old_of_new[x]]
                    if y == f2:
                        perm[x] = _pos(j2, i2)
                    else:
                        perm[x] = _pos(j2, mv[2 + 5 * c2 + 1 + y])
                nd[a] = 4 * new_tet[j2] + _pos(j2, i2)
                ng[a] = _pidx(perm[0], perm[1], perm[2], perm[3])
            else:
                for x in range(4):
                    perm[x] = P[q0, old_of_new[x]]
                q = _pidx(perm[0], perm[1], perm[2], perm[3])
                b = 4 * newidx[t2] + f2
                nd[a] = b
                ng[a] = q
                nd[b] = a
                ng[b] = INV[q]
    return nk


@njit(cache=True)
def _serialize_matches(dest, glu, k, root, sigma, ref, newidx, order, lam, covered):
    """True iff rooting (root, sigma) serializes exactly to ``ref``."""
    for i in range(k):
        newidx[i] = -1
    for i in range(4 * k):
        covered[i] = 0
    newidx[root] = 0
    order[0] = root
    lam[0] = sigma
    nxt = 1
    j = 0
    for n in range(k):
        o = order[n]
        ln = lam[n]
        for g in range(4):
            if covered[4 * n + g]:
                continue
            a = 4 * o + P[ln, g]
            d = dest[a]
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
            if ref[j] != code:
                return False
            j += 1
    return True


@njit(cache=True)
def _reference(dest, glu, k, ref, newidx, order, lam, covered):
    """Serialization of the identity rooting into ``ref`` (length 2K)."""
    for i in range(k):
        newidx[i] = -1
    for i in range(4 * k):
        covered[i] = 0
    newidx[0] = 0
    order[0] = 0
    lam[0] = 0
    nxt = 1
    j = 0
    for n in range(k):
        o = order[n]
        ln = lam[n]
        for g in range(4):
            if covered[4 * n + g]:
                continue
            a = 4 * o + P[ln, g]
            d = dest[a]
            o2 = d >> 2
            p = glu[a]
            m = newidx[o2]
            if m == -1:
                m = nxt
                nxt += 1
                newidx[o2] = m
                order[m] = o2
                lam[m] = COMP[p, ln]
                ref[j] = 0
                covered[4 * m + g] = 1
            else:
                qq = COMP[INV[lam[m]], COMP[p, ln]]
                g2 = P[qq, g]
                ref[j] = 1 + 24 * (4 * m + g2) + qq
                covered[4 * m + g2] = 1
            covered[4 * n + g] = 1
            j += 1


@njit(cache=True)
def automorphism_count(dest, glu, k):
    ref = np.zeros(2 * k, dtype=np.int64)
    newidx = np.zeros(k, dtype=np.int64)
    order = np.zeros(k, dtype=np.int64)
    lam = np.zeros(k, dtype=np.int64)
    covered = np.zeros(4 * k, dtype=np.int64)
    _reference(dest, glu, k, ref, newidx, order, lam, covered)
    count = 0
    for root in range(k):
        for sigma in range(24):
            if _serialize_matches(dest, glu, k, root, sigma, ref, newidx, order, lam, covered):
                count += 1
    return count
