import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from combregge import _fastmoves as F
from combregge.moves import (
    INVERSE_KIND,
    KINDS,
    InvalidMoveError,
    apply_move,
    enumerate_moves,
    fvector_delta,
    inverse_move,
    move_at,
    replace_cells,
)
from combregge.triangulation import (
    GluedTriangulation,
    RationalMu,
    boundary_of_4_simplex,
    doubled_tetrahedron,
    homology_h1,
    is_orientable,
    iso_signature,
    mean_bone_degree,
    skeleton,
    validate_manifold,
)

from conftest import all_census

census_tris = st.sampled_from(all_census(1) + all_census(2) + all_census(3))


def by_kind(moves):
    out = {kind: 0 for kind in KINDS}
    for m in moves:
        out[m.kind] += 1
    return out


# --- f-vector bookkeeping -----------------------------------------------------


def test_fvector_delta_table():
    assert tuple(fvector_delta("1-4")) == (1, 4, 6, 3)
    assert tuple(fvector_delta("2-3")) == (0, 1, 2, 1)
    assert tuple(fvector_delta("3-2")) == (0, -1, -2, -1)
    assert tuple(fvector_delta("4-1")) == (-1, -4, -6, -3)
    for kind in KINDS:
        d = fvector_delta(kind)
        assert d.n0 - d.n1 + d.n2 - d.n3 == 0
        inv = fvector_delta(INVERSE_KIND[kind])
        assert tuple(-x for x in d) == tuple(inv)


# --- enumeration on explicit complexes ---------------------------------------


def test_boundary_move_counts():
    tri = boundary_of_4_simplex()
    skel = skeleton(tri)
    counts = by_kind(enumerate_moves(tri))
    assert counts["1-4"] == 5
    assert counts["2-3"] == 10
    assert sum(1 for d in skel.edge_degree if d == 3) == 10
    assert counts["3-2"] == 10
    # every vertex star is four tetrahedra forming a 1-4 pattern
    assert counts["4-1"] == 5


def test_boundary_four_one_gives_doubled_tetrahedron():
    tri = boundary_of_4_simplex()
    target = iso_signature(doubled_tetrahedron())
    for m in enumerate_moves(tri, kinds=("4-1",)):
        assert iso_signature(apply_move(tri, m)) == target


def test_boundary_one_four():
    tri = boundary_of_4_simplex()
    for m in enumerate_moves(tri, kinds=("1-4",)):
        after = apply_move(tri, m)
        assert after.tets == 8
        assert skeleton(after).fvector == (6, 14, 16, 8)


def test_doubled_tetrahedron_two_three_moves():
    tri = doubled_tetrahedron()
    moves = enumerate_moves(tri, kinds=("2-3",))
    assert len(moves) == 4 == skeleton(tri).n2
    for m in moves:
        after = apply_move(tri, m)
        assert skeleton(after).fvector == (4, 7, 6, 3)


def test_two_three_then_three_two_restores():
    tri = boundary_of_4_simplex()
    sig = iso_signature(tri)
    for m in enumerate_moves(tri, kinds=("2-3",)):
        after = apply_move(tri, m)
        back = apply_move(after, inverse_move(after, m))
        assert iso_signature(back) == sig


def test_stale_move_rejected():
    tri = boundary_of_4_simplex()
    first, second = enumerate_moves(tri, kinds=("2-3",))[:2]
    after = apply_move(tri, first)
    with pytest.raises(InvalidMoveError, match="stale"):
        apply_move(after, second)


def test_move_at_rejects_bad_sites():
    tri = doubled_tetrahedron()
    with pytest.raises(InvalidMoveError):
        move_at(tri, "3-2", 0)  # every edge has degree 2
    with pytest.raises(InvalidMoveError):
        move_at(tri, "1-4", 7)
    assert move_at(tri, "1-4", 1).kind == "1-4"


# --- per-move properties ------------------------------------------------------


@given(census_tris, st.integers(0, 10**6))
def test_move_properties(tri, pick):
    moves = enumerate_moves(tri)
    m = moves[pick % len(moves)]
    before = skeleton(tri)
    after = apply_move(tri, m)
    skel = skeleton(after)
    delta = fvector_delta(m.kind)
    assert skel.fvector == tuple(a + d for a, d in zip(before.fvector, delta))
    assert validate_manifold(after, skel).valid
    assert homology_h1(after, skel) == homology_h1(tri, before)
    assert is_orientable(after) == is_orientable(tri)
    # reversibility: the inverse is enumerated and restores the class
    inv = inverse_move(after, m, skel)
    assert any(x.kind == inv.kind and x.site == inv.site for x in enumerate_moves(after, skel=skel))
    assert iso_signature(apply_move(after, inv)) == iso_signature(tri)


@given(census_tris, st.integers(0, 10**6))
def test_mu_update_law(tri, pick):
    moves = enumerate_moves(tri, kinds=("2-3",))
    if not moves:
        return
    mu = mean_bone_degree(tri)
    after = apply_move(tri, moves[pick % len(moves)])
    k, n1 = tri.tets, mu.denominator
    assert mean_bone_degree(after) == RationalMu(6 * (k + 1), n1 + 1)


# --- random walks -------------------------------------------------------------


def random_walk(start, steps, seed, kmax=14):
    rng = random.Random(seed)
    tri = start
    for _ in range(steps):
        moves = enumerate_moves(tri)
        m = rng.choice(moves)
        if tri.tets + {"1-4": 3, "4-1": -3, "2-3": 1, "3-2": -1}[m.kind] > kmax:
            continue
        yield tri, m, apply_move(tri, m)
        tri = apply_move(tri, m)


@pytest.mark.parametrize(
    "start",
    [boundary_of_4_simplex, lambda: next(t for t in all_census(2) if str(homology_h1(t)) == "Z/5")],
    ids=["sphere", "lens"],
)
def test_walk_invariants(start):
    """10^4 random moves: validity, homology, orientability and exact f-vector deltas."""
    start = start()
    h0 = homology_h1(start)
    orient = is_orientable(start)
    seen = set()
    for before, m, after in random_walk(start, 10_000, seed=7):
        skel = skeleton(after)
        prev = skeleton(before)
        assert skel.fvector == tuple(a + d for a, d in zip(prev.fvector, fvector_delta(m.kind)))
        assert validate_manifold(after, skel).valid
        assert homology_h1(after, skel) == h0
        assert is_orientable(after) == orient
        seen.add(m.kind)
    assert seen == set(KINDS)


# --- compiled route -----------------------------------------------------------


def fast_moves(tri, kinds=KINDS):
    k = tri.tets
    dest = np.array(tri.dest, dtype=np.int64)
    glu = np.array(tri.gluing, dtype=np.int64)
    size = 4 * k
    vof, tri_of, vcorn, vpar = (np.zeros(size, dtype=np.int64) for _ in range(4))
    eof, edeg, epar, idmap = (np.zeros(6 * k, dtype=np.int64) for _ in range(4))
    n0, n1, _ = F.light_skeleton(dest, glu, k, vof, eof, tri_of, edeg, vcorn, vpar, epar, idmap)
    flags = np.array([kind in kinds for kind in KINDS], dtype=np.bool_)
    out = np.zeros((16 * k + 16, F.MOVE_WIDTH), dtype=np.int64)
    count = F.list_moves(dest, glu, k, flags, vof, eof, tri_of, edeg, vcorn, n0, n1, out)
    return (n0, n1), out[:count]


def row_cells(row):
    return tuple((int(row[2 + 5 * c]), tuple(int(x) for x in row[3 + 5 * c: 7 + 5 * c])) for c in range(row[1]))


def fast_apply(tri, row):
    k = tri.tets
    kmax = k + 3
    nd = np.zeros(4 * kmax, dtype=np.int64)
    ng = np.zeros(4 * kmax, dtype=np.int64)
    nk = F.replace_cells(
        np.array(tri.dest, dtype=np.int64), np.array(tri.gluing, dtype=np.int64), k, row, nd, ng,
        np.zeros(kmax, dtype=np.int64), np.zeros(kmax, dtype=np.int64),
    )
    return GluedTriangulation(tuple(int(x) for x in nd[: 4 * nk]), tuple(int(x) for x in ng[: 4 * nk]))


def assert_routes_agree(tri):
    (n0, n1), rows = fast_moves(tri)
    skel = skeleton(tri)
    assert (n0, n1) == (skel.n0, skel.n1)
    slow = sorted((m.kind, m.cells) for m in enumerate_moves(tri, skel=skel))
    fast = sorted((KINDS[r[0]], row_cells(r)) for r in rows)
    assert fast == slow
    for r in rows:
        assert fast_apply(tri, r) == replace_cells(tri, row_cells(r))


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_compiled_moves_match_census(k):
    for tri in all_census(k):
        assert_routes_agree(tri)


def test_compiled_moves_match_along_walk():
    for before, _, _ in random_walk(boundary_of_4_simplex(), 2_000, seed=11):
        assert_routes_agree(before)


def test_compiled_automorphisms_match():
    from combregge.triangulation import automorphism_count

    for tri in all_census(3) + [boundary_of_4_simplex()]:
        fast = F.automorphism_count(np.array(tri.dest, dtype=np.int64), np.array(tri.gluing, dtype=np.int64), tri.tets)
        assert fast == automorphism_count(tri)
