import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from combregge.action import (
    ActionParams,
    DimensionError,
    action_at_mu,
    action_sign,
    dihedral_angle,
    flat_degree,
    normalized_action,
    regge_action_equal_lengths,
    regge_action_from_mu,
    simplex_volume,
)
from combregge.triangulation import RationalMu, boundary_of_4_simplex, mean_bone_degree, skeleton

from conftest import all_census

mpmath.mp.dps = 50
THETA3 = mpmath.acos(mpmath.mpf(1) / 3)
FLAT3 = 2 * mpmath.pi / THETA3


def exact_action(mu):
    """Volume-normalized action at rational mu with 50-digit constants."""
    mu = mpmath.mpf(mu.numerator) / mu.denominator
    return 9 * mpmath.sqrt(2) / 2 * (1 / mu - 1 / FLAT3)


def cayley_menger_volume(k):
    """Volume of the regular unit k-simplex from the Cayley-Menger determinant."""
    m = mpmath.matrix(k + 2, k + 2)
    for i in range(k + 2):
        for j in range(k + 2):
            if i == 0 and j == 0:
                m[i, j] = 0
            elif i == 0 or j == 0:
                m[i, j] = 1
            else:
                m[i, j] = 0 if i == j else 1
    coeff = (-1) ** (k + 1) / (mpmath.mpf(2) ** k * mpmath.factorial(k) ** 2)
    return mpmath.sqrt(coeff * mpmath.det(m))


# --- constants ----------------------------------------------------------------


def test_dihedral_angles():
    assert dihedral_angle(2) == pytest.approx(math.pi / 3, rel=1e-15)
    assert dihedral_angle(3) == pytest.approx(float(THETA3), rel=1e-15)
    assert dihedral_angle(4) == pytest.approx(float(mpmath.acos(mpmath.mpf(1) / 4)), rel=1e-15)
    assert str(dihedral_angle(3)).startswith("1.230959417")
    with pytest.raises(ValueError):
        dihedral_angle(1)


@pytest.mark.parametrize("n", range(2, 9))
def test_dihedral_angle_range(n):
    assert 0 < dihedral_angle(n) <= math.pi / 2


def test_flat_degrees():
    assert flat_degree(2) == pytest.approx(6.0, rel=1e-15)
    assert flat_degree(3) == pytest.approx(float(FLAT3), rel=1e-15)
    assert str(flat_degree(3)).startswith("5.104299")


@given(st.integers(1, 10**6), st.integers(2, 10**6))
def test_flat_degree_never_rational_level(k, n1):
    assert Fraction(6 * k, n1) != flat_degree(3)
    assert action_sign(k, n1) in (-1, 1)


def test_simplex_volumes():
    assert simplex_volume(1, 2.0) == pytest.approx(2.0, rel=1e-15)
    assert simplex_volume(2) == pytest.approx(math.sqrt(3) / 4, rel=1e-15)
    assert simplex_volume(3) == pytest.approx(1 / (6 * math.sqrt(2)), rel=1e-15)
    assert simplex_volume(3) == pytest.approx(0.117851, abs=1e-6)


@pytest.mark.parametrize("k", range(1, 7))
def test_simplex_volume_cayley_menger(k):
    assert simplex_volume(k) == pytest.approx(float(cayley_menger_volume(k)), rel=1e-12)


@given(st.integers(0, 6), st.floats(0.01, 100))
def test_simplex_volume_scaling(k, ell):
    assert simplex_volume(k, ell) == pytest.approx(simplex_volume(k) * ell**k, rel=1e-12)


# --- actions on triangulations ------------------------------------------------


def test_boundary_raw_action():
    expected = 10 * (2 * mpmath.pi - 3 * THETA3) / (16 * mpmath.pi)
    value = regge_action_equal_lengths(boundary_of_4_simplex())
    assert value.kind == "raw"
    assert value.value == pytest.approx(float(expected), rel=1e-13)
    assert value.value == pytest.approx(0.51533, abs=1e-5)


def test_boundary_normalized_action():
    value = normalized_action(boundary_of_4_simplex())
    assert value.kind == "volume-normalized"
    assert value.value == pytest.approx(float(exact_action(Fraction(3))), rel=1e-13)
    assert value.value == pytest.approx(0.874535889605605602, rel=1e-13)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        normalized_action(boundary_of_4_simplex(), ActionParams(dim=4))
    with pytest.raises(DimensionError):
        regge_action_equal_lengths(boundary_of_4_simplex(), ActionParams(dim=2))


def test_params_validation():
    with pytest.raises(ValueError):
        ActionParams(ell=0)
    with pytest.raises(ValueError):
        ActionParams(dim=1)


@pytest.mark.parametrize(
    "mu, value",
    [
        (Fraction(9, 2), 0.1674291084190581),
        (Fraction(36, 7), -0.009347586877578805),
        (Fraction(6), -0.186124282174215684),
        (Fraction(3), 0.874535889605605602),
    ],
)
def test_action_levels(mu, value):
    assert action_at_mu(mu) == pytest.approx(float(exact_action(mu)), rel=1e-13)
    assert action_at_mu(mu) == pytest.approx(value, rel=1e-12)
    assert action_at_mu(RationalMu(mu.numerator, mu.denominator)) == action_at_mu(mu)
    assert action_at_mu(float(mu)) == pytest.approx(value, rel=1e-12)


def test_action_at_mu_rejects_nonpositive():
    with pytest.raises(ValueError):
        action_at_mu(0)
    with pytest.raises(ValueError):
        action_at_mu(-1.5)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_closed_form_identity(k):
    """Edge summation agrees with the mu closed form and with action_at_mu."""
    for tri in all_census(k):
        skel = skeleton(tri)
        mu = mean_bone_degree(tri, skel)
        raw = regge_action_equal_lengths(tri, skel=skel).value
        closed = regge_action_from_mu(3, tri.tets, mu.value)
        assert raw == pytest.approx(closed, rel=1e-12, abs=1e-15)
        norm = normalized_action(tri, skel=skel).value
        assert norm == pytest.approx(action_at_mu(mu), rel=1e-12)
        assert norm != 0
        assert (norm > 0) == (action_sign(tri.tets, skel.n1) > 0)


def test_closed_form_identity_k5():
    for tri in all_census(5):
        mu = mean_bone_degree(tri)
        raw = regge_action_equal_lengths(tri).value
        assert raw == pytest.approx(regge_action_from_mu(3, 5, mu.value), rel=1e-12, abs=1e-15)


@given(st.sampled_from([2.0**e for e in range(-8, 9)]))
def test_scaling_laws(ell):
    tri = boundary_of_4_simplex()
    base_norm = normalized_action(tri).value
    base_raw = regge_action_equal_lengths(tri).value
    p = ActionParams(ell=ell)
    assert normalized_action(tri, p).value * ell**2 == pytest.approx(base_norm, rel=1e-12)
    assert regge_action_equal_lengths(tri, p).value / ell == pytest.approx(base_raw, rel=1e-12)


def test_scaling_examples():
    tri = boundary_of_4_simplex()
    two = ActionParams(ell=2.0)
    assert regge_action_equal_lengths(tri, two).value / regge_action_equal_lengths(tri).value == 2.0
    assert normalized_action(tri, two).value / normalized_action(tri).value == 0.25


@given(st.integers(2, 8), st.floats(0.5, 20), st.floats(0.5, 20))
def test_generic_dimension_monotone(n, a, b):
    if a == b:
        return
    lo, hi = sorted((a, b))
    p = ActionParams(dim=n)
    assert action_at_mu(lo, p) > action_at_mu(hi, p)


@given(st.integers(1, 10**5), st.integers(1, 10**5), st.integers(1, 10**5), st.integers(1, 10**5))
def test_monotone_in_rational_mu(a, b, c, d):
    x, y = Fraction(a, b), Fraction(c, d)
    if x == y:
        return
    lo, hi = sorted((x, y))
    assert action_at_mu(lo) >= action_at_mu(hi)
    if abs(float(hi - lo)) > 1e-9 * float(hi):
        assert action_at_mu(lo) > action_at_mu(hi)


@given(st.integers(1, 10**7), st.integers(2, 10**7))
def test_sign_matches_extended_precision(k, n1):
    exact = 2 * mpmath.pi * n1 - 6 * k * THETA3
    assert action_sign(k, n1) == (1 if exact > 0 else -1)
    assert action_at_mu(Fraction(6 * k, n1)) != 0
    assert (action_at_mu(Fraction(6 * k, n1)) > 0) == (exact > 0)


def convergents(x, count):
    h0, h1, k0, k1 = 0, 1, 1, 0
    for _ in range(count):
        a = int(mpmath.floor(x))
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        yield h1, k1
        x = 1 / (x - a)


def test_sign_near_flat_degree():
    """Best rational approximations K/N1 of the flat degree / 6 are the hardest cases."""
    cases = [(k, n1) for k, n1 in convergents(FLAT3 / 6, 14) if k > 0]
    assert len(cases) >= 10
    for k, n1 in cases:
        exact = 2 * mpmath.pi * n1 - 6 * k * THETA3
        assert action_sign(k, n1) == (1 if exact > 0 else -1)
        assert (action_at_mu(Fraction(6 * k, n1)) > 0) == (exact > 0)
