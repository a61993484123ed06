import cmath
import math
import random

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from combregge.action import ActionParams, action_at_mu, simplex_volume
from combregge.census import S3_CONFIRMED, DegeneracyHistogram, HistogramKey
from combregge.ensemble import (
    EUCLIDEAN,
    QUANTUM,
    CosmologyInputs,
    almost_flat_bracket,
    delta_action,
    delta_action_from_volume,
    divergence_probe,
    expected_action,
    expected_action_direct,
    expected_action_from_levels,
    expected_action_symmetric,
    in_edge_band,
    lambda_estimate,
    partition_fixed_volume,
    two_level_partition,
    weight,
)
from combregge.errors import DomainError, SmallVolumeError
from combregge.triangulation import RationalMu

mpmath.mp.dps = 50
THETA3 = mpmath.acos(mpmath.mpf(1) / 3)
FLAT3 = 2 * mpmath.pi / THETA3
GAP = 3 * math.sqrt(2) / 4


def mp_action(k, n1, ell=1):
    mu = mpmath.mpf(6 * k) / n1
    return 9 * mpmath.sqrt(2) / 2 * (1 / mu - 1 / FLAT3) / mpmath.mpf(ell) ** 2


def mp_partition(levels, k, ell):
    return mpmath.fsum(n * mpmath.exp(-mp_action(k, n1, ell)) for n1, n in levels.items())


# --- bracket ------------------------------------------------------------------


@pytest.mark.parametrize(
    "k, n1, mu_minus, mu_plus",
    [(6, 7, "5.143", "4.500"), (7, 8, "5.250", "4.667"), (8, 9, "5.333", "4.800"), (9, 10, "5.400", "4.909")],
)
def test_bracket_small_volumes(k, n1, mu_minus, mu_plus):
    b = almost_flat_bracket(k)
    assert (b.n1_minus, b.n1_plus) == (n1, n1 + 1)
    assert (b.mu_minus.display(), b.mu_plus.display()) == (mu_minus, mu_plus)
    assert b.a_plus > 0 > b.a_minus
    mu_plus, mu_minus = (mpmath.mpf(m.numerator) / m.denominator for m in (b.mu_plus, b.mu_minus))
    assert mu_plus < FLAT3 < mu_minus


def test_bracket_k9_exact():
    b = almost_flat_bracket(9)
    assert b.mu_minus.as_fraction() == RationalMu(27, 5).as_fraction()
    assert b.mu_plus.as_fraction() == RationalMu(54, 11).as_fraction()
    assert not b.guaranteed


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_bracket_small_volume_error(k):
    with pytest.raises(SmallVolumeError, match="no negative-action level"):
        almost_flat_bracket(k)


def test_bracket_rejects_bad_inputs():
    with pytest.raises(ValueError):
        almost_flat_bracket(0)
    with pytest.raises(DomainError):
        almost_flat_bracket(9, ActionParams(dim=4))


@given(st.floats(math.log(6), math.log(1e6)), st.sampled_from([0.25, 1.0, 4.0]))
def test_bracket_identity(logk, ell):
    k = max(6, int(math.exp(logk)))
    b = almost_flat_bracket(k, ActionParams(ell=ell))
    assert (b.a_plus - b.a_minus) * ell**2 * k == pytest.approx(GAP, rel=1e-12)
    assert b.delta_a == pytest.approx(delta_action(k, ActionParams(ell=ell)), rel=1e-12)
    assert b.a_plus > 0 > b.a_minus
    assert b.n1_minus >= k + 1
    # floor(6K / flat degree) against a 50-digit evaluation
    assert b.n1_minus == int(mpmath.floor(6 * k / FLAT3))


@given(st.integers(6, 10**6), st.integers(-10, 0))
def test_guaranteed_band_matches_float_formula(k, gamma):
    for n1 in (k + 1, int(k + (3 + math.sqrt(9 + 8 * k)) / 2) + 1, (4 * k - gamma) // 3):
        lo = k + (3 + mpmath.sqrt(9 + 8 * k)) / 2
        hi = mpmath.mpf(4 * k - gamma) / 3
        assert in_edge_band(k, n1, gamma) == (lo <= n1 <= hi)


# --- gap ----------------------------------------------------------------------


def test_delta_action_examples():
    assert delta_action(6) == pytest.approx(0.176777, abs=1e-6)
    assert delta_action(6) == pytest.approx(action_at_mu(RationalMu(36, 8)) - action_at_mu(RationalMu(36, 7)), rel=1e-12)
    assert delta_action(12) == pytest.approx(delta_action(6) / 2, rel=1e-15)
    assert delta_action(6, ActionParams(ell=2.0)) == pytest.approx(delta_action(6) / 4, rel=1e-15)


def test_delta_action_from_volume_examples():
    vol = 5 / (6 * math.sqrt(2))
    assert delta_action_from_volume(1.0, vol) == pytest.approx(3 * math.sqrt(2) / 20, rel=1e-12)
    assert delta_action_from_volume(1.0, 2 * vol) == pytest.approx(delta_action_from_volume(1.0, vol) / 2, rel=1e-15)
    with pytest.raises(ValueError):
        delta_action_from_volume(1.0, 0)


@given(st.integers(1, 10**9), st.floats(0.01, 100))
def test_gap_forms_agree(k, ell):
    p = ActionParams(ell=ell)
    assert delta_action(k, p) == pytest.approx(delta_action_from_volume(ell, k * simplex_volume(3, ell)), rel=1e-12)


def test_level_cycling():
    """Over a window of volumes A+ and |A-| sweep the gap and average to half of it."""
    k0 = 100_000
    fractions_plus, fractions_minus = [], []
    for k in range(k0, k0 + 2000):
        b = almost_flat_bracket(k)
        fractions_plus.append(b.a_plus / b.delta_a)
        fractions_minus.append(-b.a_minus / b.delta_a)
    for values in (fractions_plus, fractions_minus):
        assert 0 < min(values) < 0.05 and 0.95 < max(values) < 1
        assert sum(values) / len(values) == pytest.approx(0.5, rel=0.05)


# --- partition functions --------------------------------------------------------


def test_weights():
    assert weight(0.3, EUCLIDEAN) == pytest.approx(math.exp(-0.3))
    assert abs(weight(123.4, QUANTUM)) == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(ValueError):
        weight(1.0, "lorentzian")


def test_partition_k6_table(s3_reference):
    z = partition_fixed_volume(s3_reference, 6, cls=S3_CONFIRMED)
    levels = s3_reference.by_edges(6, S3_CONFIRMED)
    assert len(levels) == 4
    assert z.real == pytest.approx(float(mp_partition(levels, 6, 1)), rel=1e-12)
    almost_flat = 4931 * mpmath.exp(-mp_action(6, 8)) + 13660 * mpmath.exp(-mp_action(6, 7))
    assert float(almost_flat) == pytest.approx(17959.1, abs=0.05)
    assert z.value.imag == 0 and z.real > 0


def test_partition_quantum_bound(s3_reference):
    total = sum(s3_reference.by_edges(6, S3_CONFIRMED).values())
    zq = partition_fixed_volume(s3_reference, 6, mode=QUANTUM, cls=S3_CONFIRMED)
    assert abs(zq.value) < total
    single = DegeneracyHistogram()
    single.add(HistogramKey(6, 7, S3_CONFIRMED), 10)
    assert abs(partition_fixed_volume(single, 6, mode=QUANTUM).value) == pytest.approx(10, rel=1e-15)


def test_partition_empty_slice(s3_reference):
    with pytest.raises(DomainError):
        partition_fixed_volume(s3_reference, 4)


def test_partition_huge_values_stay_finite_in_log(s3_reference):
    z = partition_fixed_volume(s3_reference, 6, ActionParams(ell=0.001), cls=S3_CONFIRMED)
    assert math.isinf(z.real)
    expected = mpmath.log(mp_partition(s3_reference.by_edges(6, S3_CONFIRMED), 6, mpmath.mpf("0.001")))
    assert z.log_abs == pytest.approx(float(expected), rel=1e-12)


def test_two_level_partition_k6():
    b = almost_flat_bracket(6)
    z = two_level_partition(b, 4931, 13660, QUANTUM)
    direct = 4931 * cmath.exp(1j * b.a_plus) + 13660 * cmath.exp(1j * b.a_minus)
    assert z.value == pytest.approx(direct, rel=1e-14)
    assert two_level_partition(b, 4931, 0, QUANTUM).value == pytest.approx(4931 * cmath.exp(1j * b.a_plus))
    with pytest.raises(ValueError):
        two_level_partition(b, 0, 0)
    with pytest.raises(ValueError):
        two_level_partition(b, -1, 3)


def test_two_level_modes_agree_to_first_order():
    b = almost_flat_bracket(10**6)
    n_plus, n_minus = 1000.0, 2770.0
    ze = two_level_partition(b, n_plus, n_minus, EUCLIDEAN).value
    zq = two_level_partition(b, n_plus, n_minus, QUANTUM).value
    first_order = n_plus * b.a_plus + n_minus * b.a_minus
    assert (n_plus + n_minus) - ze.real == pytest.approx(first_order, rel=1e-5)
    assert zq.imag == pytest.approx(first_order, rel=1e-5)
    assert abs(zq.real - (n_plus + n_minus)) < 1e-8


# --- expected action ------------------------------------------------------------


@given(
    st.floats(1e-6, 1.0), st.floats(1e-6, 1.0), st.floats(0.01, 1e6), st.floats(0.01, 1e6),
    st.sampled_from([EUCLIDEAN, QUANTUM]),
)
def test_expected_action_forms_agree(a_plus, a_gap, n_plus, n_minus, mode):
    a_minus = a_plus - a_gap
    direct = expected_action_direct(a_plus, a_minus, n_plus, n_minus, mode)
    rewritten = expected_action_from_levels(a_plus, a_minus, n_minus / n_plus, mode)
    assert abs(direct - rewritten) <= 1e-14 * max(abs(direct), abs(a_plus), abs(a_minus))


def test_expected_action_k6():
    b = almost_flat_bracket(6)
    value = expected_action(b, 2.770, QUANTUM)
    wp, wm = cmath.exp(1j * b.a_plus), 2.770 * cmath.exp(1j * b.a_minus)
    assert value == pytest.approx((b.a_plus * wp + b.a_minus * wm) / (wp + wm), rel=1e-14)
    gibbs = expected_action(b, 2.770, EUCLIDEAN)
    wp, wm = math.exp(-b.a_plus), 2.770 * math.exp(-b.a_minus)
    assert gibbs.real == pytest.approx((b.a_plus * wp + b.a_minus * wm) / (wp + wm), rel=1e-14)


def test_expected_action_symmetric_cases():
    assert abs(expected_action_symmetric(1e-10, 1.0)) < 1e-20
    value = expected_action_symmetric(1.46e-186, 2.5)
    assert value.real == pytest.approx(0.73e-186 * (1 - 2.5) / (1 + 2.5), rel=1e-12)
    assert value.real == pytest.approx(-3.13e-187, rel=0.01)
    with pytest.raises(ValueError):
        expected_action_from_levels(0.1, -0.1, 0.0)


# --- cosmological constant ------------------------------------------------------


def test_lambda_pipeline():
    report = lambda_estimate(CosmologyInputs(1.6e-35, 3.5e80, 2.5))
    planck_volume = 3.5e80 / 1.6e-35**3
    assert report.planck_volume == pytest.approx(planck_volume, rel=1e-14)
    assert report.k_equiv == pytest.approx(planck_volume * 6 * math.sqrt(2), rel=1e-14)
    assert report.delta_a == pytest.approx(1 / (8 * planck_volume), rel=1e-14)
    assert report.delta_a == pytest.approx(1.46e-186, rel=0.01)
    assert report.lam == pytest.approx(1.5673469387755e-187, rel=1e-10)
    assert report.lam > 0
    assert report.beta_g == pytest.approx(1 / (planck_volume * report.lam), rel=1e-14)
    keys = [line.split(" = ")[0] for line in report.lines()]
    assert keys[:3] == ["planck_volume", "K_equiv", "delta_A"]
    assert "lambda" in keys and "beta_g" in keys and keys[-1] == "assumptions"


def test_lambda_symmetric_ratio_is_zero():
    assert lambda_estimate(CosmologyInputs(1.6e-35, 3.5e80, 1.0)).lam == 0


def test_lambda_defaults_and_flags():
    report = lambda_estimate(CosmologyInputs(1.6e-35, 3.5e80))
    assert any("defaulted to 2.5" in a for a in report.assumptions)
    low = lambda_estimate(CosmologyInputs(1.6e-35, 3.5e80, 0.5))
    assert low.lam < 0 and any("below 1" in a for a in low.assumptions)


@pytest.mark.parametrize("args", [(0, 1.0, 2.5), (1.0, -1.0, 2.5), (1.0, 1.0, 0.0)])
def test_lambda_rejects_nonpositive(args):
    with pytest.raises(DomainError):
        CosmologyInputs(*args)


# --- divergence probe -----------------------------------------------------------


def test_probe_k6_table(s3_reference):
    ells = [1, 0.5, 0.25, 0.125]
    result = divergence_probe(s3_reference, 6, ells, cls=S3_CONFIRMED)
    levels = s3_reference.by_edges(6, S3_CONFIRMED)
    for row, ell in zip(result.rows, ells):
        assert row.value == pytest.approx(float(mp_partition(levels, 6, ell)), rel=1e-12)
    assert result.negative_level
    # the positive levels are suppressed faster than the negative one grows at first
    assert [round(r.value, 2) for r in result.rows] == [18859.09, 17007.51, 16206.69, 24846.62]
    assert not result.strictly_increasing and result.verdict == "not-monotone"


def test_probe_grows_once_negative_level_dominates(s3_reference):
    result = divergence_probe(s3_reference, 6, [0.125, 0.0625, 0.03125, 0.015625], cls=S3_CONFIRMED)
    assert result.strictly_increasing and result.verdict == "diverging"


def test_probe_positive_levels_bounded():
    hist = DegeneracyHistogram()
    hist.add(HistogramKey(6, 8, S3_CONFIRMED), 4931)
    hist.add(HistogramKey(6, 9, S3_CONFIRMED), 1103)
    result = divergence_probe(hist, 6, [1, 0.5, 0.25])
    assert result.verdict == "bounded" and result.bound == 6034
    # positive actions are suppressed harder as the edge length shrinks
    values = [r.value for r in result.rows]
    assert values == sorted(values, reverse=True) and values[0] < 6034
    assert not result.strictly_increasing


def test_probe_empty_and_bad_sequences(s3_reference):
    assert divergence_probe(DegeneracyHistogram(), 6, [1, 0.5]).verdict == "empty"
    with pytest.raises(ValueError):
        divergence_probe(s3_reference, 6, [0.5, 1])


def test_probe_random_histograms_match_oracle():
    rng = random.Random(3)
    for _ in range(20):
        k = rng.randint(6, 12)
        hist = DegeneracyHistogram()
        for n1 in rng.sample(range(k + 1, 2 * k + 2), 3):
            hist.add(HistogramKey(k, n1, S3_CONFIRMED), rng.randint(1, 10**6))
        result = divergence_probe(hist, k, [1, 0.5])
        for row in result.rows:
            assert row.value == pytest.approx(float(mp_partition(hist.by_edges(k), k, row.ell)), rel=1e-12)
