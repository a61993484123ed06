"""Fixed-volume partition functions and the two-level almost-flat model.

At volume K only two mean bone-degrees sit next to the flat value mu*_3:
mu+ = 6K/N1+ just below it (positive action) and mu- = 6K/N1- just above
it (negative action), with N1+ = N1- + 1.  Their action gap is exactly
(3 sqrt 2 / 4) / (ell^2 K); the expected action of the two-level ensemble
is what the cosmological-constant estimate is built from.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext

from .action import _INV_FLAT3_DEC, _PREC, ActionParams, action_at_mu, action_sign, simplex_volume
from .errors import DomainError, SmallVolumeError
from .triangulation.skeleton import RationalMu

EUCLIDEAN = "euclidean"
QUANTUM = "quantum"
MODES = (EUCLIDEAN, QUANTUM)
DEFAULT_RATIO = 2.5  # midpoint of the assumed [2, 3] degeneracy ratio
GAP_CONSTANT = 3 * math.sqrt(2) / 4


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def weight(action: float, mode: str) -> complex:
    """exp(-A) in euclidean mode, exp(iA) in quantum mode."""
    _check_mode(mode)
    return complex(math.exp(-action)) if mode == EUCLIDEAN else cmath.exp(1j * action)


@dataclass(frozen=True)
class AlmostFlatBracket:
    tets: int
    n1_plus: int
    n1_minus: int
    mu_plus: RationalMu
    mu_minus: RationalMu
    a_plus: float
    a_minus: float
    delta_a: float
    guaranteed: bool
    ell: float = 1.0


def _floor_edges(k):
    """floor(6K / mu*_3) = floor(6K theta_3 / 2 pi), checked against exact signs."""
    with localcontext() as ctx:
        ctx.prec = _PREC + len(str(k))
        n1 = int((Decimal(6 * k) * _INV_FLAT3_DEC).to_integral_value(rounding="ROUND_FLOOR"))
    # mu at N1 is above mu*_3 (negative action), at N1 + 1 below it.
    if not action_sign(k, n1) < 0 < action_sign(k, n1 + 1):
        raise ArithmeticError(f"flat-degree comparison inconsistent at K={k}")
    return n1


def in_edge_band(k: int, n1: int, gamma_bound: int = -10) -> bool:
    """K + (3 + sqrt(9 + 8K))/2 <= N1 <= (4K - gamma)/3, decided in integers."""
    lhs = 2 * (n1 - k) - 3
    lower_ok = lhs >= 0 and lhs * lhs >= 9 + 8 * k
    return lower_ok and 3 * n1 <= 4 * k - gamma_bound


def almost_flat_bracket(k: int, p: ActionParams = ActionParams(), gamma_bound: int = -10) -> AlmostFlatBracket:
    if k < 1:
        raise ValueError("K must be positive")
    if p.dim != 3:
        raise DomainError("the bracket is defined for tetrahedral triangulations only")
    n1_minus = _floor_edges(k)
    if n1_minus <= k:
        # N1 >= K + 1 always (N0 >= 1), so mu <= 6K/(K+1) <= mu*_3.
        raise SmallVolumeError(f"no negative-action level at this volume (K={k})")
    n1_plus = n1_minus + 1
    mu_plus, mu_minus = RationalMu(6 * k, n1_plus), RationalMu(6 * k, n1_minus)
    a_plus, a_minus = action_at_mu(mu_plus, p), action_at_mu(mu_minus, p)
    return AlmostFlatBracket(
        tets=k,
        n1_plus=n1_plus,
        n1_minus=n1_minus,
        mu_plus=mu_plus,
        mu_minus=mu_minus,
        a_plus=a_plus,
        a_minus=a_minus,
        delta_a=a_plus - a_minus,
        guaranteed=in_edge_band(k, n1_minus, gamma_bound) and in_edge_band(k, n1_plus, gamma_bound),
        ell=p.ell,
    )


def delta_action(k: int, p: ActionParams = ActionParams()) -> float:
    if k < 1:
        raise ValueError("K must be positive")
    return GAP_CONSTANT / (p.ell**2 * k)


def delta_action_from_volume(ell: float, volume: float) -> float:
    if not (ell > 0 and volume > 0):
        raise ValueError("edge length and volume must be positive")
    return ell / (8 * volume)


@dataclass(frozen=True)
class PartitionValue:
    value: complex
    mode: str
    provenance: str
    log_abs: float = float("nan")

    @property
    def real(self):
        return self.value.real


def _sum_weights(terms, mode):
    """Sum count * weight(A); euclidean sums are also returned as log|Z|."""
    if mode == EUCLIDEAN:
        logs = [math.log(n) - a for n, a in terms if n > 0]
        if not logs:
            return 0j, float("-inf")
        top = max(logs)
        log_z = top + math.log(math.fsum(math.exp(x - top) for x in logs))
        value = math.exp(log_z) if log_z < 709 else math.inf
        return complex(value), log_z
    z = sum((n * weight(a, mode) for n, a in terms), 0j)
    return z, math.log(abs(z)) if z else float("-inf")


def partition_fixed_volume(hist, k: int, p: ActionParams = ActionParams(), mode: str = EUCLIDEAN, cls=None):
    """Z_{K,M} = sum over mu of N_{K,M}(mu) weight(A_mu)."""
    _check_mode(mode)
    levels = hist.by_edges(k, cls)
    if not levels:
        raise DomainError(f"histogram has no entries at K={k}")
    terms = [(n, action_at_mu(RationalMu(6 * k, n1), p)) for n1, n in levels.items()]
    z, log_z = _sum_weights(terms, mode)
    what = ", ".join(f"N1={n1}:{n}" for n1, n in levels.items())
    return PartitionValue(z, mode, f"K={k} levels [{what}]", log_z)


def two_level_partition(bracket: AlmostFlatBracket, n_plus: float, n_minus: float, mode: str = QUANTUM):
    _check_mode(mode)
    if n_plus < 0 or n_minus < 0:
        raise ValueError("degeneracies must be non-negative")
    if n_plus == 0 and n_minus == 0:
        raise ValueError("at least one degeneracy must be positive")
    z, log_z = _sum_weights([(n_plus, bracket.a_plus), (n_minus, bracket.a_minus)], mode)
    return PartitionValue(z, mode, f"K={bracket.tets} N+={n_plus} N-={n_minus}", log_z)


def expected_action_direct(a_plus, a_minus, n_plus, n_minus, mode: str = QUANTUM) -> complex:
    """Weighted mean of the two action levels."""
    wp, wm = n_plus * weight(a_plus, mode), n_minus * weight(a_minus, mode)
    return (a_plus * wp + a_minus * wm) / (wp + wm)


def expected_action_from_levels(a_plus, a_minus, ratio, mode: str = QUANTUM) -> complex:
    """The same mean written through the degeneracy ratio N- / N+.

    Dividing through by N+ weight(A+) leaves the factor
    weight(A-)/weight(A+): exp(-i dA) in quantum mode, exp(+dA) in
    euclidean mode, where dA = A+ - A-.
    """
    _check_mode(mode)
    if not ratio > 0:
        raise ValueError("degeneracy ratio must be positive")
    gap = a_plus - a_minus
    rebase = cmath.exp(-1j * gap) if mode == QUANTUM else complex(math.exp(gap))
    return (a_plus + a_minus * ratio * rebase) / (1 + ratio * rebase)


def expected_action(bracket: AlmostFlatBracket, ratio: float, mode: str = QUANTUM) -> complex:
    return expected_action_from_levels(bracket.a_plus, bracket.a_minus, ratio, mode)


def expected_action_symmetric(delta_a: float, ratio: float, mode: str = QUANTUM) -> complex:
    """Volume-averaged form with A+ = -A- = dA/2."""
    return expected_action_from_levels(delta_a / 2, -delta_a / 2, ratio, mode)


@dataclass(frozen=True)
class CosmologyInputs:
    ell_m: float
    volume_m3: float
    ratio: float | None = None
    mode: str = QUANTUM

    def __post_init__(self):
        if not (self.ell_m > 0 and self.volume_m3 > 0):
            raise DomainError("edge length and volume must be positive")
        if self.ratio is not None and not self.ratio > 0:
            raise DomainError("degeneracy ratio must be positive")
        _check_mode(self.mode)


@dataclass
class LambdaReport:
    planck_volume: float
    k_equiv: float
    delta_a: float
    expected_action: complex
    lam: float
    beta_g: float
    assumptions: list[str] = field(default_factory=list)

    def lines(self, fmt=None):
        fmt = fmt or (lambda x: repr(float(x)))
        ea = self.expected_action
        return [
            f"planck_volume = {fmt(self.planck_volume)}",
            f"K_equiv = {fmt(self.k_equiv)}",
            f"delta_A = {fmt(self.delta_a)}",
            f"expected_action_re = {fmt(ea.real)}",
            f"expected_action_im = {fmt(ea.imag)}",
            f"expected_action_abs = {fmt(abs(ea))}",
            f"expected_action_phase = {fmt(cmath.phase(ea))}",
            f"lambda = {fmt(self.lam)}",
            f"beta_g = {fmt(self.beta_g)}",
            "assumptions = " + "; ".join(self.assumptions),
        ]


def lambda_estimate(inputs: CosmologyInputs) -> LambdaReport:
    """Emergent cosmological constant from the two-level model, in Planck units.

    The edge length is one Planck length, so the physical volume becomes
    Vol / ell^3 and the gap is 1 / (8 Vol).  The expected action uses the
    volume-averaged levels A+ = -A- = dA/2 and Lambda = -Re<A>/2.
    """
    assumptions = ["edge length equals the Planck length", "A+ = |A-| = delta_A/2 (volume-averaged levels)"]
    ratio = inputs.ratio
    if ratio is None:
        ratio = DEFAULT_RATIO
        assumptions.append(f"degeneracy ratio defaulted to {DEFAULT_RATIO}")
    if ratio < 1:
        assumptions.append("degeneracy ratio below 1: negative-action states are the minority")
    planck_volume = inputs.volume_m3 / inputs.ell_m**3
    k_equiv = planck_volume / simplex_volume(3, 1.0)
    delta_a = delta_action_from_volume(1.0, planck_volume)
    ea = expected_action_symmetric(delta_a, ratio, inputs.mode)
    lam = -ea.real / 2
    beta_g = 1.0 / (planck_volume * lam) if lam != 0 else math.inf
    assumptions.append(f"mode {inputs.mode}")
    return LambdaReport(planck_volume, k_equiv, delta_a, ea, lam, beta_g, assumptions)


@dataclass(frozen=True)
class ProbeRow:
    ell: float
    value: float
    log_value: float


@dataclass(frozen=True)
class ProbeResult:
    rows: tuple[ProbeRow, ...]
    strictly_increasing: bool
    negative_level: bool
    bound: float | None  # sum of counts when every level has positive action
    verdict: str


def divergence_probe(hist, k: int, ells, mode: str = EUCLIDEAN, cls=None) -> ProbeResult:
    """|Z_{K,M}| along a decreasing sequence of edge lengths.

    With a negative-action level the euclidean sum grows without bound as
    ell -> 0; with only positive levels it stays below the total count.
    """
    ells = list(ells)
    if any(not e > 0 for e in ells) or any(b >= a for a, b in zip(ells, ells[1:])):
        raise ValueError("edge lengths must be positive and strictly decreasing")
    levels = hist.by_edges(k, cls) if len(hist) else {}
    if not levels or not ells:
        return ProbeResult((), False, False, None, "empty")
    negative = any(action_sign(k, n1) < 0 for n1 in levels)
    rows = []
    for ell in ells:
        z = partition_fixed_volume(hist, k, ActionParams(ell=ell), mode, cls)
        log_value = z.log_abs if mode == EUCLIDEAN else math.log(abs(z.value))
        rows.append(ProbeRow(ell, abs(z.value), log_value))
    increasing = all(b.log_value > a.log_value for a, b in zip(rows, rows[1:]))
    if negative:
        verdict = "diverging" if increasing else "not-monotone"
        bound = None
    else:
        verdict = "bounded"
        bound = float(sum(levels.values()))
    return ProbeResult(tuple(rows), increasing, negative, bound, verdict)
