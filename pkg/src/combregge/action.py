"""Closed-form equal-edge-length Regge action quantities.

Everything here is dimension-generic except the functions taking a
triangulation, which are restricted to tetrahedral (n = 3) complexes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction

from .errors import DomainError
from .triangulation.gluing import GluedTriangulation
from .triangulation.skeleton import QuotientSkeleton, RationalMu, skeleton

# arccos(1/3), pi and arccos(1/3)/(2 pi) to 50 significant digits.
THETA3_DIGITS = "1.2309594173407746821349291782479873757103400093551"
PI_DIGITS = "3.1415926535897932384626433832795028841971693993751"
INV_FLAT3_DIGITS = "0.1959132760153036350854277796112154556583143247197"

THETA3 = float(THETA3_DIGITS)
FLAT_DEGREE3 = 2 * math.pi / THETA3
_THETA3_DEC = Decimal(THETA3_DIGITS)
_PI_DEC = Decimal(PI_DIGITS)
_INV_FLAT3_DEC = Decimal(INV_FLAT3_DIGITS)
_PREC = 45


class DimensionError(DomainError):
    pass


@dataclass(frozen=True)
class ActionParams:
    ell: float = 1.0
    dim: int = 3

    def __post_init__(self):
        if not self.ell > 0:
            raise ValueError("edge length must be positive")
        if self.dim < 2:
            raise ValueError("dimension must be at least 2")


@dataclass(frozen=True)
class ActionValue:
    value: float
    kind: str  # "raw" or "volume-normalized"

    def __float__(self):
        return self.value


def dihedral_angle(n: int) -> float:
    if n < 2:
        raise ValueError("dimension must be at least 2")
    if n == 3:
        return THETA3
    return math.acos(1.0 / n)


def flat_degree(n: int) -> float:
    return 2 * math.pi / dihedral_angle(n)


def simplex_volume(k: int, ell: float = 1.0) -> float:
    """Volume of the regular k-simplex with edge length ell."""
    if k < 0:
        raise ValueError("dimension must be non-negative")
    return math.sqrt(k + 1) / (math.factorial(k) * math.sqrt(2.0**k)) * ell**k


def _require_dim3(p: ActionParams):
    if p.dim != 3:
        raise DimensionError(f"triangulations are 3-dimensional, got dim={p.dim}")


def regge_action_equal_lengths(
    tri: GluedTriangulation, p: ActionParams = ActionParams(), skel: QuotientSkeleton | None = None
) -> ActionValue:
    """Sum of (2 pi - theta_3 * degree) over edges, times V_1(ell) / 16 pi."""
    _require_dim3(p)
    skel = skel or skeleton(tri)
    total = math.fsum(2 * math.pi - THETA3 * d for d in skel.edge_degree)
    return ActionValue(simplex_volume(1, p.ell) / (16 * math.pi) * total, "raw")


def normalized_action(
    tri: GluedTriangulation, p: ActionParams = ActionParams(), skel: QuotientSkeleton | None = None
) -> ActionValue:
    _require_dim3(p)
    raw = regge_action_equal_lengths(tri, p, skel).value
    return ActionValue(raw / (simplex_volume(3, p.ell) * tri.tets), "volume-normalized")


def regge_action_from_mu(n: int, top_simplices: int, mu: float, ell: float = 1.0) -> float:
    """Raw action written through the mean bone-degree (any dimension)."""
    return (
        simplex_volume(n - 2, ell) / 8 * math.comb(n + 1, 2) * top_simplices
        * (1 / mu - 1 / flat_degree(n))
    )


def _prefactor(n: int, ell: float) -> float:
    return n * (n + 1) / 16 * simplex_volume(n - 2, ell) / simplex_volume(n, ell)


def _inverse_mu_gap(mu) -> float:
    """1/mu - 1/mu*_3 for a rational mu, evaluated with 45 digits."""
    if isinstance(mu, RationalMu):
        num, den = mu.numerator, mu.denominator
    else:
        frac = Fraction(mu)
        num, den = frac.numerator, frac.denominator
    with localcontext() as ctx:
        ctx.prec = _PREC
        return float(Decimal(den) / Decimal(num) - _INV_FLAT3_DEC)


def action_at_mu(mu, p: ActionParams = ActionParams()) -> float:
    """Volume-normalized action of any triangulation with mean bone-degree ``mu``.

    ``mu`` may be a RationalMu, Fraction, int or float.  Exact inputs are
    evaluated in extended precision so the sign and the small differences
    between neighbouring levels are reliable.
    """
    if isinstance(mu, (RationalMu, Fraction, int)) and p.dim == 3:
        positive = mu.numerator > 0 if isinstance(mu, RationalMu) else mu > 0
        if not positive:
            raise ValueError("mu must be positive")
        return _prefactor(3, p.ell) * _inverse_mu_gap(mu)
    mu = float(mu.value if isinstance(mu, RationalMu) else mu)
    if mu <= 0:
        raise ValueError("mu must be positive")
    return _prefactor(p.dim, p.ell) * (1 / mu - 1 / flat_degree(p.dim))


def action_sign(tets: int, edges: int) -> int:
    """Sign of the action at mu = 6K/N1, i.e. the sign of 2 pi N1 - 6 K theta_3.

    Never zero: the flat degree is irrational.
    """
    approx = 2 * math.pi * edges - 6 * tets * THETA3
    # Each product carries relative error below 4 ulp.
    bound = 4 * 2.0**-52 * (2 * math.pi * edges + 6 * tets * THETA3)
    if abs(approx) > bound:
        return 1 if approx > 0 else -1
    with localcontext() as ctx:
        ctx.prec = _PREC
        exact = 2 * _PI_DEC * edges - 6 * tets * _THETA3_DEC
    return 1 if exact > 0 else -1
