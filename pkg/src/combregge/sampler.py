"""Metropolis-Hastings random walk over triangulations of a fixed manifold.

The walk proposes a uniformly chosen applicable Pachner move and accepts
with probability

    min(1, w(T') |moves(T)| / (w(T) |moves(T')|)),

w(T) = base(T) exp(-lambda_pin (N3(T) - K)^2), base = 1 (uniform) or
exp(-A_VN(T)) (euclidean).  Moves leaving the band |N3 - K| <= delta are
rejected outright.  Over isomorphism classes the stationary law is
proportional to w(C) / |Aut(C)|, so visit counts weighted by |Aut| estimate
class counts; raw visit counts are reported as well.

Per-chain seeds: chain i of a run with master seed s uses
``derive_seed(s, "chain", i) & 0xFFFFFFFF`` as the 32-bit generator seed.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from numba import njit

from . import _fastmoves as F
from .action import THETA3
from .census.classify import derive_seed
from .census.histogram import DegeneracyHistogram, HistogramKey
from .ensemble import almost_flat_bracket
from .moves import KINDS
from .triangulation.gluing import GluedTriangulation
from .triangulation.skeleton import validate_manifold

UNIFORM = "uniform"
EUCLIDEAN = "euclidean"
MIN_BATCHES = 16
DEBUG_INTERVAL = 10_000
_INV_FLAT = THETA3 / (2 * math.pi)
_PREFACTOR = 9 * math.sqrt(2) / 2


class SamplerError(RuntimeError):
    pass


class InsufficientSamplesError(SamplerError):
    pass


@dataclass(frozen=True)
class SamplerConfig:
    target: int
    seed: int = 0
    delta: int = 3
    lambda_pin: float = 0.5
    mode: str = UNIFORM
    ell: float = 1.0
    kinds: tuple[str, ...] = KINDS
    steps: int = 100_000
    burn_in: int | None = None  # default: 10% of steps
    thin: int = 10
    chains: int = 1
    batches: int = 32
    debug: bool = False
    observe: int | None = None  # volume slice where |Aut| is recorded; default: target

    def __post_init__(self):
        if self.target < 1:
            raise ValueError("target volume must be positive")
        if self.delta < 1:
            raise ValueError("band half-width must be at least 1")
        if self.lambda_pin < 0:
            raise ValueError("pinning strength must be non-negative")
        if self.mode not in (UNIFORM, EUCLIDEAN):
            raise ValueError(f"unknown weight mode {self.mode!r}")
        if not self.ell > 0:
            raise ValueError("edge length must be positive")
        if not self.kinds or any(k not in KINDS for k in self.kinds):
            raise ValueError(f"move kinds must be drawn from {KINDS}")
        if self.steps <= self.effective_burn_in:
            raise ValueError("steps must exceed burn-in")
        if self.thin < 1 or self.chains < 1:
            raise ValueError("thinning and chain count must be positive")
        if self.batches < MIN_BATCHES:
            raise ValueError(f"at least {MIN_BATCHES} batches are required")

    @property
    def effective_burn_in(self) -> int:
        return self.steps // 10 if self.burn_in is None else self.burn_in

    @property
    def observed_volume(self) -> int:
        return self.target if self.observe is None else self.observe

    @property
    def band(self):
        return max(1, self.target - self.delta), self.target + self.delta

    def chain_seed(self, index: int) -> int:
        return derive_seed(self.seed, "chain", index) & 0xFFFFFFFF


@njit(cache=True)
def _log_weight(n3, n1, target, lam, euclid, ell):
    lw = -lam * (n3 - target) ** 2
    if euclid:
        lw -= _PREFACTOR * (n1 / (6.0 * n3) - _INV_FLAT) / (ell * ell)
    return lw


@njit(cache=True)
def _chain_kernel(dest, glu, k, kmin, kmax, target, lam, euclid, ell, kinds, seed, reseed, step0, step1,
                  burn, thin, observe, out_n3, out_n1, out_aut, out_states, nsamp, counts):
    """Advance the chain from step0 to step1 in place.

    counts rows: proposed, accepted, band-rejected (per kind index).
    Returns (K, number of samples, absorbed flag).
    """
    if reseed:
        np.random.seed(seed)
    size = 4 * kmax
    vof = np.zeros(size, dtype=np.int64)
    eof = np.zeros(6 * kmax, dtype=np.int64)
    tri_of = np.zeros(size, dtype=np.int64)
    edeg = np.zeros(6 * kmax, dtype=np.int64)
    vcorn = np.zeros(size, dtype=np.int64)
    vpar = np.zeros(size, dtype=np.int64)
    epar = np.zeros(6 * kmax, dtype=np.int64)
    idmap = np.zeros(6 * kmax, dtype=np.int64)
    cap = 16 * kmax + 16
    moves = np.zeros((cap, F.MOVE_WIDTH), dtype=np.int64)
    moves2 = np.zeros((cap, F.MOVE_WIDTH), dtype=np.int64)
    nd = np.zeros(size, dtype=np.int64)
    ng = np.zeros(size, dtype=np.int64)
    oldpos = np.zeros(kmax, dtype=np.int64)
    newidx = np.zeros(kmax, dtype=np.int64)

    n0, n1, _ = F.light_skeleton(dest, glu, k, vof, eof, tri_of, edeg, vcorn, vpar, epar, idmap)
    nm = F.list_moves(dest, glu, k, kinds, vof, eof, tri_of, edeg, vcorn, n0, n1, moves)
    lw = _log_weight(k, n1, target, lam, euclid, ell)
    record_states = out_states.shape[0] > 0
    for step in range(step0, step1):
        if nm == 0:
            return k, nsamp, True
        i = np.random.randint(0, nm)
        kind = moves[i, 0]
        counts[0, kind] += 1
        nk = k + F.DELTA_TETS[kind]
        u = np.random.random()
        if nk < kmin or nk > kmax:
            counts[2, kind] += 1
        else:
            nk = F.replace_cells(dest, glu, k, moves[i], nd, ng, oldpos, newidx)
            m0, m1, _ = F.light_skeleton(nd, ng, nk, vof, eof, tri_of, edeg, vcorn, vpar, epar, idmap)
            nm2 = F.list_moves(nd, ng, nk, kinds, vof, eof, tri_of, edeg, vcorn, m0, m1, moves2)
            lw2 = _log_weight(nk, m1, target, lam, euclid, ell)
            log_acc = lw2 - lw + math.log(nm) - math.log(nm2)
            if log_acc >= 0 or u < math.exp(log_acc):
                counts[1, kind] += 1
                for j in range(4 * nk):
                    dest[j] = nd[j]
                    glu[j] = ng[j]
                k = nk
                n1 = m1
                lw = lw2
                nm = nm2
                moves, moves2 = moves2, moves
        if step >= burn and (step - burn) % thin == 0:
            out_n3[nsamp] = k
            out_n1[nsamp] = n1
            out_aut[nsamp] = F.automorphism_count(dest, glu, k) if k == observe else 0
            if record_states:
                for j in range(4 * k):
                    out_states[nsamp, j] = dest[j]
                    out_states[nsamp, size + j] = glu[j]
                for j in range(4 * k, size):
                    out_states[nsamp, j] = -1
                    out_states[nsamp, size + j] = -1
            nsamp += 1
    return k, nsamp, False


@dataclass
class RatioEstimate:
    value: float
    stderr: float
    minus: float
    plus: float
    batches: int


@dataclass
class ChainStats:
    config: dict
    visits: dict[tuple[int, int], int]
    aut_visits: dict[tuple[int, int], int]
    acceptance: dict[str, float]
    proposals: dict[str, int]
    band_rejections: dict[str, int]
    autocorr_mu: float
    samples: int
    seeds: list[int]
    # per chain, per batch: [visits, aut-weighted visits] keyed by (N3, N1)
    batch_levels: list[list[dict[int, list[int]]]] = field(default_factory=list)
    absorbed: bool = False
    final_states: list[GluedTriangulation] = field(default_factory=list)
    sampled_states: list | None = None

    def to_histogram(self) -> DegeneracyHistogram:
        hist = DegeneracyHistogram(source="sampled", filters=f"target={self.config['target']}")
        for (n3, n1), n in self.visits.items():
            hist.add(HistogramKey(n3, n1, "visits"), n)
        for (n3, n1), n in self.aut_visits.items():
            hist.add(HistogramKey(n3, n1, "aut-weighted"), n)
        return hist

    def to_csv(self) -> str:
        return self.to_histogram().to_csv()

    def summary(self) -> dict:
        k = self.config["target"]
        out = {
            "samples": self.samples,
            "seeds": self.seeds,
            "acceptance": self.acceptance,
            "proposals": self.proposals,
            "band_rejections": self.band_rejections,
            "autocorr_mu": self.autocorr_mu,
            "absorbed": self.absorbed,
            "config": self.config,
        }
        for weighted, name in ((False, "ratio"), (True, "ratio_aut_weighted")):
            try:
                est = estimate_ratio(self, k, weighted=weighted)
                out[name] = {"value": est.value, "stderr": est.stderr, "minus": est.minus, "plus": est.plus}
            except (InsufficientSamplesError, ArithmeticError, ValueError) as exc:
                out[name] = {"error": str(exc)}
        per_chain = []
        for c in range(len(self.batch_levels)):
            try:
                est = estimate_ratio(self, k, chains=[c])
                per_chain.append({"value": est.value, "stderr": est.stderr})
            except (InsufficientSamplesError, ArithmeticError, ValueError) as exc:
                per_chain.append({"error": str(exc)})
        out["per_chain_ratio"] = per_chain
        return out

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def _to_arrays(tri: GluedTriangulation, kmax: int):
    dest = np.full(4 * kmax, -1, dtype=np.int64)
    glu = np.full(4 * kmax, -1, dtype=np.int64)
    dest[: len(tri.dest)] = tri.dest
    glu[: len(tri.gluing)] = tri.gluing
    return dest, glu


def integrated_autocorr(x, c=5.0) -> float:
    """Integrated autocorrelation time (in samples) with a self-consistent window."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 4 or np.allclose(x, x[0]):
        return float("nan") if n < 4 else 1.0
    y = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(y, size)
    acf = np.fft.irfft(f * np.conj(f))[:n]
    acf /= acf[0]
    tau = 1.0
    for window in range(1, n):
        tau += 2 * acf[window]
        if window >= c * tau:
            break
    return float(max(tau, 1.0))


def _run_one(args):
    tri, cfg, index, record = args
    kmin, kmax = cfg.band
    if not kmin <= tri.tets <= kmax:
        raise ValueError(f"start has {tri.tets} tetrahedra, outside the band [{kmin}, {kmax}]")
    dest, glu = _to_arrays(tri, kmax)
    kinds = np.array([1 if kind in cfg.kinds else 0 for kind in KINDS], dtype=np.int64)
    burn = cfg.effective_burn_in
    nmax = (cfg.steps - burn + cfg.thin - 1) // cfg.thin
    out_n3 = np.zeros(nmax, dtype=np.int64)
    out_n1 = np.zeros(nmax, dtype=np.int64)
    out_aut = np.zeros(nmax, dtype=np.int64)
    out_states = np.zeros((nmax if record else 0, 8 * kmax), dtype=np.int64)
    counts = np.zeros((3, 4), dtype=np.int64)
    seed = cfg.chain_seed(index)
    segment = DEBUG_INTERVAL if cfg.debug else cfg.steps
    k, nsamp, absorbed = tri.tets, 0, False
    for start in range(0, cfg.steps, segment):
        stop = min(cfg.steps, start + segment)
        k, nsamp, absorbed = _chain_kernel(
            dest, glu, k, kmin, kmax, cfg.target, cfg.lambda_pin, cfg.mode == EUCLIDEAN, cfg.ell, kinds,
            seed, start == 0, start, stop, burn, cfg.thin, cfg.observed_volume, out_n3, out_n1, out_aut, out_states, nsamp, counts,
        )
        current = GluedTriangulation(tuple(int(x) for x in dest[: 4 * k]), tuple(int(x) for x in glu[: 4 * k]))
        if cfg.debug and not validate_manifold(current).valid:
            raise SamplerError(f"chain {index} left the manifold class by step {stop}")
        if absorbed:
            break
    states = out_states[:nsamp] if record else None
    return out_n3[:nsamp], out_n1[:nsamp], out_aut[:nsamp], counts, current, absorbed, seed, states


def _level_counts(n3, n1, aut):
    """{(N3, N1): [visits, aut-weighted visits]} for one run of samples."""
    if len(n3) == 0:
        return {}
    levels, inverse = np.unique(np.stack([n3, n1], axis=1), axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    visits = np.bincount(inverse)
    weighted = np.bincount(inverse, weights=aut).astype(np.int64)
    return {(int(a), int(b)): [int(v), int(w)] for (a, b), v, w in zip(levels, visits, weighted)}


def _batches(n3, n1, aut, nbatch):
    """Split samples into contiguous batches of counts keyed by (N3, N1)."""
    edges = np.linspace(0, len(n3), nbatch + 1).astype(int)
    return [_level_counts(n3[a:b], n1[a:b], aut[a:b]) for a, b in zip(edges, edges[1:])]


def run_chain(start: GluedTriangulation, cfg: SamplerConfig, workers: int = 1, record_states: bool = False) -> ChainStats:
    """Run ``cfg.chains`` independent chains from ``start`` and pool them."""
    jobs = [(start, cfg, i, record_states) for i in range(cfg.chains)]
    if workers > 1 and cfg.chains > 1:
        with ProcessPoolExecutor(max_workers=min(workers, cfg.chains)) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(job) for job in jobs]
    visits, aut_visits = {}, {}
    counts = np.zeros((3, 4), dtype=np.int64)
    taus, batch_levels, finals, seeds, sampled = [], [], [], [], []
    absorbed = False
    total = 0
    for n3, n1, aut, c, final, ab, seed, states in results:
        counts += c
        absorbed |= ab
        finals.append(final)
        seeds.append(seed)
        total += len(n3)
        for key, (v, w) in _level_counts(n3, n1, aut).items():
            visits[key] = visits.get(key, 0) + v
            if key[0] == cfg.observed_volume:
                aut_visits[key] = aut_visits.get(key, 0) + w
        if len(n3) >= 4:
            taus.append(integrated_autocorr(6 * n3 / n1))
        batch_levels.append(_batches(n3, n1, aut, cfg.batches))
        if states is not None:
            sampled.append(states)
    proposals = {kind: int(counts[0, i]) for i, kind in enumerate(KINDS)}
    accepted = {kind: int(counts[1, i]) for i, kind in enumerate(KINDS)}
    acceptance = {kind: (accepted[kind] / proposals[kind] if proposals[kind] else 0.0) for kind in KINDS}
    config = asdict(cfg)
    config["kinds"] = list(cfg.kinds)
    config["burn_in"] = cfg.effective_burn_in
    config["observe"] = cfg.observed_volume
    return ChainStats(
        config=config,
        visits=dict(sorted(visits.items())),
        aut_visits=dict(sorted(aut_visits.items())),
        acceptance=acceptance,
        proposals=proposals,
        band_rejections={kind: int(counts[2, i]) for i, kind in enumerate(KINDS)},
        autocorr_mu=float(np.mean(taus)) if taus else float("nan"),
        samples=total,
        seeds=seeds,
        batch_levels=batch_levels,
        absorbed=absorbed,
        final_states=finals,
        sampled_states=sampled if record_states else None,
    )


def estimate_ratio(stats: ChainStats, k: int, weighted: bool = False, chains=None, n1_minus=None, n1_plus=None) -> RatioEstimate:
    """N- / N+ at N3 = K from pooled batch means.

    With ``weighted`` each visit counts |Aut| of the visited triangulation,
    turning visit frequencies into isomorphism-class frequencies; this needs
    K to be the observed volume of the run.
    """
    if n1_minus is None or n1_plus is None:
        bracket = almost_flat_bracket(k)
        n1_minus, n1_plus = bracket.n1_minus, bracket.n1_plus
    if weighted and k != stats.config["observe"]:
        raise ValueError(f"|Aut| weights were recorded at N3={stats.config['observe']}, not at N3={k}")
    col = 1 if weighted else 0
    chains = range(len(stats.batch_levels)) if chains is None else chains
    minus, plus = [], []
    for c in chains:
        for levels in stats.batch_levels[c]:
            minus.append(levels.get((k, n1_minus), [0, 0])[col])
            plus.append(levels.get((k, n1_plus), [0, 0])[col])
    a, b = np.array(minus, dtype=float), np.array(plus, dtype=float)
    if a.sum() == 0 or b.sum() == 0:
        raise InsufficientSamplesError(
            f"need visits at both levels: N1={n1_minus} has {a.sum():g}, N1={n1_plus} has {b.sum():g}"
        )
    ratio = a.sum() / b.sum()
    nb = len(a)
    # delta-method variance of a ratio of batch means
    resid = a - ratio * b
    stderr = math.sqrt(np.sum(resid**2) / (nb * (nb - 1))) / b.mean()
    return RatioEstimate(float(ratio), float(stderr), float(a.sum()), float(b.sum()), nb)
