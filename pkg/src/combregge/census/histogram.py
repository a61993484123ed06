"""Degeneracy histograms N_{K,M}(mu) keyed by (K, N1, class, orientability).

CSV layout, one row per key::

    K,N1,class,orientable,simplicial,count

``orientable`` and ``simplicial`` are ``1``/``0``, or ``*`` when the source
did not record the flag.  mu is never stored; it is always 6K/N1.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from ..triangulation.skeleton import RationalMu, is_orientable, is_simplicial, skeleton
from .classify import S3_CONFIRMED, TRIVIAL_H1_UNRESOLVED, classify_manifold
from .enumerate import EnumerationFilters, canonical_signature, enumerate_all

HEADER = ["K", "N1", "class", "orientable", "simplicial", "count"]
_FLAGS = {"1": True, "0": False, "*": None}


class HistogramFormatError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True, order=True)
class HistogramKey:
    tets: int
    edges: int
    cls: str
    orientable: bool | None = None
    simplicial: bool | None = None

    @property
    def mu(self) -> RationalMu:
        return RationalMu(6 * self.tets, self.edges)


@dataclass
class DegeneracyHistogram:
    counts: dict[HistogramKey, int] = field(default_factory=dict)
    source: str = "enumerated"
    filters: str = "none"

    def add(self, key: HistogramKey, n: int = 1):
        self.counts[key] = self.counts.get(key, 0) + n

    def __eq__(self, other):
        return isinstance(other, DegeneracyHistogram) and self.counts == other.counts

    def __len__(self):
        return len(self.counts)

    def slice(self, tets=None, cls=None, orientable=None):
        out = DegeneracyHistogram(source=self.source, filters=self.filters)
        for key, n in self.counts.items():
            if tets is not None and key.tets != tets:
                continue
            if cls is not None and key.cls != cls:
                continue
            if orientable is not None and key.orientable is not None and key.orientable != orientable:
                continue
            out.counts[key] = n
        return out

    def by_edges(self, tets, cls=None) -> dict[int, int]:
        """Counts at volume ``tets`` summed over the remaining key fields."""
        acc = Counter()
        for key, n in self.slice(tets=tets, cls=cls).counts.items():
            acc[key.edges] += n
        return dict(sorted(acc.items()))

    def by_mu(self, tets, cls=None) -> dict[Fraction, int]:
        return {Fraction(6 * tets, n1): c for n1, c in self.by_edges(tets, cls).items()}

    def volumes(self):
        return sorted({key.tets for key in self.counts})

    def rows(self):
        for key in sorted(self.counts, key=_sort_key):
            yield key, self.counts[key]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(HEADER)
        for key, n in self.rows():
            writer.writerow([key.tets, key.edges, key.cls, _flag(key.orientable), _flag(key.simplicial), n])
        return buf.getvalue()

    def write(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())

    def display_rows(self, tets, cls=None):
        """(mu as n/d, mu to 3 decimals, count) rows in increasing mu."""
        return [
            (f"{6 * tets}/{n1}", RationalMu(6 * tets, n1).display(), c)
            for n1, c in sorted(self.by_edges(tets, cls).items(), reverse=True)
        ]


def _flag(v):
    return "*" if v is None else str(int(v))


def _sort_key(key):
    return (key.tets, key.edges, key.cls, _flag(key.orientable), _flag(key.simplicial))


def parse_histogram_csv(text: str, source="ingested") -> DegeneracyHistogram:
    hist = DegeneracyHistogram(source=source)
    first_line = {}
    rows = csv.reader(io.StringIO(text))
    header_seen = False
    for lineno, row in enumerate(rows, start=1):
        if not row or (len(row) == 1 and not row[0].strip()) or row[0].lstrip().startswith("#"):
            continue
        if not header_seen:
            if [c.strip() for c in row] != HEADER:
                raise HistogramFormatError(f"expected header {','.join(HEADER)}", lineno)
            header_seen = True
            continue
        if len(row) != len(HEADER):
            raise HistogramFormatError(f"expected {len(HEADER)} fields, got {len(row)}", lineno)
        k, n1, cls, orient, simp, count = (c.strip() for c in row)
        try:
            k, n1, count = int(k), int(n1), int(count)
        except ValueError:
            raise HistogramFormatError("K, N1 and count must be integers", lineno) from None
        if k < 1 or n1 < 1 or count < 0:
            raise HistogramFormatError("K and N1 must be positive and count non-negative", lineno)
        if not cls:
            raise HistogramFormatError("empty class label", lineno)
        if orient not in _FLAGS or simp not in _FLAGS:
            raise HistogramFormatError("flags must be 1, 0 or *", lineno)
        key = HistogramKey(k, n1, cls, _FLAGS[orient], _FLAGS[simp])
        if key in first_line:
            raise HistogramFormatError(
                f"duplicate key (K={k}, N1={n1}, class={cls}) first seen on line {first_line[key]}", lineno
            )
        first_line[key] = lineno
        hist.counts[key] = count
    if not header_seen:
        raise HistogramFormatError("missing header")
    return hist


def ingest_histogram_file(path) -> DegeneracyHistogram:
    with open(path, encoding="utf-8") as fh:
        return parse_histogram_csv(fh.read())


def histogram(tris, classes=None, filters="none") -> DegeneracyHistogram:
    """Group triangulations by (K, N1, class, orientability, simpliciality).

    ``classes`` is a parallel sequence of ManifoldClass values; without it
    every entry is filed as ``unclassified``.
    """
    hist = DegeneracyHistogram(filters=filters)
    classes = classes if classes is not None else [None] * len(tris)
    for tri, cls in zip(tris, classes):
        skel = skeleton(tri)
        label = cls.key if cls is not None else "unclassified"
        hist.add(HistogramKey(tri.tets, skel.n1, label, is_orientable(tri), is_simplicial(tri, skel).simplicial))
    return hist


class CensusLadder:
    """Enumerate and classify K = 1, 2, ... in order.

    Triangulations confirmed as S^3 at smaller K join the catalog used to
    certify larger ones, so most spheres need a single down-move.
    """

    def __init__(self, seed=0, orientable_only=True, workers=1):
        self.seed = seed
        self.filters = EnumerationFilters(orientable_only=orientable_only)
        self.workers = workers
        self.known_s3: set[str] = set()
        self.levels: dict[int, tuple[list, list]] = {}

    def level(self, k):
        if k in self.levels:
            return self.levels[k]
        for j in range(1, k):
            self.level(j)
        tris = enumerate_all(k, self.filters, self.workers)
        known = frozenset(self.known_s3)
        classes = [classify_manifold(t, self.seed, known=known) for t in tris]
        for t, c in zip(tris, classes):
            if c.label == S3_CONFIRMED:
                self.known_s3.add(canonical_signature(t))
        self.levels[k] = (tris, classes)
        return self.levels[k]

    def histogram(self, k) -> DegeneracyHistogram:
        tris, classes = self.level(k)
        return histogram(tris, classes, filters=self.filters.describe())


def s3_ratio(hist: DegeneracyHistogram, tets, n1_minus, n1_plus, cls=S3_CONFIRMED):
    """N^- / N^+ from a histogram slice, with the unresolved bucket reported alongside."""
    counts = hist.by_edges(tets, cls)
    unresolved = hist.by_edges(tets, TRIVIAL_H1_UNRESOLVED)
    minus, plus = counts.get(n1_minus, 0), counts.get(n1_plus, 0)
    if plus == 0:
        raise ValueError(f"no entries at K={tets}, N1={n1_plus}")
    return minus / plus, {"minus": minus, "plus": plus, "unresolved": unresolved}
