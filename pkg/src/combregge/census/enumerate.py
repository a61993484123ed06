"""Exhaustive census of closed 3-manifold triangulations with K tetrahedra."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from ..triangulation.gluing import GluedTriangulation, format_gluing_text, parse_gluing_text
from ..triangulation.signature import encode_codes, serialize
from ..triangulation.skeleton import is_simplicial

# K=6 takes about ten minutes on one core; each extra tetrahedron costs ~10x.
DEFAULT_MAX_TETS = 6
MAX_TETS_ENV = "REGGE_MAX_TETS"


def max_tets() -> int:
    """Enumeration cap, overridable through the REGGE_MAX_TETS environment variable."""
    raw = os.environ.get(MAX_TETS_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_MAX_TETS
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{MAX_TETS_ENV} must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class EnumerationFilters:
    orientable_only: bool = False
    simplicial_only: bool = False

    def describe(self):
        parts = [name for name, on in (("orientable", self.orientable_only), ("simplicial", self.simplicial_only)) if on]
        return "+".join(parts) or "none"


def _worker(args):
    from . import _kernel

    k, orientable, branches = args
    results = []
    for b in branches:
        dest, glu, _ = _kernel.run(k, orientable, first=b)
        results.append((dest.tolist(), glu.tolist()))
    return results


def _partition(items, workers):
    return [items[i::workers] for i in range(workers)]


def canonical_signature(tri: GluedTriangulation) -> str:
    """Signature of a triangulation already in canonical labelling."""
    return encode_codes(tri.tets, serialize(tri.dest, tri.gluing, 0, 0))


def enumerate_all(k: int, filters: EnumerationFilters | None = None, workers: int = 1) -> list[GluedTriangulation]:
    """Canonical representatives of every isomorphism class, signature-ascending.

    The search tree is split by the choice made at the first face; workers
    enumerate disjoint branches, and the final sort makes the output
    independent of the split.
    """
    if k < 1:
        raise ValueError("need at least one tetrahedron")
    from . import _kernel

    filters = filters or EnumerationFilters()
    branches = _kernel.root_choices(k, filters.orientable_only)
    workers = max(1, min(workers, len(branches)))
    jobs = [(k, filters.orientable_only, part) for part in _partition(branches, workers)]
    if workers == 1:
        chunks = [_worker(jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_worker, jobs))
    found = []
    for chunk in chunks:
        for dest, glu in chunk:
            for d, g in zip(dest, glu):
                tri = GluedTriangulation.trusted(tuple(d), tuple(g))
                if filters.simplicial_only and not is_simplicial(tri).simplicial:
                    continue
                found.append((canonical_signature(tri), tri))
    found.sort(key=lambda item: item[0])
    return [tri for _, tri in found]


def write_gluing_archive(tris, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("---\n".join(format_gluing_text(t) for t in tris))


def read_gluing_archive(path):
    """Yield triangulations from ``---``-separated gluing-file blocks."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    block = []
    for line in text.splitlines():
        if line.strip() == "---":
            if any(s.strip() and not s.lstrip().startswith("#") for s in block):
                yield parse_gluing_text("\n".join(block))
            block = []
        else:
            block.append(line)
    if any(s.strip() and not s.lstrip().startswith("#") for s in block):
        yield parse_gluing_text("\n".join(block))


def ingest_gluing_archive(path) -> list[GluedTriangulation]:
    return list(read_gluing_archive(path))
