"""Census of small closed 3-manifold triangulations and degeneracy histograms."""

from .classify import (
    OTHER,
    S3_CONFIRMED,
    TRIVIAL_H1_UNRESOLVED,
    UNCLASSIFIED,
    ManifoldClass,
    classify_manifold,
    derive_seed,
    s3_catalog,
)
from .enumerate import (
    DEFAULT_MAX_TETS,
    EnumerationFilters,
    canonical_signature,
    enumerate_all,
    ingest_gluing_archive,
    max_tets,
    read_gluing_archive,
    write_gluing_archive,
)
from .histogram import (
    CensusLadder,
    DegeneracyHistogram,
    HistogramFormatError,
    HistogramKey,
    histogram,
    ingest_histogram_file,
    parse_histogram_csv,
    s3_ratio,
)

__all__ = [
    "DEFAULT_MAX_TETS",
    "OTHER",
    "S3_CONFIRMED",
    "TRIVIAL_H1_UNRESOLVED",
    "UNCLASSIFIED",
    "CensusLadder",
    "DegeneracyHistogram",
    "EnumerationFilters",
    "HistogramFormatError",
    "HistogramKey",
    "ManifoldClass",
    "canonical_signature",
    "classify_manifold",
    "derive_seed",
    "enumerate_all",
    "histogram",
    "ingest_gluing_archive",
    "ingest_histogram_file",
    "max_tets",
    "parse_histogram_csv",
    "read_gluing_archive",
    "s3_catalog",
    "s3_ratio",
    "write_gluing_archive",
]
