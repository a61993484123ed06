"""Closed 3-manifold triangulations: gluing data, skeleta, signatures, homology."""

from .gluing import (
    GluedTriangulation,
    GluingError,
    boundary_of_4_simplex,
    doubled_tetrahedron,
    format_gluing_text,
    parse_gluing_text,
)
from .homology import HomologyProfile, homology_h1
from .signature import automorphism_count, decode_signature, iso_signature
from .skeleton import (
    QuotientSkeleton,
    RationalMu,
    ValidationReport,
    is_orientable,
    is_simplicial,
    mean_bone_degree,
    skeleton,
    validate_manifold,
)

__all__ = [
    "GluedTriangulation",
    "GluingError",
    "HomologyProfile",
    "QuotientSkeleton",
    "RationalMu",
    "ValidationReport",
    "automorphism_count",
    "boundary_of_4_simplex",
    "decode_signature",
    "doubled_tetrahedron",
    "format_gluing_text",
    "homology_h1",
    "is_orientable",
    "is_simplicial",
    "iso_signature",
    "mean_bone_degree",
    "parse_gluing_text",
    "skeleton",
    "validate_manifold",
]
