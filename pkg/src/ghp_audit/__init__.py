"""Audit whether git hosting platform URIs cited in scholarly articles are live and archived."""

from .classification import ArchiveCoverage, Quadrant, ResourceClassification, Status, Tri, classify
from .ghp_uri import GhpUri, NotGhp, NotRepository, Platform, canonicalize, parse

__version__ = "0.1.0"

__all__ = [
    "ArchiveCoverage", "GhpUri", "NotGhp", "NotRepository", "Platform", "Quadrant",
    "ResourceClassification", "Status", "Tri", "canonicalize", "classify", "parse",
]
