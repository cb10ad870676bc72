"""Preservation taxonomy from liveness and archive coverage."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Tri(str, Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"

    @classmethod
    def of(cls, value: bool | None) -> "Tri":
        if value is None:
            return cls.UNKNOWN
        return cls.YES if value else cls.NO


class Status(str, Enum):
    REPLICATED = "Replicated"
    VULNERABLE = "Vulnerable"
    RECOVERABLE = "Recoverable"
    UNRECOVERABLE = "Unrecoverable"
    INDETERMINATE = "Indeterminate"


class Quadrant(str, Enum):
    BOTH = "Both"
    SWH_ONLY = "SwhOnly"
    WEB_ONLY = "WebOnly"
    NEITHER = "Neither"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class ArchiveCoverage:
    in_swh: Tri
    in_web_archives: Tri

    @property
    def archived(self) -> Tri:
        """Archived anywhere: YES if either copy exists, NO only if both are known absent."""
        if Tri.YES in (self.in_swh, self.in_web_archives):
            return Tri.YES
        if self.in_swh is Tri.NO and self.in_web_archives is Tri.NO:
            return Tri.NO
        return Tri.UNKNOWN

    @property
    def quadrant(self) -> Quadrant:
        if Tri.UNKNOWN in (self.in_swh, self.in_web_archives):
            return Quadrant.INDETERMINATE
        swh = self.in_swh is Tri.YES
        web = self.in_web_archives is Tri.YES
        if swh and web:
            return Quadrant.BOTH
        if swh:
            return Quadrant.SWH_ONLY
        if web:
            return Quadrant.WEB_ONLY
        return Quadrant.NEITHER


@dataclass(frozen=True)
class ResourceClassification:
    status: Status
    coverage_quadrant: Quadrant


def classify(live: bool, coverage: ArchiveCoverage) -> ResourceClassification:
    """Classify one repository from its liveness and where copies exist.

    ``live`` accepts a bool or anything with an ``active`` attribute (a
    liveness result).
    """
    if not isinstance(live, bool):
        live = bool(live.active)
    archived = coverage.archived
    if archived is Tri.UNKNOWN:
        status = Status.INDETERMINATE
    elif live:
        status = Status.REPLICATED if archived is Tri.YES else Status.VULNERABLE
    else:
        status = Status.RECOVERABLE if archived is Tri.YES else Status.UNRECOVERABLE
    return ResourceClassification(status, coverage.quadrant)
