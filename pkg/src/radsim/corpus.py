"""Report and finding-label ingestion, filtering, grouping, and pairing.

Input files are MIMIC-CXR-compatible CSVs: a reports file with columns
``report_id,text`` and one label file per source with one column per
finding name. Cell values in label files are ``1.0`` (positive), ``0.0``
(negative), ``-1.0`` (uncertain) or blank (missing).
"""

from __future__ import annotations

import csv
import enum
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    DuplicateReportId,
    EmptyCorpus,
    EmptyText,
    InvalidCellValue,
    MissingColumn,
    MissingReportId,
    OverlappingGroups,
    UnknownLabelColumn,
)

log = logging.getLogger(__name__)

CHEXPERT_NAMES = (
    "Atelectasis",
    "Cardiomegaly",
    "Consolidation",
    "Edema",
    "Enlarged Cardiomediastinum",
    "Fracture",
    "Lung Lesion",
    "Lung Opacity",
    "No Finding",
    "Pleural Effusion",
    "Pleural Other",
    "Pneumonia",
    "Pneumothorax",
    "Support Devices",
)


class Assignment(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    UNCERTAIN = "uncertain"
    MISSING = "missing"


# label-file cell values, after stripping
_CELL_TO_ASSIGNMENT = {
    "1.0": Assignment.POSITIVE,
    "0.0": Assignment.NEGATIVE,
    "-1.0": Assignment.UNCERTAIN,
    "": Assignment.MISSING,
}


@dataclass(frozen=True)
class Report:
    report_id: str
    text: str


@dataclass(frozen=True)
class FindingSchema:
    """Ordered finding names; vector positions depend on this order."""

    names: tuple[str, ...] = CHEXPERT_NAMES
    no_finding_name: str = "No Finding"

    def __post_init__(self) -> None:
        if len(set(self.names)) != len(self.names):
            raise ValueError("schema names must be unique")
        if self.no_finding_name not in self.names:
            raise ValueError(f"no_finding_name {self.no_finding_name!r} not in schema")


@dataclass(frozen=True)
class FindingVector:
    report_id: str
    source: str
    assignments: dict[str, Assignment]


@dataclass(frozen=True)
class PairSet:
    group_a: tuple[str, ...]
    group_b: tuple[str, ...]
    pairs: tuple[tuple[str, str], ...] = field(default_factory=tuple)


def load_reports(path: str | Path) -> list[Report]:
    """Read the reports CSV; text kept verbatim except newlines become \\n."""
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        columns = reader.fieldnames or []
        for required in ("report_id", "text"):
            if required not in columns:
                raise MissingColumn(f"{path}: missing column {required!r}")
        reports: list[Report] = []
        seen: set[str] = set()
        for lineno, row in enumerate(reader, start=2):
            rid = (row["report_id"] or "").strip()
            if not rid:
                raise MissingReportId(f"{path}: row {lineno} has an empty report_id")
            if rid in seen:
                raise DuplicateReportId(f"{path}: row {lineno} duplicates report_id {rid!r}")
            seen.add(rid)
            text = (row["text"] or "").replace("\r\n", "\n").replace("\r", "\n")
            if not text.strip():
                raise EmptyText(f"{path}: row {lineno} (report_id {rid!r}) has empty text")
            reports.append(Report(rid, text))
    return reports


def load_finding_vectors(path: str | Path, schema: FindingSchema, source: str) -> list[FindingVector]:
    """Read one label CSV into FindingVectors over the given schema."""
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        columns = list(reader.fieldnames or [])
        if "report_id" not in columns:
            raise MissingReportId(f"{path}: missing report_id column")
        for name in columns:
            if name != "report_id" and name not in schema.names:
                raise UnknownLabelColumn(f"{path}: column {name!r} is not in the finding schema")
        for name in schema.names:
            if name not in columns:
                raise MissingColumn(f"{path}: missing schema column {name!r}")
        vectors: list[FindingVector] = []
        for lineno, row in enumerate(reader, start=2):
            rid = (row["report_id"] or "").strip()
            if not rid:
                raise MissingReportId(f"{path}: row {lineno} has an empty report_id")
            assignments: dict[str, Assignment] = {}
            for name in schema.names:
                cell = (row[name] or "").strip()
                if cell not in _CELL_TO_ASSIGNMENT:
                    raise InvalidCellValue(
                        f"{path}: row {lineno} ({rid!r}) column {name!r} has value {cell!r}"
                    )
                assignments[name] = _CELL_TO_ASSIGNMENT[cell]
            vectors.append(FindingVector(rid, source, assignments))
    return vectors


def _solely_no_finding(vector: FindingVector, schema: FindingSchema) -> bool:
    if vector.assignments[schema.no_finding_name] is not Assignment.POSITIVE:
        return False
    return all(
        vector.assignments[name] in (Assignment.NEGATIVE, Assignment.MISSING)
        for name in schema.names
        if name != schema.no_finding_name
    )


def filter_no_finding_only(
    reports: Sequence[Report],
    chexpert: Iterable[FindingVector],
    negbio: Iterable[FindingVector],
    schema: FindingSchema,
) -> list[Report]:
    """Drop reports labeled as nothing but the no-finding label in both sources.

    Reports lacking a vector in either source are dropped with a warning.
    All other reports are retained in input order.
    """
    chex_by_id = {v.report_id: v for v in chexpert}
    negbio_by_id = {v.report_id: v for v in negbio}
    retained: list[Report] = []
    for report in reports:
        chex = chex_by_id.get(report.report_id)
        negb = negbio_by_id.get(report.report_id)
        if chex is None or negb is None:
            missing = [s for s, v in (("CheXpert", chex), ("NegBio", negb)) if v is None]
            log.warning("dropping %s: no label vector from %s", report.report_id, ", ".join(missing))
            continue
        if _solely_no_finding(chex, schema) and _solely_no_finding(negb, schema):
            continue
        retained.append(report)
    return retained


def split_groups(reports: Sequence[Report | str], seed: int) -> PairSet:
    """Seeded even split into two groups.

    The split is a pure function of the report-id multiset and the seed:
    ids are sorted before shuffling, so input order never matters. An odd
    report drops the last id after shuffling, with a warning.
    """
    ids = sorted(r if isinstance(r, str) else r.report_id for r in reports)
    if not ids:
        raise EmptyCorpus("no reports to split")
    random.Random(seed).shuffle(ids)
    half = len(ids) // 2
    if len(ids) % 2:
        log.warning("odd report count %d: dropping %s", len(ids), ids[-1])
    return PairSet(group_a=tuple(ids[:half]), group_b=tuple(ids[half : 2 * half]))


def cross_pairs(pair_set: PairSet) -> PairSet:
    """Fill in the full cross product, row-major over group_a then group_b."""
    if not pair_set.group_a or not pair_set.group_b:
        raise EmptyCorpus("both groups must be non-empty")
    overlap = set(pair_set.group_a) & set(pair_set.group_b)
    if overlap:
        raise OverlappingGroups(f"groups share ids: {sorted(overlap)}")
    pairs = tuple((a, b) for a in pair_set.group_a for b in pair_set.group_b)
    return PairSet(pair_set.group_a, pair_set.group_b, pairs)
