"""Parser for KDD-Cup-2010-style tab-separated interaction logs.

One row = one step attempt. An item is the (problem hierarchy, problem name,
step name) triple -- step names repeat across problems, so the step name
alone is not an identity. The knowledge-component cell is a "~~"-separated
list; rows whose KC cell is empty, whitespace or missing are not clearly
tagged and get discarded (counted, never silently). Students are never
discarded. Exact KC strings are kept as concept ids; no collapsing of
section-qualified variants.

Train and test files of a provided split are parsed against one shared
registry so the same triple maps to the same item id in both.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .model import ConceptId, DomainModel, Interaction, ItemId, MeloError, StudentId

STUDENT_COLUMN = "Anon Student Id"
HIERARCHY_COLUMN = "Problem Hierarchy"
PROBLEM_COLUMN = "Problem Name"
STEP_COLUMN = "Step Name"
CORRECT_COLUMN = "Correct First Attempt"
KC_SEPARATOR = "~~"

MALFORMED_EXAMPLE_CAP = 20


class ParseError(MeloError):
    """Fatal file-level parse failure (missing column, bad header)."""


@dataclass
class DiscardReport:
    """Accounting of rows dropped during parsing; kept + discarded = total."""

    total_rows: int = 0
    kept: int = 0
    discarded_untagged: int = 0
    discarded_malformed: int = 0
    malformed_examples: list[tuple[int, str]] = field(default_factory=list)

    @property
    def discarded(self) -> int:
        return self.discarded_untagged + self.discarded_malformed

    def note_malformed(self, row: int, reason: str) -> None:
        self.discarded_malformed += 1
        if len(self.malformed_examples) < MALFORMED_EXAMPLE_CAP:
            self.malformed_examples.append((row, reason))


class KddItemRegistry:
    """Interns (hierarchy, problem, step) triples to dense item ids.

    Identical triples always map to one id; ids are assigned in first
    appearance order across every file parsed against this registry.
    """

    def __init__(self) -> None:
        self._ids: dict[tuple[str, str, str], ItemId] = {}
        self.tags: dict[ItemId, tuple[ConceptId, ...]] = {}
        self._concepts: dict[ConceptId, None] = {}

    def intern(self, key: tuple[str, str, str], tags: tuple[ConceptId, ...]) -> ItemId:
        item = self._ids.get(key)
        if item is None:
            item = f"q{len(self._ids) + 1}"
            self._ids[key] = item
            self.tags[item] = tags
            for c in tags:
                self._concepts.setdefault(c)
        return item

    @property
    def concepts(self) -> tuple[ConceptId, ...]:
        return tuple(self._concepts)

    def domain(self) -> DomainModel:
        return DomainModel(self.concepts)

    def __len__(self) -> int:
        return len(self._ids)


@dataclass
class KddDataset:
    """One parsed file plus the registry it was parsed against."""

    registry: KddItemRegistry
    interactions: list[Interaction]
    report: DiscardReport

    @property
    def domain(self) -> DomainModel:
        return self.registry.domain()

    @property
    def item_tags(self) -> dict[ItemId, tuple[ConceptId, ...]]:
        return dict(self.registry.tags)


def _kc_column(fieldnames: list[str], requested: str | None) -> str:
    if requested is not None:
        if requested not in fieldnames:
            raise ParseError(f"missing required column: {requested!r}")
        return requested
    for name in fieldnames:
        if name.startswith("KC"):
            return name
    raise ParseError("missing required column: no KC column in header")


def parse_kdd(
    path: Path | str,
    registry: KddItemRegistry | None = None,
    kc_column: str | None = None,
) -> KddDataset:
    """Parse one KDD TSV file into ordered interactions with concept tags.

    Pass the same registry for the train and test files of a split. seq is
    the kept-row counter in file order, starting at 1.
    """
    if registry is None:
        registry = KddItemRegistry()
    report = DiscardReport()
    interactions: list[Interaction] = []

    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
        if reader.fieldnames is None:
            raise ParseError(f"{path}: empty file, no header row")
        for column in (STUDENT_COLUMN, HIERARCHY_COLUMN, PROBLEM_COLUMN,
                       STEP_COLUMN, CORRECT_COLUMN):
            if column not in reader.fieldnames:
                raise ParseError(f"missing required column: {column!r}")
        kc_name = _kc_column(list(reader.fieldnames), kc_column)

        for ordinal, row in enumerate(reader, start=1):
            report.total_rows += 1
            kc_raw = row.get(kc_name) or ""
            kcs = _split_kcs(kc_raw)
            if not kcs:
                report.discarded_untagged += 1
                continue
            correct_raw = (row.get(CORRECT_COLUMN) or "").strip()
            if correct_raw not in ("0", "1"):
                report.note_malformed(
                    ordinal, f"bad correctness value {correct_raw!r}"
                )
                continue
            key = (
                row[HIERARCHY_COLUMN] or "",
                row[PROBLEM_COLUMN] or "",
                row[STEP_COLUMN] or "",
            )
            item = registry.intern(key, kcs)
            report.kept += 1
            interactions.append(
                Interaction(
                    student=row[STUDENT_COLUMN],
                    item=item,
                    correct=int(correct_raw),
                    seq=report.kept,
                )
            )
    return KddDataset(registry, interactions, report)


def _split_kcs(raw: str) -> tuple[ConceptId, ...]:
    if not raw.strip():
        return ()
    seen: dict[ConceptId, None] = {}
    for part in raw.split(KC_SEPARATOR):
        part = part.strip()
        if part:
            seen.setdefault(part)
    return tuple(seen)


@dataclass(frozen=True)
class DatasetStats:
    students: int
    kcs: int
    items: int
    multi_kc_items: int
    interactions: int


def dataset_stats(datasets: KddDataset | Iterable[KddDataset]) -> DatasetStats:
    """Exact counts over the kept interactions of one or several files."""
    if isinstance(datasets, KddDataset):
        datasets = [datasets]
    students: set[StudentId] = set()
    items: set[ItemId] = set()
    kcs: set[ConceptId] = set()
    n = 0
    tags_by_item: dict[ItemId, tuple[ConceptId, ...]] = {}
    for ds in datasets:
        tags_by_item.update(ds.registry.tags)
        for rec in ds.interactions:
            students.add(rec.student)
            items.add(rec.item)
            n += 1
    for item in items:
        kcs.update(tags_by_item[item])
    multi = sum(1 for item in items if len(tags_by_item[item]) >= 2)
    return DatasetStats(
        students=len(students),
        kcs=len(kcs),
        items=len(items),
        multi_kc_items=multi,
        interactions=n,
    )
