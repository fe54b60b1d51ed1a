"""
Corpus statistics: per-dimension histograms, the platform matrix and the
protection and test-coverage summaries.

All functions are pure over an immutable catalog.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from enum import StrEnum
from typing import Iterable

from pydantic import BaseModel, ConfigDict, computed_field

from .catalog import Catalog
from .model import LOCATION_GROUPS, OTHER_LOCATIONS_GROUP
from .taxonomy import Dimension

JAVA_PERMISSIONS = "Java Permissions"
JAVA_PERMISSIONS_COLUMN = "Any with Java Permissions"

# Platform table column order; anything else follows alphabetically.
PLATFORM_ORDER: tuple[str, ...] = ("Felix", "Knopflerfish", "Equinox", "Concierge", "SFelix")

MATRIX_LEGEND = "V: Platform is Vulnerable; R: Platform is Robust; - : not relevant"


class _Result(BaseModel):
    model_config = ConfigDict(frozen=True)


class Bin(_Result):
    value: str
    count: int


class Histogram(_Result):
    """
    Value counts of one dimension, by count descending then value.

    An entry with k values in the dimension contributes k.
    """

    dimension: Dimension
    bins: tuple[Bin, ...] = ()

    @computed_field
    @property
    def total(self) -> int:
        return sum(b.count for b in self.bins)

    @property
    def top(self) -> Bin | None:
        return self.bins[0] if self.bins else None

    def count(self, value: str) -> int:
        return next((b.count for b in self.bins if b.value == value), 0)

    def as_dict(self) -> dict[str, int]:
        return {b.value: b.count for b in self.bins}


class Cell(StrEnum):
    VULNERABLE = "V"
    ROBUST = "R"
    NOT_RELEVANT = "-"


class PlatformMatrix(_Result):
    """
    Vulnerability by platform grid.

    `cells[i][j]` is V when the platform is in the entry's vulnerable list,
    R when it is in the robust list and `-` otherwise.
    """

    identifiers: tuple[str, ...]
    rows: tuple[str, ...]
    columns: tuple[str, ...]
    cells: tuple[tuple[Cell, ...], ...]

    def cell(self, row: str, column: str) -> Cell:
        """
        Look a cell up by entry name (or identifier) and column name.
        """
        index = self.rows.index(row) if row in self.rows else self.identifiers.index(row)
        return self.cells[index][self.columns.index(column)]

    def column(self, column: str) -> list[Cell]:
        j = self.columns.index(column)
        return [row[j] for row in self.cells]


class PlatformCounts(_Result):
    vulnerable: int
    robust: int
    not_relevant: int


class MechanismCoverage(_Result):
    existing: Histogram
    potential: Histogram
    none_count: int
    java_permission_preventable_count: int


class CoverageSummary(_Result):
    count: int
    mean: float | None
    minimum: int | None
    maximum: int | None
    at_full: int


def histogram(
    catalog: Catalog, dimension: Dimension, *, include_zero: bool = False
) -> Histogram:
    """
    Count the values of `dimension` over the catalog.

    Parameters
    ----------
    catalog : Catalog
    dimension : Dimension
    include_zero : bool
        Also list vocabulary values (Base and registered extensions) that no
        entry uses, with count 0.

    Returns
    -------
    Histogram
    """
    dimension = Dimension(dimension)
    counts: Counter[str] = Counter()
    for pattern in catalog:
        counts.update(pattern.values_in(dimension))
    if include_zero:
        for value in catalog.registry.values(dimension):
            counts.setdefault(value, 0)
    bins = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return Histogram(dimension=dimension, bins=tuple(Bin(value=v, count=c) for v, c in bins))


def matrix_columns(catalog: Catalog) -> list[str]:
    """
    Platforms seen in the catalog plus registered platform extensions.
    """
    seen = {p for pattern in catalog for p in pattern.values_in(Dimension.PLATFORM)}
    seen.update(catalog.registry.extensions(Dimension.PLATFORM))
    ordered = [p for p in PLATFORM_ORDER if p in seen]
    return ordered + sorted(seen - set(PLATFORM_ORDER))


def platform_matrix(catalog: Catalog, *, with_java_permissions: bool = False) -> PlatformMatrix:
    """
    Build the vulnerability by platform matrix, rows in identifier order.

    With `with_java_permissions`, a last column marks R the entries listing
    Java Permissions among their existing mechanisms.
    """
    platforms = matrix_columns(catalog)
    rows: list[tuple[Cell, ...]] = []
    for pattern in catalog:
        impl = pattern.implementation
        row = [
            Cell.VULNERABLE
            if platform in impl.vulnerable_platforms
            else Cell.ROBUST
            if platform in impl.robust_platforms
            else Cell.NOT_RELEVANT
            for platform in platforms
        ]
        if with_java_permissions:
            row.append(
                Cell.ROBUST
                if JAVA_PERMISSIONS in pattern.protection.existing_mechanisms
                else Cell.NOT_RELEVANT
            )
        rows.append(tuple(row))
    columns = platforms + ([JAVA_PERMISSIONS_COLUMN] if with_java_permissions else [])
    return PlatformMatrix(
        identifiers=tuple(catalog.entries),
        rows=tuple(p.name for p in catalog),
        columns=tuple(columns),
        cells=tuple(rows),
    )


def platform_summary(matrix: PlatformMatrix) -> dict[str, PlatformCounts]:
    """
    Per column, how many rows are V, R and `-`. The three always sum to
    the row count.
    """
    summary: dict[str, PlatformCounts] = {}
    for column in matrix.columns:
        counts = Counter(matrix.column(column))
        summary[column] = PlatformCounts(
            vulnerable=counts[Cell.VULNERABLE],
            robust=counts[Cell.ROBUST],
            not_relevant=counts[Cell.NOT_RELEVANT],
        )
    return summary


def mechanism_coverage(catalog: Catalog) -> MechanismCoverage:
    """
    Existing and potential protection mechanisms over the catalog.

    `none_count` counts entries with no existing mechanism;
    `java_permission_preventable_count` those listing Java Permissions.
    """
    patterns = catalog.patterns
    return MechanismCoverage(
        existing=histogram(catalog, Dimension.EXISTING_MECHANISM),
        potential=histogram(catalog, Dimension.POTENTIAL_MECHANISM),
        none_count=sum(1 for p in patterns if not p.protection.existing_mechanisms),
        java_permission_preventable_count=sum(
            1 for p in patterns if JAVA_PERMISSIONS in p.protection.existing_mechanisms
        ),
    )


def coverage_summary(catalog: Catalog) -> CoverageSummary:
    """
    Mean (one decimal), min, max and number of entries at 100% test coverage.
    """
    values = [p.implementation.test_coverage for p in catalog]
    if not values:
        return CoverageSummary(count=0, mean=None, minimum=None, maximum=None, at_full=0)
    return CoverageSummary(
        count=len(values),
        mean=round(sum(values) / len(values), 1),
        minimum=min(values),
        maximum=max(values),
        at_full=sum(1 for v in values if v == 100),
    )


def location_groups(catalog: Catalog) -> dict[str, int]:
    """
    Entry count per catalog chapter, in chapter order, zeros included.
    """
    counts = Counter(p.location_group for p in catalog)
    groups = {group: counts[group] for group, _ in LOCATION_GROUPS}
    if counts[OTHER_LOCATIONS_GROUP]:
        groups[OTHER_LOCATIONS_GROUP] = counts[OTHER_LOCATIONS_GROUP]
    return groups


# ---------------------------------------------------------------------------
# Text and CSV output
# ---------------------------------------------------------------------------


def format_table(headers: Iterable[str], rows: Iterable[Iterable[object]]) -> str:
    """
    Left-aligned fixed-width columns separated by two spaces.
    """
    table = [list(map(str, headers))] + [list(map(str, row)) for row in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(table[0]))]
    lines = []
    for row in table:
        lines.append("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
    lines.insert(1, "  ".join("-" * width for width in widths))
    return "\n".join(lines) + "\n"


def format_histogram(hist: Histogram) -> str:
    return f"{hist.dimension}\n" + format_table(
        ("value", "count"), ((b.value, b.count) for b in hist.bins)
    )


def format_matrix(matrix: PlatformMatrix) -> str:
    return (
        format_table(
            ("vulnerability",) + matrix.columns,
            ((name,) + tuple(str(c) for c in row) for name, row in zip(matrix.rows, matrix.cells)),
        )
        + MATRIX_LEGEND
        + "\n"
    )


def format_platform_summary(summary: dict[str, PlatformCounts]) -> str:
    return format_table(
        ("platform", "vulnerable", "robust", "not relevant"),
        ((name, c.vulnerable, c.robust, c.not_relevant) for name, c in summary.items()),
    )


def matrix_to_csv(matrix: PlatformMatrix) -> str:
    """
    Header row of platforms, first column the vulnerability name, cells V/R/-.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(("vulnerability",) + matrix.columns)
    for name, row in zip(matrix.rows, matrix.cells):
        writer.writerow((name,) + tuple(str(c) for c in row))
    return buffer.getvalue()
