"""
Build the report document from a validated catalog: a catalog part grouped
by location and an analysis part of tables.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import structlog

from ..analysis import (
    MATRIX_LEGEND,
    coverage_summary,
    histogram,
    location_groups,
    mechanism_coverage,
    platform_matrix,
)
from ..catalog import Catalog, lint
from ..diagnostics import Diagnostic, merge_diagnostics
from ..exceptions import ReportGateError
from ..model import VulnerabilityPattern, validate_pattern
from ..parser import EMPTY, format_consequences, format_mechanisms, format_sources
from ..taxonomy import Dimension
from .document import BulletList, ListItem, Paragraph, ReportDocument, Section, Table

logger = structlog.get_logger(__name__)

DEFAULT_TITLE = "OSGi Vulnerability Pattern Catalog"
ANALYSIS_HEADING = "Analysis"
PLATFORM_MATRIX_HEADING = "Platform Matrix"
SUMMARY_HEADING = "Protection and Test Coverage"
LOCATION_GROUPS_HEADING = "Location Groups"

DEFAULT_DIMENSIONS: tuple[Dimension, ...] = (
    Dimension.LOCATION,
    Dimension.SOURCE_ENTITY,
    Dimension.FUNCTIONALITY,
    Dimension.FLAW,
    Dimension.TARGET,
    Dimension.CONSEQUENCE_TYPE,
    Dimension.INTRODUCTION_TIME,
    Dimension.EXPLOIT_TIME,
    Dimension.EXISTING_MECHANISM,
    Dimension.POTENTIAL_MECHANISM,
)


@dataclass(frozen=True)
class ReportOptions:
    """
    Attributes
    ----------
    title : str
        Document title, the first heading of the output.
    dimensions : tuple[Dimension, ...]
        One histogram table per dimension, in this order.
    include_matrix : bool
        Add the platform matrix, with its Java Permissions column and legend.
    include_summaries : bool
        Add the location group, protection and test coverage tables.
    """

    title: str = DEFAULT_TITLE
    dimensions: tuple[Dimension, ...] = field(default=DEFAULT_DIMENSIONS)
    include_matrix: bool = True
    include_summaries: bool = True


def dimension_heading(dimension: Dimension) -> str:
    return Dimension(dimension).value.replace("-", " ").capitalize()


def gate_diagnostics(catalog: Catalog) -> list[Diagnostic]:
    """
    Load, entry validation and lint diagnostics of `catalog`, merged. Any
    Error among them blocks the report.

    Entries are validated again so catalogs built in memory pass the same
    checks as loaded ones; repeats of load diagnostics are merged away.
    """
    validation = [
        d
        for key, pattern in catalog.entries.items()
        for d in validate_pattern(pattern, catalog.registry, lines=catalog.source_lines(key))
    ]
    return merge_diagnostics(catalog.load_diagnostics, validation, lint(catalog))


def _text(value: str | None) -> str:
    return value if value else EMPTY


def _items(pairs: list[tuple[str, str]]) -> BulletList:
    return BulletList(tuple(ListItem(label=label, text=_text(text)) for label, text in pairs))


def entry_section(pattern: VulnerabilityPattern) -> Section:
    """
    One catalog entry: the Reference, Description, Implementation and
    Protection blocks as labelled bullet lists.

    Keys the parser did not know are listed at the end of their block. When
    the entry has several locations the others are noted in a paragraph.
    """
    ref, desc, impl, prot = (
        pattern.reference,
        pattern.description,
        pattern.implementation,
        pattern.protection,
    )
    join = "; ".join
    section = Section(f"{ref.identifier.text} {ref.name}")
    if len(ref.locations) > 1:
        section.add(Paragraph("Also located in: " + join(ref.locations[1:])))

    blocks = {
        "reference": (
            "Reference",
            [
                ("Vulnerability Name", ref.name),
                ("Identifier", ref.identifier.text),
                ("Extends", ref.extends),
                ("Origin", ref.origin),
                ("Location", join(ref.locations)),
                ("Source", format_sources(ref.sources)),
                ("Target", join(ref.targets)),
                ("Consequence Type", format_consequences(ref.consequences)),
                ("Introduction Time", ref.introduction_time),
                ("Exploit Time", ref.exploit_time),
            ],
        ),
        "description": (
            "Description",
            [
                ("Description", desc.description),
                ("Preconditions", desc.preconditions),
                ("Attack Process", desc.attack_process),
                ("Consequence Description", desc.consequence_description),
                ("See Also", join(desc.see_also)),
            ],
        ),
        "implementation": (
            "Implementation",
            [
                ("Code Reference", impl.code_reference),
                ("OSGi Profile", impl.osgi_profile),
                ("Date", impl.date.isoformat()),
                ("Test Coverage", f"{impl.test_coverage}%"),
                ("Vulnerable Platforms", join(impl.vulnerable_platforms)),
                ("Robust Platforms", join(impl.robust_platforms)),
            ],
        ),
        "protection": (
            "Protection",
            [
                ("Existing Mechanisms", join(prot.existing_mechanisms)),
                ("Enforcement Point", prot.enforcement_point),
                ("Potential Mechanisms", format_mechanisms(prot.potential_mechanisms)),
                ("Attack Prevention", join(prot.attack_prevention)),
                ("Reaction", join(prot.reaction)),
            ],
        ),
    }
    for extra in pattern.extra_fields:
        blocks[extra.section][1].append((extra.key, extra.value))
    for heading, pairs in blocks.values():
        section.subsection(heading).add(_items(pairs))
    return section


def _analysis_section(catalog: Catalog, options: ReportOptions) -> Section:
    analysis = Section(ANALYSIS_HEADING)
    for dimension in options.dimensions:
        hist = histogram(catalog, dimension)
        analysis.subsection(dimension_heading(dimension)).add(
            Table(
                headers=("Value", "Count"),
                rows=tuple((b.value, str(b.count)) for b in hist.bins),
            )
        )

    if options.include_matrix:
        matrix = platform_matrix(catalog, with_java_permissions=True)
        (
            analysis.subsection(PLATFORM_MATRIX_HEADING)
            .add(
                Table(
                    headers=("Vulnerability",) + matrix.columns,
                    rows=tuple(
                        (name,) + tuple(str(c) for c in row)
                        for name, row in zip(matrix.rows, matrix.cells)
                    ),
                )
            )
            .add(Paragraph(MATRIX_LEGEND))
        )

    if options.include_summaries:
        analysis.subsection(LOCATION_GROUPS_HEADING).add(
            Table(
                headers=("Group", "Entries"),
                rows=tuple((g, str(n)) for g, n in location_groups(catalog).items()),
            )
        )
        mechanisms = mechanism_coverage(catalog)
        coverage = coverage_summary(catalog)
        analysis.subsection(SUMMARY_HEADING).add(
            Table(
                headers=("Measure", "Value"),
                rows=(
                    ("Entries without existing mechanism", str(mechanisms.none_count)),
                    (
                        "Entries prevented by Java Permissions",
                        str(mechanisms.java_permission_preventable_count),
                    ),
                    ("Mean test coverage", _percent(coverage.mean)),
                    ("Minimum test coverage", _percent(coverage.minimum)),
                    ("Maximum test coverage", _percent(coverage.maximum)),
                    ("Entries at 100% test coverage", str(coverage.at_full)),
                ),
            )
        )
    return analysis


def _percent(value: float | int | None) -> str:
    return EMPTY if value is None else f"{value}%"


def build_report_document(
    catalog: Catalog, options: ReportOptions | None = None
) -> ReportDocument:
    """
    Build the report document of a catalog.

    Parameters
    ----------
    catalog : Catalog
        Must have no Error diagnostics, from loading or from lint.
    options : ReportOptions | None
        Defaults to `ReportOptions()`.

    Returns
    -------
    ReportDocument
        One level-2 section per nonempty location group in chapter order,
        each holding its entries in identifier order, then the analysis
        section.

    Raises
    ------
    ReportGateError
        If the catalog has Error diagnostics. They are attached to the
        exception.
    """
    options = options or ReportOptions()
    errors = [d for d in gate_diagnostics(catalog) if d.is_error]
    if errors:
        raise ReportGateError(
            f"Catalog has {len(errors)} error(s); the report is not built.", errors
        )

    document = ReportDocument(title=options.title)
    for group, patterns in catalog.groups().items():
        section = Section(group)
        section.children.extend(entry_section(p) for p in patterns)
        document.sections.append(section)
    document.sections.append(_analysis_section(catalog, options))
    document.check()
    logger.debug("report_document_built", entries=len(catalog), groups=len(document.sections) - 1)
    return document


def catalog_part(document: ReportDocument) -> list[Section]:
    """
    The location group sections of a built document.
    """
    return [s for s in document.sections if s.heading != ANALYSIS_HEADING]
