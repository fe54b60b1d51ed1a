"""
In-memory report document: a title over a tree of sections, each holding
paragraphs, bullet lists and tables.

The renderers in `vulncat.report.render` turn it into Markdown or LaTeX;
`serialization.dump_json` turns it into the debug dump.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

# The title counts as level 1, so sections nest at most three deep.
MAX_DEPTH = 4


@dataclass(frozen=True)
class Paragraph:
    text: str


@dataclass(frozen=True)
class ListItem:
    """
    One bullet. A labelled item renders as `label: text`.
    """

    text: str
    label: str | None = None


@dataclass(frozen=True)
class BulletList:
    items: tuple[ListItem, ...] = ()


@dataclass(frozen=True)
class Table:
    """
    A rectangular table of plain text cells.

    Raises
    ------
    ValueError
        If a row does not have one cell per header.
    """

    headers: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...] = ()
    caption: str | None = None

    def __post_init__(self) -> None:
        if not self.headers:
            raise ValueError("A table needs at least one column.")
        for i, row in enumerate(self.rows):
            if len(row) != len(self.headers):
                raise ValueError(
                    f"Table row {i} has {len(row)} cells, expected {len(self.headers)}."
                )

    @property
    def cells(self) -> Iterator[str]:
        yield from self.headers
        for row in self.rows:
            yield from row


Block = Union[Paragraph, BulletList, Table]


@dataclass
class Section:
    heading: str
    blocks: list[Block] = field(default_factory=list)
    children: list[Section] = field(default_factory=list)

    def add(self, block: Block) -> Section:
        self.blocks.append(block)
        return self

    def subsection(self, heading: str) -> Section:
        child = Section(heading)
        self.children.append(child)
        return child

    def find(self, heading: str) -> Section | None:
        return next((child for child in self.children if child.heading == heading), None)


@dataclass
class ReportDocument:
    title: str
    sections: list[Section] = field(default_factory=list)

    def walk(self) -> Iterator[tuple[int, Section]]:
        """
        Depth-first `(level, section)` pairs; top-level sections are level 2.
        """
        stack = [(2, section) for section in reversed(self.sections)]
        while stack:
            level, section = stack.pop()
            yield level, section
            stack.extend((level + 1, child) for child in reversed(section.children))

    @property
    def depth(self) -> int:
        return max((level for level, _ in self.walk()), default=1)

    def section(self, heading: str) -> Section | None:
        return next((s for s in self.sections if s.heading == heading), None)

    def check(self) -> None:
        """
        Raises
        ------
        ValueError
            If the section tree is deeper than MAX_DEPTH levels.
        """
        if self.depth > MAX_DEPTH:
            raise ValueError(f"Report tree depth {self.depth} exceeds {MAX_DEPTH}.")
