from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import StrEnum
from typing import Iterable


class Severity(StrEnum):
    ERROR = "ERROR"
    WARNING = "WARNING"
    INFO = "INFO"


class Code(StrEnum):
    """
    The closed set of diagnostic codes. The prefix is the default severity.
    """

    SECTION_MISSING = "E-SECTION-MISSING"
    SECTION_UNKNOWN = "E-SECTION-UNKNOWN"
    KEY_DUP = "E-KEY-DUP"
    KEY_ORPHAN = "E-KEY-ORPHAN"
    FIELD_MISSING = "E-FIELD-MISSING"
    ID_SYNTAX = "E-ID-SYNTAX"
    PARSE_SOURCE = "E-PARSE-SOURCE"
    PARSE_CONSEQUENCE = "E-PARSE-CONSEQUENCE"
    DATE_SYNTAX = "E-DATE-SYNTAX"
    COVERAGE_SYNTAX = "E-COVERAGE-SYNTAX"
    TAXONOMY_UNKNOWN = "E-TAXONOMY-UNKNOWN"
    COVERAGE_RANGE = "E-COVERAGE-RANGE"
    EMPTY_FIELD = "E-EMPTY-FIELD"
    DUP_ID = "E-DUP-ID"
    EXTENDS_CYCLE = "E-EXTENDS-CYCLE"
    IO = "E-IO"
    UNKNOWN_KEY = "W-UNKNOWN-KEY"
    DATE_FORMAT = "W-DATE-FORMAT"
    EXTENSION_VALUE = "W-EXTENSION-VALUE"
    PLATFORM_OVERLAP = "W-PLATFORM-OVERLAP"
    DUP_NAME = "W-DUP-NAME"
    DANGLING_SEEALSO = "W-DANGLING-SEEALSO"
    DANGLING_EXTENDS = "W-DANGLING-EXTENDS"
    NEAR_MISS_REF = "W-NEAR-MISS-REF"
    DUP_QUALIFIER = "W-DUP-QUALIFIER"
    SHIPPED_EXTENSION_VALUE = "I-EXTENSION-VALUE"
    FILENAME_MISMATCH = "I-FILENAME-MISMATCH"

    @property
    def severity(self) -> Severity:
        return {"E": Severity.ERROR, "W": Severity.WARNING, "I": Severity.INFO}[
            self.value[0]
        ]


@dataclass(frozen=True)
class Diagnostic:
    """
    One validation or lint finding.

    Attributes
    ----------
    code : Code
        Stable code from the closed set.
    message : str
        Human readable text.
    entry : str
        Entry identifier, or the file path when no identifier is known.
    field : str | None
        The `.vuln` key the finding is about.
    line : int | None
        1-based line number in the entry file, when known.
    suggestion : str | None
        Near-miss candidate, for unknown values and dangling references.
    """

    code: Code
    message: str
    entry: str = "<memory>"
    field: str | None = None
    line: int | None = None
    suggestion: str | None = None

    @property
    def severity(self) -> Severity:
        return self.code.severity

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def at(
        self, *, entry: str | None = None, line: int | None = None
    ) -> Diagnostic:
        """
        Copy with the entry and/or line filled in (existing values win for line).
        """
        return replace(
            self,
            entry=entry if entry is not None else self.entry,
            line=self.line if self.line is not None else line,
        )

    def format(self) -> str:
        """
        Render as `SEVERITY CODE entry:field:line message`.

        Missing field or line print as `-`.
        """
        field = self.field or "-"
        line = "-" if self.line is None else str(self.line)
        text = f"{self.severity} {self.code} {self.entry}:{field}:{line} {self.message}"
        if self.suggestion:
            text += f" (did you mean '{self.suggestion}'?)"
        return text


_ENTRY_KEY = re.compile(r"^mb\.(archive|java|native|osgi)\.(\d+)$")


def entry_sort_key(entry: str) -> tuple:
    """
    Identifier order (src_ref alphabetical, then number); other labels after.
    """
    match = _ENTRY_KEY.match(entry)
    if match:
        return (0, match.group(1), int(match.group(2)), "")
    return (1, "", 0, entry)


def sort_diagnostics(diagnostics: Iterable[Diagnostic]) -> list[Diagnostic]:
    """
    Order by entry identifier, then code. Stable within one (entry, code).
    """
    return sorted(diagnostics, key=lambda d: (entry_sort_key(d.entry), d.code.value))


def merge_diagnostics(*groups: Iterable[Diagnostic]) -> list[Diagnostic]:
    """
    Concatenate groups, drop exact duplicates, and sort.
    """
    merged = dict.fromkeys(d for group in groups for d in group)
    return sort_diagnostics(merged)


def has_errors(diagnostics: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diagnostics)


def count_by_severity(diagnostics: Iterable[Diagnostic]) -> dict[Severity, int]:
    counts = {severity: 0 for severity in Severity}
    for diagnostic in diagnostics:
        counts[diagnostic.severity] += 1
    return counts
