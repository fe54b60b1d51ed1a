"""
A directory of `.vuln` files loaded into an indexed, immutable catalog, with
the reference graph between entries and the cross-entry lint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

import structlog

from .diagnostics import Code, Diagnostic, has_errors, sort_diagnostics
from .exceptions import CatalogLoadError, EntryNotFoundError
from .model import (
    LOCATION_GROUPS,
    OTHER_LOCATIONS_GROUP,
    VulnerabilityPattern,
    check_platform_overlap,
    check_vocabulary,
    validate_pattern,
)
from .parser import EntryText, parse_entry
from .taxonomy import TaxonomyRegistry, default_registry
from .utils import closest_match, normalize_whitespace

logger = structlog.get_logger(__name__)

ENTRY_SUFFIX = ".vuln"


@dataclass(frozen=True)
class Catalog:
    """
    Patterns keyed by identifier text, in identifier order. Read-only once
    built: the indexes are mapping proxies and the diagnostics a tuple.

    Attributes
    ----------
    entries : Mapping[str, VulnerabilityPattern]
        Sorted by src_ref, then number.
    name_index : Mapping[str, str]
        Normalized entry name to identifier. The first entry wins on a
        duplicate name.
    load_diagnostics : tuple[Diagnostic, ...]
        Everything found while loading, sorted.
    registry : TaxonomyRegistry
        The vocabularies the catalog was validated against.
    field_lines : Mapping[str, dict[str, int]]
        Per identifier, the line of every key in its source file.
    """

    entries: Mapping[str, VulnerabilityPattern]
    name_index: Mapping[str, str]
    load_diagnostics: tuple[Diagnostic, ...]
    registry: TaxonomyRegistry
    field_lines: Mapping[str, dict[str, int]] = field(default_factory=lambda: MappingProxyType({}))

    @classmethod
    def from_patterns(
        cls,
        patterns: Iterable[VulnerabilityPattern],
        registry: TaxonomyRegistry | None = None,
        *,
        field_lines: dict[str, dict[str, int]] | None = None,
        diagnostics: Iterable[Diagnostic] = (),
    ) -> Catalog:
        """
        Index already-built patterns.

        A repeated identifier keeps the first pattern and records E-DUP-ID;
        a repeated name keeps both entries and records W-DUP-NAME.
        """
        registry = registry or default_registry()
        field_lines = field_lines or {}
        found = list(diagnostics)
        by_id: dict[str, VulnerabilityPattern] = {}
        for pattern in patterns:
            key = pattern.identifier.text
            if key in by_id:
                found.append(
                    Diagnostic(
                        Code.DUP_ID,
                        f"identifier '{key}' is used by more than one entry",
                        entry=key,
                        field="identifier",
                        line=field_lines.get(key, {}).get("identifier"),
                    )
                )
                continue
            by_id[key] = pattern

        entries = dict(sorted(by_id.items(), key=lambda item: item[1].identifier.sort_key))
        name_index: dict[str, str] = {}
        for key, pattern in entries.items():
            name = normalize_whitespace(pattern.name)
            if name in name_index:
                found.append(
                    Diagnostic(
                        Code.DUP_NAME,
                        f"name '{name}' is also used by {name_index[name]}",
                        entry=key,
                        field="name",
                        line=field_lines.get(key, {}).get("name"),
                    )
                )
                continue
            name_index[name] = key
        return cls(
            entries=MappingProxyType(entries),
            name_index=MappingProxyType(name_index),
            load_diagnostics=tuple(sort_diagnostics(found)),
            registry=registry,
            field_lines=MappingProxyType({k: dict(v) for k, v in field_lines.items() if k in entries}),
        )

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[VulnerabilityPattern]:
        return iter(self.entries.values())

    def __contains__(self, key: object) -> bool:
        return key in self.entries

    @property
    def patterns(self) -> list[VulnerabilityPattern]:
        return list(self.entries.values())

    @property
    def names(self) -> list[str]:
        return list(self.name_index)

    def get(self, key: str) -> VulnerabilityPattern:
        """
        Find an entry by identifier text, then by name.

        The identifier may be written with a capital catalog id (`Mb.osgi.4`).

        Raises
        ------
        EntryNotFoundError
            If neither index holds `key`.
        """
        text = normalize_whitespace(key)
        identifier = text[:1].lower() + text[1:]
        if identifier in self.entries:
            return self.entries[identifier]
        if text in self.name_index:
            return self.entries[self.name_index[text]]
        raise EntryNotFoundError(f"No entry with identifier or name '{key}'.")

    def source_lines(self, identifier: str) -> dict[str, int]:
        """
        Key-to-line map of the file `identifier` was read from; empty for
        in-memory entries.
        """
        return dict(self.field_lines.get(identifier, {}))

    def groups(self) -> dict[str, list[VulnerabilityPattern]]:
        """
        Entries by location group, in catalog chapter order.

        The first listed location decides the group. Only nonempty groups
        are returned; entries outside the chapter set go last.
        """
        order = [group for group, _ in LOCATION_GROUPS] + [OTHER_LOCATIONS_GROUP]
        grouped: dict[str, list[VulnerabilityPattern]] = {group: [] for group in order}
        for pattern in self:
            grouped[pattern.location_group].append(pattern)
        return {group: members for group, members in grouped.items() if members}


def load_catalog(directory: Path, registry: TaxonomyRegistry | None = None) -> Catalog:
    """
    Parse and validate every `*.vuln` file of `directory`.

    Files are read in name order so diagnostics do not depend on the file
    system. A file with Error diagnostics is left out of the entries but its
    diagnostics are kept.

    Parameters
    ----------
    directory : Path
        A flat directory of entry files.
    registry : TaxonomyRegistry | None
        Defaults to the shipped registry.

    Returns
    -------
    Catalog

    Raises
    ------
    CatalogLoadError
        If the directory itself cannot be listed.
    """
    registry = registry or default_registry()
    directory = Path(directory)
    if not directory.is_dir():
        raise CatalogLoadError(f"Catalog directory '{directory}' does not exist or is not a directory.")
    try:
        paths = sorted(p for p in directory.iterdir() if p.suffix == ENTRY_SUFFIX and p.is_file())
    except OSError as exc:
        raise CatalogLoadError(f"Cannot list catalog directory '{directory}': {exc}") from exc

    found: list[Diagnostic] = []
    patterns: list[VulnerabilityPattern] = []
    field_lines: dict[str, dict[str, int]] = {}
    for path in paths:
        try:
            text = EntryText(path.read_text(encoding="utf-8"), origin=path.name)
        except (OSError, UnicodeDecodeError) as exc:
            found.append(Diagnostic(Code.IO, f"cannot read file: {exc}", entry=path.name))
            continue

        result = parse_entry(text, registry)
        if result.pattern is None:
            found.extend(result.diagnostics)
            continue
        pattern = result.pattern
        key = pattern.identifier.text
        diagnostics = result.diagnostics + validate_pattern(
            pattern, registry, lines=result.field_lines
        )
        found.extend(diagnostics)
        if path.stem != key:
            found.append(
                Diagnostic(
                    Code.FILENAME_MISMATCH,
                    f"file '{path.name}' holds entry {key}",
                    entry=key,
                    field="identifier",
                    line=result.field_lines.get("identifier"),
                )
            )
        if has_errors(diagnostics):
            continue
        if key in field_lines:
            found.append(
                Diagnostic(
                    Code.DUP_ID,
                    f"identifier '{key}' already loaded; '{path.name}' is skipped",
                    entry=key,
                    field="identifier",
                    line=result.field_lines.get("identifier"),
                )
            )
            continue
        patterns.append(pattern)
        field_lines[key] = result.field_lines

    catalog = Catalog.from_patterns(
        patterns, registry, field_lines=field_lines, diagnostics=found
    )
    logger.debug(
        "catalog_loaded",
        directory=str(directory),
        files=len(paths),
        entries=len(catalog),
        diagnostics=len(catalog.load_diagnostics),
    )
    return catalog


@dataclass(frozen=True)
class Edge:
    """
    A name reference from one entry. `target` is None when unresolved.
    """

    source: str
    name: str
    target: str | None

    @property
    def resolved(self) -> bool:
        return self.target is not None


@dataclass
class ReferenceGraph:
    see_also_edges: list[Edge] = field(default_factory=list)
    extends_edges: list[Edge] = field(default_factory=list)

    def unresolved(self) -> list[Edge]:
        return [e for e in self.see_also_edges + self.extends_edges if not e.resolved]

    def extends_map(self) -> dict[str, str]:
        return {e.source: e.target for e in self.extends_edges if e.target is not None}


def resolve_references(catalog: Catalog) -> ReferenceGraph:
    """
    Resolve See Also and Extends names through the name index.

    Matching is exact after whitespace normalization. Unresolved names stay
    in the graph with a None target.
    """
    graph = ReferenceGraph()
    for key, pattern in catalog.entries.items():
        for name in pattern.description.see_also:
            graph.see_also_edges.append(
                Edge(key, name, catalog.name_index.get(normalize_whitespace(name)))
            )
        if pattern.reference.extends:
            name = pattern.reference.extends
            graph.extends_edges.append(
                Edge(key, name, catalog.name_index.get(normalize_whitespace(name)))
            )
    return graph


def _cycles(extends: dict[str, str]) -> dict[str, list[str]]:
    """
    Entries lying on an extends cycle, each with the cycle seen from it.
    """
    found: dict[str, list[str]] = {}
    for start in extends:
        path = [start]
        current = extends.get(start)
        while current is not None and current not in path:
            path.append(current)
            current = extends.get(current)
        if current == start:
            found[start] = path + [start]
    return found


def lint(catalog: Catalog, registry: TaxonomyRegistry | None = None) -> list[Diagnostic]:
    """
    Cross-entry checks over a loaded catalog.

    Reports dangling See Also and Extends names (with W-NEAR-MISS-REF when
    an entry name is within edit distance 3), extends cycles, non-Base
    taxonomy values and platforms listed both vulnerable and robust.

    Returns
    -------
    list[Diagnostic]
        Sorted by entry, then code.
    """
    registry = registry or catalog.registry
    graph = resolve_references(catalog)
    names = [pattern.name for pattern in catalog]
    found: list[Diagnostic] = []

    dangling = (
        (graph.see_also_edges, "see-also", Code.DANGLING_SEEALSO, "See Also"),
        (graph.extends_edges, "extends", Code.DANGLING_EXTENDS, "Extends"),
    )
    for edges, key, code, label in dangling:
        for edge in edges:
            if edge.resolved:
                continue
            line = catalog.source_lines(edge.source).get(key)
            found.append(
                Diagnostic(
                    code,
                    f"{label} name '{edge.name}' matches no entry",
                    entry=edge.source,
                    field=key,
                    line=line,
                )
            )
            suggestion = closest_match(normalize_whitespace(edge.name), names)
            if suggestion is not None:
                found.append(
                    Diagnostic(
                        Code.NEAR_MISS_REF,
                        f"{label} name '{edge.name}' is close to an entry name",
                        entry=edge.source,
                        field=key,
                        line=line,
                        suggestion=suggestion,
                    )
                )

    for key, cycle in _cycles(graph.extends_map()).items():
        found.append(
            Diagnostic(
                Code.EXTENDS_CYCLE,
                "extends cycle " + " -> ".join(cycle),
                entry=key,
                field="extends",
                line=catalog.source_lines(key).get("extends"),
            )
        )

    for key, pattern in catalog.entries.items():
        lines = catalog.source_lines(key)
        found.extend(check_vocabulary(pattern, registry, entry=key, lines=lines))
        found.extend(check_platform_overlap(pattern, entry=key, lines=lines))

    logger.debug("catalog_linted", entries=len(catalog), diagnostics=len(found))
    return sort_diagnostics(found)
