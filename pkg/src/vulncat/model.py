"""
Domain types of one vulnerability pattern and its structural validation.

A pattern has four parts: a Reference block for rapid consultation, a
Description block, an Implementation block recording the test conditions, and
a Protection block. Taxonomy-typed fields hold canonical strings; whether a
string is a Base value, an Extension or Unknown depends on the registry it is
checked against, so the status is computed by `validate_pattern`, not stored.
"""

from __future__ import annotations

import datetime as dt
from enum import StrEnum
from typing import Iterator

from pydantic import BaseModel, ConfigDict

from .diagnostics import Code, Diagnostic
from .taxonomy import Dimension, TaxonomyRegistry, TaxonomyStatus

CATALOG_ID = "mb"


class SourceRef(StrEnum):
    ARCHIVE = "archive"
    JAVA = "java"
    NATIVE = "native"
    OSGI = "osgi"


class CauseKind(StrEnum):
    FUNCTIONALITY = "functionality"
    FLAW = "flaw"

    @property
    def dimension(self) -> Dimension:
        return Dimension(self.value)


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True)


class Identifier(_Frozen):
    """
    `mb.<src_ref>.<number>`: catalog id, source-entity abbreviation, number.
    """

    catalog: str = CATALOG_ID
    src_ref: SourceRef
    number: int

    @property
    def text(self) -> str:
        return f"{self.catalog}.{self.src_ref}.{self.number}"

    @property
    def sort_key(self) -> tuple[str, int]:
        return (self.src_ref.value, self.number)

    def __str__(self) -> str:
        return self.text


def identifier_text(identifier: Identifier) -> str:
    """
    Canonical text of an identifier, e.g. `mb.osgi.4`.
    """
    return identifier.text


class Cause(_Frozen):
    """
    A dangerous functionality or a flaw attached to a source entity.

    `kind` is None when the value belongs to neither vocabulary.
    """

    kind: CauseKind | None
    value: str


class SourceAttribution(_Frozen):
    entity: str
    causes: tuple[Cause, ...] = ()


class Consequence(_Frozen):
    base: str
    qualifiers: tuple[str, ...] = ()


class PotentialMechanism(_Frozen):
    name: str
    note: str | None = None


class ReferenceSection(_Frozen):
    name: str
    identifier: Identifier
    extends: str | None = None
    origin: str = ""
    locations: tuple[str, ...]
    sources: tuple[SourceAttribution, ...]
    targets: tuple[str, ...]
    consequences: tuple[Consequence, ...]
    introduction_time: str
    exploit_time: str


class DescriptionSection(_Frozen):
    description: str
    preconditions: str = ""
    attack_process: str = ""
    consequence_description: str = ""
    see_also: tuple[str, ...] = ()


class ImplementationSection(_Frozen):
    code_reference: str = ""
    osgi_profile: str
    date: dt.date
    test_coverage: int
    vulnerable_platforms: tuple[str, ...] = ()
    robust_platforms: tuple[str, ...] = ()


class ProtectionSection(_Frozen):
    existing_mechanisms: tuple[str, ...] = ()
    enforcement_point: str | None = None
    potential_mechanisms: tuple[PotentialMechanism, ...] = ()
    attack_prevention: tuple[str, ...] = ()
    reaction: tuple[str, ...] = ()


class ExtraField(_Frozen):
    """
    A key the format does not define, kept verbatim for round-trip.
    """

    section: str
    key: str
    value: str


class VulnerabilityPattern(_Frozen):
    reference: ReferenceSection
    description: DescriptionSection
    implementation: ImplementationSection
    protection: ProtectionSection
    extra_fields: tuple[ExtraField, ...] = ()

    @property
    def identifier(self) -> Identifier:
        return self.reference.identifier

    @property
    def name(self) -> str:
        return self.reference.name

    @property
    def location_group(self) -> str:
        return location_group(self.reference.locations[0] if self.reference.locations else "")

    def causes(self, kind: CauseKind) -> list[str]:
        return [
            cause.value
            for source in self.reference.sources
            for cause in source.causes
            if cause.kind is kind
        ]

    def values_in(self, dimension: Dimension) -> list[str]:
        """
        The pattern's values in `dimension`, one item per occurrence.
        """
        ref, impl, prot = self.reference, self.implementation, self.protection
        match Dimension(dimension):
            case Dimension.LOCATION:
                return list(ref.locations)
            case Dimension.SOURCE_ENTITY:
                return [source.entity for source in ref.sources]
            case Dimension.FUNCTIONALITY:
                return self.causes(CauseKind.FUNCTIONALITY)
            case Dimension.FLAW:
                return self.causes(CauseKind.FLAW)
            case Dimension.TARGET:
                return list(ref.targets)
            case Dimension.CONSEQUENCE_TYPE:
                return [c.base for c in ref.consequences]
            case Dimension.CONSEQUENCE_QUALIFIER:
                return [q for c in ref.consequences for q in c.qualifiers]
            case Dimension.INTRODUCTION_TIME:
                return [ref.introduction_time] if ref.introduction_time else []
            case Dimension.EXPLOIT_TIME:
                return [ref.exploit_time] if ref.exploit_time else []
            case Dimension.OSGI_PROFILE:
                return [impl.osgi_profile] if impl.osgi_profile else []
            case Dimension.PLATFORM:
                return list(impl.vulnerable_platforms) + list(impl.robust_platforms)
            case Dimension.EXISTING_MECHANISM:
                return list(prot.existing_mechanisms)
            case Dimension.ENFORCEMENT_POINT:
                return [prot.enforcement_point] if prot.enforcement_point else []
            case Dimension.POTENTIAL_MECHANISM:
                return [m.name for m in prot.potential_mechanisms]
            case Dimension.ATTACK_PREVENTION:
                return list(prot.attack_prevention)
            case Dimension.REACTION:
                return list(prot.reaction)


# Catalog chapter groups, in chapter order.
LOCATION_GROUPS: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("Bundle Archive", ("Bundle Archive",)),
    ("Bundle Manifest", ("Bundle Manifest",)),
    ("Bundle Activator", ("Bundle Activator",)),
    ("Bundle Code - Native", ("Application Code - Native Code",)),
    ("Bundle Code - Java", ("Application Code - Java Code", "Application Code - Java API")),
    ("Bundle Code - OSGi API", ("Application Code - OSGi API",)),
    ("Bundle Fragments", ("Bundle Fragment",)),
)
OTHER_LOCATIONS_GROUP = "Other Locations"

_GROUP_OF_LOCATION = {
    location: group for group, locations in LOCATION_GROUPS for location in locations
}


def location_group(location: str) -> str:
    return _GROUP_OF_LOCATION.get(location, OTHER_LOCATIONS_GROUP)


# `.vuln` keys per section, in canonical order.
SECTION_KEYS: dict[str, tuple[str, ...]] = {
    "reference": (
        "name",
        "identifier",
        "extends",
        "origin",
        "location",
        "source",
        "target",
        "consequence-type",
        "introduction-time",
        "exploit-time",
    ),
    "description": (
        "description",
        "preconditions",
        "attack-process",
        "consequence-description",
        "see-also",
    ),
    "implementation": (
        "code-reference",
        "osgi-profile",
        "date",
        "test-coverage",
        "vulnerable-platforms",
        "robust-platforms",
    ),
    "protection": (
        "existing-mechanisms",
        "enforcement-point",
        "potential-mechanisms",
        "attack-prevention",
        "reaction",
    ),
}
SECTIONS: tuple[str, ...] = tuple(SECTION_KEYS)

# The `.vuln` key each taxonomy-typed value is read from.
DIMENSION_FIELDS: dict[Dimension, str] = {
    Dimension.LOCATION: "location",
    Dimension.SOURCE_ENTITY: "source",
    Dimension.FUNCTIONALITY: "source",
    Dimension.FLAW: "source",
    Dimension.TARGET: "target",
    Dimension.CONSEQUENCE_TYPE: "consequence-type",
    Dimension.CONSEQUENCE_QUALIFIER: "consequence-type",
    Dimension.INTRODUCTION_TIME: "introduction-time",
    Dimension.EXPLOIT_TIME: "exploit-time",
    Dimension.OSGI_PROFILE: "osgi-profile",
    Dimension.PLATFORM: "vulnerable-platforms",
    Dimension.EXISTING_MECHANISM: "existing-mechanisms",
    Dimension.ENFORCEMENT_POINT: "enforcement-point",
    Dimension.POTENTIAL_MECHANISM: "potential-mechanisms",
    Dimension.ATTACK_PREVENTION: "attack-prevention",
    Dimension.REACTION: "reaction",
}


def _taxonomy_fields(
    pattern: VulnerabilityPattern,
) -> Iterator[tuple[Dimension, str, str]]:
    """
    Yield (dimension, field key, value) for every directly typed value.

    Source causes are handled separately since their dimension depends on
    the cause kind.
    """
    impl = pattern.implementation
    for dimension in Dimension:
        if dimension in (Dimension.FUNCTIONALITY, Dimension.FLAW, Dimension.PLATFORM):
            continue
        for value in pattern.values_in(dimension):
            yield dimension, DIMENSION_FIELDS[dimension], value
    for value in impl.vulnerable_platforms:
        yield Dimension.PLATFORM, "vulnerable-platforms", value
    for value in impl.robust_platforms:
        yield Dimension.PLATFORM, "robust-platforms", value


def check_vocabulary(
    pattern: VulnerabilityPattern,
    registry: TaxonomyRegistry,
    *,
    entry: str,
    lines: dict[str, int] | None = None,
) -> list[Diagnostic]:
    """
    Resolve every taxonomy-typed value of `pattern` against `registry`.

    Unknown values are Errors (with a near-miss suggestion when one exists);
    user extensions are Warnings; shipped extensions are Info.
    """
    lines = lines or {}
    found: list[Diagnostic] = []

    def report(dimension: Dimension, field: str, value: str) -> None:
        status = registry.lookup(dimension, value)
        if status is TaxonomyStatus.BASE:
            return
        if status is TaxonomyStatus.EXTENSION:
            code = (
                Code.SHIPPED_EXTENSION_VALUE
                if registry.is_shipped(dimension, value)
                else Code.EXTENSION_VALUE
            )
            found.append(
                Diagnostic(
                    code,
                    f"'{value}' is an extension value of {dimension}",
                    entry=entry,
                    field=field,
                    line=lines.get(field),
                )
            )
            return
        found.append(
            Diagnostic(
                Code.TAXONOMY_UNKNOWN,
                f"'{value}' is not a {dimension} value",
                entry=entry,
                field=field,
                line=lines.get(field),
                suggestion=registry.suggest(dimension, value),
            )
        )

    for dimension, field, value in _taxonomy_fields(pattern):
        report(dimension, field, value)

    for source in pattern.reference.sources:
        for cause in source.causes:
            if cause.kind is not None:
                report(cause.kind.dimension, "source", cause.value)
                continue
            suggestion = registry.suggest(
                Dimension.FUNCTIONALITY, cause.value
            ) or registry.suggest(Dimension.FLAW, cause.value)
            found.append(
                Diagnostic(
                    Code.TAXONOMY_UNKNOWN,
                    f"'{cause.value}' is neither a functionality nor a flaw",
                    entry=entry,
                    field="source",
                    line=lines.get("source"),
                    suggestion=suggestion,
                )
            )
    return found


def check_platform_overlap(
    pattern: VulnerabilityPattern,
    *,
    entry: str,
    lines: dict[str, int] | None = None,
) -> list[Diagnostic]:
    lines = lines or {}
    impl = pattern.implementation
    robust = set(impl.robust_platforms)
    return [
        Diagnostic(
            Code.PLATFORM_OVERLAP,
            f"platform '{platform}' is listed both vulnerable and robust",
            entry=entry,
            field="robust-platforms",
            line=lines.get("robust-platforms"),
        )
        for platform in impl.vulnerable_platforms
        if platform in robust
    ]


def validate_pattern(
    pattern: VulnerabilityPattern,
    registry: TaxonomyRegistry,
    *,
    lines: dict[str, int] | None = None,
) -> list[Diagnostic]:
    """
    Check one pattern against the grammar. Findings are returned, never raised.

    Parameters
    ----------
    pattern : VulnerabilityPattern
    registry : TaxonomyRegistry
        Vocabularies the taxonomy-typed fields must resolve in.
    lines : dict[str, int] | None
        Optional key-to-line map of the file the pattern was read from.

    Returns
    -------
    list[Diagnostic]
        No Error or Warning iff every taxonomy value resolves, the
        identifier is well formed, coverage is within 0..100 and the
        vulnerable and robust platform sets are disjoint. Values from the
        shipped extension set are reported as Info.
    """
    lines = lines or {}
    ref = pattern.reference
    entry = ref.identifier.text
    found: list[Diagnostic] = []

    def at(field: str) -> int | None:
        return lines.get(field)

    if ref.identifier.catalog != CATALOG_ID or ref.identifier.number < 1:
        found.append(
            Diagnostic(
                Code.ID_SYNTAX,
                f"identifier '{entry}' must read {CATALOG_ID}.<src_ref>.<n> with n >= 1",
                entry=entry,
                field="identifier",
                line=at("identifier"),
            )
        )

    required_text = {
        "name": ref.name,
        "introduction-time": ref.introduction_time,
        "exploit-time": ref.exploit_time,
        "description": pattern.description.description,
        "osgi-profile": pattern.implementation.osgi_profile,
    }
    for field, value in required_text.items():
        if not value.strip():
            found.append(
                Diagnostic(Code.EMPTY_FIELD, f"'{field}' must not be empty", entry=entry, field=field, line=at(field))
            )

    required_lists = {
        "location": ref.locations,
        "source": ref.sources,
        "target": ref.targets,
        "consequence-type": ref.consequences,
    }
    for field, values in required_lists.items():
        if not values:
            found.append(
                Diagnostic(Code.EMPTY_FIELD, f"'{field}' needs at least one value", entry=entry, field=field, line=at(field))
            )
    for source in ref.sources:
        if not source.causes:
            found.append(
                Diagnostic(
                    Code.EMPTY_FIELD,
                    f"source entity '{source.entity}' names no functionality or flaw",
                    entry=entry,
                    field="source",
                    line=at("source"),
                )
            )

    for consequence in ref.consequences:
        if len(set(consequence.qualifiers)) != len(consequence.qualifiers):
            found.append(
                Diagnostic(
                    Code.DUP_QUALIFIER,
                    f"consequence '{consequence.base}' repeats a qualifier",
                    entry=entry,
                    field="consequence-type",
                    line=at("consequence-type"),
                )
            )

    coverage = pattern.implementation.test_coverage
    if not 0 <= coverage <= 100:
        found.append(
            Diagnostic(
                Code.COVERAGE_RANGE,
                f"test coverage {coverage}% is outside 0..100",
                entry=entry,
                field="test-coverage",
                line=at("test-coverage"),
            )
        )

    found.extend(check_vocabulary(pattern, registry, entry=entry, lines=lines))
    found.extend(check_platform_overlap(pattern, entry=entry, lines=lines))
    return found
