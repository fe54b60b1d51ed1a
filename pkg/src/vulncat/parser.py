"""
Reader and writer for `.vuln` entry files.

An entry file has four bracketed sections, `[reference]`, `[description]`,
`[implementation]` and `[protection]`, each holding `key = value` lines.
A value continues on following lines indented by two spaces. Lines whose
first character is `#` are comments. `-` stands for an empty field.

Example
-------
[reference]
name = Management Utility Freezing - Infinite Loop
identifier = mb.osgi.4
...
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date

import structlog

from .diagnostics import Code, Diagnostic, has_errors
from .exceptions import IdentifierSyntaxError
from .model import (
    CATALOG_ID,
    SECTION_KEYS,
    SECTIONS,
    Cause,
    CauseKind,
    Consequence,
    DescriptionSection,
    ExtraField,
    Identifier,
    ImplementationSection,
    PotentialMechanism,
    ProtectionSection,
    ReferenceSection,
    SourceAttribution,
    SourceRef,
    VulnerabilityPattern,
)
from .taxonomy import Dimension, TaxonomyRegistry, TaxonomyStatus
from .utils import normalize_whitespace

logger = structlog.get_logger(__name__)

EMPTY = "-"
LIST_SEPARATOR = "; "
CONTINUATION = "  "

REQUIRED_KEYS: tuple[str, ...] = (
    "name",
    "identifier",
    "location",
    "source",
    "target",
    "consequence-type",
    "introduction-time",
    "exploit-time",
    "description",
    "osgi-profile",
    "date",
    "test-coverage",
)

_HEADER = re.compile(r"^\[([^\]]*)\]$")
_KEY_LINE = re.compile(r"^([A-Za-z][A-Za-z0-9_-]*)\s*=(.*)$")
_IDENTIFIER = re.compile(r"^([A-Za-z]+)\.([A-Za-z]+)\.(\d+)$")
_ISO_DATE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_DOTTED_DATE = re.compile(r"^(\d{1,2})\.(\d{1,2})\.(\d{1,4})$")
_COVERAGE = re.compile(r"^(-?\d+)\s*%?$")
MAX_YEAR = 3000


@dataclass(frozen=True)
class EntryText:
    """
    Raw text of one entry and where it came from. Line endings are LF.
    """

    raw: str
    origin: str = "<memory>"

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "raw", self.raw.replace("\r\n", "\n").replace("\r", "\n")
        )


@dataclass
class ParseResult:
    """
    Outcome of `parse_entry`.

    Attributes
    ----------
    pattern : VulnerabilityPattern | None
        None when the file has structural or field errors.
    diagnostics : list[Diagnostic]
    field_lines : dict[str, int]
        Line number of every key line, by key.
    """

    pattern: VulnerabilityPattern | None
    diagnostics: list[Diagnostic] = field(default_factory=list)
    field_lines: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.pattern is not None and not has_errors(self.diagnostics)


@dataclass
class _RawField:
    key: str
    line: int
    lines: list[str]

    @property
    def value(self) -> str:
        # trailing empty continuation lines carry nothing
        return "\n".join(self.lines).rstrip("\n")


# ---------------------------------------------------------------------------
# Micro-grammars
# ---------------------------------------------------------------------------


def parse_identifier(text: str) -> Identifier:
    """
    Parse `mb.<src_ref>.<n>`.

    The catalog id may start with a capital (`Mb.osgi.4`) and is stored as
    `mb`.

    Raises
    ------
    IdentifierSyntaxError
        For a different catalog id, an unknown src_ref, a non-numeric
        suffix, n = 0 or a leading zero.
    """
    value = text.strip()
    match = _IDENTIFIER.match(value)
    problem: str | None = None
    if match is None:
        problem = "expected mb.<src_ref>.<n>"
    else:
        catalog, src_ref, number = match.groups()
        if catalog not in (CATALOG_ID, CATALOG_ID.capitalize()):
            problem = f"catalog id must be '{CATALOG_ID}'"
        elif src_ref not in {ref.value for ref in SourceRef}:
            problem = f"unknown src_ref '{src_ref}'"
        elif number.startswith("0"):
            problem = "number must be a positive integer without leading zeros"
    if problem is not None:
        diagnostic = Diagnostic(
            Code.ID_SYNTAX,
            f"bad identifier '{value}': {problem}",
            field="identifier",
        )
        raise IdentifierSyntaxError(diagnostic.message, [diagnostic])
    return Identifier(catalog=CATALOG_ID, src_ref=SourceRef(src_ref), number=int(number))


def split_top_level(text: str, separator: str = ";") -> list[str] | None:
    """
    Split on `separator` outside parentheses.

    Returns None when parentheses are unbalanced.
    """
    parts: list[str] = []
    depth = 0
    current: list[str] = []
    for char in text:
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
            if depth < 0:
                return None
        if char == separator and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(char)
    if depth != 0:
        return None
    parts.append("".join(current))
    return [normalize_whitespace(p) for p in parts if normalize_whitespace(p)]


def _split_parenthesized(item: str) -> tuple[str, str | None] | None:
    """
    `Name (inner)` -> ("Name", "inner"); `Name` -> ("Name", None).

    None when something follows the closing parenthesis or parentheses nest.
    """
    if "(" not in item:
        return (item, None)
    head, _, rest = item.partition("(")
    if not rest.endswith(")"):
        return None
    inner = rest[:-1]
    if "(" in inner or ")" in inner:
        return None
    return (normalize_whitespace(head), normalize_whitespace(inner))


def _split_note(item: str) -> tuple[str, str | None] | None:
    """
    `Name (note)` where the note may hold balanced parentheses of its own.

    None when the text after the first `(` does not end the chunk with `)`.
    """
    head, opened, rest = item.partition("(")
    if not opened:
        return (item, None)
    if not rest.endswith(")"):
        return None
    return (normalize_whitespace(head), normalize_whitespace(rest[:-1]))


def parse_source_field(
    text: str, registry: TaxonomyRegistry
) -> tuple[list[SourceAttribution], list[Diagnostic]]:
    """
    Parse `ENTITY (CAUSE; CAUSE); ENTITY (CAUSE)`.

    Each cause is classified as a functionality or a flaw by vocabulary
    membership. A cause in neither vocabulary is kept with no kind and
    reported as E-TAXONOMY-UNKNOWN.

    Returns
    -------
    tuple[list[SourceAttribution], list[Diagnostic]]
        The attributions (empty for `-` or an empty string) and the findings.
        On E-PARSE-SOURCE the list is empty.
    """
    if normalize_whitespace(text) in ("", EMPTY):
        return [], []
    chunks = split_top_level(text)
    parsed = [_split_parenthesized(chunk) for chunk in chunks] if chunks else None
    if parsed is None or any(p is None for p in parsed):
        return [], [
            Diagnostic(
                Code.PARSE_SOURCE,
                f"unbalanced or misplaced parentheses in source '{normalize_whitespace(text)}'",
                field="source",
            )
        ]

    attributions: list[SourceAttribution] = []
    diagnostics: list[Diagnostic] = []
    for entity, inner in parsed:
        causes: list[Cause] = []
        for value in (inner or "").split(";"):
            value = normalize_whitespace(value)
            if not value:
                continue
            for kind in CauseKind:
                if registry.lookup(kind.dimension, value) is not TaxonomyStatus.UNKNOWN:
                    causes.append(Cause(kind=kind, value=registry.canonical(kind.dimension, value)))
                    break
            else:
                causes.append(Cause(kind=None, value=value))
                diagnostics.append(
                    Diagnostic(
                        Code.TAXONOMY_UNKNOWN,
                        f"'{value}' is neither a functionality nor a flaw",
                        field="source",
                        suggestion=registry.suggest(Dimension.FUNCTIONALITY, value)
                        or registry.suggest(Dimension.FLAW, value),
                    )
                )
        attributions.append(
            SourceAttribution(
                entity=registry.canonical(Dimension.SOURCE_ENTITY, entity),
                causes=tuple(causes),
            )
        )
    return attributions, diagnostics


def parse_consequence_field(
    text: str, registry: TaxonomyRegistry
) -> tuple[list[Consequence], list[Diagnostic]]:
    """
    Parse `BASE [- QUALIFIER, QUALIFIER]; BASE ...`.

    An unknown base or qualifier is E-PARSE-CONSEQUENCE.
    """
    if normalize_whitespace(text) in ("", EMPTY):
        return [], []
    consequences: list[Consequence] = []
    diagnostics: list[Diagnostic] = []
    for item in text.split(";"):
        item = normalize_whitespace(item)
        if not item:
            continue
        base, _, rest = item.partition(" - ")
        qualifiers = [normalize_whitespace(q) for q in rest.split(",") if normalize_whitespace(q)]
        checks = [(Dimension.CONSEQUENCE_TYPE, base)] + [
            (Dimension.CONSEQUENCE_QUALIFIER, q) for q in qualifiers
        ]
        for dimension, value in checks:
            if registry.lookup(dimension, value) is TaxonomyStatus.UNKNOWN:
                diagnostics.append(
                    Diagnostic(
                        Code.PARSE_CONSEQUENCE,
                        f"'{value}' is not a {dimension} value",
                        field="consequence-type",
                        suggestion=registry.suggest(dimension, value),
                    )
                )
        consequences.append(
            Consequence(
                base=registry.canonical(Dimension.CONSEQUENCE_TYPE, base),
                qualifiers=tuple(
                    registry.canonical(Dimension.CONSEQUENCE_QUALIFIER, q) for q in qualifiers
                ),
            )
        )
    return consequences, diagnostics


def parse_see_also(text: str) -> list[str]:
    """
    Split a See Also list on `;`. Names are kept verbatim, commas included.
    """
    if normalize_whitespace(text) in ("", EMPTY):
        return []
    return [normalize_whitespace(n) for n in text.split(";") if normalize_whitespace(n)]


def parse_potential_mechanisms(
    text: str, registry: TaxonomyRegistry
) -> list[PotentialMechanism]:
    """
    Parse `NAME (note); NAME`.

    The note runs from the first `(` to the closing `)` of the chunk and may
    hold parentheses of its own. A chunk that does not end in `)` after a
    `(` is kept whole as the name, so vocabulary validation reports it.
    """
    if normalize_whitespace(text) in ("", EMPTY):
        return []
    chunks = split_top_level(text) or [normalize_whitespace(c) for c in text.split(";")]
    mechanisms: list[PotentialMechanism] = []
    for chunk in filter(None, chunks):
        name, note = _split_note(chunk) or (chunk, None)
        mechanisms.append(
            PotentialMechanism(
                name=registry.canonical(Dimension.POTENTIAL_MECHANISM, name),
                note=note or None,
            )
        )
    return mechanisms


def parse_date(text: str) -> tuple[date | None, list[Diagnostic]]:
    """
    ISO `YYYY-MM-DD`, or the dotted `MONTH.DAY.YEAR` with W-DATE-FORMAT.

    The dotted year has one to four digits. Years past `MAX_YEAR`, and year
    0, are E-DATE-SYNTAX.
    """
    value = text.strip()
    try:
        if _ISO_DATE.match(value):
            parsed = date.fromisoformat(value)
            if parsed.year > MAX_YEAR:
                raise ValueError(value)
            return parsed, []
        dotted = _DOTTED_DATE.match(value)
        if dotted:
            month, day, year = (int(g) for g in dotted.groups())
            if year > MAX_YEAR:
                raise ValueError(value)
            parsed = date(year, month, day)
            return parsed, [
                Diagnostic(
                    Code.DATE_FORMAT,
                    f"dotted date '{value}' is written as {parsed.isoformat()}",
                    field="date",
                )
            ]
    except ValueError:
        pass
    return None, [
        Diagnostic(Code.DATE_SYNTAX, f"'{value}' is not a date", field="date")
    ]


def parse_coverage(text: str) -> tuple[int | None, list[Diagnostic]]:
    match = _COVERAGE.match(text.strip())
    if match is None:
        return None, [
            Diagnostic(
                Code.COVERAGE_SYNTAX,
                f"'{text.strip()}' is not a percentage",
                field="test-coverage",
            )
        ]
    return int(match.group(1)), []


def _list(text: str, registry: TaxonomyRegistry, dimension: Dimension) -> tuple[str, ...]:
    if normalize_whitespace(text) in ("", EMPTY):
        return ()
    return tuple(
        registry.canonical(dimension, v)
        for v in text.split(";")
        if normalize_whitespace(v)
    )


def _single(text: str, registry: TaxonomyRegistry, dimension: Dimension) -> str:
    if normalize_whitespace(text) in ("", EMPTY):
        return ""
    return registry.canonical(dimension, text)


def _text(text: str) -> str:
    return "" if text.strip() == EMPTY else text.strip()


# ---------------------------------------------------------------------------
# Entry reader
# ---------------------------------------------------------------------------


def _scan(
    text: EntryText,
) -> tuple[
    dict[str, dict[str, _RawField]], list[tuple[str, _RawField]], list[Diagnostic]
]:
    """
    Split the file into sections and key lines. Reports structural errors.
    """
    sections: dict[str, dict[str, _RawField]] = {}
    extras: list[tuple[str, _RawField]] = []
    diagnostics: list[Diagnostic] = []
    current: str | None = None
    skipping = False
    last: _RawField | None = None
    seen: dict[str, set[str]] = {name: set() for name in SECTION_KEYS}

    for lineno, line in enumerate(text.raw.split("\n"), start=1):
        if line.startswith("#"):
            continue
        if not line.strip():
            # a bare continuation prefix is an empty line of the value
            if last is not None and line.startswith(CONTINUATION):
                last.lines.append("")
            continue
        if line[0].isspace():
            if last is None:
                if not skipping:
                    diagnostics.append(
                        Diagnostic(Code.KEY_ORPHAN, "continuation line without a key", line=lineno)
                    )
                continue
            kept = line.removeprefix(CONTINUATION) if line.startswith(CONTINUATION) else line.lstrip()
            last.lines.append(kept.rstrip())
            continue

        header = _HEADER.match(line.strip())
        if header:
            name = header.group(1).strip()
            last = None
            if name not in SECTION_KEYS:
                diagnostics.append(
                    Diagnostic(
                        Code.SECTION_UNKNOWN,
                        f"unknown section [{name}]",
                        field=name,
                        line=lineno,
                    )
                )
                current, skipping = None, True
            elif name in sections:
                diagnostics.append(
                    Diagnostic(Code.KEY_DUP, f"section [{name}] repeated", field=name, line=lineno)
                )
                current, skipping = name, False
            else:
                sections[name] = {}
                current, skipping = name, False
            continue

        key_line = _KEY_LINE.match(line)
        if key_line is None or (current is None and not skipping):
            diagnostics.append(
                Diagnostic(
                    Code.KEY_ORPHAN,
                    "expected 'key = value' inside a section"
                    if key_line is None
                    else "key before any section header",
                    field=key_line.group(1) if key_line else None,
                    line=lineno,
                )
            )
            last = None
            continue
        if skipping:
            last = None
            continue

        key, value = key_line.group(1), key_line.group(2).strip()
        raw = _RawField(key=key, line=lineno, lines=[value])
        if key in seen[current]:
            diagnostics.append(
                Diagnostic(Code.KEY_DUP, f"key '{key}' repeated", field=key, line=lineno)
            )
            last = None
            continue
        seen[current].add(key)
        if key in SECTION_KEYS[current]:
            sections[current][key] = raw
        else:
            diagnostics.append(
                Diagnostic(
                    Code.UNKNOWN_KEY,
                    f"unknown key '{key}' in [{current}] kept verbatim",
                    field=key,
                    line=lineno,
                )
            )
            extras.append((current, raw))
        last = raw

    for name in SECTIONS:
        if name not in sections:
            diagnostics.append(
                Diagnostic(Code.SECTION_MISSING, f"section [{name}] is missing", field=name)
            )
    return sections, extras, diagnostics


def parse_entry(text: EntryText | str, registry: TaxonomyRegistry) -> ParseResult:
    """
    Parse one entry file.

    Structural problems (missing or unknown section, duplicate or orphan key)
    and unparseable fields yield Error diagnostics with line numbers and no
    pattern. Fields are still read where possible so one run reports every
    problem. Taxonomy membership is left to `validate_pattern`.

    Parameters
    ----------
    text : EntryText | str
    registry : TaxonomyRegistry
        Used to canonicalize values and to tell functionalities from flaws.

    Returns
    -------
    ParseResult
    """
    if isinstance(text, str):
        text = EntryText(text)
    sections, extras, diagnostics = _scan(text)
    fields: dict[str, _RawField] = {
        key: raw for section in sections.values() for key, raw in section.items()
    }
    field_lines = {key: raw.line for key, raw in fields.items()}
    for _, raw in extras:
        field_lines.setdefault(raw.key, raw.line)
    extra_fields = [ExtraField(section=s, key=raw.key, value=raw.value) for s, raw in extras]

    def value(key: str) -> str:
        return fields[key].value if key in fields else ""

    def located(found: list[Diagnostic], key: str) -> list[Diagnostic]:
        return [d.at(line=field_lines.get(key)) for d in found]

    for key in REQUIRED_KEYS:
        if key not in fields and _section_of(key) in sections:
            diagnostics.append(
                Diagnostic(Code.FIELD_MISSING, f"required key '{key}' is missing", field=key)
            )

    identifier: Identifier | None = None
    if "identifier" in fields:
        try:
            identifier = parse_identifier(value("identifier"))
        except IdentifierSyntaxError as exc:
            diagnostics.extend(located(exc.diagnostics, "identifier"))

    sources, found = parse_source_field(value("source"), registry)
    diagnostics.extend(
        located([d for d in found if d.code is not Code.TAXONOMY_UNKNOWN], "source")
    )
    consequences, found = parse_consequence_field(value("consequence-type"), registry)
    diagnostics.extend(located(found, "consequence-type"))
    mechanisms = parse_potential_mechanisms(value("potential-mechanisms"), registry)

    when: date | None = None
    if "date" in fields:
        when, found = parse_date(value("date"))
        diagnostics.extend(located(found, "date"))
    coverage: int | None = None
    if "test-coverage" in fields:
        coverage, found = parse_coverage(value("test-coverage"))
        diagnostics.extend(located(found, "test-coverage"))

    entry = identifier.text if identifier else text.origin
    diagnostics = [d.at(entry=entry) if d.entry == "<memory>" else d for d in diagnostics]

    if has_errors(diagnostics) or identifier is None or when is None or coverage is None:
        logger.debug("entry_rejected", origin=text.origin, diagnostics=len(diagnostics))
        return ParseResult(None, diagnostics, field_lines)

    pattern = VulnerabilityPattern(
        reference=ReferenceSection(
            name=_text(value("name")),
            identifier=identifier,
            extends=_text(value("extends")) or None,
            origin=_text(value("origin")),
            locations=_list(value("location"), registry, Dimension.LOCATION),
            sources=tuple(sources),
            targets=_list(value("target"), registry, Dimension.TARGET),
            consequences=tuple(consequences),
            introduction_time=_single(value("introduction-time"), registry, Dimension.INTRODUCTION_TIME),
            exploit_time=_single(value("exploit-time"), registry, Dimension.EXPLOIT_TIME),
        ),
        description=DescriptionSection(
            description=_text(value("description")),
            preconditions=_text(value("preconditions")),
            attack_process=_text(value("attack-process")),
            consequence_description=_text(value("consequence-description")),
            see_also=tuple(parse_see_also(value("see-also"))),
        ),
        implementation=ImplementationSection(
            code_reference=_text(value("code-reference")),
            osgi_profile=_single(value("osgi-profile"), registry, Dimension.OSGI_PROFILE),
            date=when,
            test_coverage=coverage,
            vulnerable_platforms=_list(value("vulnerable-platforms"), registry, Dimension.PLATFORM),
            robust_platforms=_list(value("robust-platforms"), registry, Dimension.PLATFORM),
        ),
        protection=ProtectionSection(
            existing_mechanisms=_list(value("existing-mechanisms"), registry, Dimension.EXISTING_MECHANISM),
            enforcement_point=_single(value("enforcement-point"), registry, Dimension.ENFORCEMENT_POINT) or None,
            potential_mechanisms=tuple(mechanisms),
            attack_prevention=_list(value("attack-prevention"), registry, Dimension.ATTACK_PREVENTION),
            reaction=_list(value("reaction"), registry, Dimension.REACTION),
        ),
        extra_fields=tuple(extra_fields),
    )
    logger.debug("entry_parsed", origin=text.origin, identifier=entry, diagnostics=len(diagnostics))
    return ParseResult(pattern, diagnostics, field_lines)


def _section_of(key: str) -> str:
    return next(section for section, keys in SECTION_KEYS.items() if key in keys)



# ---------------------------------------------------------------------------
# Entry writer
# ---------------------------------------------------------------------------


def _value_lines(key: str, value: str, placeholder: str = EMPTY) -> list[str]:
    """
    Key line plus continuation lines. An empty line of the value is written
    as the bare continuation prefix so it survives a read.
    """
    value = value or placeholder
    first, *rest = value.split("\n")
    return [f"{key} = {first}".rstrip()] + [CONTINUATION + line for line in rest]


def _join(values) -> str:
    return LIST_SEPARATOR.join(values)


def format_sources(sources: tuple[SourceAttribution, ...]) -> str:
    parts = []
    for source in sources:
        if source.causes:
            causes = LIST_SEPARATOR.join(c.value for c in source.causes)
            parts.append(f"{source.entity} ({causes})")
        else:
            parts.append(source.entity)
    return _join(parts)


def format_consequences(consequences: tuple[Consequence, ...]) -> str:
    return _join(
        f"{c.base} - {', '.join(c.qualifiers)}" if c.qualifiers else c.base
        for c in consequences
    )


def format_mechanisms(mechanisms: tuple[PotentialMechanism, ...]) -> str:
    return _join(f"{m.name} ({m.note})" if m.note else m.name for m in mechanisms)


def serialize_entry(pattern: VulnerabilityPattern) -> EntryText:
    """
    Canonical text of a pattern.

    Keys follow the fixed section order, lists are joined with `; `, empty
    fields print as `-`, coverage prints as `N%`, dates as ISO, and unknown
    keys follow the known ones of their section. Output ends with one LF.
    """
    ref, desc, impl, prot = (
        pattern.reference,
        pattern.description,
        pattern.implementation,
        pattern.protection,
    )
    values: dict[str, dict[str, str]] = {
        "reference": {
            "name": ref.name,
            "identifier": ref.identifier.text,
            "extends": ref.extends or "",
            "origin": ref.origin,
            "location": _join(ref.locations),
            "source": format_sources(ref.sources),
            "target": _join(ref.targets),
            "consequence-type": format_consequences(ref.consequences),
            "introduction-time": ref.introduction_time,
            "exploit-time": ref.exploit_time,
        },
        "description": {
            "description": desc.description,
            "preconditions": desc.preconditions,
            "attack-process": desc.attack_process,
            "consequence-description": desc.consequence_description,
            "see-also": _join(desc.see_also),
        },
        "implementation": {
            "code-reference": impl.code_reference,
            "osgi-profile": impl.osgi_profile,
            "date": impl.date.isoformat(),
            "test-coverage": f"{impl.test_coverage}%",
            "vulnerable-platforms": _join(impl.vulnerable_platforms),
            "robust-platforms": _join(impl.robust_platforms),
        },
        "protection": {
            "existing-mechanisms": _join(prot.existing_mechanisms),
            "enforcement-point": prot.enforcement_point or "",
            "potential-mechanisms": format_mechanisms(prot.potential_mechanisms),
            "attack-prevention": _join(prot.attack_prevention),
            "reaction": _join(prot.reaction),
        },
    }
    blocks: list[str] = []
    for section in SECTIONS:
        lines = [f"[{section}]"]
        for key in SECTION_KEYS[section]:
            lines.extend(_value_lines(key, values[section][key]))
        for extra in pattern.extra_fields:
            if extra.section == section:
                lines.extend(_value_lines(extra.key, extra.value, placeholder=""))
        blocks.append("\n".join(lines))
    return EntryText("\n\n".join(blocks) + "\n", origin=f"{ref.identifier.text}.vuln")
