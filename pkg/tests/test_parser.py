import datetime as dt

import pytest
from hypothesis import given

from vulncat.diagnostics import Code
from vulncat.exceptions import IdentifierSyntaxError
from vulncat.model import CauseKind, SourceRef
from vulncat.parser import (
    EntryText,
    parse_consequence_field,
    parse_coverage,
    parse_date,
    parse_entry,
    parse_identifier,
    parse_potential_mechanisms,
    parse_see_also,
    parse_source_field,
    serialize_entry,
    split_top_level,
)

from .strategies import REGISTRY, identifiers, patterns


def _codes(result) -> list[Code]:
    return [d.code for d in result.diagnostics]


# ---------------------------------------------------------------------------
# Identifiers
# ---------------------------------------------------------------------------


def test_parse_identifier() -> None:
    identifier = parse_identifier("mb.osgi.4")
    assert (identifier.src_ref, identifier.number) == (SourceRef.OSGI, 4)


def test_parse_identifier_accepts_capital_catalog_id() -> None:
    assert parse_identifier("Mb.java.10").text == "mb.java.10"


@pytest.mark.parametrize("text", ["xx.osgi.4", "mb.web.1", "mb.osgi.0", "mb.osgi.04", "mb.osgi", "mb.osgi.x"])
def test_parse_identifier_rejects(text) -> None:
    with pytest.raises(IdentifierSyntaxError) as info:
        parse_identifier(text)
    assert [d.code for d in info.value.diagnostics] == [Code.ID_SYNTAX]


@given(identifiers)
def test_identifier_round_trip(identifier) -> None:
    assert parse_identifier(identifier.text) == identifier


# ---------------------------------------------------------------------------
# Field micro-grammars
# ---------------------------------------------------------------------------


def test_split_top_level() -> None:
    assert split_top_level("A (x; y); B") == ["A (x; y)", "B"]
    assert split_top_level("A (x; y; B") is None
    assert split_top_level("A) (") is None


def test_parse_source_field_classifies_causes() -> None:
    sources, found = parse_source_field(
        "JVM - APIs (Thread API; No Algorithm Safety - Java); OS (Kill utility)", REGISTRY
    )
    assert found == []
    assert [s.entity for s in sources] == ["JVM - APIs", "OS"]
    kinds = [(c.kind, c.value) for c in sources[0].causes]
    assert kinds == [(CauseKind.FUNCTIONALITY, "Thread API"), (CauseKind.FLAW, "No Algorithm Safety - Java")]


def test_parse_source_field_unbalanced() -> None:
    sources, found = parse_source_field("OS (Kill utility", REGISTRY)
    assert sources == []
    assert [d.code for d in found] == [Code.PARSE_SOURCE]


def test_parse_source_field_unknown_cause() -> None:
    sources, found = parse_source_field("OS (Kill utilty)", REGISTRY)
    assert sources[0].causes[0].kind is None
    assert found[0].code is Code.TAXONOMY_UNKNOWN
    assert found[0].suggestion == "Kill utility"


def test_parse_consequence_field() -> None:
    consequences, found = parse_consequence_field(
        "Performance Breakdown - Platform; Unavailability - Service, Package", REGISTRY
    )
    assert found == []
    assert [(c.base, c.qualifiers) for c in consequences] == [
        ("Performance Breakdown", ("Platform",)),
        ("Unavailability", ("Service", "Package")),
    ]


def test_parse_consequence_field_unknown_qualifier() -> None:
    _, found = parse_consequence_field("Unavailability - Servce", REGISTRY)
    assert [(d.code, d.suggestion) for d in found] == [(Code.PARSE_CONSEQUENCE, "Service")]


def test_parse_see_also_splits_on_semicolons_only() -> None:
    assert parse_see_also("System.exit; Runtime.halt;Exec.Kill") == ["System.exit", "Runtime.halt", "Exec.Kill"]
    assert parse_see_also("Load, then Crash") == ["Load, then Crash"]
    assert parse_see_also("-") == []


def test_parse_potential_mechanisms_notes() -> None:
    mechanisms = parse_potential_mechanisms(
        "Code static Analysis; OSGi Platform Modification - Bundle Startup Process (launch the activator in a thread)",
        REGISTRY,
    )
    assert [(m.name, m.note) for m in mechanisms] == [
        ("Code static Analysis", None),
        ("OSGi Platform Modification - Bundle Startup Process", "launch the activator in a thread"),
    ]


def test_parse_potential_mechanisms_nested_note() -> None:
    (mechanism,) = parse_potential_mechanisms("Code static Analysis (detect calls (e.g. System.exit))", REGISTRY)
    assert (mechanism.name, mechanism.note) == ("Code static Analysis", "detect calls (e.g. System.exit)")
    (kept,) = parse_potential_mechanisms("Code static Analysis (detect) calls", REGISTRY)
    assert (kept.name, kept.note) == ("Code static Analysis (detect) calls", None)


def test_parse_date_formats() -> None:
    assert parse_date("2006-08-24") == (dt.date(2006, 8, 24), [])
    when, found = parse_date("8.24.2006")
    assert when == dt.date(2006, 8, 24)
    assert [d.code for d in found] == [Code.DATE_FORMAT]
    assert parse_date("24/08/2006")[0] is None
    assert parse_date("2006-13-01")[1][0].code is Code.DATE_SYNTAX


@pytest.mark.parametrize("text, year", [("1.2.99", 99), ("12.31.7", 7), ("1.2.3000", 3000)])
def test_parse_date_short_dotted_years(text, year) -> None:
    when, found = parse_date(text)
    assert when.year == year
    assert [d.code for d in found] == [Code.DATE_FORMAT]


@pytest.mark.parametrize("text", ["1.2.3001", "1.2.0", "3001-01-01", "1.2.12345"])
def test_parse_date_out_of_range(text) -> None:
    assert parse_date(text)[1][0].code is Code.DATE_SYNTAX


def test_parse_coverage() -> None:
    assert parse_coverage("10%") == (10, [])
    assert parse_coverage("100") == (100, [])
    assert parse_coverage("101%") == (101, [])
    assert parse_coverage("ten")[1][0].code is Code.COVERAGE_SYNTAX


# ---------------------------------------------------------------------------
# Entries
# ---------------------------------------------------------------------------


def test_parse_worked_example(osgi4_text) -> None:
    result = parse_entry(EntryText(osgi4_text, origin="mb.osgi.4.vuln"), REGISTRY)
    assert result.ok
    assert result.diagnostics == []
    pattern = result.pattern
    assert pattern.identifier.text == "mb.osgi.4"
    assert pattern.reference.extends == "Infinite Loop in Method Call"
    assert pattern.implementation.date == dt.date(2006, 8, 24)
    assert pattern.protection.enforcement_point is None
    assert pattern.protection.potential_mechanisms[-1].note == (
        "launch the bundle activator in a separate thread to prevent startup hanging"
    )


def test_field_lines_are_canonical(osgi4_text) -> None:
    lines = parse_entry(osgi4_text, REGISTRY).field_lines
    assert (lines["name"], lines["exploit-time"], lines["see-also"], lines["test-coverage"], lines["reaction"]) == (
        2,
        11,
        18,
        24,
        33,
    )


def test_crlf_is_accepted(osgi4_text) -> None:
    assert parse_entry(osgi4_text.replace("\n", "\r\n"), REGISTRY).ok


def test_continuation_lines(osgi4_text) -> None:
    text = osgi4_text.replace(
        "description = An infinite loop is executed in the Bundle Activator\n",
        "description = An infinite loop is executed\n  in the Bundle Activator\n",
        1,
    )
    pattern = parse_entry(text, REGISTRY).pattern
    assert pattern.description.description == "An infinite loop is executed\nin the Bundle Activator"


def test_free_text_keeps_paragraphs_and_indentation(osgi4_text) -> None:
    pattern = parse_entry(osgi4_text, REGISTRY).pattern
    description = pattern.description.model_copy(
        update={
            "description": "First paragraph.\n\nSecond paragraph.",
            "preconditions": "Steps:\n  1. install\n  2. start",
        }
    )
    pattern = pattern.model_copy(update={"description": description})
    text = serialize_entry(pattern)
    assert "description = First paragraph.\n  \n  Second paragraph.\n" in text.raw
    assert "preconditions = Steps:\n    1. install\n    2. start\n" in text.raw
    assert parse_entry(text, REGISTRY).pattern == pattern


def test_round_trip_keeps_commas_and_nested_notes(osgi4_text) -> None:
    text = osgi4_text.replace(
        "see-also = ",
        "see-also = Load, then Crash; ",
        1,
    )
    pattern = parse_entry(text, REGISTRY).pattern
    assert pattern.description.see_also[0] == "Load, then Crash"
    mechanisms = parse_potential_mechanisms("Code static Analysis (detect calls (e.g. System.exit))", REGISTRY)
    protection = pattern.protection.model_copy(update={"potential_mechanisms": tuple(mechanisms)})
    pattern = pattern.model_copy(update={"protection": protection})
    assert parse_entry(serialize_entry(pattern), REGISTRY).pattern == pattern


def test_missing_section(osgi4_text) -> None:
    text = osgi4_text.split("[protection]")[0]
    result = parse_entry(text, REGISTRY)
    assert result.pattern is None
    assert _codes(result) == [Code.SECTION_MISSING]
    assert result.diagnostics[0].entry == "mb.osgi.4"


def test_unknown_section(osgi4_text) -> None:
    result = parse_entry(osgi4_text + "\n[history]\nchanged = yes\n", REGISTRY)
    assert _codes(result) == [Code.SECTION_UNKNOWN]
    assert result.diagnostics[0].line == 35


def test_duplicate_key(osgi4_text) -> None:
    text = osgi4_text.replace("exploit-time = Bundle Start\n", "exploit-time = Bundle Start\nexploit-time = Execution\n")
    result = parse_entry(text, REGISTRY)
    assert result.pattern is None
    assert [(d.code, d.line) for d in result.diagnostics] == [(Code.KEY_DUP, 12)]


def test_key_before_any_section(osgi4_text) -> None:
    result = parse_entry("stray = value\n" + osgi4_text, REGISTRY)
    assert [(d.code, d.line) for d in result.diagnostics] == [(Code.KEY_ORPHAN, 1)]


def test_missing_required_key(osgi4_text) -> None:
    text = osgi4_text.replace("osgi-profile = J2SE-1.5\n", "")
    result = parse_entry(text, REGISTRY)
    assert [(d.code, d.field) for d in result.diagnostics] == [(Code.FIELD_MISSING, "osgi-profile")]


def test_unknown_key_is_kept(osgi4_text) -> None:
    text = osgi4_text.replace("[protection]\n", "[protection]\nreviewer = J. Doe\n")
    result = parse_entry(text, REGISTRY)
    assert result.ok
    assert _codes(result) == [Code.UNKNOWN_KEY]
    extra = result.pattern.extra_fields[0]
    assert (extra.section, extra.key, extra.value) == ("protection", "reviewer", "J. Doe")
    assert "reviewer = J. Doe" in serialize_entry(result.pattern).raw


def test_bad_identifier_reports_at_its_line(osgi4_text) -> None:
    result = parse_entry(EntryText(osgi4_text.replace("mb.osgi.4", "xx.osgi.4"), origin="bad.vuln"), REGISTRY)
    assert [(d.code, d.entry, d.line) for d in result.diagnostics] == [(Code.ID_SYNTAX, "bad.vuln", 3)]


def test_comment_lines_are_skipped(osgi4_text) -> None:
    result = parse_entry("# a note\n" + osgi4_text + "# trailing\n", REGISTRY)
    assert result.ok


def test_serialize_is_canonical_for_the_corpus(corpus_dir) -> None:
    for path in sorted(corpus_dir.glob("*.vuln")):
        text = path.read_text(encoding="utf-8")
        body = "".join(line for line in text.splitlines(keepends=True) if not line.startswith("#"))
        pattern = parse_entry(text, REGISTRY).pattern
        assert serialize_entry(pattern).raw == body.rstrip("\n") + "\n", path.name


def test_round_trip_corpus(corpus) -> None:
    for pattern in corpus:
        again = parse_entry(serialize_entry(pattern), REGISTRY)
        assert again.pattern == pattern


@given(patterns())
def test_round_trip_generated(pattern) -> None:
    text = serialize_entry(pattern)
    result = parse_entry(text, REGISTRY)
    assert result.pattern == pattern
    assert serialize_entry(result.pattern).raw == text.raw
