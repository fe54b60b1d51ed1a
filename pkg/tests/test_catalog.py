from collections import Counter
from dataclasses import FrozenInstanceError

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vulncat.catalog import Catalog, lint, load_catalog, resolve_references
from vulncat.diagnostics import Code, Severity, has_errors
from vulncat.exceptions import CatalogLoadError, EntryNotFoundError

from .strategies import REGISTRY, mini_catalogs, reference_names


def _codes(found) -> list[Code]:
    return [d.code for d in found]


def _extending(pattern, name):
    return pattern.model_copy(update={"reference": pattern.reference.model_copy(update={"extends": name})})


def test_corpus_loads_without_errors(corpus) -> None:
    assert len(corpus) == 32
    assert not has_errors(corpus.load_diagnostics)
    assert {d.severity for d in corpus.load_diagnostics} <= {Severity.INFO}


def test_entries_are_in_identifier_order(corpus) -> None:
    keys = list(corpus.entries)
    assert keys[:4] == ["mb.archive.1", "mb.archive.2", "mb.archive.3", "mb.java.1"]
    assert keys.index("mb.java.9") < keys.index("mb.java.10")
    assert keys[-1] == "mb.osgi.14"


def test_get_by_identifier_or_name(corpus) -> None:
    assert corpus.get("mb.osgi.4").name == "Management Utility Freezing - Infinite Loop"
    assert corpus.get("Mb.osgi.4") is corpus.get("mb.osgi.4")
    assert corpus.get("  Zombie   Data ").identifier.text == "mb.osgi.8"
    assert "mb.java.7" in corpus


def test_get_unknown_entry(corpus) -> None:
    with pytest.raises(EntryNotFoundError):
        corpus.get("mb.osgi.99")
    with pytest.raises(KeyError):
        corpus.get("No Such Vulnerability")


def test_source_lines(corpus) -> None:
    lines = corpus.source_lines("mb.osgi.4")
    assert lines["see-also"] == 18
    assert lines["robust-platforms"] == 26


def test_groups_follow_chapter_order(corpus) -> None:
    groups = corpus.groups()
    assert list(groups) == [
        "Bundle Archive",
        "Bundle Manifest",
        "Bundle Activator",
        "Bundle Code - Native",
        "Bundle Code - Java",
        "Bundle Code - OSGi API",
        "Bundle Fragments",
    ]
    assert [p.identifier.text for p in groups["Bundle Activator"]] == ["mb.osgi.4", "mb.osgi.5"]
    assert len(groups["Bundle Code - Java"]) == 13
    assert sum(len(members) for members in groups.values()) == 32


def test_resolve_references(corpus) -> None:
    graph = resolve_references(corpus)
    assert graph.extends_map() == {
        "mb.java.8": "mb.java.7",
        "mb.java.9": "mb.java.7",
        "mb.osgi.4": "mb.java.12",
        "mb.osgi.5": "mb.java.4",
    }
    unresolved = {(e.source, e.name) for e in graph.unresolved()}
    assert ("mb.osgi.7", "Launch Hidden Bundle") in unresolved
    assert all(e.resolved for e in graph.extends_edges)


def test_lint_corpus_has_warnings_only(corpus) -> None:
    found = lint(corpus)
    assert not has_errors(found)
    dangling = [d for d in found if d.code is Code.DANGLING_SEEALSO]
    near = [d for d in found if d.code is Code.NEAR_MISS_REF]
    assert len(dangling) == 19
    assert [d.suggestion for d in near] == [
        "Stand Alone Infinite Loop",
        "Stand Alone Infinite Loop",
        "Launch a Hidden Bundle",
        "Launch a Hidden Bundle",
        "Execute Hidden Classes",
        "Execute Hidden Classes",
    ]
    assert {d.line for d in dangling + near} == {18}


def test_lint_reports_extends_cycle(corpus) -> None:
    patterns = [
        _extending(p, "Component Data Modifier") if p.identifier.text == "mb.java.7" else p for p in corpus
    ]
    found = lint(Catalog.from_patterns(patterns, corpus.registry))
    cycles = [d for d in found if d.code is Code.EXTENDS_CYCLE]
    assert [d.entry for d in cycles] == ["mb.java.7", "mb.java.8"]
    assert "mb.java.7 -> mb.java.8 -> mb.java.7" in cycles[0].message


def test_lint_reports_dangling_extends(corpus) -> None:
    patterns = [_extending(p, "Code Observr") if p.identifier.text == "mb.java.9" else p for p in corpus]
    found = [d for d in lint(Catalog.from_patterns(patterns, corpus.registry)) if d.entry == "mb.java.9"]
    assert Code.DANGLING_EXTENDS in _codes(found)
    near = next(d for d in found if d.code is Code.NEAR_MISS_REF)
    assert (near.field, near.suggestion) == ("extends", "Code Observer")


def test_from_patterns_duplicate_name(corpus) -> None:
    first = corpus.get("mb.osgi.8")
    twin = first.model_copy(
        update={"reference": first.reference.model_copy(update={"identifier": corpus.get("mb.osgi.9").identifier})}
    )
    catalog = Catalog.from_patterns([first, twin], corpus.registry)
    assert len(catalog) == 2
    assert _codes(catalog.load_diagnostics) == [Code.DUP_NAME]
    assert catalog.get("Zombie Data").identifier.text == "mb.osgi.8"


def test_duplicate_identifier_file(corpus_copy, registry) -> None:
    (corpus_copy / "mb.osgi.99.vuln").write_text(
        (corpus_copy / "mb.osgi.4.vuln").read_text(encoding="utf-8"), encoding="utf-8"
    )
    catalog = load_catalog(corpus_copy, registry)
    assert len(catalog) == 32
    found = [d for d in catalog.load_diagnostics if d.code in (Code.DUP_ID, Code.FILENAME_MISMATCH)]
    assert sorted(_codes(found)) == [Code.DUP_ID, Code.FILENAME_MISMATCH]
    assert {d.entry for d in found} == {"mb.osgi.4"}


def test_broken_file_is_left_out(corpus_copy, registry) -> None:
    path = corpus_copy / "mb.java.5.vuln"
    text = path.read_text(encoding="utf-8")
    path.write_text(text.split("[protection]")[0], encoding="utf-8")
    catalog = load_catalog(corpus_copy, registry)
    assert len(catalog) == 31
    assert "mb.java.5" not in catalog
    assert [d.code for d in catalog.load_diagnostics if d.is_error] == [Code.SECTION_MISSING]


def test_unreadable_file(corpus_copy, registry) -> None:
    (corpus_copy / "broken.vuln").write_bytes(b"\xff\xfe[reference]\n")
    catalog = load_catalog(corpus_copy, registry)
    errors = [d for d in catalog.load_diagnostics if d.is_error]
    assert [(d.code, d.entry) for d in errors] == [(Code.IO, "broken.vuln")]


def test_other_files_are_ignored(corpus_copy, registry) -> None:
    (corpus_copy / "README.txt").write_text("not an entry\n", encoding="utf-8")
    assert len(load_catalog(corpus_copy, registry)) == 32


def test_missing_directory(tmp_path) -> None:
    with pytest.raises(CatalogLoadError):
        load_catalog(tmp_path / "absent")


def test_load_logs_a_summary(corpus_dir, registry, captured_logs) -> None:
    load_catalog(corpus_dir, registry)
    event = next(e for e in captured_logs if e["event"] == "catalog_loaded")
    assert (event["files"], event["entries"]) == (32, 32)


def test_catalog_is_read_only(corpus) -> None:
    with pytest.raises(FrozenInstanceError):
        corpus.entries = {}
    with pytest.raises(TypeError):
        corpus.entries["mb.osgi.99"] = corpus.get("mb.osgi.4")
    with pytest.raises(TypeError):
        corpus.name_index["Zombie Data"] = "mb.osgi.4"
    assert isinstance(corpus.load_diagnostics, tuple)


def _dangling_by_entry(catalog) -> Counter:
    return Counter(d.entry for d in lint(catalog) if d.code in (Code.DANGLING_SEEALSO, Code.DANGLING_EXTENDS))


@given(st.data())
def test_removing_an_entry_never_resolves_a_reference(data) -> None:
    patterns = data.draw(mini_catalogs(max_size=6).filter(bool))
    names = [p.name for p in patterns]
    linked = []
    for pattern in patterns:
        see_also = data.draw(st.lists(st.one_of(st.sampled_from(names), reference_names), max_size=4))
        description = pattern.description.model_copy(update={"see_also": tuple(see_also)})
        linked.append(pattern.model_copy(update={"description": description}))
    dropped = data.draw(st.sampled_from(linked)).identifier.text

    before = _dangling_by_entry(Catalog.from_patterns(linked, REGISTRY))
    after = _dangling_by_entry(
        Catalog.from_patterns([p for p in linked if p.identifier.text != dropped], REGISTRY)
    )
    for key in {p.identifier.text for p in linked} - {dropped}:
        assert after[key] >= before[key]
