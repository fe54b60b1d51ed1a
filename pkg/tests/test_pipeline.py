import asyncio
import json

import pytest
import yaml

from vulncat.blueprint import Blueprint, StationConfig
from vulncat.catalog import Catalog
from vulncat.core import AssemblyLine
from vulncat.exceptions import AssemblyLineError
from vulncat.report import RenderTarget, generate, generate_many, load_report_blueprint
from vulncat.report.pipeline import document_dump_path
from vulncat.serialization import blueprint_from_dict, blueprint_from_yaml, blueprint_to_dict

from .strategies import REGISTRY


async def _count(load):
    load["count"] = load.get("count", 0) + 1
    return "MORE" if load["count"] < 3 else "DONE"


async def _explode(load):
    raise RuntimeError("boom")


async def _recover(load, exception, traceback_str):
    load["error"] = str(exception)
    load["traceback"] = traceback_str
    return "RECOVERED"


def _loop_blueprint() -> Blueprint:
    blueprint = Blueprint().add_station("count", func=_count, transitions={"MORE": "count"}, finish_on=["DONE"])
    blueprint.set_entry_station("count")
    return blueprint


def test_report_blueprint_shape() -> None:
    blueprint = load_report_blueprint()
    assert blueprint.entry_station == "validate"
    assert blueprint.global_error_station is None
    assert list(blueprint.stations) == ["validate", "build", "render", "write"]
    assert blueprint.reachable() == {"validate", "build", "render", "write"}
    assert blueprint.get_station_config("validate").finish_on == ["INVALID"]


def test_blueprint_yaml_round_trip(tmp_path) -> None:
    blueprint = load_report_blueprint()
    path = tmp_path / "line.yaml"
    path.write_text(yaml.safe_dump(blueprint_to_dict(blueprint), sort_keys=False), encoding="utf-8")
    assert blueprint_to_dict(blueprint_from_yaml(path)) == blueprint_to_dict(blueprint)


def test_blueprint_from_dict_requires_an_entry_station() -> None:
    data = blueprint_to_dict(load_report_blueprint())
    del data["entry_station"]
    with pytest.raises(ValueError):
        blueprint_from_dict(data)


def test_blueprint_check_finds_dangling_transitions() -> None:
    blueprint = Blueprint().add_station("a", func=_count, transitions={"MORE": "b"})
    blueprint.set_entry_station("a")
    with pytest.raises(ValueError, match="undefined station 'b'"):
        blueprint.check()


def test_blueprint_rules() -> None:
    blueprint = _loop_blueprint()
    with pytest.raises(ValueError):
        blueprint.add_station("count", func=_count)
    blueprint.add_station("count", func=_explode, overwrite=True)
    with pytest.raises(ValueError):
        blueprint.set_entry_station("absent")
    with pytest.raises(KeyError):
        blueprint.get_station_config("absent")
    with pytest.raises(ValueError):
        Blueprint().entry_station
    with pytest.raises(ValueError):
        StationConfig(name="empty")


def test_station_dotted_path() -> None:
    config = StationConfig(name="count", func=_count)
    assert config.dotted_path == f"{__name__}._count"
    assert config.to_dict()["function"] == f"{__name__}._count"


def test_line_follows_transitions() -> None:
    load = asyncio.run(AssemblyLine(_loop_blueprint()).run_one_load_async())
    assert load["count"] == 3
    assert load["station_outputs"] == {"count": "DONE"}


def test_station_error_goes_to_its_error_station() -> None:
    blueprint = Blueprint()
    blueprint.add_station("explode", func=_explode, on_error="recover")
    blueprint.add_station("recover", func=_recover, finish_on=["RECOVERED"])
    blueprint.set_entry_station("explode")
    load = asyncio.run(AssemblyLine(blueprint).run_one_load_async({}))
    assert load["error"] == "boom"
    assert "RuntimeError" in load["traceback"]
    assert load["station_outputs"] == {"recover": "RECOVERED"}


def test_global_error_station() -> None:
    blueprint = Blueprint()
    blueprint.add_station("explode", func=_explode)
    blueprint.add_station("recover", func=_recover)
    blueprint.set_entry_station("explode")
    blueprint.set_global_error_station("recover")
    assert asyncio.run(AssemblyLine(blueprint).run_one_load_async())["error"] == "boom"


def test_unhandled_error_is_chained(captured_logs) -> None:
    blueprint = Blueprint().add_station("explode", func=_explode)
    blueprint.set_entry_station("explode")
    with pytest.raises(AssemblyLineError) as info:
        asyncio.run(AssemblyLine(blueprint).run_one_load_async())
    assert isinstance(info.value.__cause__, RuntimeError)
    assert any(e["event"] == "station_failed" and e["station"] == "explode" for e in captured_logs)


def test_many_loads_keep_their_order() -> None:
    loads = [{"count": 0, "tag": i} for i in range(5)]
    finished = asyncio.run(AssemblyLine(_loop_blueprint()).run_many_loads_async(loads))
    assert [load["tag"] for load in finished] == list(range(5))


def test_generate_markdown(corpus, tmp_path) -> None:
    result = generate(corpus, "md", tmp_path / "catalog.md")
    assert result.ok
    assert result.target is RenderTarget.MARKDOWN
    text = result.path.read_text(encoding="utf-8")
    assert text.startswith("# OSGi Vulnerability Pattern Catalog\n")
    assert result.document_path is None
    again = generate(corpus, RenderTarget.MARKDOWN, tmp_path / "again.md")
    assert again.path.read_bytes() == result.path.read_bytes()


def test_generate_dumps_the_document(corpus, tmp_path) -> None:
    result = generate(corpus, "tex", tmp_path / "catalog.tex", dump_document=True)
    assert result.document_path == document_dump_path(tmp_path / "catalog.tex") == tmp_path / "catalog.report.json"
    dump = json.loads(result.document_path.read_text(encoding="utf-8"))
    assert dump["title"] == "OSGi Vulnerability Pattern Catalog"
    assert dump["sections"][-1]["heading"] == "Analysis"


def test_generate_stops_at_the_gate(corpus, tmp_path) -> None:
    broken = corpus.get("mb.java.5")
    broken = broken.model_copy(
        update={"implementation": broken.implementation.model_copy(update={"test_coverage": 101})}
    )
    catalog = Catalog.from_patterns([broken if p.identifier.text == "mb.java.5" else p for p in corpus], REGISTRY)
    result = generate(catalog, "md", tmp_path / "catalog.md")
    assert not result.ok
    assert [d.entry for d in result.diagnostics if d.is_error] == ["mb.java.5"]
    assert list(tmp_path.iterdir()) == []


def test_write_failure_raises(corpus, tmp_path) -> None:
    with pytest.raises(AssemblyLineError) as info:
        generate(corpus, "md", tmp_path / "missing" / "catalog.md")
    assert isinstance(info.value.__cause__, OSError)


def test_generate_many(corpus, tmp_path) -> None:
    results = generate_many(corpus, ["md", "tex"], tmp_path / "catalog")
    assert [r.target for r in results] == [RenderTarget.MARKDOWN, RenderTarget.LATEX]
    assert [r.path.name for r in results] == ["catalog.md", "catalog.tex"]
    single = generate(corpus, "tex", tmp_path / "single.tex")
    assert results[1].path.read_text(encoding="utf-8") == single.path.read_text(encoding="utf-8")
