"""
The report assembly line: validate, build, render, write.

Stations are wired by the packaged `pipeline.yaml` blueprint. A load is a
dict carrying the catalog, the options and the output path in, and the
diagnostics, document, text and written paths out.
"""

from __future__ import annotations

import asyncio
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

import structlog

from ..blueprint import Blueprint
from ..catalog import Catalog
from ..core import AssemblyLine
from ..diagnostics import Diagnostic, has_errors
from ..serialization import blueprint_from_yaml, write_json
from .builder import ReportOptions, build_report_document, gate_diagnostics
from .render import RenderTarget, render

logger = structlog.get_logger(__name__)

BLUEPRINT_RESOURCE = "pipeline.yaml"
DOCUMENT_DUMP_SUFFIX = ".report.json"


@dataclass
class ReportResult:
    """
    Attributes
    ----------
    target : RenderTarget
    diagnostics : list[Diagnostic]
        Everything the validation station found, sorted.
    path : Path | None
        The written report, None when the gate stopped the line.
    document_path : Path | None
        The JSON dump of the document model, when requested.
    """

    target: RenderTarget
    diagnostics: list[Diagnostic] = field(default_factory=list)
    path: Path | None = None
    document_path: Path | None = None

    @property
    def ok(self) -> bool:
        return self.path is not None


def load_report_blueprint() -> Blueprint:
    return blueprint_from_yaml(resources.files("vulncat.report") / BLUEPRINT_RESOURCE)


def document_dump_path(path: Path) -> Path:
    """
    `<stem>.report.json` next to the report file.
    """
    return path.with_name(path.stem + DOCUMENT_DUMP_SUFFIX)


async def validate_station(load: dict[str, Any]) -> str:
    diagnostics = gate_diagnostics(load["catalog"])
    load["diagnostics"] = diagnostics
    if has_errors(diagnostics):
        logger.info("report_gate_closed", errors=sum(d.is_error for d in diagnostics))
        return "INVALID"
    return "VALID"


async def build_station(load: dict[str, Any]) -> str:
    load["document"] = build_report_document(load["catalog"], load.get("options"))
    return "BUILT"


async def render_station(load: dict[str, Any]) -> str:
    load["text"] = render(load["document"], load["target"])
    return "RENDERED"


async def write_station(load: dict[str, Any]) -> str:
    path = Path(load["output_path"])
    path.write_text(load["text"], encoding="utf-8")
    load["path"] = path
    if load.get("dump_document"):
        load["document_path"] = write_json(load["document"], document_dump_path(path))
    logger.debug("report_written", path=str(path), target=str(load["target"]))
    return "WRITTEN"


def _initial_load(
    catalog: Catalog,
    target: RenderTarget | str,
    output_path: Path,
    options: ReportOptions | None,
    dump_document: bool,
) -> dict[str, Any]:
    return {
        "catalog": catalog,
        "target": RenderTarget(target),
        "output_path": Path(output_path),
        "options": options or ReportOptions(),
        "dump_document": dump_document,
    }


def _result(load: dict[str, Any]) -> ReportResult:
    return ReportResult(
        target=load["target"],
        diagnostics=load.get("diagnostics", []),
        path=load.get("path"),
        document_path=load.get("document_path"),
    )


async def generate_async(
    catalog: Catalog,
    target: RenderTarget | str,
    output_path: Path,
    *,
    options: ReportOptions | None = None,
    dump_document: bool = False,
) -> ReportResult:
    line = AssemblyLine(load_report_blueprint())
    load = await line.run_one_load_async(
        _initial_load(catalog, target, output_path, options, dump_document)
    )
    return _result(load)


def generate(
    catalog: Catalog,
    target: RenderTarget | str,
    output_path: Path,
    *,
    options: ReportOptions | None = None,
    dump_document: bool = False,
) -> ReportResult:
    """
    Run the full report line for one target.

    Parameters
    ----------
    catalog : Catalog
    target : RenderTarget | str
    output_path : Path
        The report file. Its directory must exist.
    options : ReportOptions | None
    dump_document : bool
        Also write the document model as JSON to `<stem>.report.json`.

    Returns
    -------
    ReportResult
        With `path` None and the blocking diagnostics when validation finds
        errors. Nothing is written in that case.

    Raises
    ------
    AssemblyLineError
        If a station fails, for instance on a write error. The original
        exception is chained.
    """
    return asyncio.run(
        generate_async(
            catalog, target, output_path, options=options, dump_document=dump_document
        )
    )


def generate_many(
    catalog: Catalog,
    targets: Iterable[RenderTarget | str],
    stem: Path,
    *,
    options: ReportOptions | None = None,
    dump_document: bool = False,
) -> list[ReportResult]:
    """
    Render several targets of one catalog concurrently.

    Each target is written to `stem` with the target's suffix, e.g.
    `report.md` and `report.tex` for `stem=report`. Results follow the order
    of `targets`.
    """
    stem = Path(stem)
    loads = [
        _initial_load(
            catalog,
            target,
            stem.with_name(stem.name + RenderTarget(target).suffix),
            options,
            dump_document,
        )
        for target in targets
    ]
    line = AssemblyLine(load_report_blueprint())
    finished = asyncio.run(line.run_many_loads_async(loads))
    return [_result(load) for load in finished]
