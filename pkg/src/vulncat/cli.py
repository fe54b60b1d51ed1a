"""
Command-line interface: validate, lint, stats, matrix, report, show and
query over a catalog directory.

Exit codes: 0 success, 1 Error diagnostics (or Warnings under --strict),
2 usage or I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Iterable, Sequence

import structlog
from rich.console import Console

from . import __version__
from .analysis import (
    format_histogram,
    format_matrix,
    format_table,
    histogram,
    matrix_to_csv,
    platform_matrix,
)
from .catalog import Catalog, lint, load_catalog
from .config import VulncatSettings
from .diagnostics import Code, Diagnostic, Severity, count_by_severity, has_errors, merge_diagnostics
from .exceptions import (
    AssemblyLineError,
    CatalogLoadError,
    EntryNotFoundError,
    ExtensionsFileError,
    UnknownTaxonomyValueError,
)
from .parser import serialize_entry
from .report import RenderTarget, generate
from .serialization import dump_json
from .taxonomy import Dimension, TaxonomyStatus

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2

DEFAULT_REPORT_STEM = "vulncat-report"


def configure_logging(verbose: bool = False) -> None:
    """
    Route structlog to stderr, WARNING and up unless verbose.
    """
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.dev.ConsoleRenderer(colors=False),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            logging.DEBUG if verbose else logging.WARNING
        ),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


def _console(stderr: bool = False) -> Console:
    return Console(
        stderr=stderr, highlight=False, emoji=False, markup=False, soft_wrap=True
    )


# ---------------------------------------------------------------------------
# Query
# ---------------------------------------------------------------------------


def query(catalog: Catalog, filters: Iterable[tuple[Dimension, str]]) -> list[str]:
    """
    Identifiers of the entries matching every `(dimension, value)` filter.

    Values are matched in their registry spelling against the entry's values
    in that dimension.

    Returns
    -------
    list[str]
        In identifier order.

    Raises
    ------
    UnknownTaxonomyValueError
        If a value is in neither the Base vocabulary nor the registered
        extensions of its dimension.
    """
    resolved: list[tuple[Dimension, str]] = []
    for dimension, value in filters:
        found = catalog.registry.resolve(dimension, value)
        if found.status is TaxonomyStatus.UNKNOWN:
            diagnostic = Diagnostic(
                Code.TAXONOMY_UNKNOWN,
                f"'{value}' is not a {found.dimension} value",
                entry="<query>",
                field=str(found.dimension),
                suggestion=catalog.registry.suggest(found.dimension, value),
            )
            raise UnknownTaxonomyValueError(diagnostic.message, [diagnostic])
        resolved.append((found.dimension, found.text))
    return [
        key
        for key, pattern in catalog.entries.items()
        if all(value in pattern.values_in(dimension) for dimension, value in resolved)
    ]


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _dimension(text: str) -> Dimension:
    try:
        return Dimension(text.strip().lower())
    except ValueError as exc:
        choices = ", ".join(d.value for d in Dimension)
        raise argparse.ArgumentTypeError(
            f"unknown dimension '{text}' (choose from {choices})"
        ) from exc


def _where(text: str) -> tuple[Dimension, str]:
    dimension, sep, value = text.partition("=")
    if not sep or not value.strip():
        raise argparse.ArgumentTypeError(f"expected DIMENSION=VALUE, got '{text}'")
    return _dimension(dimension), value.strip()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--extensions",
        type=Path,
        default=None,
        help="taxonomy extensions file (default: $VULNCAT_EXTENSIONS)",
    )
    common.add_argument("--strict", action="store_true", help="warnings fail the run")
    common.add_argument("--verbose", action="store_true", help="debug logging on stderr")

    def catalog_dir(sub: argparse.ArgumentParser) -> None:
        sub.add_argument(
            "catalog_dir",
            nargs="?",
            type=Path,
            default=None,
            metavar="CATALOG_DIR",
            help="directory of .vuln files (default: the packaged reference corpus)",
        )

    parser = argparse.ArgumentParser(
        prog="vulncat",
        description="Validate, lint, analyze and render vulnerability pattern catalogs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sub = subparsers.add_parser("validate", parents=[common], help="parse and validate every entry")
    catalog_dir(sub)

    sub = subparsers.add_parser("lint", parents=[common], help="validate plus cross-entry checks")
    catalog_dir(sub)
    sub.add_argument("--show-info", action="store_true", help="also print Info diagnostics")

    sub = subparsers.add_parser("stats", parents=[common], help="per-dimension histograms")
    catalog_dir(sub)
    sub.add_argument("--by", type=_dimension, default=None, metavar="DIMENSION")
    sub.add_argument("--include-zero", action="store_true", help="list unused vocabulary values")
    sub.add_argument("--format", choices=("table", "json"), default="table")

    sub = subparsers.add_parser("matrix", parents=[common], help="vulnerability by platform matrix")
    catalog_dir(sub)
    sub.add_argument("--format", choices=("table", "json", "csv"), default="table")
    sub.add_argument(
        "--java-permissions",
        action="store_true",
        help="add the 'Any with Java Permissions' column",
    )

    sub = subparsers.add_parser("report", parents=[common], help="render the catalog report")
    catalog_dir(sub)
    sub.add_argument("-o", "--output", type=Path, default=None, metavar="PATH")
    sub.add_argument(
        "--target", choices=[t.value for t in RenderTarget], default=RenderTarget.MARKDOWN.value
    )
    sub.add_argument(
        "--dump-document",
        action="store_true",
        help="also write the document model to <stem>.report.json",
    )

    sub = subparsers.add_parser("show", parents=[common], help="print one entry")
    sub.add_argument("key", metavar="KEY", help="identifier (mb.osgi.4) or entry name")
    catalog_dir(sub)

    sub = subparsers.add_parser("query", parents=[common], help="entries matching dimension values")
    catalog_dir(sub)
    sub.add_argument(
        "--where",
        type=_where,
        action="append",
        required=True,
        metavar="DIMENSION=VALUE",
        help="repeatable; all filters must match",
    )
    sub.add_argument("--format", choices=("table", "json"), default="table")
    return parser


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


class _Run:
    """
    One invocation: resolved settings, the loaded catalog and both streams.
    """

    def __init__(self, args: argparse.Namespace) -> None:
        self.args = args
        update = {"strict": args.strict, "verbose": args.verbose}
        if args.extensions is not None:
            update["extensions_path"] = args.extensions
        if args.catalog_dir is not None:
            update["catalog_dir"] = args.catalog_dir
        self.settings = VulncatSettings.from_env().model_copy(update=update)
        self.out = _console()
        self.err = _console(stderr=True)

    def load(self) -> Catalog:
        return load_catalog(self.settings.catalog_dir, self.settings.registry())

    def emit(self, diagnostics: Iterable[Diagnostic], *, show_info: bool = False) -> None:
        for diagnostic in diagnostics:
            if diagnostic.severity is Severity.INFO and not show_info:
                continue
            self.err.print(diagnostic.format())

    def write(self, text: str) -> None:
        self.out.print(text, end="" if text.endswith("\n") else "\n")

    def exit_code(self, diagnostics: Iterable[Diagnostic]) -> int:
        diagnostics = list(diagnostics)
        if has_errors(diagnostics):
            return EXIT_FINDINGS
        if self.settings.strict and any(d.severity is Severity.WARNING for d in diagnostics):
            return EXIT_FINDINGS
        return EXIT_OK


def cmd_validate(run: _Run) -> int:
    catalog = run.load()
    diagnostics = catalog.load_diagnostics
    run.emit(diagnostics)
    counts = count_by_severity(diagnostics)
    run.write(f"{len(catalog)} entries, {counts[Severity.ERROR]} errors")
    return run.exit_code(diagnostics)


def cmd_lint(run: _Run) -> int:
    catalog = run.load()
    diagnostics = merge_diagnostics(catalog.load_diagnostics, lint(catalog))
    run.emit(diagnostics, show_info=run.args.show_info)
    return run.exit_code(diagnostics)


def cmd_stats(run: _Run) -> int:
    catalog = run.load()
    run.emit(catalog.load_diagnostics)
    dimensions = [run.args.by] if run.args.by else list(Dimension)
    histograms = [
        histogram(catalog, dim, include_zero=run.args.include_zero) for dim in dimensions
    ]
    if run.args.format == "json":
        run.write(dump_json({str(h.dimension): h.as_dict() for h in histograms}))
    else:
        run.write("\n".join(format_histogram(h) for h in histograms))
    return run.exit_code(catalog.load_diagnostics)


def cmd_matrix(run: _Run) -> int:
    catalog = run.load()
    run.emit(catalog.load_diagnostics)
    matrix = platform_matrix(catalog, with_java_permissions=run.args.java_permissions)
    match run.args.format:
        case "csv":
            run.write(matrix_to_csv(matrix))
        case "json":
            run.write(dump_json(matrix))
        case _:
            run.write(format_matrix(matrix))
    return run.exit_code(catalog.load_diagnostics)


def cmd_report(run: _Run) -> int:
    catalog = run.load()
    target = RenderTarget(run.args.target)
    output = run.args.output or Path(DEFAULT_REPORT_STEM + target.suffix)
    result = generate(catalog, target, output, dump_document=run.args.dump_document)
    run.emit(result.diagnostics)
    if not result.ok:
        run.err.print("error: the catalog has errors; no report written")
        return EXIT_FINDINGS
    run.write(f"wrote {result.path}")
    if result.document_path is not None:
        run.write(f"wrote {result.document_path}")
    return run.exit_code(result.diagnostics)


def cmd_show(run: _Run) -> int:
    catalog = run.load()
    run.emit(catalog.load_diagnostics)
    pattern = catalog.get(run.args.key)
    run.write(serialize_entry(pattern).raw)
    return run.exit_code(catalog.load_diagnostics)


def cmd_query(run: _Run) -> int:
    catalog = run.load()
    run.emit(catalog.load_diagnostics)
    matches = query(catalog, run.args.where)
    if run.args.format == "json":
        run.write(dump_json(matches))
    elif matches:
        run.write(format_table(("identifier", "name"), ((k, catalog.entries[k].name) for k in matches)))
    return run.exit_code(catalog.load_diagnostics)


COMMANDS = {
    "validate": cmd_validate,
    "lint": cmd_lint,
    "stats": cmd_stats,
    "matrix": cmd_matrix,
    "report": cmd_report,
    "show": cmd_show,
    "query": cmd_query,
}


def main(argv: Sequence[str] | None = None) -> int:
    """
    Entry point of the `vulncat` console script.

    Returns
    -------
    int
        The process exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    configure_logging(args.verbose)
    run = _Run(args)
    try:
        return COMMANDS[args.command](run)
    except UnknownTaxonomyValueError as exc:
        run.emit(exc.diagnostics)
        return EXIT_USAGE
    except EntryNotFoundError as exc:
        run.err.print(f"error: {exc.args[0]}")
        return EXIT_USAGE
    except (CatalogLoadError, ExtensionsFileError, AssemblyLineError) as exc:
        logger.debug("command_failed", command=args.command, error=repr(exc))
        run.err.print(f"error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
