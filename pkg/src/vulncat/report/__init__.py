from .builder import (
    DEFAULT_DIMENSIONS,
    ReportOptions,
    build_report_document,
    catalog_part,
    entry_section,
    gate_diagnostics,
)
from .document import BulletList, ListItem, Paragraph, ReportDocument, Section, Table
from .pipeline import ReportResult, generate, generate_many, load_report_blueprint
from .render import RenderTarget, escape_latex, escape_markdown, render

__all__ = [
    "DEFAULT_DIMENSIONS",
    "BulletList",
    "ListItem",
    "Paragraph",
    "RenderTarget",
    "ReportDocument",
    "ReportOptions",
    "ReportResult",
    "Section",
    "Table",
    "build_report_document",
    "catalog_part",
    "entry_section",
    "escape_latex",
    "escape_markdown",
    "gate_diagnostics",
    "generate",
    "generate_many",
    "load_report_blueprint",
    "render",
]
