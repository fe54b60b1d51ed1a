__version__ = "0.1.0"

from .catalog import Catalog, lint, load_catalog, resolve_references
from .diagnostics import Code, Diagnostic, Severity
from .model import Identifier, VulnerabilityPattern, validate_pattern
from .parser import EntryText, parse_entry, parse_identifier, serialize_entry
from .taxonomy import Dimension, TaxonomyRegistry, TaxonomyStatus, default_registry

__all__ = [
    "Catalog",
    "Code",
    "Diagnostic",
    "Dimension",
    "EntryText",
    "Identifier",
    "Severity",
    "TaxonomyRegistry",
    "TaxonomyStatus",
    "VulnerabilityPattern",
    "default_registry",
    "lint",
    "load_catalog",
    "parse_entry",
    "parse_identifier",
    "resolve_references",
    "serialize_entry",
    "validate_pattern",
]
