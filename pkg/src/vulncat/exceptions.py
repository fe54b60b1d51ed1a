from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from vulncat.diagnostics import Diagnostic


class VulncatError(Exception):
    """
    Base class for every exception raised by vulncat.
    """


class AssemblyLineError(VulncatError):
    """
    Custom exception for AssemblyLine errors.
    """


class RedundantExtensionError(VulncatError, ValueError):
    """
    Raised when a Base taxonomy value is registered again as an extension.
    """


class FrozenRegistryError(VulncatError):
    """
    Raised when registering an extension into a frozen registry.
    """


class ExtensionsFileError(VulncatError):
    """
    Raised for a malformed line in an extensions file.
    """


class CatalogLoadError(VulncatError):
    """
    Raised when a catalog directory cannot be read at all.
    """


class EntryNotFoundError(VulncatError, KeyError):
    """
    Raised when a catalog lookup matches neither an identifier nor a name.
    """


class DiagnosticError(VulncatError):
    """
    An exception that carries the diagnostics explaining it.

    Parameters
    ----------
    message : str
        Human readable summary.
    diagnostics : list[Diagnostic]
        The findings that caused the failure.
    """

    def __init__(self, message: str, diagnostics: list[Diagnostic]) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics


class IdentifierSyntaxError(DiagnosticError, ValueError):
    """
    Raised by `parse_identifier` for anything but `mb.<src_ref>.<n>`.
    """


class UnknownTaxonomyValueError(DiagnosticError, ValueError):
    """
    Raised when a query names a value outside the dimension's vocabulary.
    """


class ReportGateError(DiagnosticError):
    """
    Raised when the validation stage of the report pipeline finds errors.
    """
