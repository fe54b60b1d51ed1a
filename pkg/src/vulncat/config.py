from __future__ import annotations

import os
from importlib import resources
from pathlib import Path
from typing import Mapping

from pydantic import BaseModel, ConfigDict, Field

from .taxonomy import TaxonomyRegistry, default_registry

EXTENSIONS_ENV_VAR = "VULNCAT_EXTENSIONS"


def reference_corpus_dir() -> Path:
    """
    Directory of the packaged reference catalog.
    """
    return Path(str(resources.files("vulncat.data") / "osgi_catalog"))


class VulncatSettings(BaseModel):
    """
    Resolved run configuration.

    Attributes
    ----------
    extensions_path : Path | None
        User extensions file, added on top of the shipped extension set.
    strict : bool
        Warnings count as failures.
    catalog_dir : Path
        The catalog directory to load. Defaults to the reference corpus.
    verbose : bool
        Debug logging.
    """

    model_config = ConfigDict(frozen=True)

    extensions_path: Path | None = None
    strict: bool = False
    catalog_dir: Path = Field(default_factory=reference_corpus_dir)
    verbose: bool = False

    @classmethod
    def from_env(cls, environ: Mapping[str, str] | None = None) -> VulncatSettings:
        """
        Settings with `extensions_path` taken from VULNCAT_EXTENSIONS when set.
        """
        environ = os.environ if environ is None else environ
        value = environ.get(EXTENSIONS_ENV_VAR, "").strip()
        return cls(extensions_path=Path(value) if value else None)

    def registry(self) -> TaxonomyRegistry:
        """
        The frozen registry for these settings.

        Raises
        ------
        ExtensionsFileError
            If the extensions file is unreadable or malformed.
        """
        return default_registry(self.extensions_path)
