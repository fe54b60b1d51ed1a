from pathlib import Path

import pytest
from pydantic import ValidationError

from vulncat.config import EXTENSIONS_ENV_VAR, VulncatSettings, reference_corpus_dir
from vulncat.taxonomy import Dimension, TaxonomyStatus


def test_reference_corpus_is_packaged() -> None:
    directory = reference_corpus_dir()
    assert directory.is_dir()
    assert len(list(directory.glob("*.vuln"))) == 32


def test_defaults() -> None:
    settings = VulncatSettings.from_env({})
    assert settings.extensions_path is None
    assert not settings.strict
    assert settings.catalog_dir == reference_corpus_dir()


def test_extensions_path_from_the_environment() -> None:
    assert VulncatSettings.from_env({EXTENSIONS_ENV_VAR: "site.txt"}).extensions_path == Path("site.txt")
    assert VulncatSettings.from_env({EXTENSIONS_ENV_VAR: "  "}).extensions_path is None


def test_settings_are_frozen() -> None:
    with pytest.raises(ValidationError):
        VulncatSettings().strict = True


def test_registry_includes_user_extensions(tmp_path) -> None:
    path = tmp_path / "site.txt"
    path.write_text("platform: Apache Karaf\n", encoding="utf-8")
    registry = VulncatSettings(extensions_path=path).registry()
    assert registry.frozen
    assert registry.lookup(Dimension.PLATFORM, "Apache Karaf") is TaxonomyStatus.EXTENSION
