import io
import logging
import os
import shutil
from pathlib import Path

import pytest
import structlog
from hypothesis import HealthCheck, settings
from structlog.testing import capture_logs

from vulncat.catalog import Catalog, load_catalog
from vulncat.config import reference_corpus_dir
from vulncat.taxonomy import TaxonomyRegistry, default_registry

GOLDEN_DIR = Path(__file__).parent / "golden"

# VULNCAT_HYPOTHESIS_PROFILE=thorough for the long generated runs
settings.register_profile("default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("VULNCAT_HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session", autouse=True)
def quiet_structlog():
    configure_test_logging()
    yield
    structlog.reset_defaults()


def configure_test_logging() -> None:
    structlog.reset_defaults()
    structlog.configure(
        processors=[structlog.processors.add_log_level, structlog.dev.ConsoleRenderer(colors=False)],
        wrapper_class=structlog.make_filtering_bound_logger(logging.DEBUG),
        logger_factory=structlog.PrintLoggerFactory(file=io.StringIO()),
        cache_logger_on_first_use=False,
    )


@pytest.fixture
def captured_logs():
    """
    Debug-level structlog events emitted during the test.
    """
    configure_test_logging()
    with capture_logs() as logs:
        yield logs


@pytest.fixture(scope="session")
def registry() -> TaxonomyRegistry:
    return default_registry()


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return reference_corpus_dir()


@pytest.fixture(scope="session")
def corpus(corpus_dir, registry) -> Catalog:
    return load_catalog(corpus_dir, registry)


@pytest.fixture
def corpus_copy(tmp_path, corpus_dir) -> Path:
    """
    A writable copy of the reference corpus.
    """
    target = tmp_path / "catalog"
    shutil.copytree(corpus_dir, target)
    return target


@pytest.fixture
def osgi4_text(corpus_dir) -> str:
    return (corpus_dir / "mb.osgi.4.vuln").read_text(encoding="utf-8")


@pytest.fixture
def golden():
    def read(name: str) -> str:
        return (GOLDEN_DIR / name).read_text(encoding="utf-8")

    return read
