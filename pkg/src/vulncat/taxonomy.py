"""
Controlled vocabularies of the vulnerability pattern grammar.

Every taxonomy-typed field of a pattern draws its values from one of the
sixteen dimensions below. The grammar literals are the Base values; the
grammar is open ("it can be extended with additional attribute values"), so a
registry also holds Extension values, per dimension.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, StrEnum
from importlib import resources
from pathlib import Path
from types import MappingProxyType

import structlog

from .exceptions import (
    ExtensionsFileError,
    FrozenRegistryError,
    RedundantExtensionError,
)
from .utils import closest_match, normalize_whitespace

logger = structlog.get_logger(__name__)


class Dimension(StrEnum):
    LOCATION = "location"
    SOURCE_ENTITY = "source-entity"
    FUNCTIONALITY = "functionality"
    FLAW = "flaw"
    TARGET = "target"
    CONSEQUENCE_TYPE = "consequence-type"
    CONSEQUENCE_QUALIFIER = "consequence-qualifier"
    INTRODUCTION_TIME = "introduction-time"
    EXPLOIT_TIME = "exploit-time"
    OSGI_PROFILE = "osgi-profile"
    PLATFORM = "platform"
    EXISTING_MECHANISM = "existing-mechanism"
    ENFORCEMENT_POINT = "enforcement-point"
    POTENTIAL_MECHANISM = "potential-mechanism"
    ATTACK_PREVENTION = "attack-prevention"
    REACTION = "reaction"


class TaxonomyStatus(Enum):
    BASE = "base"
    EXTENSION = "extension"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class TaxonomyValue:
    """
    A field value resolved against a registry.
    """

    dimension: Dimension
    text: str
    status: TaxonomyStatus


# Grammar productions, fully expanded, in grammar order.
_BASE_VALUES: dict[Dimension, tuple[str, ...]] = {
    Dimension.LOCATION: (
        "Bundle Archive",
        "Bundle Manifest",
        "Bundle Activator",
        "Bundle Fragment",
        "Application Code - Native Code",
        "Application Code - Java Code",
        "Application Code - Java API",
        "Application Code - OSGi API",
    ),
    Dimension.SOURCE_ENTITY: (
        "OS",
        "JVM - Runtime API",
        "JVM - APIs",
        "OSGi Platform - Module Layer",
        "OSGi Platform - Life-Cycle Layer",
        "OSGi Platform - Service Layer",
        "OSGi Platform - Bundle Repository Client",
        "Application Code",
    ),
    Dimension.FUNCTIONALITY: (
        "Kill utility",
        "Value of Method Parameters",
        "System.exit method",
        "Runtime.halt method",
        "Native Code Execution",
        "Thread API",
        "Reflection API",
        "ClassLoader API",
        "File API",
        "Java Archive",
        "Bundle Management",
        "Bundle Fragments",
    ),
    Dimension.FLAW: (
        "No Algorithm Safety - Java",
        "No Algorithm Safety - Native Code",
        "Non OSGi R4-compliant Digital Signature Validation in the JVM",
        "No Verification of Bundle Archive Validity",
        "No Check of Size of Loaded Bundles",
        "No Check of Size of stored Data",
        "No safe Bundle Start",
        "No Removal of Uninstalled Bundle Data",
        "Bundle Meta-data Handling - No Safe-Default",
        "Uncontrolled Service Registration",
        "Architecture of the Application - No Validation of Service Dependency",
    ),
    Dimension.TARGET: (
        "Platform",
        "OSGi Element - Platform Management Utility",
        "OSGi Element - Bundle",
        "OSGi Element - Service",
        "OSGi Element - Package",
    ),
    Dimension.CONSEQUENCE_TYPE: (
        "Unavailability",
        "Performance Breakdown",
        "Undue Access",
    ),
    Dimension.CONSEQUENCE_QUALIFIER: (
        "Platform",
        "Service",
        "Package",
    ),
    Dimension.INTRODUCTION_TIME: (
        "Platform Design or Implementation",
        "Development",
        "Bundle Meta-data Generation",
        "Bundle Digital Signature",
        "Installation",
        "Service Publication or Resolution",
    ),
    Dimension.EXPLOIT_TIME: (
        "Download",
        "Installation",
        "Bundle Start",
        "Execution",
    ),
    Dimension.OSGI_PROFILE: (
        "CDC-1.0/Foundation-1.0",
        "OSGi/Minimum-1.1",
        "JRE-1.1",
        "J2SE-1.2",
        "J2SE-1.3",
        "J2SE-1.4",
        "J2SE-1.5",
        "J2SE-1.6",
        "PersonalJava-1.1",
        "PersonalJava-1.2",
        "CDC-1.0/PersonalBasis-1.0",
        "CDC-1.0/PersonalJava-1.0",
    ),
    Dimension.PLATFORM: (
        "Oscar",
        "Felix",
        "Knopflerfish",
        "Equinox",
    ),
    Dimension.EXISTING_MECHANISM: (
        "Java Permissions",
        "OSGi AdminPermission",
        "SFelix OSGi Security Layer",
    ),
    Dimension.ENFORCEMENT_POINT: (
        "Platform startup",
        "Bundle Installation",
    ),
    Dimension.POTENTIAL_MECHANISM: (
        "Code static Analysis",
        "OSGi Platform Modification - Bundle Startup Process",
        "OSGi Platform Modification - Installation Meta-data Handling",
        "OSGi Platform Modification - Service Publication",
        "Bundle size control before download",
        "Service-level dependency validation",
        "Resource Control and Isolation - CPU",
        "Resource Control and Isolation - Memory",
        "Resource Control and Isolation - Disk Space",
        "Access Control - FileSystem",
        "Miscellaneous",
    ),
    Dimension.ATTACK_PREVENTION: ("Stop a ill-behaving thread",),
    Dimension.REACTION: (
        "Uninstall the malicious bundle",
        "Erase files",
        "Stop the system process",
        "Restart the platform",
    ),
}

BASE_VALUES: MappingProxyType[Dimension, tuple[str, ...]] = MappingProxyType(
    _BASE_VALUES
)

SHIPPED_EXTENSIONS_RESOURCE = "default_extensions.txt"


def match_key(text: str) -> str:
    """
    Comparison key for vocabulary matching.

    Whitespace is normalized and the first letter case-folded; everything
    else stays case-sensitive.
    """
    text = normalize_whitespace(text)
    return text[:1].casefold() + text[1:]


def base_values(dimension: Dimension) -> list[str]:
    """
    Return the expanded grammar literals of `dimension`, in grammar order.
    """
    return list(BASE_VALUES[Dimension(dimension)])


_BASE_KEYS: dict[Dimension, dict[str, str]] = {
    dim: {match_key(v): v for v in values} for dim, values in _BASE_VALUES.items()
}


class TaxonomyRegistry:
    """
    Base vocabularies plus the extension values registered on top of them.

    Base sets are shared module constants and identical across instances.
    Extensions are per instance and per dimension. Once `freeze()` is called
    the registry is read-only and can be shared between readers.
    """

    def __init__(self) -> None:
        self._extensions: dict[Dimension, dict[str, str]] = {
            dim: {} for dim in Dimension
        }
        self._shipped: set[tuple[Dimension, str]] = set()
        self._frozen = False

    def lookup(self, dimension: Dimension, text: str) -> TaxonomyStatus:
        """
        Classify `text` within `dimension`.

        Parameters
        ----------
        dimension : Dimension
        text : str
            A field value. Whitespace is normalized before matching.

        Returns
        -------
        TaxonomyStatus
            BASE for a grammar literal, EXTENSION for a registered value,
            UNKNOWN otherwise (including the empty string).
        """
        key = match_key(text)
        if not key:
            return TaxonomyStatus.UNKNOWN
        if key in _BASE_KEYS[dimension]:
            return TaxonomyStatus.BASE
        if key in self._extensions[dimension]:
            return TaxonomyStatus.EXTENSION
        return TaxonomyStatus.UNKNOWN

    def resolve(self, dimension: Dimension, text: str) -> TaxonomyValue:
        """
        Lookup plus canonical spelling, as one value.
        """
        return TaxonomyValue(
            Dimension(dimension),
            self.canonical(dimension, text),
            self.lookup(dimension, text),
        )

    def canonical(self, dimension: Dimension, text: str) -> str:
        """
        Return the registry spelling of `text`, or `text` normalized if unknown.
        """
        key = match_key(text)
        return (
            _BASE_KEYS[dimension].get(key)
            or self._extensions[dimension].get(key)
            or normalize_whitespace(text)
        )

    def register_extension(
        self, dimension: Dimension, text: str, *, shipped: bool = False
    ) -> TaxonomyRegistry:
        """
        Add `text` to the extension set of `dimension`.

        Registration is idempotent. Returns the registry itself.

        Raises
        ------
        RedundantExtensionError
            If `text` equals a Base value of `dimension`.
        FrozenRegistryError
            If the registry has been frozen.
        ValueError
            If `text` is empty after normalization.
        """
        if self._frozen:
            raise FrozenRegistryError("Registry is frozen; extensions are read-only.")
        dimension = Dimension(dimension)
        value = normalize_whitespace(text)
        if not value:
            raise ValueError(f"Empty extension value for dimension '{dimension}'.")
        key = match_key(value)
        if key in _BASE_KEYS[dimension]:
            raise RedundantExtensionError(
                f"'{value}' is already a base value of '{dimension}'."
            )
        self._extensions[dimension].setdefault(key, value)
        if shipped:
            self._shipped.add((dimension, key))
        return self

    def is_shipped(self, dimension: Dimension, text: str) -> bool:
        """
        Tell whether `text` belongs to the shipped extension set.
        """
        return (dimension, match_key(text)) in self._shipped

    def extensions(self, dimension: Dimension) -> list[str]:
        """
        Registered extension values of `dimension`, in registration order.
        """
        return list(self._extensions[dimension].values())

    def values(self, dimension: Dimension) -> list[str]:
        """
        Base values followed by extension values.
        """
        return base_values(dimension) + self.extensions(dimension)

    def suggest(self, dimension: Dimension, text: str) -> str | None:
        """
        Nearest vocabulary value within edit distance 3, if any.
        """
        return closest_match(normalize_whitespace(text), self.values(dimension))

    def freeze(self) -> TaxonomyRegistry:
        """
        Make the registry read-only. Returns the registry itself.
        """
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen


def suggest(registry: TaxonomyRegistry, dimension: Dimension, text: str) -> str | None:
    """
    Nearest value of `dimension` in `registry` within edit distance 3.
    """
    return registry.suggest(dimension, text)


def parse_extensions(
    text: str, registry: TaxonomyRegistry, *, origin: str = "<memory>", shipped: bool = False
) -> TaxonomyRegistry:
    """
    Register every `dimension: value` line of an extensions file.

    Blank lines and `#` comments are skipped. Values equal to a Base value
    are rejected, so a redundant extension fails loudly.

    Raises
    ------
    ExtensionsFileError
        For a line without a colon, with an unknown dimension, or with an
        empty or redundant value.
    """
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, sep, value = line.partition(":")
        if not sep:
            raise ExtensionsFileError(
                f"{origin}:{lineno}: expected 'dimension: value', got '{line}'"
            )
        try:
            dimension = Dimension(name.strip())
        except ValueError as exc:
            raise ExtensionsFileError(
                f"{origin}:{lineno}: unknown dimension '{name.strip()}'"
            ) from exc
        try:
            registry.register_extension(dimension, value, shipped=shipped)
        except (RedundantExtensionError, ValueError) as exc:
            raise ExtensionsFileError(f"{origin}:{lineno}: {exc}") from exc
    return registry


def load_extensions(path: Path, registry: TaxonomyRegistry) -> TaxonomyRegistry:
    """
    Read an extensions file from disk into `registry`.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ExtensionsFileError(f"Cannot read extensions file '{path}': {exc}") from exc
    parse_extensions(text, registry, origin=str(path))
    logger.debug("extensions_loaded", path=str(path))
    return registry


def shipped_extensions_text() -> str:
    return (
        resources.files("vulncat.data")
        .joinpath(SHIPPED_EXTENSIONS_RESOURCE)
        .read_text(encoding="utf-8")
    )


def default_registry(extensions_path: Path | None = None) -> TaxonomyRegistry:
    """
    Build a frozen registry holding the shipped extension set.

    Parameters
    ----------
    extensions_path : Path | None
        Optional user extensions file loaded on top of the shipped set.
    """
    registry = TaxonomyRegistry()
    parse_extensions(
        shipped_extensions_text(),
        registry,
        origin=SHIPPED_EXTENSIONS_RESOURCE,
        shipped=True,
    )
    if extensions_path is not None:
        load_extensions(extensions_path, registry)
    return registry.freeze()
