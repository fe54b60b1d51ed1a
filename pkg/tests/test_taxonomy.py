import string

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from vulncat.exceptions import ExtensionsFileError, FrozenRegistryError, RedundantExtensionError
from vulncat.taxonomy import (
    BASE_VALUES,
    Dimension,
    TaxonomyRegistry,
    TaxonomyStatus,
    base_values,
    default_registry,
    load_extensions,
    match_key,
    parse_extensions,
    suggest,
)


def test_every_dimension_has_a_base_vocabulary() -> None:
    assert set(BASE_VALUES) == set(Dimension)
    assert all(BASE_VALUES[dim] for dim in Dimension)


def test_base_values_keep_grammar_order() -> None:
    assert base_values(Dimension.EXPLOIT_TIME) == ["Download", "Installation", "Bundle Start", "Execution"]
    assert base_values(Dimension.CONSEQUENCE_TYPE) == [
        "Unavailability",
        "Performance Breakdown",
        "Undue Access",
    ]


def test_lookup_base_value() -> None:
    registry = TaxonomyRegistry()
    assert registry.lookup(Dimension.EXPLOIT_TIME, "Bundle Start") is TaxonomyStatus.BASE
    assert registry.lookup(Dimension.TARGET, "Platform") is TaxonomyStatus.BASE


def test_lookup_normalizes_whitespace_and_first_letter() -> None:
    registry = TaxonomyRegistry()
    assert registry.lookup(Dimension.EXPLOIT_TIME, "  bundle   Start ") is TaxonomyStatus.BASE
    assert registry.canonical(Dimension.EXPLOIT_TIME, "bundle Start") == "Bundle Start"


def test_lookup_stays_case_sensitive_after_first_letter() -> None:
    registry = TaxonomyRegistry()
    assert registry.lookup(Dimension.EXPLOIT_TIME, "Bundle start") is TaxonomyStatus.UNKNOWN


def test_lookup_is_per_dimension() -> None:
    registry = TaxonomyRegistry()
    assert registry.lookup(Dimension.INTRODUCTION_TIME, "Download") is TaxonomyStatus.UNKNOWN
    assert registry.lookup(Dimension.EXPLOIT_TIME, "Download") is TaxonomyStatus.BASE


def test_empty_text_is_unknown() -> None:
    assert TaxonomyRegistry().lookup(Dimension.PLATFORM, "   ") is TaxonomyStatus.UNKNOWN


def test_register_extension() -> None:
    registry = TaxonomyRegistry()
    assert registry.lookup(Dimension.PLATFORM, "Concierge") is TaxonomyStatus.UNKNOWN
    registry.register_extension(Dimension.PLATFORM, "Concierge")
    assert registry.lookup(Dimension.PLATFORM, "Concierge") is TaxonomyStatus.EXTENSION
    assert registry.extensions(Dimension.PLATFORM) == ["Concierge"]
    assert registry.values(Dimension.PLATFORM)[-1] == "Concierge"


def test_register_extension_is_idempotent() -> None:
    registry = TaxonomyRegistry()
    registry.register_extension(Dimension.PLATFORM, "Concierge")
    registry.register_extension(Dimension.PLATFORM, " Concierge ")
    assert registry.extensions(Dimension.PLATFORM) == ["Concierge"]


def test_extensions_are_per_dimension() -> None:
    registry = TaxonomyRegistry().register_extension(Dimension.PLATFORM, "Concierge")
    assert registry.lookup(Dimension.TARGET, "Concierge") is TaxonomyStatus.UNKNOWN


def test_registering_a_base_value_fails() -> None:
    registry = TaxonomyRegistry()
    with pytest.raises(RedundantExtensionError):
        registry.register_extension(Dimension.PLATFORM, "Felix")


def test_frozen_registry_rejects_extensions() -> None:
    registry = TaxonomyRegistry().freeze()
    assert registry.frozen
    with pytest.raises(FrozenRegistryError):
        registry.register_extension(Dimension.PLATFORM, "Concierge")


@given(st.sampled_from(list(Dimension)), st.text(alphabet=string.ascii_letters + " ", min_size=1, max_size=16))
def test_extensions_stay_in_their_registry(dimension, text) -> None:
    assume(text.strip())
    assume(default_registry().lookup(dimension, text) is TaxonomyStatus.UNKNOWN)
    registry = TaxonomyRegistry().register_extension(dimension, text)
    assert registry.lookup(dimension, text) is TaxonomyStatus.EXTENSION
    assert TaxonomyRegistry().lookup(dimension, text) is TaxonomyStatus.UNKNOWN
    assert default_registry().lookup(dimension, text) is TaxonomyStatus.UNKNOWN
    for other in (TaxonomyRegistry(), default_registry()):
        assert other.values(dimension)[: len(base_values(dimension))] == base_values(dimension)


def test_default_registry_holds_the_shipped_set() -> None:
    registry = default_registry()
    assert registry.frozen
    for dimension, value in [
        (Dimension.PLATFORM, "Concierge"),
        (Dimension.PLATFORM, "SFelix"),
        (Dimension.POTENTIAL_MECHANISM, "OSGi Platform Modification - Bundle Uninstall Process"),
        (Dimension.ATTACK_PREVENTION, "Stop the ill-behaving thread"),
    ]:
        assert registry.lookup(dimension, value) is TaxonomyStatus.EXTENSION
        assert registry.is_shipped(dimension, value)


def test_user_extensions_load_on_top_of_the_shipped_set(tmp_path) -> None:
    path = tmp_path / "ext.txt"
    path.write_text("# site values\n\nplatform: Apache Karaf\nreaction: Notify the operator\n", encoding="utf-8")
    registry = default_registry(path)
    assert registry.lookup(Dimension.PLATFORM, "Apache Karaf") is TaxonomyStatus.EXTENSION
    assert not registry.is_shipped(Dimension.PLATFORM, "Apache Karaf")
    assert registry.is_shipped(Dimension.PLATFORM, "SFelix")
    assert registry.lookup(Dimension.REACTION, "Notify the operator") is TaxonomyStatus.EXTENSION


@pytest.mark.parametrize(
    "text",
    [
        "platform Apache Karaf",
        "platforms: Apache Karaf",
        "platform: Felix",
        "platform:   ",
    ],
)
def test_malformed_extension_lines(text) -> None:
    with pytest.raises(ExtensionsFileError):
        parse_extensions(text, TaxonomyRegistry(), origin="ext.txt")


def test_missing_extensions_file(tmp_path) -> None:
    with pytest.raises(ExtensionsFileError):
        load_extensions(tmp_path / "absent.txt", TaxonomyRegistry())


def test_resolve() -> None:
    value = default_registry().resolve(Dimension.PLATFORM, "sFelix")
    assert value.text == "SFelix"
    assert value.status is TaxonomyStatus.EXTENSION
    assert value.dimension is Dimension.PLATFORM


def test_suggest_near_miss() -> None:
    registry = TaxonomyRegistry()
    assert suggest(registry, Dimension.EXPLOIT_TIME, "Bundle Strat") == "Bundle Start"
    assert registry.suggest(Dimension.PLATFORM, "Felx") == "Felix"


def test_suggest_nothing_when_far() -> None:
    assert suggest(TaxonomyRegistry(), Dimension.EXPLOIT_TIME, "Lunch Time") is None


def test_match_key() -> None:
    assert match_key("  bundle\tStart ") == "bundle Start"
