"""Access to the demo data shipped inside the package.

Four domains come bundled: a vehicle trip logger, an airline flight
search, a hotel booking screen, and a flight-information form whose 83
text fields are simulated from its slot schema. Each domain has a screen
annotation, a slot schema, and a seeded synthetic corpus; the flight
form additionally has a held-out test file standing in for an official
split.
"""

from __future__ import annotations

from importlib.resources import as_file, files

from .backends import OracleBackend, load_oracle
from .conversion import AnnotatedUtterance, SlotSchema, load_bio_corpus, load_schema
from .harness import DomainData
from .questions import QuestionRules, load_overrides
from .screens import Screen, load_screen

DOMAINS = ("atis_visual", "trip_advisor", "united", "vehicle_logger")

# Extra screens in the distractor pool beyond the four domain screens.
_EXTRA_SCREENS = ("trip_advisor_restaurant",)


def _data_file(relpath: str):
    return as_file(files("slotqa.data").joinpath(relpath))


def _check_domain(domain: str) -> str:
    if domain not in DOMAINS:
        raise ValueError(f"unknown bundled domain {domain!r}; expected one of {DOMAINS}")
    return domain


def bundled_schema(domain: str) -> SlotSchema:
    with _data_file(f"schemas/{_check_domain(domain)}.tsv") as path:
        return load_schema(path)


def bundled_corpus(name: str) -> list[AnnotatedUtterance]:
    """Load a bundled CoNLL corpus by basename (domain names plus
    `atis_visual_test` and `atis_sample_50`)."""
    with _data_file(f"corpora/{name}.conll") as path:
        return load_bio_corpus(path)


def bundled_screen(name: str) -> Screen:
    with _data_file(f"screens/{name}.screen") as path:
        return load_screen(path)


def bundled_screen_pool() -> list[Screen]:
    """Every bundled screen, domain screens first."""
    return [bundled_screen(name) for name in DOMAINS + _EXTRA_SCREENS]


def bundled_overrides() -> QuestionRules:
    """Question rules extended with the bundled per-element overrides."""
    with _data_file("overrides/question_overrides.tsv") as path:
        return load_overrides(path)


def bundled_demo_gold() -> OracleBackend:
    """Oracle over the demo gold answers used by the CLI examples."""
    with _data_file("gold/demo_gold.json") as path:
        return load_oracle(path)


def bundled_domain(domain: str) -> DomainData:
    """A domain's corpus, schema, and (for the flight form) held-out split."""
    _check_domain(domain)
    heldout = None
    if domain == "atis_visual":
        heldout = tuple(bundled_corpus("atis_visual_test"))
    return DomainData(
        name=domain,
        utterances=tuple(bundled_corpus(domain)),
        schema=bundled_schema(domain),
        heldout=heldout,
    )
