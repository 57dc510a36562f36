"""Rule engine turning GUI elements into natural-language questions.

Each element category has one template. Ablation modes either force the
text-field template onto every category (text-only) or replace question
text with opaque per-slot tag symbols (no-visuals). An optional override
table substitutes hand-written questions for specific buttons or labels.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import DuplicateSlotError, EmptyLabelError, ParseError
from .screens import CategoryKind, GuiElement, Screen, visible_elements

DEFAULT_COMMAND_VERBS = ("select", "enter", "choose", "pick", "type", "set")

TAG_SYMBOL_PREFIX = "XYZ"


class AblationMode(Enum):
    FULL = "full"
    TEXT_ONLY = "text"
    NO_VISUALS = "novis"

    @classmethod
    def parse(cls, name: str) -> "AblationMode":
        try:
            return cls(name.lower())
        except ValueError:
            raise ParseError(f"unknown ablation mode {name!r}; expected full, text or novis") from None


@dataclass(frozen=True)
class Question:
    text: str
    slot_id: str
    source_element: str | None = None
    expected_answerable: bool = True


# Override table entries are keyed by (category name, button_concept or
# exact label); templates may use {label} and {choices} placeholders.
OverrideTable = dict[tuple[str, str], str]


@dataclass(frozen=True)
class QuestionRules:
    command_verbs: tuple[str, ...] = DEFAULT_COMMAND_VERBS
    overrides: tuple[tuple[tuple[str, str], str], ...] = ()

    def override_for(self, element: GuiElement) -> str | None:
        table = dict(self.overrides)
        category = str(element.category)
        if element.button_concept is not None:
            hit = table.get((category, element.button_concept))
            if hit is not None:
                return hit
        return table.get((category, element.label))


DEFAULT_RULES = QuestionRules()


def load_overrides(path: str | Path) -> QuestionRules:
    """Read a tab-separated override table: category, key, template."""
    rows: list[tuple[tuple[str, str], str]] = []
    with open(path, encoding="utf-8", newline="") as stream:
        for lineno, row in enumerate(csv.reader(stream, delimiter="\t"), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if row[0].startswith("#"):
                continue
            if len(row) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 tab-separated fields, got {len(row)}")
            category, key, template = row
            rows.append(((category, key), template))
    return QuestionRules(overrides=tuple(rows))


def strip_command_prefix(label: str, verbs: tuple[str, ...] = DEFAULT_COMMAND_VERBS) -> str:
    """Drop a leading command verb ("Select departure airport" -> "departure airport")."""
    trimmed = label.strip()
    if not trimmed:
        return ""
    head, _, rest = trimmed.partition(" ")
    if head.lower() in verbs and rest.strip():
        return rest.strip()
    return trimmed


def text_field_question(label: str) -> str:
    return f"What is the {label}?"


def _choices_phrase(choices: tuple[str, ...]) -> str:
    # Choices go in verbatim, comma-joined with "or" before the last one.
    if len(choices) == 2:
        return f"{choices[0]} or {choices[1]}"
    return ", ".join(choices[:-1]) + f" or {choices[-1]}"


def _prepared_label(element: GuiElement, rules: QuestionRules) -> str:
    label = strip_command_prefix(element.label, rules.command_verbs).lower()
    if not label:
        raise EmptyLabelError(
            f"element {element.element_id!r} (slot {element.slot_id!r}): "
            "template needs a label but none remains after command stripping"
        )
    return label


def generate_question(
    element: GuiElement,
    mode: AblationMode = AblationMode.FULL,
    *,
    ordinal: int = 1,
    rules: QuestionRules = DEFAULT_RULES,
) -> Question:
    """Apply the category's rule template to one element.

    `ordinal` is the stable per-slot index used for no-visuals tag symbols;
    callers working at screen scope take it from element declaration order.
    """
    if mode is AblationMode.NO_VISUALS:
        text = f"{TAG_SYMBOL_PREFIX}{ordinal}"
        return Question(text=text, slot_id=element.slot_id, source_element=element.element_id)

    kind = element.category.kind
    if mode is AblationMode.FULL:
        override = rules.override_for(element)
        if override is not None:
            label = strip_command_prefix(element.label, rules.command_verbs).lower()
            text = override.format(
                label=label,
                choices=_choices_phrase(element.choices) if element.choices else "",
            )
        elif kind is CategoryKind.RADIO_BUTTON:
            text = f"Is this {_choices_phrase(element.choices)}?"
        elif kind in (CategoryKind.TEXT_BUTTON, CategoryKind.CHECKBOX, CategoryKind.ON_OFF_SWITCH):
            text = f"What should I do to {_prepared_label(element, rules)}?"
        else:
            text = text_field_question(_prepared_label(element, rules))
    else:  # text-only: every category through the text-field template
        text = text_field_question(_prepared_label(element, rules))
    return Question(text=text, slot_id=element.slot_id, source_element=element.element_id)


def slot_ordinals(screen: Screen) -> dict[str, int]:
    """1-based slot ordinals by element declaration order; stable under
    visibility changes because hidden elements keep their position."""
    ordinals: dict[str, int] = {}
    for i, element in enumerate(screen.elements, start=1):
        ordinals.setdefault(element.slot_id, i)
    return ordinals


def generate_questions(
    screen: Screen,
    mode: AblationMode = AblationMode.FULL,
    rules: QuestionRules = DEFAULT_RULES,
) -> list[Question]:
    """One question per visible element, in declaration order."""
    ordinals = slot_ordinals(screen)
    questions: list[Question] = []
    seen: set[str] = set()
    for element in visible_elements(screen):
        if element.slot_id in seen:
            raise DuplicateSlotError(
                f"screen {screen.screen_id!r}: slot {element.slot_id!r} appears on two visible elements"
            )
        seen.add(element.slot_id)
        questions.append(
            generate_question(element, mode, ordinal=ordinals[element.slot_id], rules=rules)
        )
    return questions
