"""Typed model of semantically annotated GUI screens.

A screen file is the contract with whatever produced the annotation
(hand authoring or a computer-vision classifier): JSON with `screen_id`,
`app_name`, `elements[]` and `visible[]`. Screens are immutable after
load and safe to share between threads.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable

from .errors import ParseError, ValidationError

logger = logging.getLogger(__name__)


class CategoryKind(Enum):
    """The 25 named UI component categories plus a catch-all."""

    TEXT_FIELD = "TextField"
    RADIO_BUTTON = "RadioButton"
    TEXT_BUTTON = "TextButton"
    CHECKBOX = "Checkbox"
    ON_OFF_SWITCH = "OnOffSwitch"
    ICON = "Icon"
    TAB_BUTTON = "TabButton"
    SEARCH_BUTTON = "SearchButton"
    ADVERTISEMENT = "Advertisement"
    TEXT = "Text"
    IMAGE = "Image"
    BACKGROUND_IMAGE = "BackgroundImage"
    BOTTOM_NAVIGATION = "BottomNavigation"
    BUTTON_BAR = "ButtonBar"
    CARD = "Card"
    DATE_PICKER = "DatePicker"
    DRAWER = "Drawer"
    LIST_ITEM = "ListItem"
    MAP_VIEW = "MapView"
    MODAL = "Modal"
    NUMBER_STEPPER = "NumberStepper"
    PAGER_INDICATOR = "PagerIndicator"
    SLIDER = "Slider"
    TOOLBAR = "Toolbar"
    WEB_VIEW = "WebView"
    OTHER_COMPONENT = "OtherComponent"


_KIND_BY_NAME = {kind.value: kind for kind in CategoryKind}


@dataclass(frozen=True)
class GuiCategory:
    """A component category; unknown names survive as OtherComponent."""

    kind: CategoryKind
    name: str

    @classmethod
    def parse(cls, name: str) -> "GuiCategory":
        kind = _KIND_BY_NAME.get(name)
        if kind is None or kind is CategoryKind.OTHER_COMPONENT:
            return cls(CategoryKind.OTHER_COMPONENT, name)
        return cls(kind, name)

    @classmethod
    def of(cls, kind: CategoryKind) -> "GuiCategory":
        return cls(kind, kind.value)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class GuiElement:
    element_id: str
    category: GuiCategory
    label: str = ""
    choices: tuple[str, ...] = ()
    button_concept: str | None = None
    icon_class: str | None = None
    slot_id: str = ""


@dataclass(frozen=True)
class Screen:
    screen_id: str
    app_name: str
    elements: tuple[GuiElement, ...]
    visible: frozenset[str] = field(default_factory=frozenset)

    def element_ids(self) -> tuple[str, ...]:
        return tuple(e.element_id for e in self.elements)

    def slot_ids(self) -> tuple[str, ...]:
        return tuple(e.slot_id for e in self.elements)

    def with_visible(self, ids: Iterable[str]) -> "Screen":
        return replace(self, visible=frozenset(ids))


def validate_screen(screen: Screen) -> list[str]:
    """Return every invariant violation; an empty list means valid."""
    violations: list[str] = []
    if not screen.elements:
        violations.append("screen has no elements")
    seen: set[str] = set()
    for i, element in enumerate(screen.elements):
        locus = f"elements[{i}] ({element.element_id!r})"
        if not element.element_id:
            violations.append(f"{locus}: empty element id")
        elif element.element_id in seen:
            violations.append(f"{locus}: duplicate element id")
        seen.add(element.element_id)
        if not element.slot_id:
            violations.append(f"{locus}: empty slot_id")
        is_radio = element.category.kind is CategoryKind.RADIO_BUTTON
        if is_radio and not element.choices:
            violations.append(f"{locus}: RadioButton needs choices")
        if not is_radio and element.choices:
            violations.append(f"{locus}: choices only allowed on RadioButton")
        if element.choices and len(element.choices) < 2:
            violations.append(f"{locus}: choices need at least 2 entries")
    ids = {e.element_id for e in screen.elements}
    for vid in sorted(screen.visible - ids):
        violations.append(f"visible id {vid!r} not among elements")
    return violations


def _check(screen: Screen) -> Screen:
    violations = validate_screen(screen)
    if violations:
        raise ValidationError(violations)
    return screen


_ELEMENT_KEYS = {"id", "category", "label", "choices", "button_concept", "icon_class", "slot_id"}
_SCREEN_KEYS = {"screen_id", "app_name", "elements", "visible"}


def _warn_unknown_keys(obj: dict, known: set[str], locus: str) -> None:
    for key in sorted(set(obj) - known):
        logger.warning("%s: ignoring unknown key %r", locus, key)


def _require(obj: dict, key: str, locus: str) -> object:
    if key not in obj:
        raise ParseError(f"{locus}: missing {key!r}")
    return obj[key]


def _require_str(obj: dict, key: str, locus: str) -> str:
    value = _require(obj, key, locus)
    if not isinstance(value, str):
        raise ParseError(f"{locus}: {key!r} must be a string")
    return value


def parse_screen(obj: object, source: str = "<screen>") -> Screen:
    """Build a validated Screen from decoded JSON data."""
    if not isinstance(obj, dict):
        raise ParseError(f"{source}: top level must be an object")
    _warn_unknown_keys(obj, _SCREEN_KEYS, source)
    raw_elements = _require(obj, "elements", source)
    if not isinstance(raw_elements, list):
        raise ParseError(f"{source}: 'elements' must be a list")
    elements = []
    for i, raw in enumerate(raw_elements):
        locus = f"{source}: elements[{i}]"
        if not isinstance(raw, dict):
            raise ParseError(f"{locus}: must be an object")
        _warn_unknown_keys(raw, _ELEMENT_KEYS, locus)
        choices = raw.get("choices", [])
        if not isinstance(choices, list) or not all(isinstance(c, str) for c in choices):
            raise ParseError(f"{locus}: 'choices' must be a list of strings")
        for opt in ("button_concept", "icon_class"):
            if raw.get(opt) is not None and not isinstance(raw[opt], str):
                raise ParseError(f"{locus}: {opt!r} must be a string")
        label = raw.get("label", "")
        if not isinstance(label, str):
            raise ParseError(f"{locus}: 'label' must be a string")
        elements.append(
            GuiElement(
                element_id=_require_str(raw, "id", locus),
                category=GuiCategory.parse(_require_str(raw, "category", locus)),
                label=label,
                choices=tuple(choices),
                button_concept=raw.get("button_concept"),
                icon_class=raw.get("icon_class"),
                slot_id=_require_str(raw, "slot_id", locus),
            )
        )
    visible = _require(obj, "visible", source)
    if not isinstance(visible, list) or not all(isinstance(v, str) for v in visible):
        raise ParseError(f"{source}: 'visible' must be a list of strings")
    screen = Screen(
        screen_id=_require_str(obj, "screen_id", source),
        app_name=_require_str(obj, "app_name", source),
        elements=tuple(elements),
        visible=frozenset(visible),
    )
    _check(screen)
    _warn_off_vocabulary(screen, source)
    return screen


def load_screen(path: str | Path) -> Screen:
    """Load and validate a screen annotation file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"{path}: {e}") from e
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    return parse_screen(obj, source=str(path))


def screen_to_dict(screen: Screen) -> dict:
    """Serialize to the screen file shape; visible listed in element order."""
    obj: dict = {
        "screen_id": screen.screen_id,
        "app_name": screen.app_name,
        "elements": [],
        "visible": [e.element_id for e in screen.elements if e.element_id in screen.visible],
    }
    for e in screen.elements:
        entry: dict = {
            "id": e.element_id,
            "category": str(e.category),
            "label": e.label,
            "slot_id": e.slot_id,
        }
        if e.choices:
            entry["choices"] = list(e.choices)
        if e.button_concept is not None:
            entry["button_concept"] = e.button_concept
        if e.icon_class is not None:
            entry["icon_class"] = e.icon_class
        obj["elements"].append(entry)
    return obj


def save_screen(screen: Screen, path: str | Path) -> None:
    _check(screen)
    Path(path).write_text(json.dumps(screen_to_dict(screen), indent=2) + "\n", encoding="utf-8")


def visible_elements(screen: Screen) -> list[GuiElement]:
    """Elements currently displayed, in declaration order."""
    return [e for e in screen.elements if e.element_id in screen.visible]


def _load_vocab(name: str) -> frozenset[str]:
    text = resources.files("slotqa.data.vocab").joinpath(name).read_text(encoding="utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def button_concepts() -> frozenset[str]:
    """The editable text-button concept vocabulary shipped with the package."""
    return _load_vocab("button_concepts.txt")


def icon_classes() -> frozenset[str]:
    """The editable icon-class vocabulary shipped with the package."""
    return _load_vocab("icon_classes.txt")


def _warn_off_vocabulary(screen: Screen, source: str) -> None:
    # Off-vocabulary values are warnings, never errors: the vocabularies are
    # open name lists that users may extend.
    concepts = button_concepts()
    icons = icon_classes()
    for e in screen.elements:
        if e.button_concept is not None and e.button_concept not in concepts:
            logger.warning(
                "%s: element %r: button_concept %r not in the shipped concept list",
                source, e.element_id, e.button_concept,
            )
        if e.icon_class is not None and e.icon_class not in icons:
            logger.warning(
                "%s: element %r: icon_class %r not in the shipped icon list",
                source, e.element_id, e.icon_class,
            )
