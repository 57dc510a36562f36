"""End-to-end slot filling for screens plus one utterance.

Generates the simultaneous questions, queries a backend in one batch,
applies the no-answer threshold, and maps surviving character spans back
to whitespace-token windows. Overlapping answers to different questions
are reported as conflicts, never arbitrated away.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Sequence

from .backends import BackendConfig, QaBackend, is_rejected
from .errors import BackendUnavailable, DuplicateSlotError, SpanOutOfRange
from .questions import AblationMode, Question, QuestionRules, DEFAULT_RULES, generate_questions
from .screens import Screen, visible_elements

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"\S+")


def whitespace_tokens(text: str) -> list[tuple[int, int, str]]:
    """Maximal non-space runs as (start, end, token)."""
    return [(m.start(), m.end(), m.group()) for m in _TOKEN_RE.finditer(text)]


def align_to_tokens(utterance: str, span: tuple[int, int]) -> tuple[int, int]:
    """Minimal half-open token window covering the span.

    Partial overlap expands to whole tokens; a span touching no token at
    all (whitespace only) is out of range.
    """
    start, end = span
    if not (0 <= start < end <= len(utterance)):
        raise SpanOutOfRange(f"span ({start},{end}) outside utterance of length {len(utterance)}")
    window: tuple[int, int] | None = None
    for i, (tok_start, tok_end, _) in enumerate(whitespace_tokens(utterance)):
        if tok_start < end and tok_end > start:
            window = (i, i + 1) if window is None else (window[0], i + 1)
    if window is None:
        raise SpanOutOfRange(f"span ({start},{end}) covers no token")
    return window


@dataclass(frozen=True)
class Fill:
    surface: str
    start_char: int
    end_char: int
    span_score: float
    token_start: int
    token_end: int


@dataclass
class SlotFillResult:
    utterance: str
    fills: dict[str, Fill]
    rejections: dict[str, float]  # slot_id -> no_answer_score
    conflicts: list[tuple[str, str]]
    mode: AblationMode
    distractor_count: int
    utterance_id: str | None = None

    def asked_slots(self) -> set[str]:
        return set(self.fills) | set(self.rejections)

    def to_dict(self) -> dict:
        return {
            "utterance_id": self.utterance_id,
            "utterance": self.utterance,
            "mode": self.mode.value,
            "distractor_count": self.distractor_count,
            "fills": {
                slot: {
                    "text": fill.surface,
                    "start_char": fill.start_char,
                    "end_char": fill.end_char,
                    "span_score": fill.span_score,
                    "token_start": fill.token_start,
                    "token_end": fill.token_end,
                }
                for slot, fill in sorted(self.fills.items())
            },
            "rejections": dict(sorted(self.rejections.items())),
            "conflicts": [list(pair) for pair in self.conflicts],
        }


def fill_from_questions(
    questions: Sequence[Question],
    utterance: str,
    backend: QaBackend,
    cfg: BackendConfig = BackendConfig(),
    mode: AblationMode = AblationMode.FULL,
    distractor_count: int = 0,
    utterance_id: str | None = None,
) -> SlotFillResult:
    """Single backend round-trip over an explicit question list."""
    slots = [q.slot_id for q in questions]
    if len(set(slots)) != len(slots):
        dupes = sorted({s for s in slots if slots.count(s) > 1})
        raise DuplicateSlotError(f"duplicate slot ids across questions: {', '.join(dupes)}")
    pairs = [(q.text, utterance) for q in questions]
    try:
        results = backend.batch_extract(pairs)
    except BackendUnavailable as e:
        slots = ",".join(q.slot_id for q in questions)
        raise BackendUnavailable(f"utterance {utterance_id or utterance[:40]!r} (slots {slots}): {e}") from e
    fills: dict[str, Fill] = {}
    rejections: dict[str, float] = {}
    for question, result in zip(questions, results):
        if is_rejected(result, cfg):
            rejections[question.slot_id] = result.no_answer_score
            continue
        if not result.check_against(utterance):
            logger.warning(
                "slot %r: backend span %r violates the substring contract; rejecting",
                question.slot_id, result.answer,
            )
            rejections[question.slot_id] = 1.0
            continue
        answer = result.answer
        assert answer is not None
        token_start, token_end = align_to_tokens(utterance, (answer.start_char, answer.end_char))
        fills[question.slot_id] = Fill(
            surface=answer.text,
            start_char=answer.start_char,
            end_char=answer.end_char,
            span_score=result.span_score,
            token_start=token_start,
            token_end=token_end,
        )
    conflicts = sorted(
        (min(a, b), max(a, b))
        for a in fills
        for b in fills
        if a < b
        and fills[a].start_char < fills[b].end_char
        and fills[b].start_char < fills[a].end_char
    )
    return SlotFillResult(
        utterance=utterance,
        fills=fills,
        rejections=rejections,
        conflicts=conflicts,
        mode=mode,
        distractor_count=distractor_count,
        utterance_id=utterance_id,
    )


def fill_slots(
    screens: Sequence[Screen],
    utterance: str,
    backend: QaBackend,
    cfg: BackendConfig = BackendConfig(),
    mode: AblationMode = AblationMode.FULL,
    rules: QuestionRules = DEFAULT_RULES,
    utterance_id: str | None = None,
) -> SlotFillResult:
    """Fill the first screen's slots; the remaining screens are distractors
    whose questions go out in the same batch."""
    if not screens:
        raise ValueError("need at least one screen (the target)")
    questions: list[Question] = []
    for screen in screens:
        questions.extend(generate_questions(screen, mode, rules=rules))
    distractor_count = sum(len(visible_elements(s)) for s in screens[1:])
    return fill_from_questions(
        questions,
        utterance,
        backend,
        cfg,
        mode=mode,
        distractor_count=distractor_count,
        utterance_id=utterance_id,
    )
