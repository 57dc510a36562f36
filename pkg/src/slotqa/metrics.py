"""Weighted token F1 over slot fills.

Per slot type, predicted and gold fill tokens are compared as multisets
within each utterance and pooled across the corpus; the headline number
is the support-weighted average of per-slot F1 (support = gold token
count). A micro-averaged variant is reported alongside. Token comparison
is case-insensitive with edge punctuation stripped unless raw mode is on.
"""

from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

from .conversion import AnnotatedUtterance
from .dispatch import SlotFillResult, whitespace_tokens
from .errors import AlignmentError

_PUNCT = string.punctuation


def normalize_token(token: str) -> str:
    return token.strip(_PUNCT).casefold()


def span_tokens(text: str, start: int, end: int, raw: bool = False) -> list[str]:
    """Tokens of `text` overlapped by the half-open character span."""
    picked = [
        tok for tok_start, tok_end, tok in whitespace_tokens(text)
        if tok_start < end and tok_end > start
    ]
    if raw:
        return picked
    return [n for n in (normalize_token(t) for t in picked) if n]


@dataclass(frozen=True)
class SlotMetrics:
    precision: float
    recall: float
    f1: float
    support: int  # gold token count


@dataclass
class MetricsReport:
    per_slot: dict[str, SlotMetrics]
    weighted_f1: float
    micro_precision: float
    micro_recall: float
    micro_f1: float
    n_utterances: int = 0
    n_questions: int = 0
    n_rejections: int = 0
    rejection_accuracy: float | None = None

    @property
    def counts(self) -> tuple[int, int, int]:
        return (self.n_utterances, self.n_questions, self.n_rejections)

    def to_dict(self) -> dict:
        return {
            "weighted_f1": self.weighted_f1,
            "micro_precision": self.micro_precision,
            "micro_recall": self.micro_recall,
            "micro_f1": self.micro_f1,
            "counts": {
                "utterances": self.n_utterances,
                "questions": self.n_questions,
                "rejections": self.n_rejections,
            },
            "rejection_accuracy": self.rejection_accuracy,
            "per_slot": {
                slot: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for slot, m in self.per_slot.items()
            },
        }


# slot -> per-utterance (predicted tokens, gold tokens) pairs
TokenPairTable = Mapping[str, Sequence[tuple[Sequence[str], Sequence[str]]]]


def _ratio(numerator: int, denominator: int) -> float:
    return numerator / denominator if denominator else 0.0


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def f1_from_token_pairs(table: TokenPairTable) -> MetricsReport:
    """Computational core, exposed so property tests can drive it directly."""
    per_slot: dict[str, SlotMetrics] = {}
    total_overlap = total_predicted = total_gold = 0
    weighted_numerator = 0.0
    weighted_denominator = 0
    for slot in sorted(table):
        overlap = predicted = gold = 0
        for predicted_tokens, gold_tokens in table[slot]:
            shared = Counter(predicted_tokens) & Counter(gold_tokens)
            overlap += sum(shared.values())
            predicted += len(predicted_tokens)
            gold += len(gold_tokens)
        precision = _ratio(overlap, predicted)
        recall = _ratio(overlap, gold)
        f1 = _f1(precision, recall)
        per_slot[slot] = SlotMetrics(precision, recall, f1, support=gold)
        if gold > 0:
            weighted_numerator += gold * f1
            weighted_denominator += gold
        total_overlap += overlap
        total_predicted += predicted
        total_gold += gold
    micro_precision = _ratio(total_overlap, total_predicted)
    micro_recall = _ratio(total_overlap, total_gold)
    return MetricsReport(
        per_slot=per_slot,
        weighted_f1=_ratio_float(weighted_numerator, weighted_denominator),
        micro_precision=micro_precision,
        micro_recall=micro_recall,
        micro_f1=_f1(micro_precision, micro_recall),
    )


def _ratio_float(numerator: float, denominator: int) -> float:
    return numerator / denominator if denominator else 0.0


def token_f1(
    gold: Sequence[AnnotatedUtterance],
    predicted: Sequence[SlotFillResult],
    raw: bool = False,
) -> MetricsReport:
    """Score index-aligned predictions against a gold corpus."""
    if len(gold) != len(predicted):
        raise AlignmentError(f"{len(gold)} gold utterances vs {len(predicted)} predictions")
    table: dict[str, list[tuple[list[str], list[str]]]] = {}
    n_questions = 0
    n_rejections = 0
    reject_denominator = 0
    reject_numerator = 0
    for i, (utt, result) in enumerate(zip(gold, predicted)):
        if result.utterance_id is not None and result.utterance_id != utt.utterance_id:
            raise AlignmentError(
                f"position {i}: gold id {utt.utterance_id!r} vs predicted id {result.utterance_id!r}"
            )
        if result.utterance != utt.text:
            raise AlignmentError(f"position {i} ({utt.utterance_id!r}): context text differs")
        gold_tokens: dict[str, list[str]] = {}
        for fill in utt.slots:
            tokens = span_tokens(utt.text, fill.start_char, fill.end_char, raw)
            gold_tokens.setdefault(fill.slot_id, []).extend(tokens)
        predicted_tokens: dict[str, list[str]] = {
            slot: span_tokens(result.utterance, fill.start_char, fill.end_char, raw)
            for slot, fill in result.fills.items()
        }
        for slot in set(gold_tokens) | set(predicted_tokens):
            table.setdefault(slot, []).append(
                (predicted_tokens.get(slot, []), gold_tokens.get(slot, []))
            )
        asked = result.asked_slots()
        n_questions += len(asked)
        n_rejections += len(result.rejections)
        present = utt.slot_ids()
        for slot in asked - present:
            reject_denominator += 1
            if slot in result.rejections:
                reject_numerator += 1
    report = f1_from_token_pairs(table)
    report.n_utterances = len(gold)
    report.n_questions = n_questions
    report.n_rejections = n_rejections
    report.rejection_accuracy = (
        reject_numerator / reject_denominator if reject_denominator else None
    )
    return report
