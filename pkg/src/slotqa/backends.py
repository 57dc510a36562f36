"""Span-extraction backends behind one small contract.

Three implementations: a gold-map oracle (test teacher), a deterministic
lexical baseline, and an HTTP client for a remote model service. Every
answer must be an exact substring of its context; remote results that
fail that check are logged and downgraded to no-answer, never propagated.
"""

from __future__ import annotations

import json
import logging
import math
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import requests

from .errors import BackendUnavailable, ParseError
from .conversion import AnnotatedUtterance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Answer:
    text: str
    start_char: int
    end_char: int


@dataclass(frozen=True)
class ExtractionResult:
    answer: Answer | None
    span_score: float
    no_answer_score: float

    def check_against(self, context: str) -> bool:
        """True when the invariants hold for this context."""
        if not (math.isfinite(self.span_score) and math.isfinite(self.no_answer_score)):
            return False
        if self.answer is None:
            return True
        a = self.answer
        return (
            a.end_char > a.start_char
            and context[a.start_char:a.end_char] == a.text
        )


NO_ANSWER = ExtractionResult(answer=None, span_score=0.0, no_answer_score=1.0)


@dataclass(frozen=True)
class BackendConfig:
    no_answer_threshold: float = 0.5
    batch_size: int = 16
    endpoint: str | None = None
    timeout: float = 10.0
    retries: int = 2

    def __post_init__(self) -> None:
        if not 0.0 <= self.no_answer_threshold <= 1.0:
            raise ValueError("no_answer_threshold must lie in [0, 1]")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")


def is_rejected(result: ExtractionResult, cfg: BackendConfig) -> bool:
    """No-answer decision: no span, or null score at/above the threshold."""
    return result.answer is None or result.no_answer_score >= cfg.no_answer_threshold


class QaBackend:
    """Contract every answer source implements."""

    def extract(self, question: str, context: str) -> ExtractionResult:
        raise NotImplementedError

    def batch_extract(self, pairs: Sequence[tuple[str, str]]) -> list[ExtractionResult]:
        return [self.extract(question, context) for question, context in pairs]


GoldMap = Mapping[tuple[str, str], tuple[str, int, int]]


class OracleBackend(QaBackend):
    """Answers from a gold map keyed by (question, context); everything else
    is rejected with full confidence. Exact recovery by construction."""

    def __init__(self, gold: GoldMap):
        self._gold = dict(gold)

    @classmethod
    def from_annotations(
        cls,
        utts: Iterable[AnnotatedUtterance],
        question_by_slot: Mapping[str, str],
    ) -> "OracleBackend":
        """Teacher built from a gold corpus and the questions in play."""
        gold: dict[tuple[str, str], tuple[str, int, int]] = {}
        for utt in utts:
            for fill in utt.slots:
                question = question_by_slot.get(fill.slot_id)
                if question is None:
                    continue
                gold.setdefault((question, utt.text), (fill.surface, fill.start_char, fill.end_char))
        return cls(gold)

    def extract(self, question: str, context: str) -> ExtractionResult:
        hit = self._gold.get((question, context))
        if hit is None:
            return NO_ANSWER
        text, start, end = hit
        return ExtractionResult(Answer(text, start, end), span_score=1.0, no_answer_score=0.0)


def load_oracle(path: str | Path) -> OracleBackend:
    """Oracle from a JSON list of {question, context, text, answer_start}."""
    try:
        rows = json.loads(Path(path).read_text(encoding="utf-8"))
        gold = {
            (row["question"], row["context"]): (
                row["text"],
                row["answer_start"],
                row["answer_start"] + len(row["text"]),
            )
            for row in rows
        }
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise ParseError(f"{path}: bad gold answer file ({e})") from e
    return OracleBackend(gold)


_WORD_RE = re.compile(r"[a-zA-Z]+")

_QUESTION_STOPWORDS = frozenset(
    "what is are the a an this i do to should of for or".split()
)


@dataclass(frozen=True)
class GazetteerEntry:
    """Pattern applied when all keywords occur in the question text."""

    keywords: frozenset[str]
    pattern: re.Pattern


def load_gazetteer(path: str | Path) -> list[GazetteerEntry]:
    try:
        rows = json.loads(Path(path).read_text(encoding="utf-8"))
        entries = [
            GazetteerEntry(
                keywords=frozenset(w.lower() for w in row["keywords"]),
                pattern=re.compile(row["pattern"]),
            )
            for row in rows
        ]
    except (json.JSONDecodeError, KeyError, TypeError, re.error) as e:
        raise ParseError(f"{path}: bad gazetteer ({e})") from e
    return entries


def lexical_extract(
    question: str,
    context: str,
    gazetteer: Sequence[GazetteerEntry],
) -> ExtractionResult:
    """Deterministic baseline: longest pattern match wins, earlier offset
    breaks ties. Patterns fire only when their keywords appear in the
    question (stopwords excluded)."""
    words = {w.lower() for w in _WORD_RE.findall(question)} - _QUESTION_STOPWORDS
    best: tuple[int, int] | None = None  # (-length, start) for min()
    best_answer: Answer | None = None
    for entry in gazetteer:
        if not entry.keywords <= words:
            continue
        for match in entry.pattern.finditer(context):
            group = 1 if entry.pattern.groups else 0
            text = match.group(group)
            if not text:
                continue
            start = match.start(group)
            key = (-len(text), start)
            if best is None or key < best:
                best = key
                best_answer = Answer(text, start, start + len(text))
    if best_answer is None:
        return NO_ANSWER
    return ExtractionResult(best_answer, span_score=1.0, no_answer_score=0.0)


class LexicalBackend(QaBackend):
    def __init__(self, gazetteer: Sequence[GazetteerEntry]):
        self._gazetteer = list(gazetteer)

    def extract(self, question: str, context: str) -> ExtractionResult:
        return lexical_extract(question, context, self._gazetteer)


ENDPOINT_ENV_VAR = "SLOTQA_ENDPOINT"


class RemoteBackend(QaBackend):
    """Client for the HTTP extraction protocol.

    Requests go out in batches of at most `batch_size`; responses are
    re-ordered to match the input. Per-item protocol violations become
    no-answer results so a bad item never aborts the batch.
    """

    def __init__(self, cfg: BackendConfig, session: requests.Session | None = None):
        endpoint = cfg.endpoint or os.environ.get(ENDPOINT_ENV_VAR)
        if not endpoint:
            raise ValueError(f"remote backend needs an endpoint ({ENDPOINT_ENV_VAR} unset)")
        self._endpoint = endpoint.rstrip("/")
        self._cfg = cfg
        self._session = session or requests.Session()

    def _post(self, items: list[dict]) -> dict:
        url = f"{self._endpoint}/extract"
        last_error: Exception | None = None
        for _ in range(self._cfg.retries + 1):
            try:
                response = self._session.post(url, json={"items": items}, timeout=self._cfg.timeout)
            except requests.RequestException as e:
                last_error = e
                continue
            if response.status_code >= 500:
                last_error = BackendUnavailable(f"{url}: HTTP {response.status_code}")
                continue
            if response.status_code != 200:
                raise BackendUnavailable(f"{url}: HTTP {response.status_code}")
            try:
                return response.json()
            except ValueError as e:
                raise BackendUnavailable(f"{url}: not JSON ({e})") from e
        raise BackendUnavailable(f"{url}: {last_error}")

    def health(self) -> dict:
        url = f"{self._endpoint}/health"
        try:
            response = self._session.get(url, timeout=self._cfg.timeout)
        except requests.RequestException as e:
            raise BackendUnavailable(f"{url}: {e}") from e
        if response.status_code != 200:
            raise BackendUnavailable(f"{url}: HTTP {response.status_code}")
        return response.json()

    def _decode(self, item: dict, context: str) -> ExtractionResult:
        text = item.get("text")
        start = item.get("answer_start")
        span_score = item.get("span_score", 0.0)
        no_answer_score = item.get("no_answer_score", 1.0)
        try:
            span_score = float(span_score)
            no_answer_score = float(no_answer_score)
        except (TypeError, ValueError):
            logger.warning("remote item %r: non-numeric scores; treating as no-answer", item.get("id"))
            return NO_ANSWER
        if not (0.0 <= span_score <= 1.0 and 0.0 <= no_answer_score <= 1.0):
            logger.warning("remote item %r: scores out of range; treating as no-answer", item.get("id"))
            return NO_ANSWER
        if text is None or start is None:
            return ExtractionResult(None, span_score=span_score, no_answer_score=no_answer_score)
        result = ExtractionResult(
            Answer(str(text), int(start), int(start) + len(str(text))),
            span_score=span_score,
            no_answer_score=no_answer_score,
        )
        if not result.check_against(context):
            # Contract violation: the claimed span is not in the context.
            logger.warning(
                "remote item %r: answer %r fails the substring check; treating as no-answer",
                item.get("id"), text,
            )
            return NO_ANSWER
        return result

    def extract(self, question: str, context: str) -> ExtractionResult:
        return self.batch_extract([(question, context)])[0]

    def batch_extract(self, pairs: Sequence[tuple[str, str]]) -> list[ExtractionResult]:
        results: list[ExtractionResult] = []
        size = self._cfg.batch_size
        for offset in range(0, len(pairs), size):
            chunk = pairs[offset:offset + size]
            items = [
                {"id": str(offset + i), "question": q, "context": c}
                for i, (q, c) in enumerate(chunk)
            ]
            payload = self._post(items)
            by_id = {str(item.get("id")): item for item in payload.get("items", [])}
            for i, (_, context) in enumerate(chunk):
                item = by_id.get(str(offset + i))
                if item is None:
                    logger.warning("remote response missing item %d; treating as no-answer", offset + i)
                    results.append(NO_ANSWER)
                else:
                    results.append(self._decode(item, context))
        return results
