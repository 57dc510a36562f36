"""SQuAD v2.0 JSON reading and writing.

One record per question: answerable records carry the exact answer
substring with its character offset; unanswerable records carry neither.
Loading validates structure and the substring invariant up front so
training never sees a silently corrupt example.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DatasetError


@dataclass(frozen=True)
class QaRecord:
    qa_id: str
    question: str
    context: str
    answer_text: str | None = None
    answer_start: int | None = None

    @property
    def is_impossible(self) -> bool:
        return self.answer_text is None

    def check(self) -> str | None:
        """Return a problem description, or None when the record is sound."""
        if not self.question.strip():
            return "empty question"
        if not self.context.strip():
            return "empty context"
        if (self.answer_text is None) != (self.answer_start is None):
            return "answer text and answer start must be set together"
        if self.answer_text is not None:
            start = self.answer_start
            if not self.answer_text:
                return "empty answer text"
            if start is None or start < 0 or start + len(self.answer_text) > len(self.context):
                return f"answer offset {start} out of range"
            got = self.context[start : start + len(self.answer_text)]
            if got != self.answer_text:
                return (
                    f"answer text {self.answer_text!r} does not match context "
                    f"slice {got!r} at offset {start}"
                )
        return None


def _qa_from_obj(obj: dict, context: str, where: str) -> QaRecord:
    try:
        qa_id = str(obj["id"])
        question = obj["question"]
    except (KeyError, TypeError) as exc:
        raise DatasetError(f"{where}: question entry missing {exc}") from None
    if not isinstance(question, str):
        raise DatasetError(f"{where}: question is not a string")
    impossible = bool(obj.get("is_impossible", False))
    answers = obj.get("answers", [])
    if impossible or not answers:
        record = QaRecord(qa_id=qa_id, question=question, context=context)
    else:
        first = answers[0]
        try:
            record = QaRecord(
                qa_id=qa_id,
                question=question,
                context=context,
                answer_text=first["text"],
                answer_start=int(first["answer_start"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetError(f"{where}: malformed answer for {qa_id!r}: {exc}") from None
    problem = record.check()
    if problem is not None:
        raise DatasetError(f"{where}: {qa_id!r}: {problem}")
    return record


def load_squad(path: str | Path) -> list[QaRecord]:
    """Read a SQuAD v2.0 JSON file into validated records."""
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DatasetError(f"cannot read dataset {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(obj, dict) or not isinstance(obj.get("data"), list):
        raise DatasetError(f"{path}: expected an object with a 'data' list")
    records: list[QaRecord] = []
    for a, article in enumerate(obj["data"]):
        paragraphs = article.get("paragraphs") if isinstance(article, dict) else None
        if not isinstance(paragraphs, list):
            raise DatasetError(f"{path}: data[{a}] has no 'paragraphs' list")
        for p, para in enumerate(paragraphs):
            where = f"{path}: data[{a}].paragraphs[{p}]"
            if not isinstance(para, dict) or not isinstance(para.get("context"), str):
                raise DatasetError(f"{where}: missing string 'context'")
            qas = para.get("qas")
            if not isinstance(qas, list):
                raise DatasetError(f"{where}: missing 'qas' list")
            for qa in qas:
                if not isinstance(qa, dict):
                    raise DatasetError(f"{where}: qas entries must be objects")
                records.append(_qa_from_obj(qa, para["context"], where))
    return records


def squad_dict(records: Iterable[QaRecord], title: str = "dataset") -> dict:
    """SQuAD v2.0 object with one paragraph per distinct context, in order."""
    paragraphs: list[dict] = []
    by_context: dict[str, dict] = {}
    for record in records:
        problem = record.check()
        if problem is not None:
            raise DatasetError(f"{record.qa_id!r}: {problem}")
        para = by_context.get(record.context)
        if para is None:
            para = {"context": record.context, "qas": []}
            by_context[record.context] = para
            paragraphs.append(para)
        if record.is_impossible:
            qa = {"id": record.qa_id, "question": record.question,
                  "is_impossible": True, "answers": []}
        else:
            qa = {
                "id": record.qa_id,
                "question": record.question,
                "is_impossible": False,
                "answers": [{"text": record.answer_text,
                             "answer_start": record.answer_start}],
            }
        para["qas"].append(qa)
    return {"version": "v2.0", "data": [{"title": title, "paragraphs": paragraphs}]}


def write_squad(records: Sequence[QaRecord], path: str | Path, title: str = "dataset") -> None:
    Path(path).write_text(
        json.dumps(squad_dict(records, title=title), indent=1) + "\n", encoding="utf-8"
    )
