"""Slot-tagged corpus ingestion and SQuAD2-format export.

Reads CoNLL-style BIO files into character-exact annotated utterances,
humanizes slot tags into descriptions, and emits question/answer examples
with answerable and unanswerable entries. Also hosts the seeded few-shot
subsampler and the simulated-form screen builder used to treat a bare
slot schema as a stack of text fields.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import ParseError, TagSequenceError, ValidationError
from .questions import AblationMode, TAG_SYMBOL_PREFIX, strip_command_prefix, text_field_question
from .screens import CategoryKind, GuiCategory, GuiElement, Screen


@dataclass(frozen=True)
class SlotFill:
    """One gold span: half-open character offsets into the utterance text."""

    slot_id: str
    start_char: int
    end_char: int
    surface: str


@dataclass(frozen=True)
class AnnotatedUtterance:
    utterance_id: str
    text: str
    tokens: tuple[tuple[str, int], ...]  # (token text, start char offset)
    slots: tuple[SlotFill, ...]

    def slot_ids(self) -> set[str]:
        return {fill.slot_id for fill in self.slots}

    def validate(self) -> list[str]:
        violations: list[str] = []
        last_end = -1
        starts = set()
        ends = set()
        for token, start in self.tokens:
            if start <= last_end:
                violations.append(f"token offset {start} not strictly increasing")
            if self.text[start:start + len(token)] != token:
                violations.append(f"token {token!r} not at offset {start}")
            last_end = start + len(token) - 1
            starts.add(start)
            ends.add(start + len(token))
        spans = sorted((f.start_char, f.end_char) for f in self.slots)
        for (a_start, a_end), (b_start, b_end) in zip(spans, spans[1:]):
            if b_start < a_end:
                violations.append(f"overlapping spans ({a_start},{a_end}) and ({b_start},{b_end})")
        for fill in self.slots:
            if not (0 <= fill.start_char < fill.end_char <= len(self.text)):
                violations.append(f"span ({fill.start_char},{fill.end_char}) outside text")
                continue
            if self.text[fill.start_char:fill.end_char] != fill.surface:
                violations.append(f"surface {fill.surface!r} does not match its span")
            if fill.start_char not in starts or fill.end_char not in ends:
                violations.append(f"span ({fill.start_char},{fill.end_char}) not on token boundaries")
        return violations


_TAG_RE = re.compile(r"^(O|[BI]-.+)$")


def utterance_from_bio(
    utterance_id: str,
    tokens: Sequence[str],
    tags: Sequence[str],
    strict: bool = False,
) -> AnnotatedUtterance:
    """Assemble one utterance from parallel token/tag lists.

    Text is the single-space join of the tokens; every downstream offset
    refers to that reconstruction. Dangling I- tags start a new span unless
    `strict` is set.
    """
    if len(tokens) != len(tags):
        raise ParseError(f"utterance {utterance_id!r}: {len(tokens)} tokens vs {len(tags)} tags")
    offsets: list[int] = []
    cursor = 0
    for token in tokens:
        if not token or any(c.isspace() for c in token):
            raise ParseError(f"utterance {utterance_id!r}: bad token {token!r}")
        offsets.append(cursor)
        cursor += len(token) + 1
    text = " ".join(tokens)

    fills: list[SlotFill] = []
    open_slot: str | None = None
    open_start = 0

    def close(end_index: int) -> None:
        nonlocal open_slot
        if open_slot is None:
            return
        start_char = offsets[open_start]
        end_char = offsets[end_index] + len(tokens[end_index])
        fills.append(SlotFill(open_slot, start_char, end_char, text[start_char:end_char]))
        open_slot = None

    for i, tag in enumerate(tags):
        if not _TAG_RE.match(tag):
            raise ParseError(f"utterance {utterance_id!r}: token {i}: bad tag {tag!r}")
        if tag == "O":
            close(i - 1)
            continue
        prefix, slot = tag[0], tag[2:]
        if prefix == "B":
            close(i - 1)
            open_slot, open_start = slot, i
        elif open_slot == slot:
            continue  # I- extending the open span
        elif strict:
            raise TagSequenceError(f"utterance {utterance_id!r}: token {i}: dangling tag {tag!r}")
        else:
            close(i - 1)  # lenient: dangling I- starts a fresh span
            open_slot, open_start = slot, i
    close(len(tags) - 1)
    return AnnotatedUtterance(utterance_id, text, tuple(zip(tokens, offsets)), tuple(fills))


_ID_COMMENT_RE = re.compile(r"^#\s*id:\s*(.+?)\s*$")


def parse_bio_corpus(stream: Iterable[str], strict: bool = False) -> list[AnnotatedUtterance]:
    """Parse CoNLL-style `token<TAB>tag` lines into annotated utterances.

    Blank lines separate utterances; an optional `# id: <utterance_id>`
    comment names the next utterance. Tab-free lines starting with `#`
    are treated as comments.
    """
    utterances: list[AnnotatedUtterance] = []
    tokens: list[str] = []
    tags: list[str] = []
    pending_id: str | None = None

    def flush() -> None:
        nonlocal pending_id
        if not tokens:
            pending_id = None
            return
        utterance_id = pending_id if pending_id is not None else f"utt-{len(utterances):04d}"
        utterances.append(utterance_from_bio(utterance_id, tokens, tags, strict=strict))
        tokens.clear()
        tags.clear()
        pending_id = None

    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush()
            continue
        if line.startswith("#") and "\t" not in line:
            match = _ID_COMMENT_RE.match(line)
            if match:
                pending_id = match.group(1)
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError(f"line {lineno}: expected token<TAB>tag, got {line!r}")
        token, tag = fields
        if not token or any(c.isspace() for c in token):
            raise ParseError(f"line {lineno}: bad token {token!r}")
        if not _TAG_RE.match(tag):
            raise ParseError(f"line {lineno}: bad tag {tag!r}")
        tokens.append(token)
        tags.append(tag)
    flush()
    return utterances


def load_bio_corpus(path: str | Path, strict: bool = False) -> list[AnnotatedUtterance]:
    with open(path, encoding="utf-8") as stream:
        return parse_bio_corpus(stream, strict=strict)


def utterance_tags(utt: AnnotatedUtterance) -> list[str]:
    """Recover per-token BIO tags from the character spans."""
    tags = ["O"] * len(utt.tokens)
    starts = {start: i for i, (_, start) in enumerate(utt.tokens)}
    for fill in sorted(utt.slots, key=lambda f: f.start_char):
        first = starts[fill.start_char]
        index = first
        while index < len(utt.tokens):
            token, start = utt.tokens[index]
            if start >= fill.end_char:
                break
            tags[index] = ("B-" if index == first else "I-") + fill.slot_id
            index += 1
    return tags


def render_conll(utts: Sequence[AnnotatedUtterance]) -> str:
    """Inverse of parse_bio_corpus; parse(render(x)) == x on valid corpora."""
    blocks: list[str] = []
    for utt in utts:
        lines = [f"# id: {utt.utterance_id}"]
        lines.extend(f"{token}\t{tag}" for (token, _), tag in zip(utt.tokens, utterance_tags(utt)))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


class SlotSchema:
    """Ordered slot tag -> description mapping with a mechanical fallback."""

    def __init__(self, entries: Mapping[str, str] | Iterable[tuple[str, str]]):
        pairs = list(entries.items() if isinstance(entries, Mapping) else entries)
        self._entries = dict(pairs)
        violations = []
        if len(self._entries) != len(pairs):
            counts: dict[str, int] = {}
            for tag, _ in pairs:
                counts[tag] = counts.get(tag, 0) + 1
            for tag, count in counts.items():
                if count > 1:
                    violations.append(f"tag {tag!r} appears {count} times")
        seen: dict[str, str] = {}
        for tag, description in self._entries.items():
            if not description.strip():
                violations.append(f"tag {tag!r}: empty description")
            elif description in seen:
                violations.append(
                    f"tags {seen[description]!r} and {tag!r} share description {description!r}"
                )
            seen.setdefault(description, tag)
        if violations:
            raise ValidationError(violations)
        self._ordinals = {tag: i for i, tag in enumerate(self._entries, start=1)}

    @property
    def tags(self) -> tuple[str, ...]:
        return tuple(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, tag: str) -> bool:
        return tag in self._entries

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SlotSchema) and self._entries == other._entries

    def description(self, tag: str) -> str:
        return tag_to_description(tag, self)

    def lookup(self, tag: str) -> str | None:
        return self._entries.get(tag)

    def ordinal(self, tag: str) -> int:
        """1-based position in schema order; used for no-visuals tag symbols."""
        return self._ordinals[tag]


def strip_bio_prefix(tag: str) -> str:
    if tag.startswith(("B-", "I-")):
        return tag[2:]
    return tag


def tag_to_description(tag: str, schema: SlotSchema | None = None) -> str:
    """Humanize a slot tag; schema lookup first, else `_`/`.` become spaces."""
    if schema is not None:
        hit = schema.lookup(tag)
        if hit is not None:
            return hit
    return " ".join(part for part in re.split(r"[_.]", tag) if part)


def load_schema(path: str | Path) -> SlotSchema:
    """Read a two-column `tag<TAB>description` schema file."""
    entries: dict[str, str] = {}
    with open(path, encoding="utf-8") as stream:
        for lineno, raw in enumerate(stream, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ParseError(f"{path}:{lineno}: expected tag<TAB>description")
            tag, description = fields
            if tag in entries:
                raise ParseError(f"{path}:{lineno}: duplicate tag {tag!r}")
            entries[tag] = description
    return SlotSchema(entries)


def save_schema(schema: SlotSchema, path: str | Path) -> None:
    lines = [f"{tag}\t{schema.lookup(tag)}" for tag in schema.tags]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class QaExample:
    qa_id: str
    question: str
    context: str
    answers: tuple[tuple[str, int], ...]  # (text, answer_start)
    is_impossible: bool

    def validate(self) -> list[str]:
        violations = []
        if self.is_impossible != (not self.answers):
            violations.append("is_impossible must match answer emptiness")
        for text, start in self.answers:
            if self.context[start:start + len(text)] != text:
                violations.append(f"answer {text!r} not at offset {start}")
        return violations


@dataclass(frozen=True)
class NegativePolicy:
    """How to pick unanswerable questions from slots absent in an utterance."""

    kind: str  # "all" | "none" | "sample"
    k: int = 0
    seed: int = 0

    @classmethod
    def all_slots(cls) -> "NegativePolicy":
        return cls("all")

    @classmethod
    def none(cls) -> "NegativePolicy":
        return cls("none")

    @classmethod
    def sample(cls, k: int, seed: int = 0) -> "NegativePolicy":
        if k < 0:
            raise ValueError("sample size must be non-negative")
        return cls("sample", k=k, seed=seed)

    @classmethod
    def parse(cls, spec: str, seed: int = 0) -> "NegativePolicy":
        if spec == "all":
            return cls.all_slots()
        if spec == "none":
            return cls.none()
        if spec.startswith("sample:"):
            try:
                return cls.sample(int(spec.split(":", 1)[1]), seed=seed)
            except ValueError:
                pass
        raise ParseError(f"bad negatives policy {spec!r}; expected all, none or sample:K")


def question_for_tag(
    tag: str,
    schema: SlotSchema,
    mode: AblationMode = AblationMode.FULL,
    extra_ordinals: Mapping[str, int] | None = None,
) -> str:
    """Question text for a bare slot tag, treated as a simulated text field."""
    if mode is AblationMode.NO_VISUALS:
        if tag in schema:
            ordinal = schema.ordinal(tag)
        elif extra_ordinals and tag in extra_ordinals:
            ordinal = extra_ordinals[tag]
        else:
            raise ValidationError(f"no stable ordinal for tag {tag!r}")
        return f"{TAG_SYMBOL_PREFIX}{ordinal}"
    label = strip_command_prefix(tag_to_description(tag, schema)).lower()
    return text_field_question(label)


def _occurrence_ids(utterance_id: str, tags: Iterable[str]) -> Iterator[str]:
    # Repeated slots in one utterance get #2, #3... suffixes so ids stay unique.
    counts: dict[str, int] = {}
    for tag in tags:
        counts[tag] = counts.get(tag, 0) + 1
        yield f"{utterance_id}:{tag}" if counts[tag] == 1 else f"{utterance_id}:{tag}#{counts[tag]}"


def to_qa_examples(
    utts: Sequence[AnnotatedUtterance],
    schema: SlotSchema,
    mode: AblationMode = AblationMode.FULL,
    negatives: NegativePolicy = NegativePolicy.none(),
) -> list[QaExample]:
    """One answerable example per gold fill plus policy-driven negatives."""
    unknown = sorted({f.slot_id for u in utts for f in u.slots} - set(schema.tags))
    extra_ordinals = {tag: len(schema) + 1 + i for i, tag in enumerate(unknown)}
    rng = random.Random(negatives.seed)
    examples: list[QaExample] = []
    for utt in utts:
        fills = sorted(utt.slots, key=lambda f: (f.start_char, f.slot_id))
        ids = _occurrence_ids(utt.utterance_id, (f.slot_id for f in fills))
        for fill in fills:
            examples.append(
                QaExample(
                    qa_id=next(ids),
                    question=question_for_tag(fill.slot_id, schema, mode, extra_ordinals),
                    context=utt.text,
                    answers=((fill.surface, fill.start_char),),
                    is_impossible=False,
                )
            )
        if negatives.kind == "none":
            continue
        present = utt.slot_ids()
        absent = [tag for tag in schema.tags if tag not in present]
        if negatives.kind == "sample":
            picked = set(rng.sample(absent, min(negatives.k, len(absent))))
            absent = [tag for tag in absent if tag in picked]
        for tag in absent:
            examples.append(
                QaExample(
                    qa_id=f"{utt.utterance_id}:{tag}",
                    question=question_for_tag(tag, schema, mode, extra_ordinals),
                    context=utt.text,
                    answers=(),
                    is_impossible=True,
                )
            )
    return examples


def squad_dict(examples: Sequence[QaExample], title: str = "slotqa") -> dict:
    """SQuAD v2 shape; consecutive examples sharing a context share a paragraph."""
    paragraphs: list[dict] = []
    for example in examples:
        if not paragraphs or paragraphs[-1]["context"] != example.context:
            paragraphs.append({"context": example.context, "qas": []})
        paragraphs[-1]["qas"].append(
            {
                "id": example.qa_id,
                "question": example.question,
                "answers": [{"text": text, "answer_start": start} for text, start in example.answers],
                "is_impossible": example.is_impossible,
            }
        )
    return {"version": "v2.0", "data": [{"title": title, "paragraphs": paragraphs}]}


def export_squad(examples: Sequence[QaExample], path: str | Path, title: str = "slotqa") -> None:
    for example in examples:
        violations = example.validate()
        if violations:
            raise ValidationError([f"{example.qa_id}: {v}" for v in violations])
    payload = json.dumps(squad_dict(examples, title), ensure_ascii=False, indent=1)
    Path(path).write_text(payload + "\n", encoding="utf-8")


def import_squad(path: str | Path) -> list[QaExample]:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    examples: list[QaExample] = []
    try:
        for entry in obj["data"]:
            for paragraph in entry["paragraphs"]:
                context = paragraph["context"]
                for qa in paragraph["qas"]:
                    examples.append(
                        QaExample(
                            qa_id=qa["id"],
                            question=qa["question"],
                            context=context,
                            answers=tuple(
                                (a["text"], a["answer_start"]) for a in qa["answers"]
                            ),
                            is_impossible=qa["is_impossible"],
                        )
                    )
    except (KeyError, TypeError) as e:
        raise ParseError(f"{path}: not a SQuAD v2 file ({e})") from e
    return examples


def sample_few_shot(
    utts: Sequence[AnnotatedUtterance],
    k: int,
    seed: int,
    stratified: bool = False,
) -> list[AnnotatedUtterance]:
    """Seeded sample of min(k, n) utterances without replacement.

    The result keeps corpus order, so k >= n returns the corpus unchanged
    and equal seeds give identical subsets. Stratified mode round-robins
    over slot types before topping up uniformly.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    n = len(utts)
    if k >= n:
        return list(utts)
    rng = random.Random(seed)
    if not stratified:
        chosen = set(rng.sample(range(n), k))
    else:
        by_slot: dict[str, list[int]] = {}
        for i, utt in enumerate(utts):
            for slot in sorted(utt.slot_ids()):
                by_slot.setdefault(slot, []).append(i)
        chosen = set()
        progress = True
        while len(chosen) < k and progress:
            progress = False
            for slot in sorted(by_slot):
                if len(chosen) >= k:
                    break
                candidates = [i for i in by_slot[slot] if i not in chosen]
                if candidates:
                    chosen.add(rng.choice(candidates))
                    progress = True
        leftover = [i for i in range(n) if i not in chosen]
        if len(chosen) < k:
            chosen.update(rng.sample(leftover, k - len(chosen)))
    return [utts[i] for i in sorted(chosen)]


def slot_coverage(utts: Sequence[AnnotatedUtterance]) -> dict[str, int]:
    """Utterance count per slot type; the post-hoc few-shot coverage report."""
    counts: dict[str, int] = {}
    for utt in utts:
        for slot in utt.slot_ids():
            counts[slot] = counts.get(slot, 0) + 1
    return dict(sorted(counts.items()))


def simulated_screen(schema: SlotSchema, screen_id: str, app_name: str) -> Screen:
    """Render a slot schema as a form of simple text fields, one per slot."""
    elements = tuple(
        GuiElement(
            element_id=f"field_{i:02d}",
            category=GuiCategory.of(CategoryKind.TEXT_FIELD),
            label=schema.lookup(tag) or tag_to_description(tag),
            slot_id=tag,
        )
        for i, tag in enumerate(schema.tags, start=1)
    )
    return Screen(
        screen_id=screen_id,
        app_name=app_name,
        elements=elements,
        visible=frozenset(e.element_id for e in elements),
    )
