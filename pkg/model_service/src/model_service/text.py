"""Whitespace tokenization with character offsets, and a word vocabulary.

Tokens keep their exact character span in the original string so every
predicted token window maps back to a verbatim context substring.
Surrounding punctuation is trimmed from the span; interior punctuation
("8:30", "i'd") stays. Any token containing a digit encodes as a shared
``<num>`` symbol, and unknown words as ``<unk>``.
"""

from __future__ import annotations

import json
import re
import string
from collections import Counter
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

_PUNCT = set(string.punctuation)
_TOKEN_RE = re.compile(r"\S+")
_DIGIT_RE = re.compile(r"\d")


class Token(NamedTuple):
    start: int
    end: int
    form: str  # lowercased, punctuation-trimmed surface


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    for match in _TOKEN_RE.finditer(text):
        start, end = match.start(), match.end()
        while start < end and text[start] in _PUNCT:
            start += 1
        while end > start and text[end - 1] in _PUNCT:
            end -= 1
        if end > start:
            out.append(Token(start, end, text[start:end].lower()))
    return out


PAD, UNK, NUM, CLS, SEP = "<pad>", "<unk>", "<num>", "<cls>", "<sep>"
SPECIALS = (PAD, UNK, NUM, CLS, SEP)


class Vocab:
    """Frozen word→id table with the special symbols at fixed low ids."""

    def __init__(self, words: Sequence[str]):
        for special in SPECIALS:
            if special in words:
                raise ValueError(f"{special!r} is reserved")
        self._words = list(SPECIALS) + list(words)
        self._index = {word: i for i, word in enumerate(self._words)}
        if len(self._index) != len(self._words):
            raise ValueError("duplicate words in vocabulary")

    pad_id = 0
    unk_id = 1
    num_id = 2
    cls_id = 3
    sep_id = 4

    def __len__(self) -> int:
        return len(self._words)

    def id(self, form: str) -> int:
        if _DIGIT_RE.search(form):
            return self.num_id
        return self._index.get(form, self.unk_id)

    def encode(self, tokens: Iterable[Token]) -> list[int]:
        return [self.id(token.form) for token in tokens]

    @classmethod
    def build(cls, forms: Iterable[str], max_size: int = 8000, min_count: int = 1) -> "Vocab":
        counts = Counter(
            form for form in forms
            if form not in SPECIALS and not _DIGIT_RE.search(form)
        )
        ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
        kept = [word for word, count in ranked if count >= min_count]
        return cls(kept[: max_size - len(SPECIALS)])

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps({"words": self._words[len(SPECIALS):]}, indent=1) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "Vocab":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(obj["words"])
