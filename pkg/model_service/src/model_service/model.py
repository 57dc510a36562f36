"""Span-extraction transformer with SQuAD2-style no-answer handling.

The input is ``<cls> question <sep> context`` over a word vocabulary; the
model scores every position as a span start and end. Position 0 (the
``<cls>`` token) doubles as the no-answer target: a prediction is a span
only when the best in-context start/end pair outscores the null pair, and
the gap between the two converts to the wire-format scores through a
sigmoid, so both land in [0, 1].

Deliberately small: under a million parameters, trainable from scratch
on CPU in a few minutes, at the cost of accuracy far below a full
pretrained reading-comprehension model.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import torch
from torch import nn

from .text import Token, Vocab, tokenize


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    d_model: int = 96
    n_heads: int = 4
    n_layers: int = 2
    ff_dim: int = 192
    dropout: float = 0.1
    max_len: int = 64
    max_question: int = 14
    max_context: int = 48
    max_answer: int = 6

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelConfig":
        return cls(**obj)


@dataclass
class Encoded:
    """One encoded question/context pair plus what decoding needs."""

    ids: list[int]
    seg: list[int]
    context: str
    context_offset: int
    context_spans: list[tuple[int, int]] = field(default_factory=list)


def encode_pair(question: str, context: str, vocab: Vocab, cfg: ModelConfig) -> Encoded:
    q_tokens = tokenize(question)[: cfg.max_question]
    c_tokens = tokenize(context)[: cfg.max_context]
    ids = [vocab.cls_id] + vocab.encode(q_tokens) + [vocab.sep_id] + vocab.encode(c_tokens)
    offset = len(q_tokens) + 2
    return Encoded(
        ids=ids,
        seg=[0] * offset + [1] * len(c_tokens),
        context=context,
        context_offset=offset,
        context_spans=[(t.start, t.end) for t in c_tokens],
    )


def answer_token_window(
    tokens: Sequence[Token], answer_start: int, answer_text: str
) -> tuple[int, int] | None:
    """Inclusive token window overlapping the answer's character span."""
    end_char = answer_start + len(answer_text)
    hit = [
        k for k, token in enumerate(tokens)
        if token.start < end_char and token.end > answer_start
    ]
    if not hit:
        return None
    return hit[0], hit[-1]


class SpanExtractor(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.word_emb = nn.Embedding(cfg.vocab_size, cfg.d_model, padding_idx=0)
        self.pos_emb = nn.Embedding(cfg.max_len, cfg.d_model)
        self.seg_emb = nn.Embedding(2, cfg.d_model)
        layer = nn.TransformerEncoderLayer(
            d_model=cfg.d_model,
            nhead=cfg.n_heads,
            dim_feedforward=cfg.ff_dim,
            dropout=cfg.dropout,
            batch_first=True,
        )
        # The nested-tensor fast path is prototype-stage and warns on every
        # masked batch; plain dense attention keeps eval and train identical.
        self.encoder = nn.TransformerEncoder(
            layer, cfg.n_layers, enable_nested_tensor=False
        )
        self.norm = nn.LayerNorm(cfg.d_model)
        self.head = nn.Linear(cfg.d_model, 2)

    def forward(
        self, ids: torch.Tensor, seg: torch.Tensor, pad_mask: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """ids/seg: (B, L) int64; pad_mask: (B, L) bool, True at padding.

        Returns start and end logits, (B, L) each, -inf at padding.
        """
        positions = torch.arange(ids.shape[1], device=ids.device)
        x = self.word_emb(ids) + self.pos_emb(positions)[None, :, :] + self.seg_emb(seg)
        x = self.encoder(self.norm(x), src_key_padding_mask=pad_mask)
        logits = self.head(x)
        neg = torch.finfo(logits.dtype).min
        start = logits[..., 0].masked_fill(pad_mask, neg)
        end = logits[..., 1].masked_fill(pad_mask, neg)
        return start, end


def collate(encoded: Sequence[Encoded], pad_id: int = 0) -> tuple[torch.Tensor, ...]:
    width = max(len(e.ids) for e in encoded)
    ids = torch.full((len(encoded), width), pad_id, dtype=torch.long)
    seg = torch.zeros((len(encoded), width), dtype=torch.long)
    pad_mask = torch.ones((len(encoded), width), dtype=torch.bool)
    for row, e in enumerate(encoded):
        n = len(e.ids)
        ids[row, :n] = torch.tensor(e.ids, dtype=torch.long)
        seg[row, :n] = torch.tensor(e.seg, dtype=torch.long)
        pad_mask[row, :n] = False
    return ids, seg, pad_mask


@dataclass(frozen=True)
class Prediction:
    text: str | None
    answer_start: int | None
    span_score: float
    no_answer_score: float


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-min(x, 60.0)))
    z = math.exp(max(x, -60.0))
    return z / (1.0 + z)


def _decode_one(
    start_l: torch.Tensor, end_l: torch.Tensor, enc: Encoded, max_answer: int
) -> Prediction:
    n = len(enc.context_spans)
    if n == 0:
        return Prediction(None, None, 0.0, 1.0)
    off = enc.context_offset
    null_score = float(start_l[0] + end_l[0])
    ctx_start = start_l[off : off + n]
    ctx_end = end_l[off : off + n]
    best = -math.inf
    best_i = best_j = 0
    for width in range(min(max_answer, n)):
        cand = ctx_start[: n - width] + ctx_end[width:]
        value, index = torch.max(cand, dim=0)
        if float(value) > best:
            best = float(value)
            best_i = int(index)
            best_j = best_i + width
    no_answer = _sigmoid(null_score - best)
    span = 1.0 - no_answer
    if null_score >= best:
        return Prediction(None, None, span, no_answer)
    char_start = enc.context_spans[best_i][0]
    char_end = enc.context_spans[best_j][1]
    return Prediction(enc.context[char_start:char_end], char_start, span, no_answer)


def predict(
    model: SpanExtractor,
    vocab: Vocab,
    pairs: Sequence[tuple[str, str]],
    batch_size: int = 64,
) -> list[Prediction]:
    """Batched inference over (question, context) pairs, order preserved."""
    cfg = model.cfg
    model.eval()
    out: list[Prediction] = []
    with torch.no_grad():
        for at in range(0, len(pairs), batch_size):
            chunk = pairs[at : at + batch_size]
            encoded = [encode_pair(q, c, vocab, cfg) for q, c in chunk]
            ids, seg, pad_mask = collate(encoded, vocab.pad_id)
            start, end = model(ids, seg, pad_mask)
            for row, enc in enumerate(encoded):
                out.append(_decode_one(start[row], end[row], enc, cfg.max_answer))
    return out
