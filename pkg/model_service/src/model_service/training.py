"""Training loop and staged-plan execution.

``train_stage`` runs a seeded SQuAD2-style span objective: cross-entropy
on start and end positions, with the ``<cls>`` position as the target for
unanswerable questions, plus word dropout on context tokens so the model
keeps working on out-of-vocabulary answers.

``PlanExecutor`` runs a manifest stage by stage. Stage 1 trains from
scratch (or is reused when a matching base checkpoint already exists);
every later stage fine-tunes the nearest earlier checkpoint and writes a
new one — never touching existing directories. Evaluate-only stages score
the latest checkpoint on their dataset and write nothing. The first
failing stage halts the plan with a ``StageError`` naming that stage and
carrying the outcomes completed before it.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import torch
from torch.nn.utils import clip_grad_norm_

from .checkpoints import CheckpointStore
from .errors import CheckpointError, DatasetError, ModelServiceError, StageError
from .generalqa import generate_general_qa
from .model import (
    Encoded,
    ModelConfig,
    SpanExtractor,
    answer_token_window,
    collate,
    encode_pair,
    predict,
)
from .plans import GENERAL_QA_REF, Plan, PlanStage
from .squad import QaRecord, load_squad
from .text import Vocab, tokenize

Logger = Callable[[str], None]


@dataclass(frozen=True)
class TrainSettings:
    epochs: int
    learning_rate: float
    batch_size: int = 64
    seed: int = 0
    word_dropout: float = 0.1
    freeze: str = "none"
    max_grad_norm: float = 1.0


@dataclass(frozen=True)
class TrainExample:
    encoded: Encoded
    start: int
    end: int


def prepare_examples(
    records: Sequence[QaRecord], vocab: Vocab, cfg: ModelConfig
) -> tuple[list[TrainExample], int]:
    """Encode records with token-level targets; count the unmappable ones."""
    examples: list[TrainExample] = []
    skipped = 0
    for record in records:
        encoded = encode_pair(record.question, record.context, vocab, cfg)
        if record.is_impossible:
            examples.append(TrainExample(encoded, 0, 0))
            continue
        tokens = tokenize(record.context)[: cfg.max_context]
        window = answer_token_window(tokens, record.answer_start, record.answer_text)
        if window is None:
            skipped += 1
            continue
        first, last = window
        offset = encoded.context_offset
        examples.append(TrainExample(encoded, offset + first, offset + last))
    return examples, skipped


def _apply_word_dropout(
    ids: torch.Tensor, seg: torch.Tensor, p: float, unk_id: int,
    generator: torch.Generator,
) -> torch.Tensor:
    if p <= 0:
        return ids
    drop = (torch.rand(ids.shape, generator=generator) < p) & (seg == 1)
    return ids.masked_fill(drop, unk_id)


def train_stage(
    model: SpanExtractor,
    examples: Sequence[TrainExample],
    vocab: Vocab,
    settings: TrainSettings,
    log: Logger | None = None,
) -> dict:
    if not examples:
        raise DatasetError("no usable training examples")
    torch.manual_seed(settings.seed)
    generator = torch.Generator().manual_seed(settings.seed)
    if settings.freeze == "embeddings":
        for emb in (model.word_emb, model.pos_emb, model.seg_emb):
            for param in emb.parameters():
                param.requires_grad_(False)
    params = [p for p in model.parameters() if p.requires_grad]
    optimizer = torch.optim.Adam(params, lr=settings.learning_rate)
    loss_fn = torch.nn.CrossEntropyLoss()
    model.train()
    total_loss = 0.0
    total_steps = 0
    for epoch in range(settings.epochs):
        order = torch.randperm(len(examples), generator=generator).tolist()
        epoch_loss = 0.0
        epoch_steps = 0
        for at in range(0, len(order), settings.batch_size):
            batch = [examples[i] for i in order[at : at + settings.batch_size]]
            ids, seg, pad_mask = collate([b.encoded for b in batch], vocab.pad_id)
            ids = _apply_word_dropout(
                ids, seg, settings.word_dropout, vocab.unk_id, generator
            )
            starts = torch.tensor([b.start for b in batch], dtype=torch.long)
            ends = torch.tensor([b.end for b in batch], dtype=torch.long)
            start_logits, end_logits = model(ids, seg, pad_mask)
            loss = (loss_fn(start_logits, starts) + loss_fn(end_logits, ends)) / 2
            optimizer.zero_grad()
            loss.backward()
            clip_grad_norm_(params, settings.max_grad_norm)
            optimizer.step()
            epoch_loss += float(loss.detach())
            epoch_steps += 1
        total_loss += epoch_loss
        total_steps += epoch_steps
        if log is not None:
            log(f"  epoch {epoch + 1}/{settings.epochs}: "
                f"loss {epoch_loss / max(epoch_steps, 1):.4f}")
    model.eval()
    return {
        "examples": len(examples),
        "steps": total_steps,
        "loss": round(total_loss / max(total_steps, 1), 6),
    }


def evaluate_records(
    model: SpanExtractor, vocab: Vocab, records: Sequence[QaRecord]
) -> dict:
    """Exact-match and no-answer tallies; informational only."""
    predictions = predict(model, vocab, [(r.question, r.context) for r in records])
    exact = 0
    gold_null = 0
    predicted_null = 0
    for record, pred in zip(records, predictions):
        if record.is_impossible:
            gold_null += 1
            exact += pred.text is None
        else:
            exact += pred.text == record.answer_text
        predicted_null += pred.text is None
    return {
        "examples": len(records),
        "exact_match": exact,
        "gold_no_answer": gold_null,
        "predicted_no_answer": predicted_null,
    }


@dataclass(frozen=True)
class StageOutcome:
    index: int
    dataset: str
    status: str  # "trained" | "reused" | "evaluated"
    examples: int
    epochs: int
    loss: float | None = None
    checkpoint: str | None = None
    metrics: dict | None = None

    def describe(self) -> str:
        if self.status == "reused":
            return f"stage {self.index}: reused existing checkpoint ({self.dataset})"
        if self.status == "evaluated":
            m = self.metrics or {}
            return (
                f"stage {self.index}: evaluated {self.dataset} — "
                f"{m.get('exact_match', 0)}/{m.get('examples', 0)} exact"
            )
        return (
            f"stage {self.index}: trained on {self.dataset} "
            f"({self.examples} examples, {self.epochs} epochs, "
            f"loss {self.loss}) -> {self.checkpoint}"
        )


@dataclass(frozen=True)
class TrainDefaults:
    batch_size: int = 64
    seed: int = 0
    word_dropout: float = 0.1
    general_qa_size: int = 6000
    general_qa_seed: int = 11


DEFAULT_MODEL_SHAPE = dict(
    d_model=128, n_heads=4, n_layers=3, ff_dim=256, dropout=0.1
)


class PlanExecutor:
    """Runs a validated plan against a checkpoint store."""

    def __init__(
        self,
        store: CheckpointStore,
        base_dir: str | Path | None = None,
        defaults: TrainDefaults = TrainDefaults(),
        model_shape: dict | None = None,
        log: Logger | None = None,
    ):
        self.store = store
        self.base_dir = Path(base_dir) if base_dir is not None else None
        self.defaults = defaults
        self.model_shape = dict(DEFAULT_MODEL_SHAPE, **(model_shape or {}))
        self.log = log or (lambda message: None)

    # -- dataset resolution -------------------------------------------------

    def resolve_dataset(self, ref: str) -> list[QaRecord]:
        if ref == GENERAL_QA_REF:
            return generate_general_qa(
                self.defaults.general_qa_size, self.defaults.general_qa_seed
            )
        path = Path(ref)
        if not path.is_absolute() and self.base_dir is not None:
            candidate = self.base_dir / path
            if candidate.exists():
                path = candidate
        if not path.exists():
            raise DatasetError(f"dataset {ref!r} not found")
        return load_squad(path)

    # -- plan execution -----------------------------------------------------

    def run(self, plan: Plan) -> list[StageOutcome]:
        completed: list[StageOutcome] = []
        for stage in plan.stages:
            try:
                outcome = self._run_stage(stage)
            except ModelServiceError as exc:
                raise StageError(stage.index, str(exc), completed) from exc
            completed.append(outcome)
            self.log(outcome.describe())
        return completed

    def _settings_for(self, stage: PlanStage) -> TrainSettings:
        return TrainSettings(
            epochs=stage.epochs,
            learning_rate=stage.learning_rate,
            batch_size=self.defaults.batch_size,
            seed=self.defaults.seed,
            word_dropout=self.defaults.word_dropout,
            freeze=stage.freeze,
        )

    def _parent_index(self, index: int) -> int | None:
        earlier = [i for i in self.store.stage_indices() if i < index]
        return earlier[-1] if earlier else None

    def _run_stage(self, stage: PlanStage) -> StageOutcome:
        if self.store.has_stage(stage.index):
            if stage.kind == "base" and not stage.evaluate_only:
                meta = self.store.load_meta(stage.index)
                if meta.get("dataset") != stage.dataset:
                    raise CheckpointError(
                        f"existing stage {stage.index} checkpoint was trained on "
                        f"{meta.get('dataset')!r} but the plan names {stage.dataset!r}"
                    )
                return StageOutcome(
                    index=stage.index,
                    dataset=stage.dataset,
                    status="reused",
                    examples=int(meta.get("examples", 0)),
                    epochs=int(meta.get("epochs", 0)),
                    checkpoint=str(self.store.stage_dir(stage.index)),
                )
            raise CheckpointError(
                f"stage {stage.index} checkpoint already exists; "
                "checkpoints are immutable"
            )

        records = self.resolve_dataset(stage.dataset)

        if stage.evaluate_only:
            serving = self._parent_index(stage.index)
            if serving is None:
                raise CheckpointError(
                    "evaluate-only stage needs an earlier checkpoint to score"
                )
            model, vocab, _ = self.store.load_stage(serving)
            metrics = evaluate_records(model, vocab, records)
            return StageOutcome(
                index=stage.index,
                dataset=stage.dataset,
                status="evaluated",
                examples=len(records),
                epochs=0,
                metrics=metrics,
            )

        parent = self._parent_index(stage.index)
        if stage.index == 1 or parent is None:
            if stage.index != 1:
                raise CheckpointError(
                    f"stage {stage.index} has no earlier checkpoint to start from"
                )
            torch.manual_seed(self.defaults.seed)
            vocab = Vocab.build(
                form
                for record in records
                for token in tokenize(record.question) + tokenize(record.context)
                for form in (token.form,)
            )
            cfg = ModelConfig(vocab_size=len(vocab), **self.model_shape)
            model = SpanExtractor(cfg)
            parent_label = None
        else:
            model, vocab, _ = self.store.load_stage(parent)
            parent_label = parent

        examples, skipped = prepare_examples(records, vocab, model.cfg)
        if skipped:
            self.log(f"  stage {stage.index}: skipped {skipped} unmappable answers")
        stats = train_stage(model, examples, vocab, self._settings_for(stage), self.log)
        meta = {
            "dataset": stage.dataset,
            "kind": stage.kind,
            "epochs": stage.epochs,
            "learning_rate": stage.learning_rate,
            "freeze": stage.freeze,
            "parent": parent_label,
            "examples": stats["examples"],
            "loss": stats["loss"],
        }
        checkpoint = self.store.save_stage(stage.index, model, vocab, meta)
        return StageOutcome(
            index=stage.index,
            dataset=stage.dataset,
            status="trained",
            examples=stats["examples"],
            epochs=stage.epochs,
            loss=stats["loss"],
            checkpoint=str(checkpoint),
        )


def base_plan(epochs: int = 20, learning_rate: float = 5e-4) -> Plan:
    """Single-stage plan that trains the general-QA base model."""
    return Plan(
        stages=(
            PlanStage(
                index=1,
                dataset=GENERAL_QA_REF,
                epochs=epochs,
                learning_rate=learning_rate,
                kind="base",
            ),
        )
    )


def init_base(
    store: CheckpointStore,
    epochs: int = 20,
    learning_rate: float = 5e-4,
    defaults: TrainDefaults = TrainDefaults(),
    model_shape: dict | None = None,
    log: Logger | None = None,
) -> StageOutcome:
    """Train (or reuse) the stage-1 general-QA checkpoint."""
    executor = PlanExecutor(
        store, defaults=defaults, model_shape=model_shape, log=log
    )
    return executor.run(base_plan(epochs, learning_rate))[0]
