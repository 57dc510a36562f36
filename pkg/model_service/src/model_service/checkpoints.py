"""Checkpoint storage: one immutable directory per completed stage.

Layout under the model directory:

    stages/<index>/weights.pt     model state dict
    stages/<index>/config.json    model hyperparameters
    stages/<index>/vocab.json     word vocabulary
    stages/<index>/meta.json      stage index, dataset reference, lineage

A stage directory is written whole into a temporary sibling and renamed
into place, and an existing stage is never overwritten: training always
produces a new directory, so previously written checkpoints stay
byte-stable for the lifetime of the store.
"""

from __future__ import annotations

import hashlib
import json
import pickle
import shutil
import time
import uuid
from pathlib import Path

import torch

from .errors import CheckpointError
from .model import ModelConfig, SpanExtractor
from .text import Vocab

WEIGHTS_FILE = "weights.pt"
CONFIG_FILE = "config.json"
VOCAB_FILE = "vocab.json"
META_FILE = "meta.json"


class CheckpointStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)

    @property
    def stages_dir(self) -> Path:
        return self.root / "stages"

    def stage_dir(self, index: int) -> Path:
        return self.stages_dir / str(index)

    def has_stage(self, index: int) -> bool:
        return (self.stage_dir(index) / META_FILE).is_file()

    def stage_indices(self) -> list[int]:
        if not self.stages_dir.is_dir():
            return []
        found = []
        for entry in self.stages_dir.iterdir():
            if entry.name.isdigit() and (entry / META_FILE).is_file():
                found.append(int(entry.name))
        return sorted(found)

    def latest(self) -> int | None:
        indices = self.stage_indices()
        return indices[-1] if indices else None

    def save_stage(
        self,
        index: int,
        model: SpanExtractor,
        vocab: Vocab,
        meta: dict,
    ) -> Path:
        final = self.stage_dir(index)
        if final.exists():
            raise CheckpointError(
                f"stage {index} checkpoint already exists at {final}; "
                "checkpoints are immutable — use a fresh model directory"
            )
        self.stages_dir.mkdir(parents=True, exist_ok=True)
        tmp = self.stages_dir / f".tmp-{index}-{uuid.uuid4().hex[:8]}"
        tmp.mkdir()
        try:
            torch.save(model.state_dict(), tmp / WEIGHTS_FILE)
            (tmp / CONFIG_FILE).write_text(
                json.dumps(model.cfg.to_dict(), indent=1) + "\n", encoding="utf-8"
            )
            vocab.save(tmp / VOCAB_FILE)
            full_meta = {"stage": index, "created": time.strftime("%Y-%m-%dT%H:%M:%S")}
            full_meta.update(meta)
            (tmp / META_FILE).write_text(
                json.dumps(full_meta, indent=1) + "\n", encoding="utf-8"
            )
            tmp.rename(final)
        except BaseException:
            shutil.rmtree(tmp, ignore_errors=True)
            raise
        return final

    def load_meta(self, index: int) -> dict:
        path = self.stage_dir(index) / META_FILE
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise CheckpointError(f"no checkpoint for stage {index}: {exc}") from None

    def load_stage(self, index: int) -> tuple[SpanExtractor, Vocab, dict]:
        directory = self.stage_dir(index)
        if not self.has_stage(index):
            raise CheckpointError(f"no checkpoint for stage {index} under {self.stages_dir}")
        try:
            cfg = ModelConfig.from_dict(
                json.loads((directory / CONFIG_FILE).read_text(encoding="utf-8"))
            )
            vocab = Vocab.load(directory / VOCAB_FILE)
            model = SpanExtractor(cfg)
            state = torch.load(directory / WEIGHTS_FILE, map_location="cpu")
            model.load_state_dict(state)
        except (OSError, EOFError, KeyError, ValueError, RuntimeError,
                pickle.UnpicklingError) as exc:
            raise CheckpointError(f"stage {index} checkpoint is unreadable: {exc}") from None
        model.eval()
        return model, vocab, self.load_meta(index)

    def checksum(self, index: int) -> str:
        """Short content hash of the stage's weights, for model identity."""
        path = self.stage_dir(index) / WEIGHTS_FILE
        try:
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
        except OSError as exc:
            raise CheckpointError(f"no weights for stage {index}: {exc}") from None
        return digest[:12]

    def stage_history(self) -> list[tuple[int, str]]:
        """(stage index, dataset reference) pairs, strictly increasing."""
        history = []
        for index in self.stage_indices():
            meta = self.load_meta(index)
            history.append((index, str(meta.get("dataset", "?"))))
        for (a, _), (b, _) in zip(history, history[1:]):
            if b <= a:
                raise CheckpointError("stage history is not strictly increasing")
        return history
