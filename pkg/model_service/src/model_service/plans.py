"""Staged fine-tuning manifests (consumer side).

A manifest is JSON ``{"version": 1, "stages": [...]}`` where each stage
carries ``index`` (1-based, contiguous), ``dataset`` (a reference: either
a path to a SQuAD v2.0 file or the symbolic name of a bundled set such as
"squad2"), ``epochs``, ``learning_rate``, ``freeze``, an optional
``kind`` ("base" or "domain"), and ``evaluate_only``. Evaluate-only
stages run no training and write no checkpoint; they exist so a plan can
end with a scoring pass over data the served weights never saw.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ManifestError

GENERAL_QA_REF = "squad2"
FREEZE_CHOICES = ("none", "embeddings")


@dataclass(frozen=True)
class PlanStage:
    index: int
    dataset: str
    epochs: int
    learning_rate: float
    freeze: str = "none"
    kind: str | None = None
    evaluate_only: bool = False


@dataclass(frozen=True)
class Plan:
    stages: tuple[PlanStage, ...]

    def __len__(self) -> int:
        return len(self.stages)


def _parse_stage(obj: dict, position: int) -> PlanStage:
    where = f"stages[{position}]"
    if not isinstance(obj, dict):
        raise ManifestError(f"{where}: expected an object")
    try:
        index = obj["index"]
        dataset = obj["dataset"]
        epochs = obj["epochs"]
    except KeyError as exc:
        raise ManifestError(f"{where}: missing {exc}") from None
    if not isinstance(index, int) or isinstance(index, bool):
        raise ManifestError(f"{where}: index must be an integer")
    if not isinstance(dataset, str) or not dataset.strip():
        raise ManifestError(f"{where}: dataset must be a non-empty string")
    if not isinstance(epochs, int) or isinstance(epochs, bool) or epochs < 0:
        raise ManifestError(f"{where}: epochs must be a non-negative integer")
    raw_rate = obj.get("learning_rate", "3e-4")
    try:
        learning_rate = float(raw_rate)
    except (TypeError, ValueError):
        raise ManifestError(f"{where}: learning_rate {raw_rate!r} is not a number") from None
    if not learning_rate > 0:
        raise ManifestError(f"{where}: learning_rate must be positive")
    freeze = obj.get("freeze", "none")
    if freeze not in FREEZE_CHOICES:
        raise ManifestError(
            f"{where}: freeze must be one of {', '.join(FREEZE_CHOICES)}; got {freeze!r}"
        )
    kind = obj.get("kind")
    if kind is not None and kind not in ("base", "domain"):
        raise ManifestError(f"{where}: kind must be 'base' or 'domain'; got {kind!r}")
    return PlanStage(
        index=index,
        dataset=dataset,
        epochs=epochs,
        learning_rate=learning_rate,
        freeze=freeze,
        kind=kind,
        evaluate_only=bool(obj.get("evaluate_only", False)),
    )


def plan_from_dict(obj: dict) -> Plan:
    if not isinstance(obj, dict):
        raise ManifestError("manifest must be a JSON object")
    if obj.get("version") != 1:
        raise ManifestError(f"unsupported manifest version {obj.get('version')!r}")
    raw_stages = obj.get("stages")
    if not isinstance(raw_stages, list) or not raw_stages:
        raise ManifestError("manifest needs a non-empty 'stages' list")
    stages = tuple(_parse_stage(s, i) for i, s in enumerate(raw_stages))
    for expected, stage in enumerate(stages, start=1):
        if stage.index != expected:
            raise ManifestError(
                f"stage indices must be contiguous from 1; "
                f"position {expected} has index {stage.index}"
            )
    return Plan(stages=stages)


def load_plan(path: str | Path) -> Plan:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path} is not valid JSON: {exc}") from None
    return plan_from_dict(obj)
