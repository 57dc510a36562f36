"""Few-shot experiment grid, distractor robustness sweep, and staged
fine-tuning plans.

The grid runner evaluates (domain, train size, seed) cells with a shared
or per-cell extraction backend, aggregates weighted token F1 to mean and
standard deviation per (domain, size) row, and renders deterministic
tables. Training itself happens elsewhere: each cell emits a staged plan
(general QA corpus first, then domain data) that a model service can
execute, and an optional trainer hook is invoked for sizes above zero.
Published reference scores from prior experiments ship as constants for
side-by-side display; they are never asserted against local runs.
"""

from __future__ import annotations

import json
import random
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .backends import BackendConfig, OracleBackend, QaBackend
from .conversion import AnnotatedUtterance, SlotSchema, question_for_tag, sample_few_shot
from .dispatch import SlotFillResult, fill_from_questions, fill_slots
from .errors import EmptyPlan, InsufficientScreens, ValidationError
from .metrics import MetricsReport, token_f1
from .questions import DEFAULT_RULES, AblationMode, Question, QuestionRules, generate_questions
from .screens import Screen, visible_elements

# Dataset slot that stage 1 of every multi-stage plan must occupy: a
# general-purpose extractive QA corpus with unanswerable questions.
GENERAL_QA_DATASET = "squad2"

STAGE_KIND_BASE = "base"
STAGE_KIND_DOMAIN = "domain"

COUNT_MODES = ("screens", "elements")

# Reference weighted token F1 from previously published experiments, keyed
# by domain and training-set size. "baseline" is the external BERT joint
# intent/slot tagger; "extractive_qa" is the question-answering approach
# implemented here, run at full model scale. Attached to reports as
# metadata only.
PUBLISHED_REFERENCE_F1: dict[str, dict[str, dict[int, float]]] = {
    "vehicle_logger": {
        "baseline": {0: 0.00, 5: 0.00, 50: 0.48, 100: 0.45, 500: 0.78},
        "extractive_qa": {0: 0.48, 5: 0.46, 50: 0.73, 100: 0.80, 500: 0.87},
    },
    "atis_visual": {
        "baseline": {0: 0.00, 5: 0.00, 50: 0.66, 100: 0.77, 500: 0.91},
        "extractive_qa": {0: 0.60, 5: 0.74, 50: 0.88, 100: 0.93, 500: 0.97},
    },
    "united": {
        "baseline": {0: 0.00, 5: 0.00, 50: 0.37, 100: 0.44, 500: 0.51},
        "extractive_qa": {0: 0.40, 5: 0.44, 50: 0.58, 100: 0.72, 500: 0.74},
    },
    "trip_advisor": {
        "baseline": {0: 0.00, 5: 0.00, 50: 0.18, 100: 0.53, 500: 0.59},
        "extractive_qa": {0: 0.52, 5: 0.47, 50: 0.63, 100: 0.66, 500: 0.66},
    },
}

# Reference ablation scores (vehicle_logger domain) for the three question
# modes over training-set sizes.
PUBLISHED_ABLATION_F1: dict[AblationMode, dict[int, float]] = {
    AblationMode.NO_VISUALS: {0: 0.01, 50: 0.29, 100: 0.32, 500: 0.71},
    AblationMode.TEXT_ONLY: {0: 0.36, 50: 0.69, 100: 0.71, 500: 0.88},
    AblationMode.FULL: {0: 0.48, 50: 0.73, 100: 0.80, 500: 0.87},
}

# Reference cross-domain transfer scores for vehicle_logger: single-task
# versus an extra fine-tuning stage on atis_visual beforehand.
PUBLISHED_CROSS_DOMAIN_F1: dict[str, dict[int, float]] = {
    "single_task": {0: 0.48, 5: 0.46, 100: 0.80, 500: 0.87},
    "with_atis_visual": {0: 0.52, 5: 0.60, 100: 0.80, 500: 0.89},
}

# Reference zero-shot scores when 1..5 visual element groups are shown at
# once (one target plus distractors).
PUBLISHED_DISTRACTOR_F1: dict[str, dict[int, float]] = {
    "vehicle_logger": {1: 0.52, 2: 0.51, 3: 0.49, 4: 0.49, 5: 0.46},
    "atis_visual": {1: 0.60, 2: 0.58, 3: 0.56, 4: 0.53, 5: 0.52},
}


# ---------------------------------------------------------------------------
# Staged training plans


@dataclass(frozen=True)
class StageSpec:
    """One requested fine-tuning stage, before index assignment."""

    dataset_ref: str
    epochs: int = 2
    learning_rate: str = "3e-5"
    freeze: str = "none"
    kind: str | None = None  # base | domain; inferred when omitted
    evaluate_only: bool = False


@dataclass(frozen=True)
class Stage:
    index: int
    dataset_ref: str
    epochs: int
    learning_rate: str
    freeze: str
    kind: str
    evaluate_only: bool

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "dataset": self.dataset_ref,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "freeze": self.freeze,
            "kind": self.kind,
            "evaluate_only": self.evaluate_only,
        }


@dataclass(frozen=True)
class TrainingPlan:
    stages: tuple[Stage, ...]

    @property
    def n(self) -> int:
        return len(self.stages)

    def serving_stage(self) -> int:
        """Index of the checkpoint to serve: the last stage that trains."""
        for stage in reversed(self.stages):
            if not stage.evaluate_only:
                return stage.index
        return self.stages[0].index

    def validate(self) -> list[str]:
        violations = []
        if not self.stages:
            violations.append("plan has no stages")
            return violations
        for position, stage in enumerate(self.stages, start=1):
            if stage.index != position:
                violations.append(
                    f"stage indices must be contiguous from 1; found {stage.index} at position {position}"
                )
            if stage.kind not in (STAGE_KIND_BASE, STAGE_KIND_DOMAIN):
                violations.append(f"stage {stage.index}: unknown kind {stage.kind!r}")
            if not stage.dataset_ref:
                violations.append(f"stage {stage.index}: empty dataset reference")
            if stage.epochs < 0:
                violations.append(f"stage {stage.index}: negative epochs")
        if len(self.stages) >= 2 and self.stages[0].kind != STAGE_KIND_BASE:
            violations.append("multi-stage plans must start from the general QA stage")
        return violations

    def to_dict(self) -> dict:
        return {"version": 1, "stages": [s.to_dict() for s in self.stages]}


def build_curriculum(
    stage_specs: Sequence[StageSpec],
    zero_shot_target: bool = False,
) -> TrainingPlan:
    """Assemble and validate a staged plan from specs in training order.

    Auxiliary domains go before the target domain, so transfer plans are
    simply longer spec lists. With `zero_shot_target` the final stage is
    marked evaluate-only: the model trained through stage N-1 is scored
    on the target data without seeing it.
    """
    if not stage_specs:
        raise EmptyPlan("at least one stage is required")
    stages = []
    for index, spec in enumerate(stage_specs, start=1):
        kind = spec.kind
        if kind is None:
            kind = STAGE_KIND_BASE if (index == 1 and len(stage_specs) >= 2) else STAGE_KIND_DOMAIN
        evaluate_only = spec.evaluate_only or (zero_shot_target and index == len(stage_specs))
        stages.append(
            Stage(
                index=index,
                dataset_ref=spec.dataset_ref,
                epochs=0 if evaluate_only else spec.epochs,
                learning_rate=spec.learning_rate,
                freeze=spec.freeze,
                kind=kind,
                evaluate_only=evaluate_only,
            )
        )
    plan = TrainingPlan(stages=tuple(stages))
    violations = plan.validate()
    if violations:
        raise ValidationError(violations)
    return plan


def curriculum_from_datasets(
    dataset_refs: Sequence[str],
    zero_shot_target: bool = False,
    epochs: int = 2,
) -> TrainingPlan:
    """Shorthand: one default-configured stage per dataset reference."""
    return build_curriculum(
        [StageSpec(dataset_ref=ref, epochs=epochs) for ref in dataset_refs],
        zero_shot_target=zero_shot_target,
    )


def save_plan(plan: TrainingPlan, path: str | Path) -> None:
    Path(path).write_text(json.dumps(plan.to_dict(), indent=1) + "\n", encoding="utf-8")


def load_plan(path: str | Path) -> TrainingPlan:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    stages = tuple(
        Stage(
            index=s["index"],
            dataset_ref=s["dataset"],
            epochs=s["epochs"],
            learning_rate=s.get("learning_rate", "3e-5"),
            freeze=s.get("freeze", "none"),
            kind=s["kind"],
            evaluate_only=s.get("evaluate_only", False),
        )
        for s in obj["stages"]
    )
    plan = TrainingPlan(stages=stages)
    violations = plan.validate()
    if violations:
        raise ValidationError(violations)
    return plan


# ---------------------------------------------------------------------------
# Experiment configuration and data bundles


@dataclass(frozen=True)
class ExperimentConfig:
    domains: tuple[str, ...]
    train_sizes: tuple[int, ...] = (0, 5, 50, 100, 500)
    seeds: tuple[int, ...] = (0,)
    mode: AblationMode = AblationMode.FULL
    distractor_range: tuple[int, ...] = (1, 2, 3, 4, 5)
    taus: tuple[float, ...] = (0.5,)
    split_frac: float = 0.8
    split_seed: int = 13
    jobs: int = 1
    count_mode: str = "screens"

    def __post_init__(self) -> None:
        violations = []
        if not self.domains:
            violations.append("domains must be non-empty")
        if any(k < 0 for k in self.train_sizes):
            violations.append("train sizes must be non-negative")
        if not self.seeds:
            violations.append("seeds must be non-empty")
        if not 0.0 < self.split_frac < 1.0:
            violations.append("split fraction must be in (0, 1)")
        if self.jobs < 1:
            violations.append("jobs must be at least 1")
        if self.count_mode not in COUNT_MODES:
            violations.append(f"count_mode must be one of {COUNT_MODES}")
        if any(v < 1 for v in self.distractor_range):
            violations.append("distractor counts must be at least 1")
        if violations:
            raise ValidationError(violations)


@dataclass(frozen=True)
class DomainData:
    """A domain's annotated corpus plus its slot schema.

    `heldout` carries an official test split when one exists; otherwise
    the harness splits `utterances` deterministically.
    """

    name: str
    utterances: tuple[AnnotatedUtterance, ...]
    schema: SlotSchema
    heldout: tuple[AnnotatedUtterance, ...] | None = None


def split_corpus(
    utts: Sequence[AnnotatedUtterance],
    frac: float = 0.8,
    seed: int = 13,
) -> tuple[list[AnnotatedUtterance], list[AnnotatedUtterance]]:
    """Seeded train/test partition; both halves keep corpus order."""
    n = len(utts)
    if n < 2:
        raise ValidationError("need at least 2 utterances to split")
    indices = list(range(n))
    random.Random(seed).shuffle(indices)
    n_train = min(max(int(frac * n), 1), n - 1)
    train_idx = sorted(indices[:n_train])
    test_idx = sorted(indices[n_train:])
    return [utts[i] for i in train_idx], [utts[i] for i in test_idx]


def domain_split(
    domain: DomainData,
    frac: float = 0.8,
    seed: int = 13,
) -> tuple[list[AnnotatedUtterance], list[AnnotatedUtterance]]:
    if domain.heldout is not None:
        return list(domain.utterances), list(domain.heldout)
    return split_corpus(domain.utterances, frac, seed)


def schema_questions(
    schema: SlotSchema,
    mode: AblationMode = AblationMode.FULL,
) -> list[Question]:
    """One question per schema slot, in schema order."""
    return [
        Question(text=question_for_tag(tag, schema, mode), slot_id=tag)
        for tag in schema.tags
    ]


def oracle_for_domain(
    domain: DomainData,
    mode: AblationMode = AblationMode.FULL,
) -> OracleBackend:
    """Gold-teacher backend covering the full domain corpus."""
    question_by_slot = {q.slot_id: q.text for q in schema_questions(domain.schema, mode)}
    utts: list[AnnotatedUtterance] = list(domain.utterances)
    if domain.heldout:
        utts.extend(domain.heldout)
    return OracleBackend.from_annotations(utts, question_by_slot)


def oracle_for_screen(
    screen: Screen,
    utts: Sequence[AnnotatedUtterance],
    mode: AblationMode = AblationMode.FULL,
    rules: QuestionRules = DEFAULT_RULES,
) -> OracleBackend:
    """Gold-teacher backend keyed by the screen's own question texts, for
    end-to-end runs through the screen pipeline."""
    question_by_slot = {q.slot_id: q.text for q in generate_questions(screen, mode, rules=rules)}
    return OracleBackend.from_annotations(utts, question_by_slot)


def evaluate_corpus(
    gold: Sequence[AnnotatedUtterance],
    questions: Sequence[Question],
    backend: QaBackend,
    cfg: BackendConfig = BackendConfig(),
    mode: AblationMode = AblationMode.FULL,
    raw: bool = False,
) -> MetricsReport:
    """Ask every question against every utterance and score the fills."""
    predicted = [
        fill_from_questions(
            questions, utt.text, backend, cfg, mode=mode, utterance_id=utt.utterance_id
        )
        for utt in gold
    ]
    return token_f1(gold, predicted, raw=raw)


# ---------------------------------------------------------------------------
# Few-shot grid


@dataclass(frozen=True)
class GridCell:
    domain: str
    k: int
    seed: int

    @property
    def key(self) -> str:
        return f"{self.domain}:k={self.k}:seed={self.seed}"


@dataclass
class CellResult:
    cell: GridCell
    weighted_f1: float | None
    report: MetricsReport | None
    plan: TrainingPlan | None
    trained: bool
    error: str | None = None


@dataclass(frozen=True)
class RowSummary:
    domain: str
    k: int
    seed_count: int
    mean_f1: float | None
    sd_f1: float | None
    errors: int
    cell_keys: tuple[str, ...]  # references into the per-cell breakdown


BackendFactory = Callable[[GridCell], QaBackend]
TrainerHook = Callable[[TrainingPlan, Sequence[AnnotatedUtterance], GridCell], None]


@dataclass
class SweepResult:
    config: ExperimentConfig
    rows: list[RowSummary]
    cells: list[CellResult]
    reference: Mapping[str, dict] | None = None

    def to_dict(self) -> dict:
        return {
            "config": {
                "domains": list(self.config.domains),
                "train_sizes": list(self.config.train_sizes),
                "seeds": list(self.config.seeds),
                "mode": self.config.mode.value,
                "split_frac": self.config.split_frac,
                "split_seed": self.config.split_seed,
            },
            "rows": [
                {
                    "domain": row.domain,
                    "k": row.k,
                    "seed_count": row.seed_count,
                    "weighted_f1_mean": row.mean_f1,
                    "weighted_f1_sd": row.sd_f1,
                    "errors": row.errors,
                    "cells": list(row.cell_keys),
                }
                for row in self.rows
            ],
            "cells": {
                c.cell.key: {
                    "weighted_f1": c.weighted_f1,
                    "trained": c.trained,
                    "error": c.error,
                    "per_slot": c.report.to_dict()["per_slot"] if c.report else None,
                }
                for c in self.cells
            },
            "reference": dict(self.reference) if self.reference else None,
        }

    def render_tsv(self) -> str:
        lines = ["domain\tk\tseeds\tweighted_f1_mean\tweighted_f1_sd\terrors\tcells"]
        for row in self.rows:
            mean = "" if row.mean_f1 is None else f"{row.mean_f1:.6f}"
            sd = "" if row.sd_f1 is None else f"{row.sd_f1:.6f}"
            lines.append(
                f"{row.domain}\t{row.k}\t{row.seed_count}\t{mean}\t{sd}"
                f"\t{row.errors}\t{','.join(row.cell_keys)}"
            )
        return "\n".join(lines) + "\n"

    def render_table(self) -> str:
        """Aligned human-readable table, one row per (domain, k)."""
        header = ("domain", "k", "seeds", "F1 mean", "F1 sd", "errors")
        body = [
            (
                row.domain,
                str(row.k),
                str(row.seed_count),
                "-" if row.mean_f1 is None else f"{row.mean_f1:.4f}",
                "-" if row.sd_f1 is None else f"{row.sd_f1:.4f}",
                str(row.errors),
            )
            for row in self.rows
        ]
        widths = [max(len(header[i]), *(len(r[i]) for r in body)) if body else len(header[i])
                  for i in range(len(header))]
        def fmt(cells: tuple[str, ...]) -> str:
            return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(cells)).rstrip()
        rule = "  ".join("-" * w for w in widths)
        return "\n".join([fmt(header), rule, *(fmt(r) for r in body)]) + "\n"


def _domain_stage_ref(cell: GridCell) -> str:
    return f"{cell.domain}:k={cell.k}:seed={cell.seed}"


def plan_for_cell(cell: GridCell) -> TrainingPlan:
    """Staged plan for one grid cell: general QA stage, then the domain
    stage, the latter evaluate-only in the zero-shot case."""
    return build_curriculum(
        [
            StageSpec(dataset_ref=GENERAL_QA_DATASET),
            StageSpec(dataset_ref=_domain_stage_ref(cell)),
        ],
        zero_shot_target=(cell.k == 0),
    )


def _run_cell(
    cell: GridCell,
    domain: DomainData,
    cfg: ExperimentConfig,
    backend_factory: BackendFactory,
    backend_cfg: BackendConfig,
    trainer: TrainerHook | None,
) -> CellResult:
    try:
        train_pool, test = domain_split(domain, cfg.split_frac, cfg.split_seed)
        train = sample_few_shot(train_pool, cell.k, cell.seed)
        plan = plan_for_cell(cell)
        trained = False
        if trainer is not None and cell.k > 0:
            trainer(plan, train, cell)
            trained = True
        questions = schema_questions(domain.schema, cfg.mode)
        report = evaluate_corpus(test, questions, backend_factory(cell), backend_cfg, cfg.mode)
        return CellResult(
            cell=cell,
            weighted_f1=report.weighted_f1,
            report=report,
            plan=plan,
            trained=trained,
        )
    except Exception as e:  # recorded per cell; the grid keeps going
        return CellResult(
            cell=cell, weighted_f1=None, report=None, plan=None, trained=False,
            error=f"{type(e).__name__}: {e}",
        )


def run_sweep(
    cfg: ExperimentConfig,
    data: Sequence[DomainData],
    backend_factory: BackendFactory | QaBackend,
    backend_cfg: BackendConfig = BackendConfig(),
    trainer: TrainerHook | None = None,
    include_reference: bool = True,
) -> SweepResult:
    """Run the (domain, train size, seed) grid and aggregate per (domain, k).

    Cells are independent; with `cfg.jobs > 1` they run on a bounded
    thread pool. Results are merged in sorted cell order, so scheduling
    never changes the output. A cell failure is recorded on that cell and
    excluded from its row's mean.
    """
    by_name = {d.name: d for d in data}
    missing = [name for name in cfg.domains if name not in by_name]
    if missing:
        raise ValidationError([f"no data for domain {name!r}" for name in missing])
    if isinstance(backend_factory, QaBackend):
        shared = backend_factory
        backend_factory = lambda cell: shared  # noqa: E731
    cells = [
        GridCell(domain=name, k=k, seed=seed)
        for name in cfg.domains
        for k in cfg.train_sizes
        for seed in cfg.seeds
    ]
    cells.sort(key=lambda c: (c.domain, c.k, c.seed))

    def job(cell: GridCell) -> CellResult:
        return _run_cell(cell, by_name[cell.domain], cfg, backend_factory, backend_cfg, trainer)

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(job, cells))
    else:
        results = [job(cell) for cell in cells]

    rows: list[RowSummary] = []
    for name in sorted(cfg.domains):
        for k in sorted(set(cfg.train_sizes)):
            group = [r for r in results if r.cell.domain == name and r.cell.k == k]
            scores = [r.weighted_f1 for r in group if r.weighted_f1 is not None]
            rows.append(
                RowSummary(
                    domain=name,
                    k=k,
                    seed_count=len(scores),
                    mean_f1=statistics.mean(scores) if scores else None,
                    sd_f1=(statistics.stdev(scores) if len(scores) > 1 else 0.0) if scores else None,
                    errors=sum(1 for r in group if r.error is not None),
                    cell_keys=tuple(r.cell.key for r in group),
                )
            )
    reference = None
    if include_reference:
        reference = {
            name: PUBLISHED_REFERENCE_F1[name]
            for name in sorted(cfg.domains)
            if name in PUBLISHED_REFERENCE_F1
        }
    return SweepResult(config=cfg, rows=rows, cells=results, reference=reference)


# ---------------------------------------------------------------------------
# Distractor sweep


@dataclass(frozen=True)
class DistractorRow:
    n_visual: int  # element groups shown at once, target included
    weighted_f1: float
    distractor_elements: int
    report: MetricsReport


@dataclass
class DistractorTable:
    target: str
    count_mode: str
    rows: list[DistractorRow]
    reference: Mapping[int, float] | None = None

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "count_mode": self.count_mode,
            "rows": [
                {
                    "n_visual": row.n_visual,
                    "weighted_f1": row.weighted_f1,
                    "distractor_elements": row.distractor_elements,
                }
                for row in self.rows
            ],
            "reference": dict(self.reference) if self.reference else None,
        }

    def render_tsv(self) -> str:
        lines = ["n_visual\tweighted_f1\tdistractor_elements"]
        for row in self.rows:
            lines.append(f"{row.n_visual}\t{row.weighted_f1:.6f}\t{row.distractor_elements}")
        return "\n".join(lines) + "\n"

    def render_table(self) -> str:
        lines = [f"target: {self.target} (counting {self.count_mode})"]
        lines.append("n_visual  weighted_f1  distractor_elements")
        for row in self.rows:
            lines.append(f"{row.n_visual:>8}  {row.weighted_f1:>11.4f}  {row.distractor_elements:>19}")
        return "\n".join(lines) + "\n"


def _single_element_views(screen: Screen) -> list[Screen]:
    return [screen.with_visible([e.element_id]) for e in visible_elements(screen)]


def select_distractors(
    target: Screen,
    pool: Sequence[Screen],
    count: int,
    seed: int = 0,
    count_mode: str = "screens",
) -> list[Screen]:
    """Pick `count` distractor screens, seeded, preferring other apps.

    Candidates that share a slot id with the target (or with an earlier
    pick) are skipped so the combined question list stays collision-free.
    In element mode each candidate is a one-element view of a pool
    screen, so `count` counts individual GUI elements.
    """
    if count_mode not in COUNT_MODES:
        raise ValidationError(f"count_mode must be one of {COUNT_MODES}")
    candidates = [s for s in pool if s.screen_id != target.screen_id]
    if count_mode == "elements":
        candidates = [view for s in candidates for view in _single_element_views(s)]
    rng = random.Random(f"{seed}:{count}")
    foreign = [s for s in candidates if s.app_name != target.app_name]
    native = [s for s in candidates if s.app_name == target.app_name]
    rng.shuffle(foreign)
    rng.shuffle(native)
    picked: list[Screen] = []
    if count == 0:
        return picked
    taken_slots = set(target.slot_ids())
    for candidate in foreign + native:
        slots = {e.slot_id for e in visible_elements(candidate)}
        if slots & taken_slots:
            continue
        picked.append(candidate)
        taken_slots |= slots
        if len(picked) == count:
            return picked
    raise InsufficientScreens(
        f"needed {count} distractor {count_mode} for {target.screen_id!r}, "
        f"found {len(picked)} usable in a pool of {len(pool)}"
    )


def distractor_sweep(
    gold: Sequence[AnnotatedUtterance],
    target: Screen,
    pool: Sequence[Screen],
    counts: Iterable[int],
    backend: QaBackend,
    cfg: BackendConfig = BackendConfig(),
    mode: AblationMode = AblationMode.FULL,
    rules: QuestionRules = DEFAULT_RULES,
    seed: int = 0,
    count_mode: str = "screens",
) -> DistractorTable:
    """Score the corpus while 1..V element groups are on screen.

    The target screen is always first; for each V, V-1 seeded distractor
    picks from the pool join the batch, and the backend must reject their
    questions. V=1 is plain evaluation.
    """
    rows = []
    for n_visual in counts:
        if n_visual < 1:
            raise ValidationError("visual element counts start at 1")
        distractors = select_distractors(target, pool, n_visual - 1, seed, count_mode)
        predicted: list[SlotFillResult] = [
            fill_slots(
                [target, *distractors], utt.text, backend, cfg,
                mode=mode, rules=rules, utterance_id=utt.utterance_id,
            )
            for utt in gold
        ]
        report = token_f1(gold, predicted)
        rows.append(
            DistractorRow(
                n_visual=n_visual,
                weighted_f1=report.weighted_f1,
                distractor_elements=predicted[0].distractor_count if predicted else 0,
                report=report,
            )
        )
    rows.sort(key=lambda r: r.n_visual)
    reference = PUBLISHED_DISTRACTOR_F1.get(target.app_name)
    return DistractorTable(
        target=target.screen_id, count_mode=count_mode, rows=rows, reference=reference,
    )
