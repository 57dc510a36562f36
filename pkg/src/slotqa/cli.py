"""Command-line interface for the slot extraction toolkit.

One binary with subcommands covering the pipeline: corpus conversion,
question generation, slot filling, few-shot sampling, training-plan
manifests, corpus evaluation, and the experiment sweeps. Every
subcommand is deterministic given identical flags, inputs, and --seed.
Exit codes: 0 on success, 1 on data or backend errors, 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .backends import (
    ENDPOINT_ENV_VAR,
    BackendConfig,
    LexicalBackend,
    OracleBackend,
    QaBackend,
    RemoteBackend,
    load_gazetteer,
    load_oracle,
)
from .bundled import (
    DOMAINS,
    bundled_demo_gold,
    bundled_domain,
    bundled_screen,
    bundled_screen_pool,
)
from .conversion import (
    NegativePolicy,
    export_squad,
    load_bio_corpus,
    load_schema,
    render_conll,
    sample_few_shot,
    squad_dict,
    to_qa_examples,
)
from .dispatch import fill_slots
from .errors import SlotQaError, ValidationError
from .harness import (
    ExperimentConfig,
    MetricsReport,
    curriculum_from_datasets,
    distractor_sweep,
    domain_split,
    evaluate_corpus,
    oracle_for_domain,
    oracle_for_screen,
    run_sweep,
    schema_questions,
)
from .metrics import token_f1  # noqa: F401  (re-exported convenience)
from .questions import DEFAULT_RULES, AblationMode, generate_questions, load_overrides
from .screens import load_screen

_MODE_CHOICES = ("full", "text", "novis")
_BACKEND_CHOICES = ("oracle", "lexical", "remote")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise ValidationError(f"expected comma-separated integers, got {text!r}") from None


def _count_list(text: str) -> tuple[int, ...]:
    """Parse "1..5" (inclusive range) or a comma-separated list."""
    if ".." in text:
        lo_text, _, hi_text = text.partition("..")
        try:
            lo, hi = int(lo_text), int(hi_text)
        except ValueError:
            raise ValidationError(f"expected N..M or comma-separated integers, got {text!r}") from None
        return tuple(range(lo, hi + 1))
    return _int_list(text)


def _rules(args: argparse.Namespace):
    return load_overrides(args.overrides) if getattr(args, "overrides", None) else DEFAULT_RULES


def _backend_config(args: argparse.Namespace) -> BackendConfig:
    return BackendConfig(
        no_answer_threshold=getattr(args, "tau", 0.5),
        endpoint=getattr(args, "endpoint", None),
    )


def _build_backend(args: argparse.Namespace, cfg: BackendConfig) -> QaBackend:
    if args.backend == "oracle":
        if getattr(args, "gold", None):
            return load_oracle(args.gold)
        return bundled_demo_gold()
    if args.backend == "lexical":
        if not getattr(args, "gazetteer", None):
            raise ValidationError("the lexical backend needs --gazetteer")
        return LexicalBackend(load_gazetteer(args.gazetteer))
    return RemoteBackend(cfg)


def _report_table(report: MetricsReport) -> str:
    lines = [
        f"utterances          {report.n_utterances}",
        f"questions           {report.n_questions}",
        f"rejections          {report.n_rejections}",
        f"weighted_f1         {report.weighted_f1:.4f}",
        f"micro_f1            {report.micro_f1:.4f}",
        "rejection_accuracy  "
        + ("n/a" if report.rejection_accuracy is None else f"{report.rejection_accuracy:.4f}"),
    ]
    if report.per_slot:
        width = max(len(slot) for slot in report.per_slot)
        lines.append("")
        lines.append(f"{'slot'.ljust(width)}  precision  recall  f1      support")
        for slot, m in report.per_slot.items():
            lines.append(
                f"{slot.ljust(width)}  {m.precision:>9.4f}  {m.recall:>6.4f}  {m.f1:.4f}  {m.support:>7}"
            )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_convert(args: argparse.Namespace) -> int:
    utts = load_bio_corpus(args.bio, strict=args.strict_bio)
    schema = load_schema(args.schema)
    policy = NegativePolicy.parse(args.negatives, seed=args.seed)
    examples = to_qa_examples(utts, schema, AblationMode.parse(args.mode), policy)
    if args.out:
        export_squad(examples, args.out, title=args.title)
    else:
        for example in examples:
            violations = example.validate()
            if violations:
                raise ValidationError([f"{example.qa_id}: {v}" for v in violations])
        payload = json.dumps(squad_dict(examples, args.title), ensure_ascii=False, indent=1)
        sys.stdout.write(payload + "\n")
    return 0


def _cmd_genq(args: argparse.Namespace) -> int:
    screen = load_screen(args.screen)
    questions = generate_questions(screen, AblationMode.parse(args.mode), rules=_rules(args))
    _emit("".join(f"{q.text}\n" for q in questions), args.out)
    return 0


def _cmd_fill(args: argparse.Namespace) -> int:
    screens = [load_screen(path) for path in args.screen]
    cfg = _backend_config(args)
    backend = _build_backend(args, cfg)
    result = fill_slots(
        screens,
        args.utterance,
        backend,
        cfg,
        mode=AblationMode.parse(args.mode),
        rules=_rules(args),
    )
    _emit(json.dumps(result.to_dict(), ensure_ascii=False, indent=1) + "\n", args.out)
    return 0


def _cmd_sample(args: argparse.Namespace) -> int:
    utts = load_bio_corpus(args.bio)
    picked = sample_few_shot(utts, args.k, args.seed, stratified=args.stratified)
    _emit(render_conll(picked), args.out)
    return 0


def _cmd_plan(args: argparse.Namespace) -> int:
    plan = curriculum_from_datasets(
        args.datasets, zero_shot_target=args.zero_shot, epochs=args.epochs
    )
    _emit(json.dumps(plan.to_dict(), indent=1) + "\n", args.out)
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    gold = load_bio_corpus(args.bio)
    mode = AblationMode.parse(args.mode)
    rules = _rules(args)
    if args.screen:
        questions = generate_questions(load_screen(args.screen), mode, rules=rules)
    elif args.schema:
        questions = schema_questions(load_schema(args.schema), mode)
    else:
        raise ValidationError("provide --screen or --schema")
    cfg = _backend_config(args)
    if args.backend == "oracle" and not args.gold:
        # Self-oracle: the corpus answers its own questions; a pipeline
        # sanity run that must score a perfect 1.0.
        backend: QaBackend = OracleBackend.from_annotations(
            gold, {q.slot_id: q.text for q in questions}
        )
    else:
        backend = _build_backend(args, cfg)
    report = evaluate_corpus(gold, questions, backend, cfg, mode, raw=args.raw)
    if args.table:
        _emit(_report_table(report), args.out)
    else:
        _emit(json.dumps(report.to_dict(), ensure_ascii=False, indent=1) + "\n", args.out)
    return 0


def _sweep_backend_factory(args: argparse.Namespace, domains: Sequence[str], mode: AblationMode):
    if args.backend == "oracle":
        oracles = {name: oracle_for_domain(bundled_domain(name), mode) for name in domains}
        return lambda cell: oracles[cell.domain]
    cfg = _backend_config(args)
    shared = _build_backend(args, cfg)
    return lambda cell: shared


def _cmd_sweep(args: argparse.Namespace) -> int:
    domains = tuple(args.domains.split(",")) if args.domains else DOMAINS
    mode = AblationMode.parse(args.mode)
    if args.distractors:
        if len(domains) != 1:
            raise ValidationError("the distractor sweep takes exactly one domain, e.g. --domains vehicle_logger")
        domain = bundled_domain(domains[0])
        target = bundled_screen(domains[0])
        rules = _rules(args)
        _, test = domain_split(domain, args.split_frac, args.split_seed)
        cfg = _backend_config(args)
        if args.backend == "oracle" and not args.gold:
            pool_utts = list(domain.utterances) + list(domain.heldout or ())
            backend: QaBackend = oracle_for_screen(target, pool_utts, mode, rules)
        else:
            backend = _build_backend(args, cfg)
        table = distractor_sweep(
            test,
            target,
            bundled_screen_pool(),
            _count_list(args.distractors),
            backend,
            cfg,
            mode=mode,
            rules=rules,
            seed=args.seed,
            count_mode=args.count_mode,
        )
        if args.table:
            _emit(table.render_table(), args.out)
        elif args.out and args.out.endswith(".tsv"):
            _emit(table.render_tsv(), args.out)
        else:
            _emit(json.dumps(table.to_dict(), indent=1) + "\n", args.out)
        return 0
    cfg_grid = ExperimentConfig(
        domains=domains,
        train_sizes=_int_list(args.sizes),
        seeds=_int_list(args.seeds),
        mode=mode,
        taus=(args.tau,),
        split_frac=args.split_frac,
        split_seed=args.split_seed,
        jobs=args.jobs,
        count_mode=args.count_mode,
    )
    data = [bundled_domain(name) for name in domains]
    factory = _sweep_backend_factory(args, domains, mode)
    result = run_sweep(cfg_grid, data, factory, backend_cfg=_backend_config(args))
    if args.table:
        _emit(result.render_table(), args.out)
    elif args.out and args.out.endswith(".tsv"):
        _emit(result.render_tsv(), args.out)
    else:
        _emit(json.dumps(result.to_dict(), indent=1) + "\n", args.out)
    return 0


# ---------------------------------------------------------------------------
# Parser


def _add_mode(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", choices=_MODE_CHOICES, default="full",
                        help="question mode: full GUI semantics, text fields only, or bare tag symbols")


def _add_backend(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--backend", choices=_BACKEND_CHOICES, default="oracle")
    parser.add_argument("--gold", help="gold answer file for the oracle backend")
    parser.add_argument("--gazetteer", help="pattern file for the lexical backend")
    parser.add_argument("--endpoint",
                        help=f"extraction service URL (default: ${ENDPOINT_ENV_VAR})")
    parser.add_argument("--tau", type=float, default=0.5,
                        help="no-answer threshold (default 0.5)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slotqa",
        description="Visual slot filling as extractive question answering.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    convert = sub.add_parser("convert", help="convert a BIO corpus to extractive-QA JSON")
    convert.add_argument("--bio", required=True, help="CoNLL token<TAB>tag corpus")
    convert.add_argument("--schema", required=True, help="tag<TAB>description schema file")
    _add_mode(convert)
    convert.add_argument("--negatives", default="none",
                         help="unanswerable-question policy: all | none | sample:K")
    convert.add_argument("--seed", type=int, default=0)
    convert.add_argument("--strict-bio", action="store_true",
                         help="reject dangling I- tags instead of starting a new span")
    convert.add_argument("--title", default="slotqa", help="dataset title in the output")
    convert.add_argument("--out")
    convert.set_defaults(func=_cmd_convert)

    genq = sub.add_parser("genq", help="generate questions for a screen")
    genq.add_argument("--screen", required=True, help="screen annotation file")
    _add_mode(genq)
    genq.add_argument("--overrides", help="per-element question override table")
    genq.add_argument("--out")
    genq.set_defaults(func=_cmd_genq)

    fill = sub.add_parser("fill", help="fill a screen's slots from one utterance")
    fill.add_argument("--screen", required=True, action="append",
                      help="screen file; repeat to add distractor screens")
    fill.add_argument("--utterance", required=True)
    _add_mode(fill)
    fill.add_argument("--overrides")
    _add_backend(fill)
    fill.add_argument("--out")
    fill.set_defaults(func=_cmd_fill)

    sample = sub.add_parser("sample", help="seeded few-shot sample of a BIO corpus")
    sample.add_argument("--bio", required=True)
    sample.add_argument("--k", type=int, required=True, help="sample size")
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--stratified", action="store_true",
                        help="round-robin over slot types before topping up")
    sample.add_argument("--out")
    sample.set_defaults(func=_cmd_sample)

    plan = sub.add_parser("plan", help="emit a staged fine-tuning manifest")
    plan.add_argument("--datasets", nargs="+", required=True,
                      help="dataset references in training order")
    plan.add_argument("--zero-shot", action="store_true",
                      help="mark the final stage evaluate-only")
    plan.add_argument("--epochs", type=int, default=2)
    plan.add_argument("--out")
    plan.set_defaults(func=_cmd_plan)

    evaluate = sub.add_parser("eval", help="score a backend against a gold corpus")
    evaluate.add_argument("--bio", required=True, help="gold CoNLL corpus")
    evaluate.add_argument("--screen", help="ask a screen's questions")
    evaluate.add_argument("--schema", help="ask one question per schema slot")
    _add_mode(evaluate)
    evaluate.add_argument("--overrides")
    _add_backend(evaluate)
    evaluate.add_argument("--raw", action="store_true",
                          help="compare tokens without normalization")
    evaluate.add_argument("--table", action="store_true", help="human-readable output")
    evaluate.add_argument("--out")
    evaluate.set_defaults(func=_cmd_eval)

    sweep = sub.add_parser("sweep", help="run the experiment grid on bundled domains")
    sweep.add_argument("--domains", help=f"comma-separated subset of {','.join(DOMAINS)}")
    sweep.add_argument("--sizes", default="0,5,50,100,500",
                       help="comma-separated training-set sizes")
    sweep.add_argument("--seeds", default="0", help="comma-separated sampling seeds")
    _add_mode(sweep)
    sweep.add_argument("--overrides")
    _add_backend(sweep)
    sweep.add_argument("--distractors",
                       help="run the distractor sweep instead, over N..M or comma counts")
    sweep.add_argument("--count-mode", choices=("screens", "elements"), default="screens",
                       help="whether distractor counts tally screens or single elements")
    sweep.add_argument("--seed", type=int, default=0, help="distractor selection seed")
    sweep.add_argument("--split-frac", type=float, default=0.8)
    sweep.add_argument("--split-seed", type=int, default=13)
    sweep.add_argument("--jobs", type=int, default=1, help="parallel grid cells")
    sweep.add_argument("--table", action="store_true", help="human-readable output")
    sweep.add_argument("--out")
    sweep.set_defaults(func=_cmd_sweep)

    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code else 0
    try:
        return args.func(args)
    except (SlotQaError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
