"""Command-line entry points: init-base, train, serve, make-data."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .checkpoints import CheckpointStore
from .errors import ModelServiceError, StageError
from .generalqa import generate_general_qa
from .plans import load_plan
from .squad import write_squad
from .training import (
    PlanExecutor,
    TrainDefaults,
    base_plan,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="model-service",
        description="Train and serve a small extractive-QA span model.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_train_defaults(p: argparse.ArgumentParser) -> None:
        p.add_argument("--batch-size", type=int, default=64)
        p.add_argument("--seed", type=int, default=0, help="training seed")

    p_base = sub.add_parser("init-base", help="train the stage-1 general-QA base model")
    p_base.add_argument("--model-dir", required=True)
    p_base.add_argument("--epochs", type=int, default=20)
    p_base.add_argument("--lr", type=float, default=5e-4)
    p_base.add_argument("--examples", type=int, default=6000,
                        help="general-QA corpus size")
    p_base.add_argument("--data-seed", type=int, default=11)
    add_train_defaults(p_base)

    p_train = sub.add_parser("train", help="execute a staged fine-tuning manifest")
    p_train.add_argument("--model-dir", required=True)
    p_train.add_argument("--plan", required=True, help="manifest JSON path")
    add_train_defaults(p_train)

    p_serve = sub.add_parser("serve", help="serve a checkpoint over HTTP")
    p_serve.add_argument("--model-dir", required=True)
    p_serve.add_argument("--stage", type=int, default=None,
                         help="checkpoint stage to serve (default: latest)")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--batch-size", type=int, default=64)

    p_data = sub.add_parser("make-data", help="write the general-QA corpus as SQuAD v2.0 JSON")
    p_data.add_argument("--out", required=True)
    p_data.add_argument("--examples", type=int, default=6000)
    p_data.add_argument("--seed", type=int, default=11)
    p_data.add_argument("--title", default="general-qa")
    return parser


def _cmd_init_base(args: argparse.Namespace) -> int:
    store = CheckpointStore(args.model_dir)
    executor = PlanExecutor(
        store,
        defaults=TrainDefaults(
            batch_size=args.batch_size,
            seed=args.seed,
            general_qa_size=args.examples,
            general_qa_seed=args.data_seed,
        ),
        log=print,
    )
    outcomes = executor.run(base_plan(args.epochs, args.lr))
    print(outcomes[0].describe())
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    store = CheckpointStore(args.model_dir)
    plan = load_plan(args.plan)
    executor = PlanExecutor(
        store,
        base_dir=Path(args.plan).resolve().parent,
        defaults=TrainDefaults(batch_size=args.batch_size, seed=args.seed),
        log=print,
    )
    try:
        outcomes = executor.run(plan)
    except StageError as exc:
        for outcome in exc.completed:
            print(outcome.describe())
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for outcome in outcomes:
        print(outcome.describe())
    print(f"plan complete: {len(outcomes)} stages")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import ServiceState, create_app

    state = ServiceState(args.model_dir, stage=args.stage, batch_size=args.batch_size)
    print(f"serving {state.model_id} (stage {state.serving_stage}) "
          f"on http://{args.host}:{args.port}")
    uvicorn.run(create_app(state), host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_make_data(args: argparse.Namespace) -> int:
    records = generate_general_qa(args.examples, args.seed)
    write_squad(records, args.out, title=args.title)
    print(f"wrote {len(records)} questions to {args.out}")
    return 0


_COMMANDS = {
    "init-base": _cmd_init_base,
    "train": _cmd_train,
    "serve": _cmd_serve,
    "make-data": _cmd_make_data,
}


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ModelServiceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
