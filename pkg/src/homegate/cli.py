"""Command-line entry points: serve, run, gen-homes, repl."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .backends import build_backend, parse_backend_spec
from .bench import (
    DEFAULT_MIX,
    format_table,
    generate_corpus,
    load_corpus,
    run_corpus,
    score_corpus,
    write_corpus,
    write_report,
)
from .home_model import load_snapshot, render_state_text
from .pipeline import Outcome, Pipeline, Session


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="homegate")
    subparsers = parser.add_subparsers(dest="command", required=True)

    serve_parser = subparsers.add_parser("serve", help="run the HTTP service")
    serve_parser.add_argument("--host", default="127.0.0.1")
    serve_parser.add_argument("--port", type=int, default=8410)
    serve_parser.add_argument("--backend", default="rule_oracle", help="kind[:key=value,...]")
    serve_parser.add_argument("--stage1-backend", default=None)
    serve_parser.add_argument("--stage2-backend", default=None)
    serve_parser.add_argument("--homes", default=None, help="directory of snapshot files")
    serve_parser.add_argument("--no-stage1", action="store_true")

    run_parser = subparsers.add_parser("run", help="score a dataset")
    run_parser.add_argument("--dataset", required=True)
    run_parser.add_argument("--homes", default=None)
    run_parser.add_argument("--backend", default="rule_oracle")
    run_parser.add_argument("--stage1-backend", default=None)
    run_parser.add_argument("--stage2-backend", default=None)
    run_parser.add_argument("--report", default=None, help="write the JSON report here")
    run_parser.add_argument("--order-sensitive", action="store_true")
    run_parser.add_argument("--no-stage1", action="store_true")
    run_parser.add_argument("--workers", type=int, default=1)
    run_parser.add_argument("--label", default=None)

    gen_parser = subparsers.add_parser("gen-homes", help="generate a synthetic corpus")
    gen_parser.add_argument("--n", type=int, required=True, help="number of tasks")
    gen_parser.add_argument("--seed", type=int, default=0)
    gen_parser.add_argument("--mix", default=None, help="e.g. VS=0.25,IS=0.231,VM=0.15,IM=0.155,MM=0.214")
    gen_parser.add_argument("--n-homes", type=int, default=20)
    gen_parser.add_argument("--rooms", default="3:6", help="rooms per home, lo:hi")
    gen_parser.add_argument("--devices", default="1:4", help="devices per room, lo:hi")
    gen_parser.add_argument("--out", required=True, help="output directory")

    repl_parser = subparsers.add_parser("repl", help="interactive session on one home")
    repl_parser.add_argument("--home", required=True, help="snapshot file")
    repl_parser.add_argument("--backend", default="rule_oracle")
    repl_parser.add_argument("--no-stage1", action="store_true")

    args = parser.parse_args(argv)
    if args.command == "serve":
        return _cmd_serve(args)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "gen-homes":
        return _cmd_gen(args)
    if args.command == "repl":
        return _cmd_repl(args)
    return 2


def _build_backends(args: argparse.Namespace) -> tuple[object, object]:
    stage1_spec = getattr(args, "stage1_backend", None) or args.backend
    stage2_spec = getattr(args, "stage2_backend", None) or args.backend
    return (
        build_backend(parse_backend_spec(stage1_spec)),
        build_backend(parse_backend_spec(stage2_spec)),
    )


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    stage1, stage2 = _build_backends(args)
    serve(
        stage1,
        stage2,
        host=args.host,
        port=args.port,
        homes_dir=args.homes,
        stage1_enabled=not args.no_stage1,
    )
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.dataset, args.homes)
    stage1, stage2 = _build_backends(args)
    pipeline = Pipeline(stage1, stage2, stage1_enabled=not args.no_stage1)
    runs = run_corpus(corpus, pipeline, workers=args.workers)
    report = score_corpus(corpus.tasks, runs, order_sensitive=args.order_sensitive)
    label = args.label or (f"{args.backend}" + (" (no stage 1)" if args.no_stage1 else ""))
    print(format_table({label: report}))
    if args.report:
        write_report({label: report}, args.report)
        print(f"report written to {args.report}")
    return 0


def _parse_mix(text: str | None) -> dict[str, float] | None:
    if not text:
        return None
    mix = {}
    for pair in text.split(","):
        key, _, value = pair.partition("=")
        mix[key.strip().upper()] = float(value)
    return mix


def _parse_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    return int(lo), int(hi or lo)


def _cmd_gen(args: argparse.Namespace) -> int:
    corpus = generate_corpus(
        args.n,
        n_homes=args.n_homes,
        rooms_per_home=_parse_range(args.rooms),
        devices_per_room=_parse_range(args.devices),
        mix=_parse_mix(args.mix) or DEFAULT_MIX,
        seed=args.seed,
    )
    dataset = write_corpus(corpus, args.out)
    print(f"{len(corpus.tasks)} tasks, {len(corpus.homes)} homes -> {dataset}")
    return 0


def _cmd_repl(args: argparse.Namespace) -> int:
    document = json.loads(Path(args.home).read_text(encoding="utf-8"))
    session = Session(home=load_snapshot(document))
    stage1, stage2 = _build_backends(args)
    pipeline = Pipeline(stage1, stage2, stage1_enabled=not args.no_stage1)
    print(render_state_text(session.home))
    print("Type an instruction, /state, /usage, or /quit.")
    while True:
        try:
            line = input("> ").strip()
        except (EOFError, KeyboardInterrupt):
            print()
            return 0
        if not line:
            continue
        if line == "/quit":
            return 0
        if line == "/state":
            print(render_state_text(session.home))
            continue
        if line == "/usage":
            print(json.dumps(pipeline.tally.snapshot().to_json_dict()))
            continue
        if session.pending_clarification is not None:
            result = pipeline.answer_clarification(session, line)
        else:
            result = pipeline.execute_instruction(session, line)
        print(f"[{result.outcome.value}] {result.feedback}")
        if result.outcome is Outcome.EXECUTED:
            from .actions import render_sequence

            print(f"actions: {render_sequence(result.final)}")
        elif result.outcome is Outcome.CLARIFICATION_NEEDED and result.options:
            print(f"options: {', '.join(result.options)}")


if __name__ == "__main__":
    sys.exit(main())
