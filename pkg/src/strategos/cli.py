"""Command-line front door: compile | solve | evaluate | broker | serve | dsl."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import oracle
from .compiler.demosets import build_demo_set
from .games import (
    Objective,
    game_from_json,
    game_to_json,
)
from .gateway import GatewayConfig, HttpBackend, ReplayBackend
from .harness import random_proposal_gap, run_experiment, score_fairness
from .negotiation import broker_propose, bundled_contexts_path, load_contexts
from .suites import FAMILIES, SuiteSpec, generate_suite, solve_item


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="strategos",
        description="Strategic-reasoning toolkit: demonstration compiler, "
        "exact game oracles, evaluation harness, negotiation service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_compile = sub.add_parser("compile", help="compile a demonstration prompt")
    p_compile.add_argument("--family", default="simultaneous-2x2", choices=FAMILIES)
    p_compile.add_argument("--seed", type=int, default=0)
    p_compile.add_argument("--index", type=int, default=0, help="suite item index")
    p_compile.add_argument("--game", help="game JSON file instead of a suite item")
    p_compile.add_argument(
        "--format", default="plain", choices=("plain", "factored")
    )
    p_compile.add_argument(
        "--flat", action="store_true", help="emit one flat prompt string"
    )

    p_solve = sub.add_parser("solve", help="print the oracle solution for a game")
    p_solve.add_argument("--family", default="simultaneous-2x2", choices=FAMILIES)
    p_solve.add_argument("--seed", type=int, default=0)
    p_solve.add_argument("--index", type=int, default=0)
    p_solve.add_argument("--game", help="game JSON file instead of a suite item")
    p_solve.add_argument("--k", type=int, default=1, help="reasoning level")

    p_eval = sub.add_parser("evaluate", help="run an experiment against the oracle")
    p_eval.add_argument("--suite", required=True, choices=FAMILIES)
    p_eval.add_argument(
        "--method",
        action="append",
        default=None,
        choices=("strategic", "strategic-factored", "0shot", "0shot-cot", "fewshot", "random"),
    )
    p_eval.add_argument("--backend", default="oracle")
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--out", help="report JSON path")
    p_eval.add_argument("--record", help="record completions to this transcript")
    p_eval.add_argument("--markdown", action="store_true")
    p_eval.add_argument("--config", help="gateway config file")

    p_broker = sub.add_parser("broker", help="fair-deal proposals over contexts")
    p_broker.add_argument("--contexts", help="context file (bundled set by default)")
    p_broker.add_argument(
        "--fairness", default="equality", choices=("equality", "rawlsian")
    )
    p_broker.add_argument("--num-tries", type=int, default=3)
    p_broker.add_argument("--limit", type=int, default=0, help="first N contexts")
    p_broker.add_argument(
        "--random-baseline", action="store_true", help="score a random proposer"
    )
    p_broker.add_argument("--draws", type=int, default=1000)
    p_broker.add_argument("--out")

    p_serve = sub.add_parser("serve", help="run the live negotiation service")
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--data", default="./sessions")
    p_serve.add_argument("--cors-origin", default="*")

    p_dsl = sub.add_parser("dsl", help="tool-call language passthrough")
    p_dsl.add_argument("action", choices=("eval", "parse"))
    p_dsl.add_argument("call", help='e.g. "mean([7, 3])"')
    p_dsl.add_argument("--game", help="game JSON file providing search bindings")

    args = parser.parse_args(argv)
    return {
        "compile": _cmd_compile,
        "solve": _cmd_solve,
        "evaluate": _cmd_evaluate,
        "broker": _cmd_broker,
        "serve": _cmd_serve,
        "dsl": _cmd_dsl,
    }[args.command](args)


def _load_item(args):
    if args.game:
        doc = json.loads(Path(args.game).read_text(encoding="utf-8"))
        payload = game_from_json(doc)
        from .games import GameTree
        from .suites import SuiteItem

        kind = "tree" if isinstance(payload, GameTree) else "matrix"
        return SuiteItem(id=Path(args.game).stem, family="custom", kind=kind, payload=payload)
    items = generate_suite(SuiteSpec(args.family, seed=args.seed))
    if not 0 <= args.index < len(items):
        raise SystemExit(f"index {args.index} outside 0..{len(items) - 1}")
    return items[args.index]


def _cmd_compile(args) -> int:
    from .harness import compile_item_prompt

    item = _load_item(args)
    prompt, question, trace = compile_item_prompt(item, format=args.format)
    if args.flat:
        print(prompt)
        return 0
    family = item.family if item.family != "custom" else "simultaneous-2x2"
    demo_set = build_demo_set(
        family if item.kind in ("matrix", "tree") else item.family,
        item.payload if item.kind in ("matrix", "tree") else item.payload,
        item.objectives,
        format=args.format,
    )
    print(json.dumps(demo_set.to_json(), indent=2, ensure_ascii=False))
    return 0


def _cmd_solve(args) -> int:
    item = _load_item(args)
    choice = solve_item(item)
    doc = {
        "id": item.id,
        "best": list(choice.best),
        "values": {a: v for a, v in sorted(choice.values.items())},
    }
    if item.kind == "matrix" and item.payload.n_players == 2 and args.k != 1:
        objectives = item.objectives or tuple(
            Objective("max", i) for i in range(2)
        )
        deep = oracle.solve_level_k(item.payload, 0, args.k, objectives)
        doc["level_k"] = {"k": args.k, "best": list(deep.best)}
    print(json.dumps(doc, indent=2))
    return 0


def _make_backend(args):
    spec = args.backend
    if spec == "oracle":
        return "oracle"
    if spec.startswith("replay:"):
        return ReplayBackend(spec.split(":", 1)[1])
    if spec == "http":
        return HttpBackend(GatewayConfig.load(getattr(args, "config", None)))
    raise SystemExit(f"unknown backend {spec!r} (oracle | replay:<path> | http)")


def _cmd_evaluate(args) -> int:
    methods = args.method or ["strategic"]
    backend = _make_backend(args)
    report = run_experiment(
        SuiteSpec(args.suite, seed=args.seed),
        methods,
        backend=backend,
        report_path=args.out,
        record_path=args.record,
    )
    for method in report.methods():
        print(f"{args.suite} {method}: {report.display(method)}")
    if args.markdown:
        print(report.markdown())
    return 0


def _cmd_broker(args) -> int:
    path = args.contexts or bundled_contexts_path()
    contexts = load_contexts(path)
    if args.limit:
        contexts = contexts[: args.limit]
    if args.random_baseline:
        gap = random_proposal_gap(contexts, args.fairness, draws=args.draws)
        print(f"random {args.fairness} gap over {len(contexts)} contexts: {gap:.2f}")
        return 0
    proposals = []
    for pot, va, vb in contexts:
        result = broker_propose(pot, va, vb, args.fairness, args.num_tries)
        proposals.append(result.allocation)
    gap = score_fairness(proposals, contexts, args.fairness)
    print(f"broker {args.fairness} gap over {len(contexts)} contexts: {gap:.2f}")
    if args.out:
        Path(args.out).write_text(
            json.dumps(
                {
                    "fairness": args.fairness,
                    "gap": gap,
                    "proposals": [list(p) for p in proposals],
                },
                indent=2,
            ),
            encoding="utf-8",
        )
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    serve(port=args.port, data_dir=args.data, cors_origin=args.cors_origin)
    return 0


def _cmd_dsl(args) -> int:
    from .dsl import ToolContext, eval_call, parse_tool_call, render_call, render_result

    call, consumed = parse_tool_call(args.call)
    if args.action == "parse":
        print(render_call(call))
        return 0
    context = None
    if args.game:
        doc = json.loads(Path(args.game).read_text(encoding="utf-8"))
        context = ToolContext(game=game_from_json(doc))
    elif call.name == "search":
        raise SystemExit("search needs --game for its bindings")
    else:
        from .compiler.demosets import descending_game

        context = ToolContext(game=descending_game())
    print(render_result(eval_call(call, context)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
