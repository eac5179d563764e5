"""Experiment runner: compile, complete, constrain, score against the oracle.

A trial is correct iff the chosen action is in the oracle argmax set.
Provider failures mark trials incorrect and the run continues. Reports are
deterministic (sorted trials, no timestamps) so a recorded run replays to
byte-identical output.
"""

from __future__ import annotations

import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import oracle
from .compiler.beliefs import (
    comm_question,
    compile_belief_trace,
    compile_truthfulness_trace,
    hidden_question,
)
from .compiler.demosets import build_demo_set
from .compiler.factored import compile_factored_trace
from .compiler.matrix import compile_exhaustive, matrix_question, tree_question
from .dsl import ToolContext, intercept_loop
from .errors import ContextWithoutProposal, GatewayError, StrategosError, UnknownFamily
from .games import Game, GameTree
from .gateway import (
    Backend,
    CompletionRequest,
    ScriptedOracleBackend,
    constrained_action,
)
from .suites import SuiteItem, SuiteSpec, generate_suite, solve_item

METHODS = ("strategic", "strategic-factored", "0shot", "0shot-cot", "fewshot", "random")

MATRIX_KINDS = ("matrix", "tree")


@dataclass(frozen=True)
class TrialResult:
    game_id: str
    method: str
    chosen: str
    oracle_best: tuple[str, ...]
    correct: bool
    trace_ref: str
    error: str = ""

    def to_json(self) -> dict:
        return {
            "game_id": self.game_id,
            "method": self.method,
            "chosen": self.chosen,
            "oracle_best": list(self.oracle_best),
            "correct": self.correct,
            "trace_ref": self.trace_ref,
            "error": self.error,
        }


@dataclass
class Report:
    suite: str
    seed: int
    trials: list[TrialResult] = field(default_factory=list)
    traces: dict[str, str] = field(default_factory=dict)

    def accuracy(self, method: str) -> tuple[float, int, int]:
        rows = [t for t in self.trials if t.method == method]
        k = sum(t.correct for t in rows)
        n = len(rows)
        return (k / n if n else 0.0, k, n)

    def display(self, method: str) -> str:
        p, k, n = self.accuracy(method)
        return f"{p:.2f} ({k}/{n})"

    def methods(self) -> list[str]:
        seen = []
        for t in self.trials:
            if t.method not in seen:
                seen.append(t.method)
        return seen

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "methods": {
                m: {
                    "accuracy": self.accuracy(m)[0],
                    "correct": self.accuracy(m)[1],
                    "total": self.accuracy(m)[2],
                    "display": self.display(m),
                }
                for m in self.methods()
            },
            "trials": [t.to_json() for t in self.trials],
            "traces": dict(sorted(self.traces.items())),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2, ensure_ascii=False)

    def markdown(self) -> str:
        lines = [
            f"| Suite | {' | '.join(self.methods())} |",
            f"|---|{'---|' * len(self.methods())}",
            f"| {self.suite} | "
            + " | ".join(self.display(m) for m in self.methods())
            + " |",
        ]
        return "\n".join(lines)


def compile_item_prompt(
    item: SuiteItem, format: str = "plain"
) -> tuple[str, str, object]:
    """(full prompt, eval question, compiled trace) for the strategic method."""
    if item.kind in MATRIX_KINDS:
        payload = item.payload
        if item.kind == "tree" and not payload.continuations:
            target = payload.game  # sequential flat games ride in a trivial tree
        else:
            target = payload
        family = item.family if item.family != "objectives" else "simultaneous-2x2"
        if format == "factored":
            if isinstance(target, GameTree):
                raise UnknownFamily("factored prompts cover flat matrix games")
            demo_set = build_demo_set(
                "simultaneous-2x2", target, item.objectives, format="factored"
            )
            trace = compile_factored_trace(target, 0, item.objectives)
        else:
            fam_key = {
                "two-stage": "two-stage",
                "sequential-2x2": "sequential-2x2",
            }.get(family, "simultaneous-2x2")
            if isinstance(target, GameTree) and target.continuations:
                fam_key = "two-stage"
            demo_set = build_demo_set(fam_key, target, item.objectives)
            trace = compile_exhaustive(target, 0, item.objectives)
        return demo_set.flat_prompt(), demo_set.eval_question, trace
    if item.kind == "hidden":
        hsgame, observed = item.payload
        demo_set = build_demo_set("hidden-state", (hsgame, observed))
        return (
            demo_set.flat_prompt(),
            demo_set.eval_question,
            compile_belief_trace(hsgame, observed),
        )
    if item.kind == "communication":
        demo_set = build_demo_set("communication", item.payload)
        return (
            demo_set.flat_prompt(),
            demo_set.eval_question,
            compile_truthfulness_trace(item.payload),
        )
    raise UnknownFamily(f"unknown item kind {item.kind!r}")


def build_baseline_prompt(
    kind: str, item: SuiteItem | Game, objectives=None
) -> str:
    """zero-shot, zero-shot chain-of-thought, and answer-only few-shot prompts."""
    if isinstance(item, SuiteItem):
        question = _item_question(item)
        objectives = item.objectives
    else:
        question = matrix_question(item, objectives)
    if kind in ("0shot", "zero-shot"):
        return question + "\n\nA:"
    if kind in ("0shot-cot", "zero-shot-cot"):
        return question + "\n\nA:Let's think step by step:"
    if kind in ("fewshot", "few-shot"):
        from .compiler.demosets import descending_game, tie_game
        from .compiler.matrix import ACTION_MARKER

        demos = []
        for g in (descending_game(), tie_game()):
            best = solve_item(
                SuiteItem(id="demo", family="x", kind="matrix", payload=g)
            ).best[0]
            demos.append(
                matrix_question(g) + f"\n\nA:{g.players[0]}{ACTION_MARKER}{best}"
            )
        return "\n\n".join(demos) + "\n\n" + question + "\n\nA:"
    raise UnknownFamily(f"unknown baseline kind {kind!r}")


def _item_question(item: SuiteItem) -> str:
    if item.kind == "matrix":
        return matrix_question(item.payload, item.objectives)
    if item.kind == "tree":
        tree = item.payload
        if not tree.continuations:
            return matrix_question(tree.game, item.objectives)
        return tree_question(tree, item.objectives)
    if item.kind == "hidden":
        hsgame, observed = item.payload
        return hidden_question(hsgame, observed)
    return comm_question(item.payload)


def run_experiment(
    suite: SuiteSpec | Sequence[SuiteItem],
    methods: Sequence[str],
    backend: Backend | str | None = "oracle",
    report_path: str | Path | None = None,
    seed: int = 0,
    parallelism: int = 1,
    token_budget: int | None = None,
    record_path: str | Path | None = None,
) -> Report:
    """Score each (game, method) pair against the oracle argmax set.

    backend "oracle" builds a scripted-oracle backend preloaded with the
    compiled trace for every trial (the desk-scale stand-in for a live
    model); a Backend instance is used as given.
    """
    if isinstance(suite, SuiteSpec):
        items = generate_suite(suite)
        suite_name = suite.family
        seed = suite.seed
    else:
        items = list(suite)
        suite_name = items[0].family if items else "empty"
    report = Report(suite=suite_name, seed=seed)
    if not items:
        if report_path:
            Path(report_path).write_text(report.dumps(), encoding="utf-8")
        return report

    scripted = None
    if backend == "oracle" or backend is None:
        scripted = ScriptedOracleBackend()
        backend_obj: Backend = scripted
    elif isinstance(backend, str):
        raise GatewayError(f"unknown backend spec {backend!r}")
    else:
        backend_obj = backend
        inner = getattr(backend, "inner", None)
        if isinstance(backend, ScriptedOracleBackend):
            scripted = backend
        elif isinstance(inner, ScriptedOracleBackend):
            scripted = inner
    if record_path is not None:
        from .gateway import RecordingBackend

        backend_obj = RecordingBackend(backend_obj, record_path)

    rng = random.Random(seed)
    jobs = [(item, method) for item in items for method in methods]

    def run_one(job) -> TrialResult:
        item, method = job
        oracle_best = solve_item(item).best
        trace_ref = f"{item.id}@{method}"
        try:
            chosen, trace_text = _run_trial(
                item, method, backend_obj, scripted, rng, token_budget
            )
        except StrategosError as e:
            return TrialResult(
                game_id=item.id,
                method=method,
                chosen="",
                oracle_best=oracle_best,
                correct=False,
                trace_ref=trace_ref,
                error=f"{type(e).__name__}: {e}",
            )
        report.traces[trace_ref] = trace_text
        return TrialResult(
            game_id=item.id,
            method=method,
            chosen=chosen,
            oracle_best=oracle_best,
            correct=chosen in oracle_best,
            trace_ref=trace_ref,
        )

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(run_one, jobs))
    else:
        results = [run_one(job) for job in jobs]
    report.trials = sorted(results, key=lambda t: (t.game_id, t.method))
    if report_path:
        Path(report_path).write_text(report.dumps(), encoding="utf-8")
    return report


def _run_trial(
    item: SuiteItem,
    method: str,
    backend: Backend,
    scripted: ScriptedOracleBackend | None,
    rng: random.Random,
    token_budget: int | None,
) -> tuple[str, str]:
    actions = list(item.player_actions)
    if method == "random":
        return rng.choice(actions), ""

    if method == "strategic-factored":
        payload = item.payload
        if item.kind == "tree" and not payload.continuations:
            payload = payload.game
        if not isinstance(payload, Game):
            raise UnknownFamily("factored method needs a flat matrix game")
        prompt, question, trace = compile_item_prompt(item, format="factored")
        if scripted is not None:
            scripted.register(question, trace.text)
        context = ToolContext(game=payload, objectives=item.objectives)
        out = intercept_loop(prompt, backend, context, token_budget=token_budget)
        completion = out.text
        chosen = constrained_action(completion, actions)
        return chosen, completion

    if method == "strategic":
        prompt, question, trace = compile_item_prompt(item)
        if scripted is not None:
            scripted.register(question, trace.text)
        completion = backend.complete(
            CompletionRequest(prompt=prompt, stop=("\nQ:",))
        )
        return constrained_action(completion, actions), completion

    if method in ("0shot", "0shot-cot", "fewshot"):
        prompt = build_baseline_prompt(method, item)
        if scripted is not None:
            # the oracle stand-in answers baselines with the bare action line
            question = _item_question(item)
            player = _item_player(item)
            best = solve_item(item).best[0]
            scripted.register(question, f"A:{player}'s action:{best}")
        completion = backend.complete(
            CompletionRequest(prompt=prompt, stop=("\nQ:",))
        )
        return constrained_action(completion, actions), completion

    raise UnknownFamily(f"unknown method {method!r}")


def _item_player(item: SuiteItem) -> str:
    if item.kind == "matrix":
        return item.payload.players[0]
    if item.kind == "tree":
        return item.payload.game.players[0]
    if item.kind == "hidden":
        hsgame, _ = item.payload
        return hsgame.players[hsgame.observer]
    return item.payload.base.players[0]


def verify_report(report: Report) -> bool:
    """Recompute accuracies from the persisted trials (no aggregation drift)."""
    doc = report.to_json()
    for method, row in doc["methods"].items():
        rows = [t for t in doc["trials"] if t["method"] == method]
        k = sum(t["correct"] for t in rows)
        if row["correct"] != k or row["total"] != len(rows):
            return False
        if abs(row["accuracy"] - (k / len(rows) if rows else 0.0)) > 1e-12:
            return False
    return True


# --- fairness scoring ------------------------------------------------------------------


def score_fairness(
    proposals: Sequence[Sequence[int]],
    contexts: Sequence[tuple],
    fairness: str = "equality",
) -> float:
    """Mean |metric(proposal) - metric(optimal)| over the contexts."""
    if len(proposals) != len(contexts):
        raise ContextWithoutProposal(
            f"{len(contexts)} contexts but {len(proposals)} proposals"
        )
    gaps = []
    for proposal, (pot, values_a, values_b) in zip(proposals, contexts):
        optimal = oracle.optimal_fair_deal(pot, values_a, values_b, fairness)
        va = oracle.deal_value(proposal, values_a)
        vb = oracle.deal_value(
            [p - a for p, a in zip(pot, proposal)], values_b
        )
        metric = abs(va - vb) if fairness == "equality" else min(va, vb)
        gaps.append(abs(metric - optimal.score))
    return sum(gaps) / len(gaps)


def random_proposal_gap(
    contexts: Sequence[tuple],
    fairness: str = "equality",
    draws: int = 1000,
    seed: int = 0,
) -> float:
    """Monte-Carlo expected gap of a uniformly random proposal."""
    rng = random.Random(seed)
    total = 0.0
    for pot, values_a, values_b in contexts:
        optimal = oracle.optimal_fair_deal(pot, values_a, values_b, fairness)
        allocs = list(oracle.enumerate_allocations(pot))
        acc = 0.0
        for _ in range(draws):
            alloc = allocs[rng.randrange(len(allocs))]
            va = oracle.deal_value(alloc, values_a)
            vb = oracle.deal_value([p - a for p, a in zip(pot, alloc)], values_b)
            metric = abs(va - vb) if fairness == "equality" else min(va, vb)
            acc += abs(metric - optimal.score)
        total += acc / draws
    return total / len(contexts)
