"""The evaluation harness: suites, methods, reports, record/replay.

Scores the strategic prompt pipeline and the baselines on generated game
suites with the scripted-oracle backend standing in for a live model, then
records a run to a transcript and replays it byte-identically.
"""

import tempfile
from pathlib import Path

from strategos.gateway import ReplayBackend
from strategos.harness import run_experiment, verify_report
from strategos.suites import SuiteSpec, generate_suite, solve_item

print("== Suite generation ==")
for family in ("simultaneous-2x2", "two-stage", "hidden-state", "communication"):
    items = generate_suite(SuiteSpec(family, seed=0))
    print(f"{family}: {len(items)} games, e.g. {items[0].id}")

item = generate_suite(SuiteSpec("simultaneous-2x2", seed=0))[0]
print(f"\noracle solution for {item.id}: {solve_item(item).best}")

print("\n== Methods on the simultaneous suite (oracle-backed) ==")
report = run_experiment(
    SuiteSpec("simultaneous-2x2", seed=0),
    ["strategic", "0shot", "fewshot", "random"],
    backend="oracle",
)
for method in report.methods():
    print(f"{method:10s} {report.display(method)}")
print(f"report self-check: {verify_report(report)}")
print()
print(report.markdown())

print("\n== Factored method on bigger games ==")
for family in ("larger-actions", "multi-player"):
    rep = run_experiment(SuiteSpec(family, seed=0), ["strategic-factored"], backend="oracle")
    print(f"{family}: {rep.display('strategic-factored')}")

print("\n== Record once, replay twice ==")
with tempfile.TemporaryDirectory() as tmp:
    transcript = Path(tmp) / "run.jsonl"
    spec = SuiteSpec("hidden-state", seed=0)
    recorded = run_experiment(spec, ["strategic"], backend="oracle", record_path=transcript)
    replay_1 = run_experiment(spec, ["strategic"], backend=ReplayBackend(transcript))
    replay_2 = run_experiment(spec, ["strategic"], backend=ReplayBackend(transcript))
    print(f"recorded:      {recorded.display('strategic')}")
    print(f"replayed:      {replay_1.display('strategic')}")
    print(f"byte-identical reports: {replay_1.dumps() == replay_2.dumps() == recorded.dumps()}")
