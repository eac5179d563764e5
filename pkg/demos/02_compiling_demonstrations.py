"""Compile chain-of-thought demonstration prompts from game structures.

Every numeric line in a compiled trace comes from the oracle, so the text is
a worked solution. Shows the plain matrix format, the tie-breaking demo, a
belief trace, the broker's propose/evaluate/revise trace, and a negotiation
turn.
"""

from strategos.compiler import (
    build_demo_set,
    compile_belief_trace,
    compile_exhaustive,
    compile_proposal_trace,
    descending_game,
    matrix_question,
    tie_game,
)
from strategos.compiler.demosets import demo_hidden
from strategos.formatting import check_arithmetic

print("== The strictly-descending teaching demo ==")
game = descending_game()
print(matrix_question(game))
print()
trace = compile_exhaustive(game, 0)
print(trace.text)
print(f"\nspans: {[s.kind for s in trace.spans]}, final action {trace.final_action!r}")

print("\n== Tie-breaking demo (conclusion picks the first action) ==")
tie_trace = compile_exhaustive(tie_game(), 0)
print("\n".join(tie_trace.text.splitlines()[-3:]))

print("\n== A belief trace over hidden states ==")
hs, observed = demo_hidden()
belief_trace = compile_belief_trace(hs, observed)
print(belief_trace.text)

print("\n== Broker trace (propose / evaluate / revise) ==")
broker = compile_proposal_trace((3, 1, 2), ((1, 3, 2), (0, 2, 4)), "equality", 3)
print(broker.text)

print("\n== Full prompt assembly ==")
demo_set = build_demo_set("simultaneous-2x2", eval_game=tie_game())
flat = demo_set.flat_prompt()
print(f"2 demos + eval question = {len(flat)} bytes")
print(f"arithmetic check over everything printed: "
      f"{'clean' if not check_arithmetic(flat) else 'BROKEN'}")
