"""Factored reasoning: tool calls, the interception loop, and the cascade.

Instead of listing every leaf inline, the factored format writes
search/compare/mean calls. The runtime intercepts each call in the generated
text, evaluates it (here: against the exact oracle), splices the result back
in, and resumes. A cascade chains contexts for iterated reasoning.
"""

from strategos import Objective, make_game, solve_level_k
from strategos.compiler import compile_factored_demos, matrix_question
from strategos.compiler.factored import compile_factored_trace
from strategos.dsl import (
    CascadeConfig,
    ToolContext,
    eval_call,
    intercept_loop,
    parse_tool_call,
    render_call,
    run_cascade,
)
from strategos.gateway import ScriptedOracleBackend, estimate_tokens

game = make_game(
    ["Gopher", "Bob"],
    [["a1", "a2"], ["b1", "b2"]],
    {
        ("a1", "b1"): (-3, -2),
        ("a1", "b2"): (-1, -4),
        ("a2", "b1"): (1, 2),
        ("a2", "b2"): (3, 4),
    },
)

print("== The tool language ==")
for text in (
    "mean([7, 3])",
    "compare(Bob, max, [b1=0, b2=0])",
    "search(Gopher, Bob, max, a2, [bob[b1, b2]])",
):
    call, _ = parse_tool_call(text)
    result = eval_call(call, ToolContext(game=game))
    print(f"{render_call(call)}  ->  {result}")

print("\n== Interception loop ==")
question = matrix_question(game, opponent_model=True, pick_from=True)
trace = compile_factored_trace(game)
backend = ScriptedOracleBackend()
backend.register(question, trace.text)
prompt = compile_factored_demos("recursive").demo_text() + "\n\n" + question + "\n\nA:"
out = intercept_loop(prompt, backend, ToolContext(game=game))
print(out.text)
print(f"\nfinal action: {out.final_action}")

print("\n== Context pressure on a big game ==")
import random

rng = random.Random(0)
big = make_game(
    ["Gopher", "Bob"],
    [[f"a{i+1}" for i in range(6)], [f"b{j+1}" for j in range(6)]],
    [[(rng.randint(1, 9), rng.randint(1, 9)) for _ in range(6)] for _ in range(6)],
)
from strategos.compiler import compile_exhaustive

unfactored = compile_exhaustive(big, 0)
factored = compile_factored_trace(big)
print(f"6x6 unfactored trace: ~{estimate_tokens(unfactored.text)} tokens")
print(f"6x6 factored trace:   ~{estimate_tokens(factored.text)} tokens")

print("\n== Cascade: play against deeper opponents ==")
pennies = make_game(
    ["Gopher", "Bob"],
    [["a1", "a2"], ["b1", "b2"]],
    {
        ("a1", "b1"): (4, -4),
        ("a1", "b2"): (-1, 1),
        ("a2", "b1"): (-1, 1),
        ("a2", "b2"): (1, -1),
    },
)
for levels in (1, 2, 3):
    action = run_cascade(pennies, CascadeConfig(levels=levels, backends=(None,)))
    oracle_says = solve_level_k(
        pennies, 0, levels, (Objective("max", 0), Objective("max", 1))
    ).best
    print(f"{levels}-level cascade plays {action}; oracle level-{levels} set {oracle_says}")
