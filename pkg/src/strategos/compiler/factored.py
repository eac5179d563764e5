"""Factored-reasoning prompts: tool-call traces and base-case contexts.

The recursive format writes reasoning as search/compare calls whose results a
runtime splices in; the base format is the small fresh-context prompt a
`search` call dispatches to. Both are pinned by golden tests on the canonical
teaching games.
"""

from __future__ import annotations

from typing import Sequence

from .. import oracle
from ..errors import UnsupportedFamily
from ..formatting import fmt_num
from ..games import Game, Objective
from .matrix import (
    ACTION_MARKER,
    _default_objectives,
    comparison_sentence,
    matrix_question,
    objective_phrase,
    rule_line,
    rule_numbers,
)
from .names import idx_str, join_names, possessive, reward_symbols
from .traces import DemoSet, ReasoningTrace, TraceBuilder

TOOL_HEADER = """There are 3 functions that help in solving the problems:

1. search: search(agent, other_agent, objective, action, other_actions) returns the expected reward for the agent. other actions are passed when the agent thinks about other agents.

2. compare: compare(agent, objective, [list of actions]) returns the action that maximizes the agent's objective.

3. mean: mean([list of numbers]) returns the mean of the list of numbers."""


def _objective_symbol(objective: Objective, game: Game) -> str:
    symbols = reward_symbols(game.players)
    if objective.kind == "max":
        return symbols[objective.owner]
    if objective.kind == "help":
        target = objective.beneficiary
        if target is None:
            target = 1 - objective.owner
        return symbols[target]
    if objective.kind == "welfare":
        return "+".join(symbols)
    if objective.kind == "daxity":
        return f"{symbols[objective.owner]}-{symbols[1 - objective.owner]}"
    return "w*" + "+w*".join(symbols)


def _render_set(actions: Sequence[str]) -> str:
    return "[" + ",".join(actions) + "]"


def compile_factored_trace(
    game: Game,
    player: int = 0,
    objectives: Sequence[Objective] | None = None,
) -> ReasoningTrace:
    """Tool-call reasoning trace with results filled from the oracle."""
    objectives = _default_objectives(game, objectives)
    b = TraceBuilder()
    me = game.players[player]
    opps = game.opponents(player)
    predicted: dict[int, tuple[str, ...]] = {}

    for spot, opp in enumerate(opps):
        opp_name = game.players[opp]
        others = [game.players[i] for i in range(game.n_players) if i != opp]
        others_txt = others[0] if len(others) == 1 else "[" + ", ".join(others) + "]"
        lead = f"Let's reason about what {opp_name} wants to first."
        if spot == 0:
            lead = "A:" + lead
        else:
            lead = f"Now let's reason about what {opp_name} wants."
        b.line("search", lead)
        b.line(
            "search",
            f"{opp_name} wants to {objective_phrase(objectives[opp], game.players)}: "
            f"{_objective_symbol(objectives[opp], game)}.",
        )
        choice = oracle.level0(game, opp, objectives[opp])
        for action in game.actions[opp]:
            b.line(
                "search",
                f"If {opp_name} plays {action}, exepected reward for {action} is "
                f"search({opp_name}, {others_txt}, {objectives[opp].kind}, {action})"
                f" = {fmt_num(choice.values[action])}.",
            )
        kv = ", ".join(f"{a}={fmt_num(choice.values[a])}" for a in game.actions[opp])
        b.line(
            "value",
            f"So, {opp_name} will play compare({opp_name}, {objectives[opp].kind}, "
            f"[{kv}]) = {_render_set(choice.best)}.",
        )
        predicted[opp] = choice.best

    b.line("search", f"Now let's reason for {me}.")
    b.line(
        "search",
        f"{me} wants to {objective_phrase(objectives[player], game.players)}: "
        f"{_objective_symbol(objectives[player], game)}.",
    )
    plays = join_names(
        [f"{game.players[o]} plays {' or '.join(predicted[o])}" for o in opps]
    )
    if all(len(predicted[o]) == 1 for o in opps):
        b.line("search", f"As {plays}, we calculate the expected reward for each action,")
    else:
        b.line("search", f"As {plays} we calculate the expected reward for each action,")
    restriction = ", ".join(
        f"{game.players[o].lower()}[{', '.join(predicted[o])}]" for o in opps
    )
    opp_names = [game.players[o] for o in opps]
    opp_txt = opp_names[0] if len(opp_names) == 1 else "[" + ", ".join(opp_names) + "]"
    dists = {o: {a: 1.0 / len(predicted[o]) for a in predicted[o]} for o in opps}
    mine = oracle.best_response(game, player, objectives[player], dists)
    for action in game.actions[player]:
        b.line(
            "search",
            f"If {me} plays {action}, exepected reward for {action} is "
            f"search({me}, {opp_txt}, {objectives[player].kind}, {action}, "
            f"[{restriction}]) = {fmt_num(mine.values[action])}.",
        )
    kv = ", ".join(f"{a}={fmt_num(mine.values[a])}" for a in game.actions[player])
    b.line(
        "value",
        f"So, {me} will play compare({me}, {objectives[player].kind}, [{kv}]) = "
        f"{_render_set(mine.best)}.",
    )
    final = mine.best[0]
    b.add("conclusion", f"{me}{ACTION_MARKER}{final}.")
    return b.build(final_action=final)


# --- base-case contexts -----------------------------------------------------------


def base_question(
    game: Game,
    agent: int,
    action: str,
    restriction: dict[int, tuple[str, ...]] | None = None,
    objective: Objective | None = None,
) -> str:
    """Fresh-context question for one search() dispatch.

    Lists only the subtree where the agent's action is fixed (and other
    players restricted when the call says so), renumbered from 1.
    """
    if objective is None:
        objective = Objective("max", agent)
    restriction = restriction or {}
    profiles = _subtree_profiles(game, agent, action, restriction)
    lines = [
        f"Q:{join_names(list(game.players))} are playing a game. "
        f"{join_names(list(game.players))} get rewards according to these rules:"
    ]
    for k, profile in enumerate(profiles, start=1):
        lines.append(rule_line(game, profile, k))
    who = game.players[agent]
    lines.append(
        f"{who}'s objective: {objective.kind}. What is {who}'s expected reward?"
    )
    return "\n".join(lines)


def base_answer(
    game: Game,
    agent: int,
    action: str,
    restriction: dict[int, tuple[str, ...]] | None = None,
    objective: Objective | None = None,
) -> tuple[str, float]:
    """Worked base-case answer ending "Answer:<value>."."""
    if objective is None:
        objective = Objective("max", agent)
    restriction = restriction or {}
    symbols = reward_symbols(game.players)
    profiles = _subtree_profiles(game, agent, action, restriction)
    who = game.players[agent]
    verb = {
        "max": f"is maximizing {possessive(who)} reward",
        "help": "is helping the other player",
        "welfare": "is maximizing the total reward",
        "daxity": "is maximizing daxity",
        "custom": "is maximizing a weighted reward",
    }[objective.kind]
    lines = [f"A: {who} {verb}: {_objective_symbol(objective, game)}."]
    syms, vals = [], []
    others = [i for i in range(game.n_players) if i != agent]
    for k, profile in enumerate(profiles, start=1):
        frees = join_names(
            [f"{game.players[i]} plays {profile[i]}" for i in others]
        )
        lines.append(f"If {frees},")
        idx = idx_str(game.profile_index(profile))
        from .matrix import _objective_formula

        formula, inst, value = _objective_formula(objective, game, profile, symbols)
        lines.append(
            f"{k}. {rule_line(game, profile, k)[len(str(k)) + 2:]}; "
            f"{who} maximizes r{idx}={formula}={inst}"
        )
        syms.append(f"r{idx}")
        vals.append(value)
    mean = sum(vals) / len(vals)
    lines.append(
        f"Expected reward for {who} = mean([{', '.join(syms)}]) = "
        f"mean([{', '.join(fmt_num(v) for v in vals)}]) = {fmt_num(mean)}."
    )
    lines.append(f"Answer:{fmt_num(mean)}.")
    return "\n".join(lines), mean


def _subtree_profiles(game, agent, action, restriction):
    game.action_index(agent, action)
    out = []
    for profile in game.profiles():
        if profile[agent] != action:
            continue
        ok = True
        for other, allowed in restriction.items():
            if profile[other] not in allowed:
                ok = False
                break
        if ok:
            out.append(profile)
    return out


# --- canonical demo sets ------------------------------------------------------------


def _descending_game() -> Game:
    from ..games import make_game

    return make_game(
        ["Gopher", "Bob"],
        [["a1", "a2"], ["b1", "b2"]],
        {
            ("a1", "b1"): (8, 7),
            ("a1", "b2"): (6, 5),
            ("a2", "b1"): (4, 3),
            ("a2", "b2"): (2, 1),
        },
    )


def _tied_opponent_game() -> Game:
    from ..games import make_game

    return make_game(
        ["Gopher", "Bob"],
        [["a1", "a2"], ["b1", "b2"]],
        {
            ("a1", "b1"): (-3, -2),
            ("a1", "b2"): (-1, -4),
            ("a2", "b1"): (1, 2),
            ("a2", "b2"): (3, 4),
        },
    )


def compile_factored_demos(format: str) -> DemoSet:
    """The two canonical factored teaching prompts.

    "recursive" declares the three tools and shows tool-call traces;
    "base" shows the single-subtree expected-value computations.
    """
    if format == "recursive":
        demos = []
        for game in (_tied_opponent_game(), _descending_game()):
            q = matrix_question(game, opponent_model=True, pick_from=True)
            demos.append((q, compile_factored_trace(game)))
        return DemoSet(instruction=TOOL_HEADER, demos=tuple(demos))
    if format == "base":
        demo_specs = [
            (_descending_game(), 1, "b1"),  # Bob's side of the b1 subtree
            (_descending_game(), 0, "a1"),  # Gopher's side of the a1 subtree
        ]
        demos = []
        for game, agent, action in demo_specs:
            q = base_question(game, agent, action)
            text, value = base_answer(game, agent, action)
            trace = (
                TraceBuilder()
                .add("search", text[: text.rindex("Answer:")])
                .add("conclusion", text[text.rindex("Answer:"):])
                .build(final_action=fmt_num(value))
            )
            demos.append((q, trace))
        return DemoSet(instruction="", demos=tuple(demos))
    raise UnsupportedFamily(f"unknown factored format {format!r}")
