"""Trace compiler for matrix games: flat, sequential, and staged trees.

Every numeric line is filled from the oracle, so a compiled trace is a worked
solution, not a plausible one. The rendered text for the canonical teaching
games is pinned byte-for-byte by golden tests.
"""

from __future__ import annotations

import itertools
from typing import Sequence

from .. import oracle
from ..errors import UnsolvableInput
from ..formatting import fmt_num
from ..games import Game, GameTree, Objective, Profile, apply_objective
from .names import idx_str, join_names, possessive, reward_symbols
from .traces import ReasoningTrace, TraceBuilder

ACTION_MARKER = "'s action:"


# --- question rendering --------------------------------------------------------


def rule_line(game: Game, profile: Profile, number: int, symbols=None) -> str:
    symbols = symbols or reward_symbols(game.players)
    idx = game.profile_index(profile)
    plays = ", ".join(f"{p}:{a}" for p, a in zip(game.players, profile))
    rewards = " and ".join(
        f"{p} reward {symbols[i]}{idx_str(idx)}={fmt_num(game.reward(profile)[i])}"
        for i, p in enumerate(game.players)
    )
    return f"{number}. {plays}, then {rewards}"


def rule_lines(game: Game, start: int = 1, symbols=None) -> list[str]:
    return [
        rule_line(game, profile, start + k, symbols)
        for k, profile in enumerate(game.profiles())
    ]


def rule_numbers(game: Game, start: int = 1) -> dict[Profile, int]:
    return {profile: start + k for k, profile in enumerate(game.profiles())}


def objective_phrase(objective: Objective, players: tuple[str, ...]) -> str:
    """"maximize his reward" style verb phrase for one player's objective."""
    owner = players[objective.owner]
    if objective.kind == "max":
        return f"maximize {possessive(owner)} reward"
    if objective.kind == "help":
        target = objective.beneficiary
        if target is None:
            target = 1 - objective.owner
        return f"help {players[target]} maximize {possessive(players[target])} reward"
    if objective.kind == "welfare":
        return "maximize the total reward of all players"
    if objective.kind == "daxity":
        other = players[1 - objective.owner]
        return (
            f"maximize daxity, the difference between {possessive(owner)} reward "
            f"and {other}'s reward"
        )
    weights = ", ".join(
        f"{fmt_num(w)}*{reward_symbols(players)[i]}"
        for i, w in enumerate(objective.weights)
    )
    return f"maximize the weighted reward {weights}"


def objective_sentence(objectives: Sequence[Objective], players) -> str:
    """The question sentence describing what every player is trying to do."""
    phrases = [objective_phrase(objectives[i], tuple(players)) for i in range(len(players))]
    if all(
        o.kind == "max" and o.owner == i for i, o in enumerate(objectives)
    ):
        return f"{join_names(list(players))} are trying to maximize their reward."
    if len(set(phrases)) == 1:
        return f"{join_names(list(players))} are trying to {phrases[0]}."
    return " ".join(
        f"{p} is trying to {phrase}." for p, phrase in zip(players, phrases)
    )


OPPONENT_MODEL_SENTENCE = (
    "{opp} does not think about their opponent and only plays the action with "
    "the highest expected reward. {player} thinks about other players' reasoning."
)


def matrix_question(
    game: Game,
    objectives: Sequence[Objective] | None = None,
    player: int = 0,
    opponent_model: bool = False,
    pick_from: bool = False,
) -> str:
    """Render the question block for a flat matrix game."""
    objectives = _default_objectives(game, objectives)
    lines = [
        f"Q:{join_names(list(game.players))} are playing a game. "
        f"{join_names(list(game.players))} get rewards according to these rules:"
    ]
    lines += rule_lines(game)
    closing = []
    if game.mode == "sequential":
        closing.append(_sequential_order_sentence(game))
    closing.append(objective_sentence(objectives, game.players))
    if opponent_model:
        opp_names = join_names(
            [game.players[i] for i in game.opponents(player)]
        )
        closing.append(
            OPPONENT_MODEL_SENTENCE.format(opp=opp_names, player=game.players[player])
        )
    question = f"What action should {game.players[player]} play?"
    if pick_from:
        acts = list(game.actions[player])
        question += f" Pick from {', '.join(acts)}, {' or '.join(acts)}?"
    closing.append(question)
    lines.append(" ".join(closing))
    return "\n".join(lines)


def _sequential_order_sentence(game: Game) -> str:
    first, second = game.players[0], game.players[1]
    return f"{first} plays first, then {second} sees {first}'s action and plays."


# --- shared fragments -----------------------------------------------------------


def _objective_formula(
    objective: Objective, game: Game, profile: Profile, symbols
) -> tuple[str, str, float]:
    """(symbolic formula, instantiated arithmetic, value) for a leaf."""
    idx = idx_str(game.profile_index(profile))
    vec = game.reward(profile)
    value = apply_objective(objective, vec)
    if objective.kind == "max":
        sym = f"{symbols[objective.owner]}{idx}"
        return f"({sym})", f"{sym}={fmt_num(value)}", value
    if objective.kind == "help":
        target = objective.beneficiary
        if target is None:
            target = 1 - objective.owner
        sym = f"{symbols[target]}{idx}"
        return f"({sym})", f"{sym}={fmt_num(value)}", value
    if objective.kind == "welfare":
        syms = "+".join(f"{s}{idx}" for s in symbols)
        nums = "+".join(fmt_num(v) for v in vec)
        return f"({syms})", f"{nums}={fmt_num(value)}", value
    if objective.kind == "daxity":
        own, other = objective.owner, 1 - objective.owner
        formula = f"({symbols[own]}{idx}-{symbols[other]}{idx})"
        nums = f"{fmt_num(vec[own])}-{fmt_num(vec[other])}"
        return formula, f"{nums}={fmt_num(value)}", value
    syms = "+".join(f"{fmt_num(w)}*{s}{idx}" for w, s in zip(objective.weights, symbols))
    nums = "+".join(f"{fmt_num(w)}*{fmt_num(v)}" for w, v in zip(objective.weights, vec))
    return f"({syms})", f"{nums}={fmt_num(value)}", value


def restatement(
    game: Game,
    profile: Profile,
    viewer: int,
    objective: Objective,
    numbers: dict[Profile, int],
    symbols,
) -> tuple[str, float]:
    """Quote a rule and annotate it with the viewer's objective value."""
    base = rule_line(game, profile, numbers[profile], symbols)
    idx = idx_str(game.profile_index(profile))
    formula, inst, value = _objective_formula(objective, game, profile, symbols)
    viewer_name = game.players[viewer]
    return f"{base}: {viewer_name}'s reward r{idx}={formula}={inst}", value


def comparison_sentence(
    values: dict[str, float],
    actor: str,
    role: str,
    suffix: str = "",
) -> tuple[str, tuple[str, ...]]:
    """"As b1=5, b2=3, 5>3, b1>b2, Bob will play b1." plus the argmax set.

    role "opponent" renders ties as "may play x or y"; role "final" breaks
    ties explicitly toward the first action.
    """
    order = sorted(values, key=lambda a: (-values[a], list(values).index(a)))
    best = oracle.argmax_set(values)
    best_in_order = [a for a in order if a in best]
    bindings = ", ".join(f"{a}={fmt_num(values[a])}" for a in order)
    rels_nums = ""
    rels_acts = ""
    for i, a in enumerate(order):
        if i:
            rel = "=" if abs(values[a] - values[order[i - 1]]) <= oracle.ARGMAX_TOL else "<"
            sym = "=" if rel == "=" else ">"
            rels_nums += sym
            rels_acts += sym
        rels_nums += fmt_num(values[a])
        rels_acts += a
    where = f" {suffix}" if suffix else ""
    if len(best) == 1:
        sentence = (
            f"As {bindings}, {rels_nums}, {rels_acts}, {actor} will play "
            f"{best_in_order[0]}{where}."
        )
    elif role == "opponent":
        sentence = (
            f"As {bindings}, {rels_nums}, {rels_acts}, {actor} may play "
            f"{' or '.join(best_in_order)}{where}."
        )
    else:
        sentence = (
            f"As {bindings}, {rels_nums}, {rels_acts}, we break the tie by "
            f"picking the first action. {actor} will play {best_in_order[0]}{where}."
        )
    return sentence, tuple(best_in_order)


def expected_line(
    owner: str, action: str, syms: list[str], vals: list[float], label="expected reward"
) -> str:
    if len(vals) == 1:
        return (
            f"So, {owner}'s reward for {action} is {syms[0]}={fmt_num(vals[0])}"
        )
    total = sum(vals)
    mean = total / len(vals)
    return (
        f"So, {owner}'s {label} for {action} is ({'+'.join(syms)})/{len(vals)} = "
        f"({'+'.join(fmt_num(v) for v in vals)})/{len(vals)} = "
        f"{fmt_num(total)}/{len(vals)} = {fmt_num(mean)}"
    )


# --- flat simultaneous / sequential traces ---------------------------------------


def compile_exhaustive(
    game_or_tree: Game | GameTree,
    player: int = 0,
    objectives: Sequence[Objective] | None = None,
    opponent_level: int = 0,
) -> ReasoningTrace:
    """Full worked solution in the teaching-demo format.

    Opponent reasoning first (leaf listing plus shown expected-value
    arithmetic), then the player's best response restricted to the predicted
    opponent actions. Conclusions break ties toward the first action.
    """
    if isinstance(game_or_tree, GameTree):
        return _compile_tree(game_or_tree, player, objectives, opponent_level)
    game = game_or_tree
    objectives = _default_objectives(game, objectives)
    if game.mode == "sequential":
        return _compile_sequential(game, player, objectives)
    return _compile_simultaneous(game, player, objectives, opponent_level)


def _default_objectives(game: Game, objectives) -> tuple[Objective, ...]:
    if objectives is None:
        return tuple(Objective("max", i) for i in range(game.n_players))
    return tuple(objectives)


def _compile_simultaneous(
    game: Game,
    player: int,
    objectives: Sequence[Objective],
    opponent_level: int,
    builder: TraceBuilder | None = None,
    top_level: bool = True,
) -> ReasoningTrace:
    b = builder or TraceBuilder()
    symbols = reward_symbols(game.players)
    numbers = rule_numbers(game)
    me = game.players[player]
    predicted: dict[int, tuple[str, ...]] = {}

    for spot, opp in enumerate(game.opponents(player)):
        opp_name = game.players[opp]
        if spot == 0:
            lead = f"Let's reason about what {opp_name} wants to first."
            if top_level:
                lead = "A:" + lead
        else:
            lead = f"Now let's reason about what {opp_name} wants."
        b.line("search", lead)
        b.line(
            "search",
            f"{opp_name} wants to {objective_phrase(objectives[opp], game.players)}.",
        )
        if opponent_level <= 0:
            choice = oracle.level0(game, opp, objectives[opp])
        else:
            choice = oracle.solve_level_k(game, opp, opponent_level, objectives)
        for action in game.actions[opp]:
            b.line("search", f"If {opp_name} plays {action},")
            syms, vals = [], []
            for profile in game.profiles():
                if profile[opp] != action:
                    continue
                line, value = restatement(
                    game, profile, opp, objectives[opp], numbers, symbols
                )
                b.line("search", line)
                syms.append(f"r{idx_str(game.profile_index(profile))}")
                vals.append(value)
            b.line("search", expected_line(opp_name, action, syms, vals))
        sentence, best = comparison_sentence(choice.values, opp_name, "opponent")
        b.line("value", sentence)
        predicted[opp] = best

    b.line("search", f"Now let's reason for {me}.")
    b.line("search", f"{me} wants to {objective_phrase(objectives[player], game.players)}.")

    all_single = all(len(v) == 1 for v in predicted.values())
    opps = game.opponents(player)
    if all_single:
        knowns = join_names(
            [f"{game.players[o]} plays {predicted[o][0]}" for o in opps]
        )
        b.line(
            "search",
            f"As we know {knowns} we dont need to calculate expected reward for "
            f"each action, listing actions where {knowns} is enough.",
        )
        values: dict[str, float] = {}
        for own in game.actions[player]:
            profile = _merge_profile(game, player, own, {o: predicted[o][0] for o in opps})
            line, value = restatement(
                game, profile, player, objectives[player], numbers, symbols
            )
            b.line("search", line)
            values[own] = value
        b.line(
            "search",
            f"We know {knowns}, so {me} will pick the action with the highest payoff.",
        )
    else:
        plays = join_names(
            [f"{game.players[o]} plays {' or '.join(predicted[o])}" for o in opps]
        )
        b.line(
            "search",
            f"As {plays} we calculate the expected reward for each action,",
        )
        values = {}
        for own in game.actions[player]:
            b.line("search", f"If {me} plays {own},")
            syms, vals = [], []
            for combo in itertools.product(*(predicted[o] for o in opps)):
                profile = _merge_profile(
                    game, player, own, dict(zip(opps, combo))
                )
                line, value = restatement(
                    game, profile, player, objectives[player], numbers, symbols
                )
                b.line("search", line)
                syms.append(f"r{idx_str(game.profile_index(profile))}")
                vals.append(value)
            b.line("search", expected_line(me, own, syms, vals))
            values[own] = sum(vals) / len(vals)

    sentence, best = comparison_sentence(values, me, "final")
    b.line("value", sentence)
    final = best[0]
    if top_level:
        b.add("conclusion", f"{me}{ACTION_MARKER}{final}")
        return b.build(final_action=final)
    return b.build(final_action=final)


def _merge_profile(game: Game, player: int, own: str, others: dict[int, str]) -> Profile:
    profile = [""] * game.n_players
    profile[player] = own
    for o, a in others.items():
        profile[o] = a
    return tuple(profile)


def _compile_sequential(
    game: Game, player: int, objectives: Sequence[Objective]
) -> ReasoningTrace:
    if game.n_players != 2 or player != 0:
        raise UnsolvableInput("sequential traces cover the two-player first mover")
    b = TraceBuilder()
    symbols = reward_symbols(game.players)
    numbers = rule_numbers(game)
    me, other = game.players[0], game.players[1]
    b.line("search", f"A:Let's reason about what {other} does after each of {me}'s actions.")
    b.line("search", f"{other} wants to {objective_phrase(objectives[1], game.players)}.")
    leader_values: dict[str, float] = {}
    for own in game.actions[0]:
        b.line("search", f"If {me} plays {own},")
        reply_values: dict[str, float] = {}
        for reply in game.actions[1]:
            line, value = restatement(
                game, (own, reply), 1, objectives[1], numbers, symbols
            )
            b.line("search", line)
            reply_values[reply] = value
        sentence, best = comparison_sentence(
            reply_values, other, "opponent", suffix=f"after {own}"
        )
        b.line("value", sentence)
        syms, vals = [], []
        for reply in best:
            idx = idx_str(game.profile_index((own, reply)))
            _, _, value = _objective_formula(
                objectives[0], game, (own, reply), symbols
            )
            syms.append(f"r{idx}")
            vals.append(value)
        if len(vals) == 1:
            formula, inst, _ = _objective_formula(
                objectives[0], game, (own, best[0]), symbols
            )
            b.line(
                "value",
                f"So, if {me} plays {own}, {me}'s reward is "
                f"r{idx_str(game.profile_index((own, best[0])))}={formula}={inst}.",
            )
        else:
            b.line("value", expected_line(me, own, syms, vals) + ".")
        leader_values[own] = sum(vals) / len(vals)
    b.line("search", f"Now let's reason for {me}.")
    b.line("search", f"{me} wants to {objective_phrase(objectives[0], game.players)}.")
    sentence, best = comparison_sentence(leader_values, me, "final")
    b.line("value", sentence)
    final = best[0]
    b.add("conclusion", f"{me}{ACTION_MARKER}{final}")
    return b.build(final_action=final)


# --- staged trees -----------------------------------------------------------------


def tree_question(
    tree: GameTree, objectives: Sequence[Objective] | None = None, player: int = 0
) -> str:
    objectives = _default_objectives(tree.game, objectives)
    game = tree.game
    players = join_names(list(game.players))
    stages = _stages(tree)
    lines = [f"Q:{players} are playing a game with {len(stages)} stages."]
    start = 1
    for depth, (node, via) in enumerate(stages, start=1):
        if via is not None:
            plays = join_names(
                [f"{p} plays {a}" for p, a in zip(node.game.players, via)]
            )
            lines.append(
                f"If {plays} in stage {depth - 1}, then instead of those rewards "
                f"they play stage {depth}."
            )
        lines.append(
            f"In stage {depth}, {players} get rewards according to these rules:"
        )
        symbols = _stage_symbols(node.game, depth)
        lines += rule_lines(node.game, start=start, symbols=symbols)
        start += len(list(node.game.profiles()))
        lines.append(_mode_sentence(node.game, depth))
    closing = [objective_sentence(objectives, game.players)]
    closing.append(f"What action should {game.players[player]} play in stage 1?")
    lines.append(" ".join(closing))
    return "\n".join(lines)


def _mode_sentence(game: Game, depth: int) -> str:
    if game.mode == "sequential":
        first, second = game.players[0], game.players[1]
        return (
            f"In stage {depth} {first} plays first, then {second} sees "
            f"{first}'s action and plays."
        )
    return f"In stage {depth} {join_names(list(game.players))} play at the same time."


def _stage_symbols(game: Game, depth: int):
    base = reward_symbols(game.players)
    if depth == 1:
        return base
    return tuple(f"{s[0]}{depth}r" for s in base)


def _stages(tree: GameTree) -> list[tuple[GameTree, Profile | None]]:
    """Linear stage chain (trees in the suites continue one profile per stage)."""
    stages: list[tuple[GameTree, Profile | None]] = [(tree, None)]
    node, via = tree, None
    while True:
        subtrees = [
            (prof, nxt)
            for prof, nxt in node.continuations.items()
            if isinstance(nxt, GameTree)
        ]
        if not subtrees:
            return stages
        if len(subtrees) > 1:
            raise UnsolvableInput("staged traces cover one continuation per stage")
        via, node = subtrees[0]
        stages.append((node, via))


def _compile_tree(
    tree: GameTree,
    player: int,
    objectives: Sequence[Objective] | None,
    opponent_level: int,
) -> ReasoningTrace:
    objectives = _default_objectives(tree.game, objectives)
    stages = _stages(tree)
    b = TraceBuilder()
    numbering_start = 1 + sum(
        len(list(node.game.profiles())) for node, _ in stages[:-1]
    )

    # Work bottom-up: replace each continued profile by its solved expectation.
    resolved: dict[int, tuple[float, ...]] = {}
    for depth in range(len(stages) - 1, 0, -1):
        node, via = stages[depth]
        flat = _resolve_stage_game(node, player, objectives, opponent_level, resolved, depth + 1)
        symbols = _stage_symbols(flat, depth + 1)
        plays = join_names([f"{p} plays {a}" for p, a in zip(flat.players, via)])
        lead = f"Let's solve the stage {depth + 1} game reached when {plays} in stage {depth} first."
        if depth == len(stages) - 1:
            lead = "A:" + lead
        b.line("search", lead)
        vector = _render_stage_outcome(
            b, flat, player, objectives, opponent_level, symbols, depth + 1
        )
        resolved[depth] = vector

    root_flat = _resolve_stage_game(
        stages[0][0], player, objectives, opponent_level, resolved, 1
    )
    b.line("search", "Now stage 1 is a game with these rules:")
    for line in rule_lines(root_flat):
        b.line("search", line)
    sub = _compile_stage_body(root_flat, player, objectives, opponent_level, b)
    final = sub
    me = root_flat.players[player]
    b.add("conclusion", f"{me}{ACTION_MARKER}{final}")
    return b.build(final_action=final)


def _resolve_stage_game(
    node: GameTree,
    player: int,
    objectives,
    opponent_level: int,
    resolved: dict[int, tuple[float, ...]],
    depth: int,
) -> Game:
    """Stage game with continuations replaced by solved expectations."""
    import numpy as np

    game = node.game
    tensor = np.array(game.payoffs, dtype=float)
    for profile, nxt in node.continuations.items():
        if isinstance(nxt, GameTree):
            tensor[game.profile_index(profile)] = resolved[depth]
        else:
            tensor[game.profile_index(profile)] = tuple(float(x) for x in nxt)
    return Game(game.players, game.actions, tensor, game.mode)


def _render_stage_outcome(
    b: TraceBuilder,
    flat: Game,
    player: int,
    objectives,
    opponent_level: int,
    symbols,
    depth: int,
) -> tuple[float, ...]:
    """Render the subgame solution and emit its expected reward sentence."""
    numbers = rule_numbers(flat)
    me = flat.players[player]
    if flat.mode == "sequential":
        trace = _compile_sequential_stage(b, flat, player, objectives, symbols, numbers)
    else:
        trace = _compile_simultaneous_stage(
            b, flat, player, objectives, opponent_level, symbols, numbers
        )
    vector = oracle.expected_stage_reward(flat, player, objectives, opponent_level)
    gains = " and ".join(
        f"{p} gets {fmt_num(v)}" for p, v in zip(flat.players, vector)
    )
    b.line("value", f"So, if they reach stage {depth}, {gains}.")
    return vector


def _compile_simultaneous_stage(b, flat, player, objectives, opponent_level, symbols, numbers):
    body = _compile_simultaneous(
        flat, player, objectives, opponent_level, builder=None, top_level=False
    )
    b.add("search", body.text + "\n")
    return body


def _compile_sequential_stage(b, flat, player, objectives, symbols, numbers):
    body = _compile_sequential(flat, player, objectives)
    text = body.text
    # strip the top-level framing so the stage reads as a sub-derivation
    if text.startswith("A:"):
        text = text[2:]
    marker = f"{flat.players[player]}{ACTION_MARKER}"
    if text.endswith(marker + body.final_action):
        text = text[: -len(marker + body.final_action)].rstrip("\n")
    b.add("search", text + "\n")
    return body


def _compile_stage_body(flat, player, objectives, opponent_level, b) -> str:
    if flat.mode == "sequential":
        body = _compile_sequential(flat, player, objectives)
        text = body.text
        if text.startswith("A:"):
            text = text[2:]
        marker = f"{flat.players[player]}{ACTION_MARKER}"
        if text.endswith(marker + body.final_action):
            text = text[: -len(marker + body.final_action)].rstrip("\n")
        b.add("search", text + "\n")
        return body.final_action
    body = _compile_simultaneous(
        flat, player, objectives, opponent_level, builder=None, top_level=False
    )
    b.add("search", body.text + "\n")
    return body.final_action


# --- value-assignment fragments (evaluation explanations) -------------------------


def compile_evaluation(
    node_rewards: dict[str, Sequence[float]],
    objective: Objective,
    actor: str,
    players: Sequence[str],
) -> str:
    """Leaf listing plus the natural-language value explanation.

    "Bob wants to maximize his reward. ... As a1 gives a higher reward
    compared to a2, Bob will choose a1."
    """
    players = tuple(players)
    lines = [f"{actor} wants to {objective_phrase(objective, players)}."]
    values: dict[str, float] = {}
    for action, vec in node_rewards.items():
        value = apply_objective(objective, vec)
        values[action] = value
        if objective.kind in ("max", "help"):
            inst = fmt_num(value)
        elif objective.kind == "welfare":
            inst = "(" + "+".join(fmt_num(v) for v in vec) + f")={fmt_num(value)}"
        elif objective.kind == "daxity":
            own, other = objective.owner, 1 - objective.owner
            inst = f"({fmt_num(vec[own])}-{fmt_num(vec[other])})={fmt_num(value)}"
        else:
            inst = (
                "("
                + "+".join(
                    f"{fmt_num(w)}*{fmt_num(v)}"
                    for w, v in zip(objective.weights, vec)
                )
                + f")={fmt_num(value)}"
            )
        lines.append(f"If {actor} plays {action}, {actor}'s reward is {inst}.")
    best = oracle.argmax_set(values)
    ordered = [a for a in values if a in best]
    rest = [a for a in values if a not in best]
    if len(best) == len(values):
        lines.append(
            f"As {join_names(list(values))} give the same reward, "
            f"{actor} will choose {ordered[0]}."
        )
    else:
        lines.append(
            f"As {ordered[0]} gives a higher reward compared to "
            f"{join_names(rest)}, {actor} will choose {ordered[0]}."
        )
    return "\n".join(lines)
