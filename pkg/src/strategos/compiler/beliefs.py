"""Belief traces: hidden world states and announced intentions.

Hidden-state traces analyze the informed player's naive play per state, read
the posterior off the observed action, and best-respond under it.
Truthfulness traces decide whether a declared intention is credible before
responding. Numbers come from the oracle throughout.
"""

from __future__ import annotations

from .. import oracle
from ..formatting import fmt_num
from ..games import CommunicationGame, HiddenStateGame, Objective
from .matrix import (
    ACTION_MARKER,
    comparison_sentence,
    expected_line,
    objective_sentence,
    restatement,
    rule_line,
    rule_numbers,
)
from .names import idx_str, join_names, possessive, reward_symbols, subject
from .traces import ReasoningTrace, TraceBuilder

OPPONENT_MODEL = (
    "{opp} does not think about their opponent and only plays the action with "
    "the highest expected reward."
)


def _state_symbols(hsgame: HiddenStateGame, state: int):
    base = reward_symbols(hsgame.players)
    if state == 0:
        return base
    return tuple(f"{s[0]}{state + 1}r" for s in base)


def _state_numbers(hsgame: HiddenStateGame, state: int) -> dict:
    per_state = len(list(hsgame.games[0].profiles()))
    return rule_numbers(hsgame.games[state], start=1 + state * per_state)


def hidden_question(
    hsgame: HiddenStateGame,
    observed_action: str,
    objective: Objective | None = None,
) -> str:
    informed = hsgame.players[hsgame.informed]
    observer = hsgame.players[hsgame.observer]
    players = join_names(list(hsgame.players))
    states_txt = join_names(list(hsgame.states), sep="or")
    lines = [
        f"Q:{players} are playing a game. The state of the world can be "
        f"{states_txt}."
    ]
    if len(set(hsgame.priors)) == 1:
        lines.append("Each state is equally likely.")
    else:
        weights = ", ".join(
            f"{s}: {fmt_num(p)}" for s, p in zip(hsgame.states, hsgame.priors)
        )
        lines.append(f"The prior over states is {weights}.")
    lines.append(
        f"{observer} cannot see the state of the world. {informed} can see the "
        f"state of the world. {informed} plays first, then {observer} sees "
        f"{informed}'s action and plays."
    )
    for s, (state, game) in enumerate(zip(hsgame.states, hsgame.games)):
        lines.append(
            f"If the state is {state}, {players} get rewards according to these rules:"
        )
        numbers = _state_numbers(hsgame, s)
        symbols = _state_symbols(hsgame, s)
        for profile in game.profiles():
            lines.append(rule_line(game, profile, numbers[profile], symbols))
    objectives = [Objective("max", i) for i in range(2)]
    if objective is not None:
        objectives[hsgame.observer] = objective
    closing = [
        objective_sentence(objectives, hsgame.players),
        OPPONENT_MODEL.format(opp=informed),
        f"{informed} played {observed_action}.",
        f"What action should {observer} play?",
    ]
    lines.append(" ".join(closing))
    return "\n".join(lines)


def compile_belief_trace(
    hsgame: HiddenStateGame,
    observed_action: str,
    objective: Objective | None = None,
) -> ReasoningTrace:
    """Per-state analysis, a belief sentence, then the posterior best response."""
    informed = hsgame.players[hsgame.informed]
    observer = hsgame.players[hsgame.observer]
    if objective is None:
        objective = Objective("max", hsgame.observer)
    b = TraceBuilder()
    b.line(
        "belief",
        f"A:{observer} cannot see the state of the world, but {observer} saw "
        f"{informed} play {observed_action}.",
    )
    b.line("belief", f"Let's reason about what {informed} would do in each state.")

    informed_obj = Objective("max", hsgame.informed)
    consistent: list[str] = []
    for s, (state, game) in enumerate(zip(hsgame.states, hsgame.games)):
        numbers = _state_numbers(hsgame, s)
        symbols = _state_symbols(hsgame, s)
        b.line("belief", f"If the state is {state},")
        choice = oracle.level0(game, hsgame.informed, informed_obj)
        for action in game.actions[hsgame.informed]:
            b.line("belief", f"If {informed} plays {action},")
            syms, vals = [], []
            for profile in game.profiles():
                if profile[hsgame.informed] != action:
                    continue
                line, value = restatement(
                    game, profile, hsgame.informed, informed_obj, numbers, symbols
                )
                b.line("belief", line)
                syms.append(f"r{idx_str(game.profile_index(profile))}")
                vals.append(value)
            b.line("belief", expected_line(informed, action, syms, vals))
        sentence, best = comparison_sentence(
            choice.values, informed, "opponent", suffix=f"in {state}"
        )
        b.line("belief", sentence)
        if observed_action in best:
            consistent.append(state)

    posterior = oracle.hidden_state_posterior(hsgame, observed_action)
    if not consistent:
        b.line(
            "belief",
            f"{informed} played {observed_action}, but {observed_action} is not "
            f"{informed}'s best action in any state. The action tells us nothing, "
            f"so we keep the prior over states.",
        )
        believed = [s for s, p in posterior.probs.items() if p > 0]
    elif len(consistent) == 1:
        others = [s for s in hsgame.states if s != consistent[0]]
        b.line(
            "belief",
            f"{informed} played {observed_action}. {informed} plays "
            f"{observed_action} in {consistent[0]} but not in "
            f"{join_names(others, sep='or')}. So, the state is {consistent[0]}.",
        )
        believed = consistent
    else:
        b.line(
            "belief",
            f"{informed} played {observed_action}. {informed} plays "
            f"{observed_action} in {join_names(consistent)}. So, the state can be "
            f"{join_names(consistent, sep='or')}.",
        )
        believed = consistent

    b.line("search", f"Now let's reason for {observer}.")
    b.line(
        "search",
        f"{observer} wants to maximize {possessive(observer)} reward.",
    )
    choice = oracle.best_response_under_belief(
        hsgame, posterior, observed_action, objective
    )
    state_index = {s: i for i, s in enumerate(hsgame.states)}
    if len(believed) == 1:
        s = state_index[believed[0]]
        game = hsgame.games[s]
        numbers = _state_numbers(hsgame, s)
        symbols = _state_symbols(hsgame, s)
        b.line(
            "search",
            f"As we know the state is {believed[0]} and {informed} plays "
            f"{observed_action}, listing actions where {informed} plays "
            f"{observed_action} in {believed[0]} is enough.",
        )
        for own in game.actions[hsgame.observer]:
            profile = _profile(hsgame, observed_action, own)
            line, _ = restatement(
                game, profile, hsgame.observer, objective, numbers, symbols
            )
            b.line("search", line)
    else:
        b.line(
            "search",
            f"As {informed} plays {observed_action} in "
            f"{join_names(believed, sep='or')} we calculate the expected reward "
            f"over states for each action,",
        )
        weights = [posterior.probs[s] for s in believed]
        uniform = len(set(round(w, 12) for w in weights)) == 1
        for own in hsgame.actions[hsgame.observer]:
            b.line("search", f"If {observer} plays {own},")
            syms, vals = [], []
            for state in believed:
                s = state_index[state]
                game = hsgame.games[s]
                numbers = _state_numbers(hsgame, s)
                symbols = _state_symbols(hsgame, s)
                profile = _profile(hsgame, observed_action, own)
                line, value = restatement(
                    game, profile, hsgame.observer, objective, numbers, symbols
                )
                b.line("search", line)
                idx = idx_str(game.profile_index(profile))
                syms.append(f"{symbols[hsgame.observer]}{idx}")
                vals.append(value)
            if uniform:
                b.line("search", expected_line(observer, own, syms, vals))
            else:
                terms_sym = " + ".join(
                    f"{fmt_num(w)}*{s}" for w, s in zip(weights, syms)
                )
                terms_num = " + ".join(
                    f"{fmt_num(w)}*{fmt_num(v)}" for w, v in zip(weights, vals)
                )
                total = sum(w * v for w, v in zip(weights, vals))
                parts = "+".join(fmt_num(w * v) for w, v in zip(weights, vals))
                b.line(
                    "search",
                    f"So, {observer}'s expected reward for {own} is {terms_sym} = "
                    f"{terms_num} = {parts} = {fmt_num(total)}",
                )
    sentence, best = comparison_sentence(choice.values, observer, "final")
    b.line("value", sentence)
    final = best[0]
    b.add("conclusion", f"{observer}{ACTION_MARKER}{final}")
    return b.build(final_action=final)


def _profile(hsgame: HiddenStateGame, informed_action: str, observer_action: str):
    profile = [""] * 2
    profile[hsgame.informed] = informed_action
    profile[hsgame.observer] = observer_action
    return tuple(profile)


# --- announced intentions -------------------------------------------------------


def comm_question(commgame: CommunicationGame, objective: Objective | None = None) -> str:
    game = commgame.base
    announcer = game.players[commgame.announcer]
    player_idx = 1 - commgame.announcer
    player = game.players[player_idx]
    lines = [
        f"Q:{join_names(list(game.players))} are playing a game. "
        f"{join_names(list(game.players))} get rewards according to these rules:"
    ]
    lines += [rule_line(game, p, n) for p, n in rule_numbers(game).items()]
    objectives = [Objective("max", i) for i in range(2)]
    if objective is not None:
        objectives[player_idx] = objective
    closing = [
        objective_sentence(objectives, game.players),
        f"{announcer} does not think about their opponent and assumes {player} "
        f"will believe what {announcer} says.",
        f"{announcer} says {subject(announcer)} will play {commgame.announcement}.",
        f"{announcer} may be telling the truth or lying.",
        f"What action should {player} play?",
    ]
    lines.append(" ".join(closing))
    return "\n".join(lines)


def compile_truthfulness_trace(
    commgame: CommunicationGame, objective: Objective | None = None
) -> ReasoningTrace:
    """Decide whether the announcement is credible, then best-respond."""
    game = commgame.base
    announcer_idx = commgame.announcer
    player_idx = 1 - announcer_idx
    announcer = game.players[announcer_idx]
    player = game.players[player_idx]
    if objective is None:
        objective = Objective("max", player_idx)
    assessment = oracle.infer_truthfulness(commgame, objective)
    numbers = rule_numbers(game)
    symbols = reward_symbols(game.players)
    announced = commgame.announcement

    b = TraceBuilder()
    b.line("belief", f"A:Let's reason about whether {announcer} is telling the truth.")
    b.line(
        "belief",
        f"If {player} believes {announcer} and {announcer} plays {announced}, "
        f"listing actions where {announcer} plays {announced} is enough.",
    )
    credulous = oracle.best_response(
        game, player_idx, objective, {announcer_idx: {announced: 1.0}}
    )
    for own in game.actions[player_idx]:
        profile = _comm_profile(announcer_idx, announced, player_idx, own)
        line, _ = restatement(game, profile, player_idx, objective, numbers, symbols)
        b.line("belief", line)
    sentence, cred_best = comparison_sentence(
        credulous.values, f"a credulous {player}", "opponent"
    )
    sentence = sentence.replace(
        f"a credulous {player} may play", f"a credulous {player} would play"
    ).replace(
        f"a credulous {player} will play", f"a credulous {player} would play"
    )
    b.line("belief", sentence)

    plays_txt = " or ".join(cred_best)
    b.line(
        "belief",
        f"Now let's check what {announcer} actually wants to play if {player} "
        f"plays {plays_txt}.",
    )
    ann_obj = Objective("max", announcer_idx)
    for action in game.actions[announcer_idx]:
        if len(cred_best) > 1:
            b.line("belief", f"If {announcer} plays {action},")
        syms, vals = [], []
        for reply in cred_best:
            profile = _comm_profile(announcer_idx, action, player_idx, reply)
            line, value = restatement(
                game, profile, announcer_idx, ann_obj, numbers, symbols
            )
            b.line("belief", line)
            syms.append(f"r{idx_str(game.profile_index(profile))}")
            vals.append(value)
        if len(cred_best) > 1:
            b.line("belief", expected_line(announcer, action, syms, vals))
    sentence, actual = comparison_sentence(
        assessment.announcer_values, announcer, "opponent"
    )
    sentence = sentence.replace(
        f"{announcer} may play", f"{announcer} actually wants to play"
    ).replace(f"{announcer} will play", f"{announcer} actually wants to play")
    b.line("belief", sentence)

    actual_txt = " or ".join(assessment.predicted_plays)
    if assessment.belief == "truthful":
        b.line(
            "belief",
            f"{announcer} said {announced} and wants to play {announced}. So, "
            f"{announcer} is telling the truth and will play {announced}.",
        )
    else:
        b.line(
            "belief",
            f"{announcer} said {announced} but wants to play {actual_txt}. So, "
            f"{announcer} is lying and will play {actual_txt}.",
        )

    b.line("search", f"Now let's reason for {player}.")
    plays = assessment.predicted_plays
    if len(plays) == 1:
        b.line(
            "search",
            f"As we know {announcer} plays {plays[0]} we dont need to calculate "
            f"expected reward for each action, listing actions where {announcer} "
            f"plays {plays[0]} is enough.",
        )
        for own in game.actions[player_idx]:
            profile = _comm_profile(announcer_idx, plays[0], player_idx, own)
            line, _ = restatement(game, profile, player_idx, objective, numbers, symbols)
            b.line("search", line)
    else:
        b.line(
            "search",
            f"As {announcer} plays {actual_txt} we calculate the expected reward "
            f"for each action,",
        )
        for own in game.actions[player_idx]:
            b.line("search", f"If {player} plays {own},")
            syms, vals = [], []
            for play in plays:
                profile = _comm_profile(announcer_idx, play, player_idx, own)
                line, value = restatement(
                    game, profile, player_idx, objective, numbers, symbols
                )
                b.line("search", line)
                syms.append(f"r{idx_str(game.profile_index(profile))}")
                vals.append(value)
            b.line("search", expected_line(player, own, syms, vals))
    sentence, best = comparison_sentence(assessment.choice.values, player, "final")
    b.line("value", sentence)
    final = best[0]
    b.add("conclusion", f"{player}{ACTION_MARKER}{final}")
    return b.build(final_action=final)


def _comm_profile(announcer_idx, announcer_action, player_idx, player_action):
    profile = [""] * 2
    profile[announcer_idx] = announcer_action
    profile[player_idx] = player_action
    return tuple(profile)
