"""Demo-set assembly: two canonical teaching demos plus the eval question.

The teaching pair is always a strictly-descending-payoff game and a
payoff-tie game that matches the target family's structure; objective or
opponent-model changes swap instruction text only, never the demos.
"""

from __future__ import annotations

from typing import Sequence

from ..errors import UnsupportedFamily
from ..games import (
    CommunicationGame,
    Game,
    GameTree,
    HiddenStateGame,
    Objective,
    make_game,
)
from .beliefs import (
    comm_question,
    compile_belief_trace,
    compile_truthfulness_trace,
    hidden_question,
)
from .factored import compile_factored_demos
from .matrix import (
    compile_exhaustive,
    matrix_question,
    objective_sentence,
    tree_question,
)
from .traces import DemoSet

MATRIX_FAMILIES = (
    "simultaneous-2x2",
    "sequential-2x2",
    "larger-actions",
    "multi-player",
    "objectives",
)


def descending_game(mode: str = "simultaneous") -> Game:
    return make_game(
        ["Gopher", "Bob"],
        [["a1", "a2"], ["b1", "b2"]],
        {
            ("a1", "b1"): (8, 7),
            ("a1", "b2"): (6, 5),
            ("a2", "b1"): (4, 3),
            ("a2", "b2"): (2, 1),
        },
        mode=mode,
    )


def tie_game(mode: str = "simultaneous") -> Game:
    return make_game(
        ["Gopher", "Bob"],
        [["a1", "a2"], ["b1", "b2"]],
        {
            ("a1", "b1"): (4, 7),
            ("a1", "b2"): (6, 5),
            ("a2", "b1"): (4, 3),
            ("a2", "b2"): (2, 1),
        },
        mode=mode,
    )


def demo_tree(modes: tuple[str, str], tie: bool = False) -> GameTree:
    stage1 = tie_game(modes[0]) if tie else descending_game(modes[0])
    stage2 = make_game(
        ["Gopher", "Bob"],
        [["a1", "a2"], ["b1", "b2"]],
        {
            ("a1", "b1"): (9, 8),
            ("a1", "b2"): (7, 6),
            ("a2", "b1"): (5, 4),
            ("a2", "b2"): (3, 2),
        },
        mode=modes[1],
    )
    return GameTree(stage1, {("a2", "b2"): GameTree(stage2)})


def demo_hidden(uninformative: bool = False) -> tuple[HiddenStateGame, str]:
    """Trivial-payoff hidden-state teaching game plus the observed action."""
    hearts = make_game(
        ["Bob", "Gopher"],
        [["b1", "b2"], ["a1", "a2"]],
        {
            ("b1", "a1"): (8, 7),
            ("b1", "a2"): (6, 5),
            ("b2", "a1"): (4, 3),
            ("b2", "a2"): (2, 1),
        },
    )
    if uninformative:
        spades = make_game(
            ["Bob", "Gopher"],
            [["b1", "b2"], ["a1", "a2"]],
            {
                ("b1", "a1"): (7, 1),
                ("b1", "a2"): (5, 3),
                ("b2", "a1"): (3, 5),
                ("b2", "a2"): (1, 7),
            },
        )
    else:
        spades = make_game(
            ["Bob", "Gopher"],
            [["b1", "b2"], ["a1", "a2"]],
            {
                ("b1", "a1"): (2, 1),
                ("b1", "a2"): (4, 3),
                ("b2", "a1"): (6, 5),
                ("b2", "a2"): (8, 7),
            },
        )
    hs = HiddenStateGame(
        states=("hearts", "spades"),
        priors=(0.5, 0.5),
        games=(hearts, spades),
        informed=0,
        observer=1,
    )
    return hs, "b1"


def demo_communication(tie: bool = False) -> CommunicationGame:
    if tie:
        return CommunicationGame(base=tie_game(), announcer=1, announcement="b1")
    aligned = make_game(
        ["Gopher", "Bob"],
        [["a1", "a2"], ["b1", "b2"]],
        {
            ("a1", "b1"): (8, 7),
            ("a1", "b2"): (2, 1),
            ("a2", "b1"): (4, 3),
            ("a2", "b2"): (6, 5),
        },
    )
    return CommunicationGame(base=aligned, announcer=1, announcement="b1")


def _matrix_instruction(
    objectives: Sequence[Objective] | None, players: tuple[str, ...]
) -> str:
    base = (
        "Gopher and Bob are playing games. Bob does not think about their "
        "opponent and only plays the action with the highest expected reward. "
        "Gopher thinks about other players' reasoning."
    )
    if objectives is not None:
        sentence = objective_sentence(objectives, players)
        if sentence != f"Gopher and Bob are trying to maximize their reward.":
            base += " In the last game, " + sentence[0].lower() + sentence[1:]
    return base + " What action should Gopher play in the last game?"


def build_demo_set(
    task_family: str,
    eval_game=None,
    objectives: Sequence[Objective] | None = None,
    format: str = "plain",
) -> DemoSet:
    """Two canonical demos, the family-specific instruction, the eval question.

    eval_game is a Game or GameTree for matrix families, an
    (HiddenStateGame, observed action) pair for hidden-state, or a
    CommunicationGame for the communication family.
    """
    if format == "factored":
        if task_family not in MATRIX_FAMILIES:
            raise UnsupportedFamily(
                f"factored prompts cover matrix families, not {task_family!r}"
            )
        base = compile_factored_demos("recursive")
        eval_q = ""
        if eval_game is not None:
            eval_q = matrix_question(
                eval_game, objectives, opponent_model=True, pick_from=True
            )
        return DemoSet(
            instruction=base.instruction, demos=base.demos, eval_question=eval_q
        )
    if format != "plain":
        raise UnsupportedFamily(f"unknown prompt format {format!r}")

    players = ("Gopher", "Bob")
    if task_family in MATRIX_FAMILIES:
        mode = "sequential" if task_family == "sequential-2x2" else "simultaneous"
        demo_games = (descending_game(mode), tie_game(mode))
        demos = tuple(
            (matrix_question(g), compile_exhaustive(g, 0)) for g in demo_games
        )
        eval_q = ""
        if eval_game is not None:
            eval_q = matrix_question(eval_game, objectives)
        return DemoSet(
            instruction=_matrix_instruction(
                objectives,
                eval_game.players if eval_game is not None else players,
            ),
            demos=demos,
            eval_question=eval_q,
        )

    if task_family == "two-stage":
        modes = ("simultaneous", "sequential")
        if isinstance(eval_game, GameTree):
            sub = next(
                nxt for nxt in eval_game.continuations.values()
                if isinstance(nxt, GameTree)
            )
            modes = (eval_game.game.mode, sub.game.mode)
        trees = (demo_tree(modes), demo_tree(modes, tie=True))
        demos = tuple(
            (tree_question(t), compile_exhaustive(t, 0)) for t in trees
        )
        eval_q = tree_question(eval_game, objectives) if eval_game is not None else ""
        return DemoSet(
            instruction=_matrix_instruction(objectives, players),
            demos=demos,
            eval_question=eval_q,
        )

    if task_family == "hidden-state":
        pairs = (demo_hidden(False), demo_hidden(True))
        demos = tuple(
            (hidden_question(hs, obs), compile_belief_trace(hs, obs))
            for hs, obs in pairs
        )
        eval_q = ""
        if eval_game is not None:
            hs, obs = eval_game
            eval_q = hidden_question(hs, obs)
        instruction = (
            "Gopher and Bob are playing games where only Bob can see the state "
            "of the world. Bob does not think about their opponent and only "
            "plays the action with the highest expected reward. Gopher sees "
            "Bob's action, reasons about the state, and then plays. What action "
            "should Gopher play in the last game?"
        )
        return DemoSet(instruction=instruction, demos=demos, eval_question=eval_q)

    if task_family == "communication":
        demos = (
            (
                comm_question(demo_communication(False)),
                compile_truthfulness_trace(demo_communication(False)),
            ),
            (
                matrix_question(tie_game()),
                compile_exhaustive(tie_game(), 0),
            ),
        )
        eval_q = comm_question(eval_game) if eval_game is not None else ""
        instruction = (
            "Gopher and Bob are playing games. Before playing, Bob says what "
            "he will play, but Bob may lie. Bob does not think about their "
            "opponent and assumes Gopher will believe him. Gopher decides "
            "whether to believe Bob and then plays. What action should Gopher "
            "play in the last game?"
        )
        return DemoSet(instruction=instruction, demos=demos, eval_question=eval_q)

    raise UnsupportedFamily(f"unknown task family {task_family!r}")
