"""strategos: strategic-reasoning toolkit.

Compiles game structures into chain-of-thought demonstration prompts, solves
the same games exactly with brute-force oracles, drives an LLM (or a
deterministic replay/oracle backend) through matrix-game and negotiation
tasks, and measures best-response accuracy and fairness against the oracle.
"""

from .games import (
    CommunicationGame,
    Game,
    GameTree,
    HiddenStateGame,
    Objective,
    apply_objective,
    game_from_json,
    game_to_json,
    joint_reward,
    make_game,
)
from .oracle import (
    ActionChoice,
    StatePosterior,
    best_response,
    best_response_under_belief,
    deal_value,
    hidden_state_posterior,
    infer_truthfulness,
    level0,
    optimal_fair_deal,
    solve_level_k,
    solve_tree,
)

__version__ = "0.1.0"

__all__ = [
    "ActionChoice",
    "CommunicationGame",
    "Game",
    "GameTree",
    "HiddenStateGame",
    "Objective",
    "StatePosterior",
    "apply_objective",
    "best_response",
    "best_response_under_belief",
    "deal_value",
    "game_from_json",
    "game_to_json",
    "hidden_state_posterior",
    "infer_truthfulness",
    "joint_reward",
    "level0",
    "make_game",
    "optimal_fair_deal",
    "solve_level_k",
    "solve_tree",
]
