import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from strategos.games import Game, GameTree, HiddenStateGame, make_game

GOLDENS = Path(__file__).parent / "goldens"


def _demo_game(mode="simultaneous") -> Game:
    """The descending-payoff 2x2 teaching game (8,7 ... 2,1)."""
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


def _factored_demo_game() -> Game:
    """The negative-payoff teaching game with a tied naive opponent."""
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


def _tie_demo_game(mode="simultaneous") -> Game:
    """Teaching game where the player's best actions tie (4 vs 4)."""
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


@pytest.fixture
def demo_game() -> Game:
    return _demo_game()


@pytest.fixture
def factored_demo_game() -> Game:
    return _factored_demo_game()


@pytest.fixture
def tie_demo_game() -> Game:
    return _tie_demo_game()


@pytest.fixture
def hearts_spades() -> HiddenStateGame:
    """Two-state game: the informed player's naive action reveals the state."""
    hearts = make_game(
        ["Bob", "Gopher"],
        [["b1", "b2"], ["a1", "a2"]],
        {
            ("b1", "a1"): (7, 8),
            ("b1", "a2"): (5, 2),
            ("b2", "a1"): (1, 4),
            ("b2", "a2"): (3, 6),
        },
    )
    spades = make_game(
        ["Bob", "Gopher"],
        [["b1", "b2"], ["a1", "a2"]],
        {
            ("b1", "a1"): (2, 3),
            ("b1", "a2"): (0, 9),
            ("b2", "a1"): (6, 1),
            ("b2", "a2"): (8, 5),
        },
    )
    return HiddenStateGame(
        states=("hearts", "spades"),
        priors=(0.5, 0.5),
        games=(hearts, spades),
        informed=0,
        observer=1,
    )


@pytest.fixture
def goldens_dir() -> Path:
    return GOLDENS
