import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strategos.errors import (
    DaxityNeedsTwoPlayers,
    DuplicateAction,
    LengthMismatch,
    MissingProfile,
    NonTerminalPath,
)
from strategos.games import (
    Game,
    GameTree,
    Objective,
    apply_objective,
    game_from_json,
    game_to_json,
    joint_reward,
    make_game,
)


class TestMakeGame:
    def test_demo_game(self, demo_game):
        assert demo_game.reward(("a1", "b1")) == (8, 7)
        assert demo_game.reward(("a2", "b2")) == (2, 1)
        assert demo_game.payoffs.shape == (2, 2, 2)

    def test_single_action_per_player(self):
        g = make_game(["P", "Q"], [["only"], ["sole"]], {("only", "sole"): (1, 2)})
        assert g.reward(("only", "sole")) == (1, 2)

    def test_missing_profile(self):
        entries = {
            p: (0, 0, 0)
            for p in [
                ("a1", "b1", "c1"),
                ("a1", "b1", "c2"),
                ("a1", "b2", "c1"),
                ("a1", "b2", "c2"),
                ("a2", "b1", "c1"),
                ("a2", "b1", "c2"),
                ("a2", "b2", "c1"),
            ]
        }  # 7 of 8
        with pytest.raises(MissingProfile):
            make_game(
                ["X", "Y", "Z"], [["a1", "a2"], ["b1", "b2"], ["c1", "c2"]], entries
            )

    def test_duplicate_action(self):
        with pytest.raises(DuplicateAction):
            make_game(["X", "Y"], [["a", "a"], ["b1", "b2"]], {})

    def test_reward_vector_length(self):
        with pytest.raises(LengthMismatch):
            make_game(
                ["X", "Y"],
                [["a1"], ["b1"]],
                {("a1", "b1"): (1, 2, 3)},
            )

    def test_nested_array_entries(self, demo_game):
        g = make_game(
            ["Gopher", "Bob"],
            [["a1", "a2"], ["b1", "b2"]],
            [[(8, 7), (6, 5)], [(4, 3), (2, 1)]],
        )
        assert g == demo_game

    def test_payoffs_are_immutable(self, demo_game):
        with pytest.raises(ValueError):
            demo_game.payoffs[0, 0, 0] = 99


class TestApplyObjective:
    def test_daxity(self):
        assert apply_objective(Objective("daxity", owner=0), (8, 7)) == 1

    def test_welfare(self):
        assert apply_objective(Objective("welfare"), (8, 7)) == 15

    def test_help(self):
        assert apply_objective(Objective("help", owner=0, beneficiary=1), (8, 7)) == 7

    def test_max(self):
        assert apply_objective(Objective("max", owner=1), (8, 7)) == 7

    def test_custom(self):
        assert apply_objective(
            Objective("custom", weights=(2.0, -1.0)), (8, 7)
        ) == pytest.approx(9)

    def test_daxity_needs_two_players(self):
        with pytest.raises(DaxityNeedsTwoPlayers):
            apply_objective(Objective("daxity"), (1, 2, 3))

    @given(st.lists(st.integers(-20, 20), min_size=2, max_size=5))
    def test_welfare_is_sum_of_max_own(self, vec):
        welfare = apply_objective(Objective("welfare"), vec)
        parts = sum(
            apply_objective(Objective("max", owner=i), vec) for i in range(len(vec))
        )
        assert welfare == pytest.approx(parts)


class TestJointReward:
    def test_flat(self, demo_game):
        assert joint_reward(demo_game, ("a1", "b1")) == (8, 7)

    def test_factored_entry(self, factored_demo_game):
        assert joint_reward(factored_demo_game, ("a2", "b2")) == (3, 4)

    def test_tree_terminal_via_stage_payoff(self, demo_game, factored_demo_game):
        tree = GameTree(game=demo_game, continuations={("a2", "b2"): GameTree(factored_demo_game)})
        assert joint_reward(tree, [("a1", "b1")]) == (8, 7)
        assert joint_reward(tree, [("a2", "b2"), ("a1", "b2")]) == (-1, -4)

    def test_tree_nonterminal_path(self, demo_game, factored_demo_game):
        tree = GameTree(game=demo_game, continuations={("a2", "b2"): GameTree(factored_demo_game)})
        with pytest.raises(NonTerminalPath):
            joint_reward(tree, [("a2", "b2")])

    def test_path_past_terminal(self, demo_game):
        with pytest.raises(NonTerminalPath):
            joint_reward(GameTree(demo_game), [("a1", "b1"), ("a1", "b1")])


def games_strategy():
    """Random small games for round-trip and invariance properties."""

    @st.composite
    def build(draw):
        n_players = draw(st.integers(2, 3))
        counts = [draw(st.integers(1, 3)) for _ in range(n_players)]
        players = [f"P{i}" for i in range(n_players)]
        actions = [[f"p{i}x{j}" for j in range(counts[i])] for i in range(n_players)]
        shape = tuple(counts) + (n_players,)
        flat = draw(
            st.lists(
                st.integers(-9, 9),
                min_size=int(np.prod(shape)),
                max_size=int(np.prod(shape)),
            )
        )
        payoffs = np.array(flat, dtype=float).reshape(shape)
        mode = draw(st.sampled_from(["simultaneous", "sequential"]))
        return make_game(players, actions, payoffs, mode)

    return build()


class TestSerialization:
    @settings(max_examples=50, deadline=None)
    @given(games_strategy())
    def test_round_trip(self, game):
        doc = game_to_json(game)
        text = json.dumps(doc)
        back = game_from_json(json.loads(text))
        assert back == game

    def test_schema_field(self, demo_game):
        doc = game_to_json(demo_game)
        assert doc["schema"] == "strategos/game-v1"

    def test_tree_round_trip(self, demo_game, factored_demo_game):
        tree = GameTree(
            game=demo_game,
            continuations={("a2", "b2"): GameTree(factored_demo_game)},
        )
        doc = game_to_json(tree)
        back = game_from_json(json.loads(json.dumps(doc)))
        assert isinstance(back, GameTree)
        assert back.game == demo_game
        assert back.continuations[("a2", "b2")].game == factored_demo_game

    def test_terminal_continuation_round_trip(self, demo_game):
        tree = GameTree(game=demo_game, continuations={("a1", "b2"): (9.0, -9.0)})
        back = game_from_json(game_to_json(tree))
        assert back.continuations[("a1", "b2")] == (9.0, -9.0)

    def test_bad_schema_rejected(self):
        with pytest.raises(LengthMismatch):
            game_from_json({"schema": "nope"})
