import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from naive_oracle import (
    nv_argmax,
    nv_fair_deal,
    nv_level0,
    nv_level_k,
    nv_posterior,
    nv_sequential_leader,
    nv_tree,
    nv_truthfulness,
    obj_fn,
)
from strategos.errors import EmptySupport, EnumerationTooLarge
from strategos.games import (
    CommunicationGame,
    Game,
    GameTree,
    HiddenStateGame,
    Objective,
    make_game,
)
from strategos.oracle import (
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

MAX2 = (Objective("max", 0), Objective("max", 1))


def imbalanced_pennies() -> Game:
    return make_game(
        ["Gopher", "Bob"],
        [["a1", "a2"], ["b1", "b2"]],
        {
            ("a1", "b1"): (4, -4),
            ("a1", "b2"): (-1, 1),
            ("a2", "b1"): (-1, 1),
            ("a2", "b2"): (1, -1),
        },
    )


class TestLevel0:
    def test_demo_game_bob(self, demo_game):
        choice = level0(demo_game, 1, Objective("max", 1))
        assert choice.values == {"b1": 5.0, "b2": 3.0}  # (7+3)/2 and (5+1)/2
        assert choice.best == ("b1",)

    def test_factored_demo_bob_ties(self, factored_demo_game):
        choice = level0(factored_demo_game, 1, Objective("max", 1))
        assert choice.values == {"b1": 0.0, "b2": 0.0}
        assert set(choice.best) == {"b1", "b2"}

    def test_dominant_action_is_singleton(self, demo_game):
        choice = level0(demo_game, 0, Objective("max", 0))
        assert choice.best == ("a1",)  # a1 dominates a2 (8>4, 6>2)


class TestBestResponse:
    def test_demo_gopher_vs_b1(self, demo_game):
        choice = best_response(demo_game, 0, Objective("max", 0), {1: {"b1": 1.0}})
        assert choice.best == ("a1",)
        assert choice.values["a1"] == 8

    def test_factored_gopher_vs_uniform(self, factored_demo_game):
        choice = best_response(
            feed := factored_demo_game, 0, Objective("max", 0), {1: {"b1": 0.5, "b2": 0.5}}
        )
        assert choice.values == {"a1": -2.0, "a2": 2.0}
        assert choice.best == ("a2",)

    def test_point_mass_tie(self):
        g = make_game(
            ["X", "Y"],
            [["a1", "a2"], ["b1", "b2"]],
            {
                ("a1", "b1"): (3, 0),
                ("a1", "b2"): (9, 0),
                ("a2", "b1"): (3, 0),
                ("a2", "b2"): (0, 0),
            },
        )
        choice = best_response(g, 0, Objective("max", 0), {1: {"b1": 1.0}})
        assert set(choice.best) == {"a1", "a2"}

    def test_empty_support(self, demo_game):
        with pytest.raises(EmptySupport):
            best_response(demo_game, 0, Objective("max", 0), {1: {}})

    def test_uniform_equals_level0(self, demo_game, factored_demo_game):
        for g in (demo_game, factored_demo_game):
            for p in (0, 1):
                uniform = {1 - p: {a: 0.5 for a in g.actions[1 - p]}}
                a = best_response(g, p, Objective("max", p), uniform)
                b = level0(g, p, Objective("max", p))
                assert a.values == pytest.approx(b.values)
                assert a.best == b.best


class TestLevelK:
    def test_k1_is_best_response_to_naive(self, demo_game, factored_demo_game):
        for g in (demo_game, factored_demo_game):
            direct = best_response(
                g, 0, MAX2[0], {1: level0(g, 1, MAX2[1]).uniform()}
            )
            assert solve_level_k(g, 0, 1, MAX2).best == direct.best

    def test_imbalanced_pennies_levels_differ(self):
        g = imbalanced_pennies()
        k1 = solve_level_k(g, 0, 1, MAX2)
        k2 = solve_level_k(g, 0, 2, MAX2)
        assert k1.best == ("a2",)
        assert k2.best == ("a1",)
        # frozen from the hand-rolled enumeration in naive_oracle
        fns = (obj_fn("max", 0), obj_fn("max", 1))
        assert nv_argmax(nv_level_k(g, 0, 1, fns)) == {"a2"}
        assert nv_argmax(nv_level_k(g, 0, 2, fns)) == {"a1"}

    def test_dominant_strategy_constant_in_k(self, demo_game):
        for k in range(5):
            assert solve_level_k(demo_game, 0, k, MAX2).best == ("a1",)

    def test_matches_naive_enumeration_on_random_games(self):
        rng = np.random.default_rng(7)
        fns = (obj_fn("max", 0), obj_fn("max", 1))
        for _ in range(40):
            payoffs = rng.integers(-5, 6, size=(2, 2, 2)).astype(float)
            g = make_game(["G", "B"], [["a1", "a2"], ["b1", "b2"]], payoffs)
            for k in (0, 1, 2, 3):
                assert solve_level_k(g, 0, k, MAX2).best == tuple(
                    sorted(
                        nv_argmax(nv_level_k(g, 0, k, fns)),
                        key=g.actions[0].index,
                    )
                )


class TestSolveTree:
    def test_sequential_demo_matches_enumeration(self, demo_game):
        seq = make_game(
            demo_game.players, demo_game.actions, demo_game.payoffs, "sequential"
        )
        choice = solve_tree(GameTree(seq), 0, MAX2)
        fns = (obj_fn("max", 0), obj_fn("max", 1))
        naive = nv_sequential_leader(seq, fns)
        assert set(choice.best) == nv_argmax(naive)
        assert choice.values == pytest.approx(naive)

    def test_inert_continuation_equals_flat(self, demo_game):
        # subgame whose solution reproduces the replaced profile's payoff
        inert = make_game(
            ["Gopher", "Bob"],
            [["x1"], ["y1"]],
            {("x1", "y1"): (2, 1)},
        )
        tree = GameTree(demo_game, {("a2", "b2"): GameTree(inert)})
        flat = solve_tree(GameTree(demo_game), 0, MAX2)
        staged = solve_tree(tree, 0, MAX2)
        assert staged.best == flat.best
        assert staged.values == pytest.approx(flat.values)

    def test_two_stage_descending(self, demo_game, factored_demo_game):
        seq2 = make_game(
            factored_demo_game.players,
            factored_demo_game.actions,
            factored_demo_game.payoffs,
            "sequential",
        )
        tree = GameTree(demo_game, {("a2", "b2"): GameTree(seq2)})
        choice = solve_tree(tree, 0, MAX2)
        fns = (obj_fn("max", 0), obj_fn("max", 1))
        assert set(choice.best) == nv_argmax(nv_tree(tree, 0, fns))

    def test_random_trees_match_naive(self):
        rng = np.random.default_rng(11)
        fns = (obj_fn("max", 0), obj_fn("max", 1))
        for trial in range(30):
            stage1 = make_game(
                ["G", "B"],
                [["a1", "a2"], ["b1", "b2"]],
                rng.integers(-5, 6, size=(2, 2, 2)).astype(float),
                "simultaneous" if trial % 2 else "sequential",
            )
            stage2 = make_game(
                ["G", "B"],
                [["a1", "a2"], ["b1", "b2"]],
                rng.integers(-5, 6, size=(2, 2, 2)).astype(float),
                "sequential" if trial % 2 else "simultaneous",
            )
            tree = GameTree(stage1, {("a2", "b2"): GameTree(stage2)})
            assert set(solve_tree(tree, 0, MAX2).best) == nv_argmax(
                nv_tree(tree, 0, fns)
            )


class TestHiddenState:
    def test_point_mass_when_one_state_consistent(self, hearts_spades):
        post = hidden_state_posterior(hearts_spades, "b1")
        assert post.probs == {"hearts": 1.0, "spades": 0.0}

    def test_prior_when_uninformative(self):
        g = make_game(
            ["Bob", "Gopher"],
            [["b1", "b2"], ["a1", "a2"]],
            {
                ("b1", "a1"): (9, 1),
                ("b1", "a2"): (9, 2),
                ("b2", "a1"): (0, 3),
                ("b2", "a2"): (0, 4),
            },
        )
        hs = HiddenStateGame(("s1", "s2"), (0.5, 0.5), (g, g), 0, 1)
        post = hidden_state_posterior(hs, "b1")
        assert post.probs == {"s1": 0.5, "s2": 0.5}

    def test_three_state_split(self, hearts_spades):
        hearts, spades = hearts_spades.games
        hs3 = HiddenStateGame(
            ("hearts", "spades", "clubs"),
            (1 / 3, 1 / 3, 1 / 3),
            (hearts, hearts, spades),
            0,
            1,
        )
        post = hidden_state_posterior(hs3, "b1")
        assert post.probs["hearts"] == pytest.approx(0.5)
        assert post.probs["spades"] == pytest.approx(0.5)
        assert post.probs["clubs"] == 0.0

    def test_posterior_sums_to_one_and_matches_naive(self, hearts_spades):
        for action in ("b1", "b2"):
            post = hidden_state_posterior(hearts_spades, action)
            assert sum(post.probs.values()) == pytest.approx(1.0)
            assert post.probs == pytest.approx(nv_posterior(hearts_spades, action))

    def test_belief_br_point_mass(self, hearts_spades):
        from strategos.oracle import StatePosterior

        post = StatePosterior({"hearts": 1.0, "spades": 0.0})
        got = best_response_under_belief(hearts_spades, post, "b1")
        inside = best_response(
            hearts_spades.games[0],
            1,
            Objective("max", 1),
            {0: {"b1": 1.0}},
        )
        assert got.best == inside.best
        assert got.values == pytest.approx(inside.values)

    def test_belief_br_uniform_over_identical_states(self, hearts_spades):
        from strategos.oracle import StatePosterior

        hearts = hearts_spades.games[0]
        hs = HiddenStateGame(("x", "y"), (0.5, 0.5), (hearts, hearts), 0, 1)
        post = StatePosterior({"x": 0.5, "y": 0.5})
        got = best_response_under_belief(hs, post, "b1")
        single = best_response(hearts, 1, Objective("max", 1), {0: {"b1": 1.0}})
        assert got.best == single.best


class TestTruthfulness:
    def test_dominant_announcement_is_truthful(self, demo_game):
        # b1 dominates for Bob regardless of credulous replies
        cg = CommunicationGame(base=demo_game, announcer=1, announcement="b1")
        out = infer_truthfulness(cg)
        assert out.belief == "truthful"
        assert out.choice.best == ("a1",)

    def test_matching_pennies_misdirection(self):
        g = make_game(
            ["Gopher", "Bob"],
            [["a1", "a2"], ["b1", "b2"]],
            {
                ("a1", "b1"): (1, -1),
                ("a1", "b2"): (-1, 1),
                ("a2", "b1"): (-1, 1),
                ("a2", "b2"): (1, -1),
            },
        )
        cg = CommunicationGame(base=g, announcer=1, announcement="b1")
        out = infer_truthfulness(cg)
        assert out.belief == "lying"
        assert out.predicted_plays == ("b2",)
        assert out.choice.best == ("a2",)  # respond to the non-announced action
        assert nv_truthfulness(cg)[0] == "lying"

    def test_aligned_payoffs_truthful(self):
        g = make_game(
            ["Gopher", "Bob"],
            [["a1", "a2"], ["b1", "b2"]],
            {
                ("a1", "b1"): (5, 5),
                ("a1", "b2"): (0, 0),
                ("a2", "b1"): (0, 0),
                ("a2", "b2"): (3, 3),
            },
        )
        for ann in ("b1", "b2"):
            cg = CommunicationGame(base=g, announcer=1, announcement=ann)
            out = infer_truthfulness(cg)
            naive_belief, naive_best = nv_truthfulness(cg)
            assert out.belief == "truthful" == naive_belief
            assert set(out.choice.best) == naive_best


class TestFairDeals:
    POT = (3, 1, 2)
    VALUES_A = (1, 3, 2)
    VALUES_B = (0, 2, 4)

    def test_broker_demo_equality_optimum_is_one(self):
        deal = optimal_fair_deal(self.POT, self.VALUES_A, self.VALUES_B, "equality")
        assert deal.score == 1
        naive_alloc, naive_score = nv_fair_deal(
            self.POT, self.VALUES_A, self.VALUES_B, "equality"
        )
        assert naive_score == 1
        assert deal.allocation == naive_alloc
        # the hand-written demonstration's second try achieves it
        assert abs(deal_value((3, 0, 1), self.VALUES_A) - deal_value((0, 1, 1), self.VALUES_B)) == 1

    def test_all_zero_values(self):
        deal = optimal_fair_deal(self.POT, (0, 0, 0), (0, 0, 0), "equality")
        assert deal.score == 0

    def test_rawlsian_over_24_splits(self):
        splits = list(itertools.product(range(4), range(2), range(3)))
        assert len(splits) == 24
        deal = optimal_fair_deal(self.POT, self.VALUES_A, self.VALUES_B, "rawlsian")
        naive_alloc, naive_score = nv_fair_deal(
            self.POT, self.VALUES_A, self.VALUES_B, "rawlsian"
        )
        assert deal.score == naive_score
        assert deal.allocation == naive_alloc

    def test_optimum_bounds_every_split(self):
        deal = optimal_fair_deal(self.POT, self.VALUES_A, self.VALUES_B, "equality")
        for alloc in itertools.product(range(4), range(2), range(3)):
            va = deal_value(alloc, self.VALUES_A)
            vb = deal_value([p - a for p, a in zip(self.POT, alloc)], self.VALUES_B)
            assert deal.score <= abs(va - vb) + 1e-9

    def test_empty_pot(self):
        deal = optimal_fair_deal((0, 0, 0), (1, 2, 3), (3, 2, 1), "equality")
        assert deal.allocation == (0, 0, 0)
        assert deal.score == 0

    def test_enumeration_guard(self):
        with pytest.raises(EnumerationTooLarge):
            optimal_fair_deal((500, 500, 500), (1, 1, 1), (1, 1, 1), "equality")


class TestDealValue:
    def test_demo_line(self):
        assert deal_value((1, 1, 0), (4, 1, 2)) == 5  # 4+1+0

    def test_empty(self):
        assert deal_value((0, 0, 0), (4, 1, 2)) == 0

    def test_full_pot(self):
        assert deal_value((1, 4, 1), (4, 1, 2)) == 10


class TestInvariances:
    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(st.integers(-9, 9), min_size=8, max_size=8),
        st.floats(min_value=0.1, max_value=10.0),
    )
    def test_positive_scaling_preserves_argmax(self, flat, scale):
        payoffs = np.array(flat, dtype=float).reshape(2, 2, 2)
        g1 = make_game(["G", "B"], [["a1", "a2"], ["b1", "b2"]], payoffs)
        g2 = make_game(["G", "B"], [["a1", "a2"], ["b1", "b2"]], payoffs * scale)
        for p in (0, 1):
            assert set(level0(g1, p, Objective("max", p)).best) == set(
                level0(g2, p, Objective("max", p)).best
            )
        assert set(solve_level_k(g1, 0, 2, MAX2).best) == set(
            solve_level_k(g2, 0, 2, MAX2).best
        )

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.integers(-9, 9), min_size=8, max_size=8), st.permutations([0, 1]))
    def test_label_permutation_equivariance(self, flat, perm):
        payoffs = np.array(flat, dtype=float).reshape(2, 2, 2)
        g1 = make_game(["G", "B"], [["a1", "a2"], ["b1", "b2"]], payoffs)
        relabeled = {"a1": None, "a2": None}
        new_labels = ["a1", "a2"]
        entries = {}
        for i, a in enumerate(g1.actions[0]):
            for j, b in enumerate(g1.actions[1]):
                entries[(new_labels[perm[i]], b)] = tuple(payoffs[i, j])
        g2 = make_game(["G", "B"], [["a1", "a2"], ["b1", "b2"]], entries)
        c1 = solve_level_k(g1, 0, 1, MAX2)
        c2 = solve_level_k(g2, 0, 1, MAX2)
        mapped = {new_labels[perm[g1.actions[0].index(a)]] for a in c1.best}
        assert mapped == set(c2.best)

    def test_naive_cross_check_level0(self, demo_game, factored_demo_game):
        for g in (demo_game, factored_demo_game):
            for p in (0, 1):
                fns = (obj_fn("max", 0), obj_fn("max", 1))
                assert level0(g, p, Objective("max", p)).values == pytest.approx(
                    nv_level0(g, p, fns[p])
                )
