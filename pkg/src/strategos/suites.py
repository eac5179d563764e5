"""Seeded game-suite generators for every evaluation family.

Each game class is an ordinal template (the payoff-order constraints that
define the class); variants instantiate it with seed-driven integers that
satisfy the constraints. Generation is reproducible bit-for-bit from
(family, seed).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
import numpy as np

from . import oracle
from .errors import UnknownFamily
from .games import (
    CommunicationGame,
    Game,
    GameTree,
    HiddenStateGame,
    Objective,
    make_game,
)

PLAYER_NAMES = ("Gopher", "Bob", "Carol", "Dan", "Eve")
ACTION_LETTERS = ("a", "b", "c", "d", "e")

FAMILIES = (
    "simultaneous-2x2",
    "sequential-2x2",
    "two-stage",
    "larger-actions",
    "multi-player",
    "hidden-state",
    "communication",
    "objectives",
)

GAME_CLASSES_2X2 = (
    "prisoners-dilemma",
    "chicken",
    "stag-hunt",
    "battle-of-sexes",
    "market-entry",
    "imbalanced-pennies",
    "deadlock",
)

COMM_CLASSES = (
    "cooperation",
    "matching-pennies",
    "prisoners-dilemma",
    "chicken",
    "battle-of-sexes",
)

OBJECTIVE_PAIRS = (
    ("max", "max"),
    ("max", "help"),
    ("help", "max"),
    ("welfare", "welfare"),
    ("daxity", "daxity"),
)


@dataclass(frozen=True)
class SuiteSpec:
    family: str
    variations: int = 5
    seed: int = 0


@dataclass(frozen=True)
class SuiteItem:
    """One evaluation task: a game-shaped payload plus who optimizes what."""

    id: str
    family: str
    kind: str  # matrix | tree | hidden | communication
    payload: object
    objectives: tuple[Objective, ...] | None = None

    @property
    def player_actions(self) -> tuple[str, ...]:
        if self.kind == "matrix":
            return self.payload.actions[0]
        if self.kind == "tree":
            return self.payload.game.actions[0]
        if self.kind == "hidden":
            hsgame, _ = self.payload
            return hsgame.actions[hsgame.observer]
        return self.payload.base.actions[0]


def _actions(letter: str, n: int) -> list[str]:
    return [f"{letter}{i + 1}" for i in range(n)]


def _distinct(rng: random.Random, n: int, lo: int = 1, hi: int = 9) -> list[int]:
    return rng.sample(range(lo, hi + 1), n)


def _symmetric_2x2(g_matrix) -> dict:
    """Build entries for a symmetric game from the row player's cell values."""
    entries = {}
    for i, a in enumerate(("a1", "a2")):
        for j, b in enumerate(("b1", "b2")):
            entries[(a, b)] = (g_matrix[i][j], g_matrix[j][i])
    return entries


def sample_class_payoffs(game_class: str, rng: random.Random) -> dict:
    """Entries for one seeded instance of a 2x2 class."""
    if game_class == "prisoners-dilemma":
        s, p, r, t = sorted(_distinct(rng, 4))
        return _symmetric_2x2([[r, s], [t, p]])
    if game_class == "chicken":
        c, s, r, t = sorted(_distinct(rng, 4))
        return _symmetric_2x2([[r, s], [t, -c]])
    if game_class == "stag-hunt":
        f, hs, ht, a = sorted(_distinct(rng, 4))
        return _symmetric_2x2([[a, f], [ht, hs]])
    if game_class == "battle-of-sexes":
        lo1, lo2, y, x = sorted(_distinct(rng, 4))
        return {
            ("a1", "b1"): (x, y),
            ("a1", "b2"): (lo1, lo1),
            ("a2", "b1"): (lo2, lo2),
            ("a2", "b2"): (y, x),
        }
    if game_class == "market-entry":
        fought, out, shared, boom = sorted(_distinct(rng, 4))
        war, duopoly, monopoly = sorted(_distinct(rng, 3))
        return {
            ("a1", "b1"): (boom, duopoly),  # enter, accommodate
            ("a1", "b2"): (-fought, war),  # enter, fight
            ("a2", "b1"): (out, monopoly),  # stay out
            ("a2", "b2"): (out, monopoly),
        }
    if game_class == "imbalanced-pennies":
        w2, w1 = sorted(_distinct(rng, 2, 2, 9))
        loss = rng.randint(1, 9)
        return {
            ("a1", "b1"): (w1, -w1),
            ("a1", "b2"): (-loss, loss),
            ("a2", "b1"): (-loss, loss),
            ("a2", "b2"): (w2, -w2),
        }
    if game_class == "deadlock":
        x, y = _distinct(rng, 2)
        return {
            ("a1", "b1"): (x, x),
            ("a1", "b2"): (y, y),
            ("a2", "b1"): (y, y),
            ("a2", "b2"): (x, x),
        }
    raise UnknownFamily(f"unknown 2x2 class {game_class!r}")


def check_class_constraints(game_class: str, game: Game) -> bool:
    """Re-derive the ordinal constraints from a generated instance."""
    r = game.reward
    if game_class == "prisoners-dilemma":
        temptation, reward, punishment, sucker = (
            r(("a2", "b1"))[0],
            r(("a1", "b1"))[0],
            r(("a2", "b2"))[0],
            r(("a1", "b2"))[0],
        )
        return temptation > reward > punishment > sucker
    if game_class == "chicken":
        return (
            r(("a2", "b1"))[0] > r(("a1", "b1"))[0] > r(("a1", "b2"))[0] > r(("a2", "b2"))[0]
        )
    if game_class == "stag-hunt":
        return (
            r(("a1", "b1"))[0] > r(("a2", "b1"))[0] > r(("a2", "b2"))[0] > r(("a1", "b2"))[0]
        )
    if game_class == "battle-of-sexes":
        x = r(("a1", "b1"))[0]
        y = r(("a2", "b2"))[0]
        return x > y > max(r(("a1", "b2"))[0], r(("a2", "b1"))[0]) and (
            r(("a2", "b2"))[1] > r(("a1", "b1"))[1]
        )
    if game_class == "market-entry":
        return (
            r(("a1", "b1"))[0] > r(("a2", "b1"))[0] == r(("a2", "b2"))[0] > r(("a1", "b2"))[0]
            and r(("a2", "b1"))[1] > r(("a1", "b1"))[1] > r(("a1", "b2"))[1]
        )
    if game_class == "imbalanced-pennies":
        return (
            r(("a1", "b1"))[0] > 0 > r(("a1", "b2"))[0]
            and r(("a2", "b2"))[0] > 0 > r(("a2", "b1"))[0]
            and r(("a1", "b1"))[0] != r(("a2", "b2"))[0]
            and all(
                abs(r(p)[0] + r(p)[1]) < 1e-9
                for p in (("a1", "b1"), ("a1", "b2"), ("a2", "b1"), ("a2", "b2"))
            )
        )
    if game_class == "deadlock":
        vals_g = {a: np.mean([r((a, b))[0] for b in ("b1", "b2")]) for a in ("a1", "a2")}
        vals_b = {b: np.mean([r((a, b))[1] for a in ("a1", "a2")]) for b in ("b1", "b2")}
        return (
            abs(vals_g["a1"] - vals_g["a2"]) < 1e-9
            and abs(vals_b["b1"] - vals_b["b2"]) < 1e-9
            and all(
                r(p)[0] == r(p)[1]
                for p in (("a1", "b1"), ("a1", "b2"), ("a2", "b1"), ("a2", "b2"))
            )
        )
    raise UnknownFamily(game_class)


def _matrix_items(spec: SuiteSpec, mode: str) -> list[SuiteItem]:
    items = []
    for game_class in GAME_CLASSES_2X2:
        rng = random.Random(f"{spec.family}:{game_class}:{spec.seed}")
        for v in range(spec.variations):
            entries = sample_class_payoffs(game_class, rng)
            game = make_game(
                ["Gopher", "Bob"], [["a1", "a2"], ["b1", "b2"]], entries, mode=mode
            )
            items.append(
                SuiteItem(
                    id=f"{game_class}-{v}",
                    family=spec.family,
                    kind="matrix" if mode == "simultaneous" else "tree",
                    payload=game if mode == "simultaneous" else GameTree(game),
                )
            )
    return items


def _two_stage_items(spec: SuiteSpec) -> list[SuiteItem]:
    items = []
    structures = (("simultaneous", "sequential"), ("sequential", "simultaneous"))
    for s_idx, modes in enumerate(structures):
        rng = random.Random(f"two-stage:{s_idx}:{spec.seed}")
        for v in range(15):
            def stage(mode):
                flat = [rng.randint(1, 9) for _ in range(8)]
                payoffs = np.array(flat, dtype=float).reshape(2, 2, 2)
                return make_game(
                    ["Gopher", "Bob"], [["a1", "a2"], ["b1", "b2"]], payoffs, mode
                )

            tree = GameTree(
                stage(modes[0]), {("a2", "b2"): GameTree(stage(modes[1]))}
            )
            label = "sim-seq" if s_idx == 0 else "seq-sim"
            items.append(
                SuiteItem(
                    id=f"{label}-{v}", family="two-stage", kind="tree", payload=tree
                )
            )
    return items


def _larger_actions_items(spec: SuiteSpec) -> list[SuiteItem]:
    items = []
    for rows, cols in ((3, 3), (4, 3), (5, 5), (6, 6)):
        rng = random.Random(f"larger:{rows}x{cols}:{spec.seed}")
        for v in range(spec.variations):
            payoffs = np.array(
                [[(rng.randint(1, 9), rng.randint(1, 9)) for _ in range(cols)] for _ in range(rows)],
                dtype=float,
            )
            game = make_game(
                ["Gopher", "Bob"],
                [_actions("a", rows), _actions("b", cols)],
                payoffs,
            )
            items.append(
                SuiteItem(
                    id=f"{rows}x{cols}-{v}",
                    family="larger-actions",
                    kind="matrix",
                    payload=game,
                )
            )
    return items


def _multi_player_items(spec: SuiteSpec) -> list[SuiteItem]:
    items = []
    for n in (3, 4, 5):
        rng = random.Random(f"multi:{n}:{spec.seed}")
        for v in range(spec.variations):
            game_class = "prisoners-dilemma" if v % 2 == 0 else "chicken"
            game = _extended_game(game_class, n, rng)
            items.append(
                SuiteItem(
                    id=f"{n}p-{game_class}-{v}",
                    family="multi-player",
                    kind="matrix",
                    payload=game,
                )
            )
    return items


def _extended_game(game_class: str, n: int, rng: random.Random) -> Game:
    """N-player extension of a 2x2 class; action 1 cooperates/swerves."""
    players = list(PLAYER_NAMES[:n])
    actions = [_actions(ACTION_LETTERS[i], 2) for i in range(n)]
    shape = tuple([2] * n) + (n,)
    payoffs = np.zeros(shape)
    if game_class == "prisoners-dilemma":
        coop_base = rng.randint(1, 3)
        defect_bonus = rng.randint(2, 4)
        slope = rng.randint(1, 3)
        for idx in np.ndindex(*([2] * n)):
            for i in range(n):
                others_coop = sum(1 for j in range(n) if j != i and idx[j] == 0)
                if idx[i] == 0:
                    payoffs[idx + (i,)] = coop_base + slope * others_coop
                else:
                    payoffs[idx + (i,)] = coop_base + defect_bonus + slope * others_coop
    else:  # chicken
        t = rng.randint(6, 9)
        r = rng.randint(3, 5)
        s = rng.randint(1, 2)
        crash = rng.randint(4, 9)
        for idx in np.ndindex(*([2] * n)):
            straight = [j for j in range(n) if idx[j] == 1]
            for i in range(n):
                if idx[i] == 0:
                    payoffs[idx + (i,)] = r if not straight else s
                else:
                    payoffs[idx + (i,)] = t if len(straight) == 1 else -crash
    return make_game(players, actions, payoffs)


def _hidden_items(spec: SuiteSpec) -> list[SuiteItem]:
    items = []
    structures = (
        ("new-payoffs", 2, 2),
        ("more-states", 3, 2),
        ("more-actions", 2, 3),
    )
    state_names = ("hearts", "spades", "clubs")
    for label, n_states, n_informed_actions in structures:
        rng = random.Random(f"hidden:{label}:{spec.seed}")
        for v in range(spec.variations):
            games = []
            for _ in range(n_states):
                payoffs = np.array(
                    [
                        [
                            (rng.randint(1, 9), rng.randint(1, 9))
                            for _ in range(2)
                        ]
                        for _ in range(n_informed_actions)
                    ],
                    dtype=float,
                )
                games.append(
                    make_game(
                        ["Bob", "Gopher"],
                        [_actions("b", n_informed_actions), _actions("a", 2)],
                        payoffs,
                    )
                )
            hs = HiddenStateGame(
                states=state_names[:n_states],
                priors=tuple([1.0 / n_states] * n_states),
                games=tuple(games),
                informed=0,
                observer=1,
            )
            # observe an action that is naive-optimal in a seeded state
            anchor = rng.randrange(n_states)
            choice = oracle.level0(games[anchor], 0, Objective("max", 0))
            observed = choice.best[0]
            items.append(
                SuiteItem(
                    id=f"{label}-{v}",
                    family="hidden-state",
                    kind="hidden",
                    payload=(hs, observed),
                )
            )
    return items


def _communication_items(spec: SuiteSpec) -> list[SuiteItem]:
    items = []
    for game_class in COMM_CLASSES:
        rng = random.Random(f"comm:{game_class}:{spec.seed}")
        for v in range(spec.variations):
            if game_class == "cooperation":
                lo1, lo2, m, h = sorted(_distinct(rng, 4))
                entries = {
                    ("a1", "b1"): (h, h),
                    ("a1", "b2"): (lo1, lo1),
                    ("a2", "b1"): (lo2, lo2),
                    ("a2", "b2"): (m, m),
                }
            elif game_class == "matching-pennies":
                w = rng.randint(1, 9)
                entries = {
                    ("a1", "b1"): (w, -w),
                    ("a1", "b2"): (-w, w),
                    ("a2", "b1"): (-w, w),
                    ("a2", "b2"): (w, -w),
                }
            else:
                entries = sample_class_payoffs(game_class, rng)
            base = make_game(["Gopher", "Bob"], [["a1", "a2"], ["b1", "b2"]], entries)
            for announcement in ("b1", "b2"):
                items.append(
                    SuiteItem(
                        id=f"{game_class}-{v}-say-{announcement}",
                        family="communication",
                        kind="communication",
                        payload=CommunicationGame(
                            base=base, announcer=1, announcement=announcement
                        ),
                    )
                )
    return items


def _objective_pair(kinds: tuple[str, str]) -> tuple[Objective, Objective]:
    table = {
        "max": lambda i: Objective("max", i),
        "help": lambda i: Objective("help", i, beneficiary=1 - i),
        "welfare": lambda i: Objective("welfare", i),
        "daxity": lambda i: Objective("daxity", i),
    }
    return (table[kinds[0]](0), table[kinds[1]](1))


def generate_suite(spec: SuiteSpec) -> list[SuiteItem]:
    """Deterministic suite for one family; see FAMILIES for valid names."""
    if spec.family == "simultaneous-2x2":
        return _matrix_items(spec, "simultaneous")
    if spec.family == "sequential-2x2":
        return _matrix_items(spec, "sequential")
    if spec.family == "two-stage":
        return _two_stage_items(spec)
    if spec.family == "larger-actions":
        return _larger_actions_items(spec)
    if spec.family == "multi-player":
        return _multi_player_items(spec)
    if spec.family == "hidden-state":
        return _hidden_items(spec)
    if spec.family == "communication":
        return _communication_items(spec)
    if spec.family == "objectives":
        base = _matrix_items(
            SuiteSpec("simultaneous-2x2", spec.variations, spec.seed), "simultaneous"
        )
        items = []
        for kinds in OBJECTIVE_PAIRS:
            objectives = _objective_pair(kinds)
            for item in base:
                items.append(
                    SuiteItem(
                        id=f"{item.id}@{kinds[0]}-{kinds[1]}",
                        family="objectives",
                        kind=item.kind,
                        payload=item.payload,
                        objectives=objectives,
                    )
                )
        return items
    raise UnknownFamily(f"unknown suite family {spec.family!r}")


def solve_item(item: SuiteItem) -> oracle.ActionChoice:
    """Oracle solution (player 0 / the observer) for any suite item."""
    objectives = item.objectives
    if item.kind == "matrix":
        game = item.payload
        if objectives is None:
            objectives = tuple(Objective("max", i) for i in range(game.n_players))
        if game.n_players == 2:
            return oracle.solve_level_k(game, 0, 1, objectives)
        dists = {
            opp: oracle.level0(game, opp, objectives[opp]).uniform()
            for opp in game.opponents(0)
        }
        return oracle.best_response(game, 0, objectives[0], dists)
    if item.kind == "tree":
        tree = item.payload
        if objectives is None:
            objectives = tuple(
                Objective("max", i) for i in range(tree.game.n_players)
            )
        return oracle.solve_tree(tree, 0, objectives)
    if item.kind == "hidden":
        hsgame, observed = item.payload
        posterior = oracle.hidden_state_posterior(hsgame, observed)
        return oracle.best_response_under_belief(hsgame, posterior, observed)
    if item.kind == "communication":
        return oracle.infer_truthfulness(item.payload).choice
    raise UnknownFamily(f"unknown item kind {item.kind!r}")
