"""Canonical game representations shared by the oracle and the prompt compiler.

A Game is a dense payoff tensor over joint action profiles. Trees stack stage
games through per-profile continuations, hidden-state games bundle one game
per world state, and communication games attach a declared intention to a
base game. All values are immutable after construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import (
    DaxityNeedsTwoPlayers,
    DuplicateAction,
    LengthMismatch,
    MissingProfile,
    NonTerminalPath,
)

Profile = tuple[str, ...]
RewardVector = tuple[float, ...]

SCHEMA_GAME = "strategos/game-v1"
SCHEMA_HIDDEN = "strategos/hidden-state-v1"
SCHEMA_COMM = "strategos/communication-v1"


@dataclass(frozen=True, eq=False)
class Game:
    """An N-player normal-form game (N >= 2), simultaneous or sequential.

    payoffs has shape (|A_1|, ..., |A_N|, N): one reward per player for every
    joint action profile. Sequential games move in player order.
    """

    players: tuple[str, ...]
    actions: tuple[tuple[str, ...], ...]
    payoffs: np.ndarray
    mode: str = "simultaneous"

    def __post_init__(self):
        self.payoffs.setflags(write=False)

    @property
    def n_players(self) -> int:
        return len(self.players)

    def action_index(self, player: int, label: str) -> int:
        try:
            return self.actions[player].index(label)
        except ValueError:
            raise MissingProfile(f"unknown action {label!r} for player {player}")

    def profile_index(self, profile: Profile) -> tuple[int, ...]:
        if len(profile) != self.n_players:
            raise LengthMismatch(
                f"profile {profile} has {len(profile)} actions for "
                f"{self.n_players} players"
            )
        return tuple(self.action_index(i, a) for i, a in enumerate(profile))

    def reward(self, profile: Profile) -> RewardVector:
        return tuple(float(x) for x in self.payoffs[self.profile_index(profile)])

    def profiles(self) -> Iterable[Profile]:
        return itertools.product(*self.actions)

    def opponents(self, player: int) -> tuple[int, ...]:
        return tuple(i for i in range(self.n_players) if i != player)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Game)
            and self.players == other.players
            and self.actions == other.actions
            and self.mode == other.mode
            and np.array_equal(self.payoffs, other.payoffs)
        )


# A continuation either descends into another stage or ends at an explicit
# reward vector that overrides the stage payoff for that profile.
Terminal = RewardVector


@dataclass(frozen=True)
class GameTree:
    """A staged game: per-profile continuations on top of a stage game.

    Profiles without a continuation are terminal with the stage's own payoff.
    """

    game: Game
    continuations: Mapping[Profile, Union["GameTree", Terminal]] = field(
        default_factory=dict
    )

    def __post_init__(self):
        for profile in self.continuations:
            self.game.profile_index(profile)  # validates labels

    def is_continued(self, profile: Profile) -> bool:
        return profile in self.continuations


@dataclass(frozen=True)
class HiddenStateGame:
    """A per-state game where one player sees the state and one does not.

    The informed player moves first; the observer sees only that action plus
    the per-state payoffs, and must form a belief over the state.
    """

    states: tuple[str, ...]
    priors: tuple[float, ...]
    games: tuple[Game, ...]
    informed: int = 0
    observer: int = 1

    def __post_init__(self):
        if len(self.states) != len(self.games) or len(self.states) != len(self.priors):
            raise LengthMismatch("states, priors and games must align")
        if any(p <= 0 for p in self.priors):
            raise LengthMismatch("state priors must be positive")
        if abs(sum(self.priors) - 1.0) > 1e-9:
            raise LengthMismatch("state priors must sum to 1")
        base = self.games[0].actions
        for g in self.games[1:]:
            if g.actions != base or g.players != self.games[0].players:
                raise LengthMismatch("all per-state games must share action sets")

    @property
    def actions(self) -> tuple[tuple[str, ...], ...]:
        return self.games[0].actions

    @property
    def players(self) -> tuple[str, ...]:
        return self.games[0].players


@dataclass(frozen=True)
class CommunicationGame:
    """A base game plus the announcer's declared intention."""

    base: Game
    announcer: int
    announcement: str

    def __post_init__(self):
        if self.announcement not in self.base.actions[self.announcer]:
            raise MissingProfile(
                f"announcement {self.announcement!r} is not an action of "
                f"player {self.announcer}"
            )


@dataclass(frozen=True)
class Objective:
    """Per-player scalarization of a reward vector.

    Kinds: "max" (own reward), "help" (the beneficiary's reward), "welfare"
    (sum), "daxity" (own minus opponent, two players only), "custom"
    (dot product with weights).
    """

    kind: str
    owner: int = 0
    beneficiary: int | None = None
    weights: tuple[float, ...] | None = None

    KINDS = ("max", "help", "welfare", "daxity", "custom")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise LengthMismatch(f"unknown objective kind {self.kind!r}")
        if self.kind == "custom" and self.weights is None:
            raise LengthMismatch("custom objective needs a weight vector")


def apply_objective(objective: Objective, reward: Sequence[float]) -> float:
    """Scalarize one reward vector under a player's objective."""
    vec = tuple(float(x) for x in reward)
    kind = objective.kind
    if kind == "max":
        return vec[objective.owner]
    if kind == "help":
        target = objective.beneficiary
        if target is None:
            if len(vec) != 2:
                raise LengthMismatch("help objective needs a beneficiary")
            target = 1 - objective.owner
        return vec[target]
    if kind == "welfare":
        return float(sum(vec))
    if kind == "daxity":
        if len(vec) != 2:
            raise DaxityNeedsTwoPlayers(
                "daxity is own minus opponent and needs exactly two players"
            )
        return vec[objective.owner] - vec[1 - objective.owner]
    if kind == "custom":
        if len(objective.weights) != len(vec):
            raise LengthMismatch(
                f"weight vector of length {len(objective.weights)} against "
                f"{len(vec)} players"
            )
        return float(np.dot(objective.weights, vec))
    raise LengthMismatch(f"unknown objective kind {kind!r}")


def make_game(
    players: Sequence[str],
    actions: Sequence[Sequence[str]],
    payoff_entries: Mapping[Profile, Sequence[float]] | Sequence,
    mode: str = "simultaneous",
) -> Game:
    """Build and validate a Game.

    payoff_entries is either a mapping from joint action profile to reward
    vector covering the full cross-product, or a nested array in row-major
    player-action order with an innermost length-N reward vector.
    """
    players = tuple(players)
    if len(players) < 2:
        raise LengthMismatch("a game needs at least two players")
    if len(actions) != len(players):
        raise LengthMismatch("one action list per player required")
    acts = tuple(tuple(a) for a in actions)
    for i, a in enumerate(acts):
        if len(set(a)) != len(a):
            raise DuplicateAction(f"player {players[i]!r} has duplicate actions: {a}")
        if not a:
            raise MissingProfile(f"player {players[i]!r} has no actions")
    if mode not in ("simultaneous", "sequential"):
        raise LengthMismatch(f"unknown mode {mode!r}")

    shape = tuple(len(a) for a in acts) + (len(players),)
    tensor = np.empty(shape, dtype=float)

    if isinstance(payoff_entries, Mapping):
        seen = set()
        for profile, vec in payoff_entries.items():
            profile = tuple(profile)
            if len(vec) != len(players):
                raise LengthMismatch(
                    f"reward vector {vec} has {len(vec)} entries for "
                    f"{len(players)} players"
                )
            idx = tuple(
                _index_of(acts[i], a, players[i]) for i, a in enumerate(profile)
            )
            tensor[idx] = [float(x) for x in vec]
            seen.add(idx)
        expected = int(np.prod(shape[:-1]))
        if len(seen) != expected:
            raise MissingProfile(
                f"payoff entries cover {len(seen)} of {expected} profiles"
            )
    else:
        arr = np.asarray(payoff_entries, dtype=float)
        if arr.shape != shape:
            raise MissingProfile(
                f"nested payoff array has shape {arr.shape}, expected {shape}"
            )
        tensor[...] = arr

    return Game(players=players, actions=acts, payoffs=tensor, mode=mode)


def _index_of(action_list: tuple[str, ...], label: str, player: str) -> int:
    try:
        return action_list.index(label)
    except ValueError:
        raise MissingProfile(f"unknown action {label!r} for player {player!r}")


def joint_reward(
    game_or_tree: Game | GameTree, profile_path: Sequence[Profile] | Profile
) -> RewardVector:
    """Reward vector at the end of a profile path (no discounting).

    For a flat Game the path is a single profile (or a one-element sequence).
    For a tree the path walks continuations and must end on a terminal.
    """
    path = _as_path(profile_path)
    if isinstance(game_or_tree, Game):
        if len(path) != 1:
            raise NonTerminalPath(f"flat game expects one profile, got {len(path)}")
        return game_or_tree.reward(path[0])

    node: GameTree | Terminal = game_or_tree
    for depth, profile in enumerate(path):
        if not isinstance(node, GameTree):
            raise NonTerminalPath(f"path continues past a terminal at step {depth}")
        last = depth == len(path) - 1
        if node.is_continued(tuple(profile)):
            nxt = node.continuations[tuple(profile)]
            if last:
                if isinstance(nxt, GameTree):
                    raise NonTerminalPath(
                        f"path ends on continued profile {tuple(profile)}"
                    )
                return tuple(float(x) for x in nxt)
            node = nxt
        else:
            if not last:
                raise NonTerminalPath(
                    f"profile {tuple(profile)} is terminal but the path continues"
                )
            return node.game.reward(tuple(profile))
    raise NonTerminalPath("empty profile path")


def _as_path(profile_path) -> list[Profile]:
    seq = list(profile_path)
    if seq and isinstance(seq[0], str):
        return [tuple(seq)]
    return [tuple(p) for p in seq]


# --- JSON wire format ---------------------------------------------------------


def game_to_json(obj: Game | GameTree) -> dict:
    """Serialize to the versioned wire format.

    {"schema": "strategos/game-v1", "players": [...], "actions": [[...]],
     "mode": ..., "payoffs": [...nested...], "continuations": {...}}
    Continuation keys join the profile's action labels with commas.
    """
    if isinstance(obj, GameTree):
        doc = game_to_json(obj.game)
        cont = {}
        for profile, nxt in obj.continuations.items():
            key = ",".join(profile)
            if isinstance(nxt, GameTree):
                cont[key] = game_to_json(nxt)
            else:
                cont[key] = list(nxt)
        doc["continuations"] = cont
        return doc
    return {
        "schema": SCHEMA_GAME,
        "players": list(obj.players),
        "actions": [list(a) for a in obj.actions],
        "mode": obj.mode,
        "payoffs": obj.payoffs.tolist(),
    }


def game_from_json(doc: Mapping) -> Game | GameTree:
    """Parse the wire format back; returns a GameTree iff continuations exist."""
    if doc.get("schema") != SCHEMA_GAME:
        raise LengthMismatch(f"unsupported schema {doc.get('schema')!r}")
    game = make_game(
        doc["players"], doc["actions"], doc["payoffs"], doc.get("mode", "simultaneous")
    )
    if "continuations" not in doc:
        return game
    raw_cont = doc["continuations"] or {}
    continuations = {}
    if not raw_cont:
        return GameTree(game=game)
    for key, sub in raw_cont.items():
        profile = tuple(key.split(","))
        if isinstance(sub, Mapping):
            continuations[profile] = game_from_json(sub)
        else:
            continuations[profile] = tuple(float(x) for x in sub)
    return GameTree(game=game, continuations=continuations)


def hidden_to_json(h: HiddenStateGame) -> dict:
    return {
        "schema": SCHEMA_HIDDEN,
        "states": list(h.states),
        "priors": list(h.priors),
        "games": [game_to_json(g) for g in h.games],
        "informed": h.informed,
        "observer": h.observer,
    }


def hidden_from_json(doc: Mapping) -> HiddenStateGame:
    if doc.get("schema") != SCHEMA_HIDDEN:
        raise LengthMismatch(f"unsupported schema {doc.get('schema')!r}")
    return HiddenStateGame(
        states=tuple(doc["states"]),
        priors=tuple(float(p) for p in doc["priors"]),
        games=tuple(game_from_json(g) for g in doc["games"]),
        informed=int(doc["informed"]),
        observer=int(doc["observer"]),
    )


def comm_to_json(c: CommunicationGame) -> dict:
    return {
        "schema": SCHEMA_COMM,
        "base": game_to_json(c.base),
        "announcer": c.announcer,
        "announcement": c.announcement,
    }


def comm_from_json(doc: Mapping) -> CommunicationGame:
    if doc.get("schema") != SCHEMA_COMM:
        raise LengthMismatch(f"unsupported schema {doc.get('schema')!r}")
    return CommunicationGame(
        base=game_from_json(doc["base"]),
        announcer=int(doc["announcer"]),
        announcement=doc["announcement"],
    )


def objective_to_json(o: Objective) -> dict:
    doc: dict = {"kind": o.kind, "owner": o.owner}
    if o.beneficiary is not None:
        doc["beneficiary"] = o.beneficiary
    if o.weights is not None:
        doc["weights"] = list(o.weights)
    return doc


def objective_from_json(doc: Mapping) -> Objective:
    return Objective(
        kind=doc["kind"],
        owner=int(doc.get("owner", 0)),
        beneficiary=doc.get("beneficiary"),
        weights=tuple(doc["weights"]) if doc.get("weights") is not None else None,
    )
