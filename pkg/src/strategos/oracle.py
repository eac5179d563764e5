"""Exact brute-force solvers for every decision problem in the toolkit.

These are the ground truth the evaluation harness scores against and the
numeric source the prompt compiler renders. Everything enumerates; nothing
samples. Argmax sets use an absolute tolerance of 1e-9 (payoffs are small
integers in practice).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import CycleDetected, EmptySupport, EnumerationTooLarge, LengthMismatch
from .games import (
    CommunicationGame,
    Game,
    GameTree,
    HiddenStateGame,
    Objective,
    Profile,
    RewardVector,
    apply_objective,
)

ARGMAX_TOL = 1e-9

# Beyond this many candidate splits the fair-deal enumeration refuses to run.
MAX_DEAL_ENUMERATION = 10_000_000


@dataclass(frozen=True)
class ActionChoice:
    """An argmax set plus the expected value of every action behind it."""

    best: tuple[str, ...]
    values: Mapping[str, float]

    def uniform(self) -> dict[str, float]:
        p = 1.0 / len(self.best)
        return {a: p for a in self.best}


@dataclass(frozen=True)
class StatePosterior:
    probs: Mapping[str, float]

    def __post_init__(self):
        total = sum(self.probs.values())
        if abs(total - 1.0) > 1e-9 or any(p < 0 for p in self.probs.values()):
            raise LengthMismatch(f"not a distribution: {dict(self.probs)}")


@dataclass(frozen=True)
class TruthAssessment:
    """Outcome of reasoning about an announced intention."""

    belief: str  # "truthful" | "lying"
    predicted_plays: tuple[str, ...]
    announcer_values: Mapping[str, float]
    choice: ActionChoice


@dataclass(frozen=True)
class OptimalDeal:
    allocation: tuple[int, ...]  # what player A receives
    value_a: float
    value_b: float
    score: float  # |V_A - V_B| for equality, min(V_A, V_B) for Rawlsian


def argmax_set(values: Mapping[str, float], tol: float = ARGMAX_TOL) -> tuple[str, ...]:
    top = max(values.values())
    return tuple(a for a in values if values[a] >= top - tol)


def argmin_set(values: Mapping[str, float], tol: float = ARGMAX_TOL) -> tuple[str, ...]:
    low = min(values.values())
    return tuple(a for a in values if values[a] <= low + tol)


def level0(game: Game, player: int, objective: Objective) -> ActionChoice:
    """Naive choice: expected objective value assuming uniform opponents."""
    uniform = {
        opp: {a: 1.0 / len(game.actions[opp]) for a in game.actions[opp]}
        for opp in game.opponents(player)
    }
    return best_response(game, player, objective, uniform)


def best_response(
    game: Game,
    player: int,
    objective: Objective,
    opponent_dist: Mapping[int, Mapping[str, float]],
) -> ActionChoice:
    """Expected objective value per own action under given opponent play.

    opponent_dist maps each other player to a distribution over their
    actions; opponents are treated as independent.
    """
    opps = game.opponents(player)
    for opp in opps:
        dist = opponent_dist.get(opp)
        if not dist or sum(dist.values()) <= 0:
            raise EmptySupport(f"no support for opponent {opp}")
        for a in dist:
            game.action_index(opp, a)  # validates
    values: dict[str, float] = {}
    for own in game.actions[player]:
        total = 0.0
        for combo in itertools.product(*(list(opponent_dist[o].items()) for o in opps)):
            prob = 1.0
            profile: list[str | None] = [None] * game.n_players
            profile[player] = own
            for opp, (act, p) in zip(opps, combo):
                prob *= p
                profile[opp] = act
            if prob == 0.0:
                continue
            total += prob * apply_objective(objective, game.reward(tuple(profile)))
        norm = 1.0
        for opp in opps:
            norm *= sum(opponent_dist[opp].values())
        values[own] = total / norm
    return ActionChoice(best=argmax_set(values), values=values)


def solve_level_k(
    game: Game, player: int, k: int, objectives: Sequence[Objective]
) -> ActionChoice:
    """Iterated best response; two-player only.

    k=0 is the naive (uniform-opponent) choice. k=1 best-responds to a naive
    opponent. For k>=2 the opponent is assumed to know the player's level
    (k-1) action and best-respond to it, and the player best-responds to that
    reply: exactly the chain the cascade runtime performs, one level per
    context. Ties at every stage become uniform distributions.
    """
    if game.n_players != 2:
        raise LengthMismatch("level-k reasoning is defined for two-player games")
    if k < 0:
        raise LengthMismatch("k must be >= 0")
    opp = 1 - player
    if k == 0:
        return level0(game, player, objectives[player])
    if k == 1:
        opp_choice = level0(game, opp, objectives[opp])
    else:
        mine_prev = solve_level_k(game, player, k - 1, objectives)
        opp_choice = best_response(
            game, opp, objectives[opp], {player: mine_prev.uniform()}
        )
    return best_response(game, player, objectives[player], {opp: opp_choice.uniform()})


def solve_tree(
    tree: GameTree,
    player: int,
    objectives: Sequence[Objective],
    opponent_level: int = 0,
) -> ActionChoice:
    """Backward induction over staged games.

    Continued profiles are replaced by the expected reward vector of the
    solved subgame, then the stage itself is solved: simultaneous stages pit
    the player's best response against opponents reasoning at opponent_level;
    sequential stages let later movers observe earlier actions (the solved
    player is the first mover).
    """
    flat = _flatten(tree, player, objectives, opponent_level, seen=set())
    return _solve_stage(flat, player, objectives, opponent_level)


def _flatten(
    tree: GameTree,
    player: int,
    objectives: Sequence[Objective],
    opponent_level: int,
    seen: set,
) -> Game:
    if id(tree) in seen:
        raise CycleDetected("game tree contains a cycle")
    seen = seen | {id(tree)}
    game = tree.game
    if not tree.continuations:
        return game
    tensor = np.array(game.payoffs, dtype=float)
    for profile, nxt in tree.continuations.items():
        if isinstance(nxt, GameTree):
            sub = _flatten(nxt, player, objectives, opponent_level, seen)
            vec = expected_stage_reward(sub, player, objectives, opponent_level)
        else:
            vec = tuple(float(x) for x in nxt)
        tensor[game.profile_index(profile)] = vec
    return Game(
        players=game.players, actions=game.actions, payoffs=tensor, mode=game.mode
    )


def _solve_stage(
    game: Game, player: int, objectives: Sequence[Objective], opponent_level: int
) -> ActionChoice:
    if game.mode == "sequential":
        return _solve_sequential_leader(game, player, objectives)
    opp_dists = {}
    for opp in game.opponents(player):
        if opponent_level <= 0:
            choice = level0(game, opp, objectives[opp])
        else:
            choice = solve_level_k(game, opp, opponent_level, objectives)
        opp_dists[opp] = choice.uniform()
    return best_response(game, player, objectives[player], opp_dists)


def _solve_sequential_leader(
    game: Game, player: int, objectives: Sequence[Objective]
) -> ActionChoice:
    if game.n_players != 2:
        raise LengthMismatch("sequential stages support two players")
    if player != 0:
        raise LengthMismatch("the solved player moves first in sequential games")
    follower = 1
    values: dict[str, float] = {}
    for own in game.actions[player]:
        replies = {
            b: apply_objective(objectives[follower], game.reward((own, b)))
            for b in game.actions[follower]
        }
        best_replies = argmax_set(replies)
        values[own] = float(
            np.mean(
                [
                    apply_objective(objectives[player], game.reward((own, b)))
                    for b in best_replies
                ]
            )
        )
    return ActionChoice(best=argmax_set(values), values=values)


def expected_stage_reward(
    game: Game, player: int, objectives: Sequence[Objective], opponent_level: int
) -> RewardVector:
    """Expected reward vector when the solved stage is actually played out."""
    if game.mode == "sequential":
        leader_choice = _solve_sequential_leader(game, player, objectives)
        total = np.zeros(game.n_players)
        weight = 1.0 / len(leader_choice.best)
        for own in leader_choice.best:
            replies = {
                b: apply_objective(objectives[1], game.reward((own, b)))
                for b in game.actions[1]
            }
            best_replies = argmax_set(replies)
            for b in best_replies:
                total += (weight / len(best_replies)) * np.asarray(
                    game.reward((own, b))
                )
        return tuple(float(x) for x in total)

    my_choice = _solve_stage(game, player, objectives, opponent_level)
    dists: dict[int, dict[str, float]] = {player: my_choice.uniform()}
    for opp in game.opponents(player):
        if opponent_level <= 0:
            choice = level0(game, opp, objectives[opp])
        else:
            choice = solve_level_k(game, opp, opponent_level, objectives)
        dists[opp] = choice.uniform()
    total = np.zeros(game.n_players)
    players = list(range(game.n_players))
    for combo in itertools.product(*(list(dists[i].items()) for i in players)):
        prob = 1.0
        profile = []
        for act, p in combo:
            prob *= p
            profile.append(act)
        if prob:
            total += prob * np.asarray(game.reward(tuple(profile)))
    return tuple(float(x) for x in total)


def hidden_state_posterior(
    hsgame: HiddenStateGame,
    observed_informed_action: str,
    prior: Sequence[float] | None = None,
) -> StatePosterior:
    """Posterior over world states after seeing the informed player's action.

    A state is consistent when the observed action is a naive-optimal action
    for the informed player in that state's game. Inconsistent evidence (no
    state fits) falls back to the prior rather than erroring.
    """
    prior = tuple(prior) if prior is not None else hsgame.priors
    weights = []
    for s, game in zip(range(len(hsgame.states)), hsgame.games):
        choice = level0(game, hsgame.informed, Objective("max", owner=hsgame.informed))
        consistent = observed_informed_action in choice.best
        weights.append(prior[s] if consistent else 0.0)
    total = sum(weights)
    if total <= 0:
        weights = list(prior)
        total = sum(weights)
    return StatePosterior(
        probs={s: w / total for s, w in zip(hsgame.states, weights)}
    )


def best_response_under_belief(
    hsgame: HiddenStateGame,
    posterior: StatePosterior,
    observed_action: str,
    objective: Objective | None = None,
) -> ActionChoice:
    """Observer's expected objective per action, averaging over the belief."""
    if objective is None:
        objective = Objective("max", owner=hsgame.observer)
    values: dict[str, float] = {}
    for own in hsgame.actions[hsgame.observer]:
        profile: list[str] = [""] * 2
        profile[hsgame.informed] = observed_action
        profile[hsgame.observer] = own
        total = 0.0
        for s, game in zip(hsgame.states, hsgame.games):
            p = posterior.probs.get(s, 0.0)
            if p:
                total += p * apply_objective(objective, game.reward(tuple(profile)))
        values[own] = total
    return ActionChoice(best=argmax_set(values), values=values)


def infer_truthfulness(
    commgame: CommunicationGame, objective: Objective | None = None
) -> TruthAssessment:
    """Decide whether an announced intention is honest, and respond to it.

    The announcer is modeled as naive about credulity: they assume the player
    will believe the announcement and best-respond to it, and they pick the
    actual play that maximizes their own reward under that assumption. The
    player then believes the announcement exactly when the announcer gains
    nothing by deviating from it.
    """
    base = commgame.base
    if base.n_players != 2:
        raise LengthMismatch("truthfulness games have two players")
    announcer = commgame.announcer
    player = 1 - announcer
    if objective is None:
        objective = Objective("max", owner=player)

    credulous = best_response(
        base,
        player,
        objective,
        {announcer: {commgame.announcement: 1.0}},
    )
    ann_values: dict[str, float] = {}
    for play in base.actions[announcer]:
        total = 0.0
        for resp, p in credulous.uniform().items():
            profile: list[str] = [""] * 2
            profile[announcer] = play
            profile[player] = resp
            total += p * base.reward(tuple(profile))[announcer]
        ann_values[play] = total
    predicted = argmax_set(ann_values)

    if commgame.announcement in predicted:
        belief = "truthful"
        actual = {commgame.announcement: 1.0}
        plays: tuple[str, ...] = (commgame.announcement,)
    else:
        belief = "lying"
        p = 1.0 / len(predicted)
        actual = {a: p for a in predicted}
        plays = predicted
    choice = best_response(base, player, objective, {announcer: actual})
    return TruthAssessment(
        belief=belief,
        predicted_plays=plays,
        announcer_values=ann_values,
        choice=choice,
    )


def deal_value(allocation: Sequence[int], values: Sequence[float]) -> float:
    """Dot product of received item counts and per-item values."""
    if len(allocation) != len(values):
        raise LengthMismatch("allocation and values must have the same length")
    return float(sum(int(c) * float(v) for c, v in zip(allocation, values)))


def enumerate_allocations(pot: Sequence[int]):
    """All splits of the pot, in lexicographic order of player A's counts."""
    return itertools.product(*(range(int(c) + 1) for c in pot))


def optimal_fair_deal(
    pot: Sequence[int],
    values_a: Sequence[float],
    values_b: Sequence[float],
    fairness: str = "equality",
) -> OptimalDeal:
    """Exhaustively enumerate every split of the pot for the fairest deal.

    equality minimizes |V_A - V_B|; rawlsian maximizes min(V_A, V_B). Ties
    break toward the lexicographically first allocation, so results are
    stable across runs and platforms. An empty pot yields the empty deal.
    """
    pot = tuple(int(c) for c in pot)
    if any(c < 0 for c in pot):
        raise LengthMismatch("pot counts must be nonnegative")
    if fairness not in ("equality", "rawlsian"):
        raise LengthMismatch(f"unknown fairness metric {fairness!r}")
    size = 1
    for c in pot:
        size *= c + 1
    if size > MAX_DEAL_ENUMERATION:
        raise EnumerationTooLarge(f"{size} candidate splits exceeds the guard")

    best: OptimalDeal | None = None
    for alloc in enumerate_allocations(pot):
        va = deal_value(alloc, values_a)
        vb = deal_value([p - a for p, a in zip(pot, alloc)], values_b)
        if fairness == "equality":
            score = abs(va - vb)
            better = best is None or score < best.score - ARGMAX_TOL
        else:
            score = min(va, vb)
            better = best is None or score > best.score + ARGMAX_TOL
        if better:
            best = OptimalDeal(
                allocation=tuple(alloc), value_a=va, value_b=vb, score=score
            )
    assert best is not None  # pot of all zeros still yields the empty allocation
    return best
