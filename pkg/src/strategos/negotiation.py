"""Deal-or-No-Deal environment: sessions, beliefs, agents, broker, datasets.

Two players split a pot of books/hats/balls with private per-item values.
Proposals alternate (six at most); accept fixes the last proposal, reject
ends with zero reward for both. The agent tracks an additive belief over the
partner's values from the shares they ask for.
"""

from __future__ import annotations

import json
import logging
import random
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import oracle
from .compiler.broker import (
    broker_instruction,
    compile_proposal_trace,
    deal_header,
    first_proposal,
    next_proposal,
)
from .compiler.negotiate import (
    TurnDecision,
    canonical_episode,
    compile_negotiation_turn,
    render_episode,
    render_turn_reasoning,
)
from .errors import (
    CountMismatch,
    MalformedLine,
    NegotiationError,
    NoOfferToAccept,
    NotYourTurn,
    OverAllocation,
    SessionClosed,
)
from .gateway import Backend, CompletionRequest

log = logging.getLogger("strategos.negotiation")

ITEM_NAMES = ("book", "hat", "ball")
DEFAULT_MAX_OFFERS = 6
DEFAULT_TOTAL_VALUE = 10

Allocation = tuple[int, int, int]


@dataclass(frozen=True)
class Pot:
    counts: Allocation

    def __post_init__(self):
        if len(self.counts) != 3 or any(c < 0 for c in self.counts):
            raise NegotiationError(f"bad pot {self.counts!r}")

    def contains(self, alloc: Sequence[int]) -> bool:
        return all(0 <= a <= c for a, c in zip(alloc, self.counts))

    def remainder(self, alloc: Sequence[int]) -> Allocation:
        return tuple(c - a for c, a in zip(self.counts, alloc))


@dataclass(frozen=True)
class PlayerContext:
    values: tuple[int, int, int]

    def __post_init__(self):
        if len(self.values) != 3 or any(v < 0 for v in self.values):
            raise NegotiationError(f"bad item values {self.values!r}")

    def total(self, pot: Pot) -> float:
        return oracle.deal_value(pot.counts, self.values)


@dataclass(frozen=True)
class ValueBelief:
    """Accumulated evidence over the partner's item values."""

    scores: tuple[float, float, float] = (0.0, 0.0, 0.0)
    observations: int = 0

    def ranking(self) -> tuple[int, ...]:
        """Item indices from most to least wanted."""
        return tuple(
            sorted(range(3), key=lambda i: (-self.scores[i], i))
        )


def update_belief(belief: ValueBelief, incoming_offer: Sequence[int], pot: Pot) -> ValueBelief:
    """Add the requested share of each item type to the accumulated score."""
    offer = tuple(int(c) for c in incoming_offer)
    if not pot.contains(offer):
        raise OverAllocation(f"offer {offer} exceeds pot {pot.counts}")
    deltas = tuple(
        (c / p) if p else 0.0 for c, p in zip(offer, pot.counts)
    )
    return ValueBelief(
        scores=tuple(s + d for s, d in zip(belief.scores, deltas)),
        observations=belief.observations + 1,
    )


@dataclass(frozen=True)
class Action:
    kind: str  # "propose" | "accept" | "reject"
    allocation: Allocation | None = None

    @staticmethod
    def propose(allocation: Sequence[int]) -> "Action":
        return Action("propose", tuple(int(c) for c in allocation))

    @staticmethod
    def accept() -> "Action":
        return Action("accept")

    @staticmethod
    def reject() -> "Action":
        return Action("reject")


class NegotiationSession:
    """Turn-alternating session state machine.

    Only proposals count toward the offer cap; accept and reject are allowed
    whenever it is the caller's turn, including after the cap is reached.
    """

    def __init__(
        self,
        pot: Pot,
        contexts: dict[str, PlayerContext],
        first: str,
        max_offers: int = DEFAULT_MAX_OFFERS,
    ):
        if len(contexts) != 2:
            raise NegotiationError("exactly two players")
        if first not in contexts:
            raise NegotiationError(f"unknown first mover {first!r}")
        if all(c == 0 for c in pot.counts):
            raise NegotiationError("a live session needs a nonempty pot")
        self.pot = pot
        self.contexts = dict(contexts)
        names = list(contexts)
        other = names[0] if names[1] == first else names[1]
        self.order = (first, other)
        self.max_offers = max_offers
        self.history: list[tuple[str, Allocation]] = []
        self.turn_index = 0
        self.outcome: str = "open"
        self.accepted_allocation: Allocation | None = None
        self.accepted_by: str | None = None
        self.rewards: dict[str, float] | None = None
        self.events: list[dict] = []
        self._lock = threading.Lock()
        self._log_event("created", pot=list(pot.counts), first=first)

    # -- state helpers ------------------------------------------------------

    @property
    def open(self) -> bool:
        return self.outcome == "open"

    def on_turn(self) -> str:
        return self.order[self.turn_index % 2]

    def other(self, player: str) -> str:
        a, b = self.order
        return b if player == a else a

    def offers_left(self) -> int:
        return self.max_offers - len(self.history)

    def last_offer(self) -> tuple[str, Allocation] | None:
        return self.history[-1] if self.history else None

    def _log_event(self, kind: str, **payload) -> None:
        self.events.append({"event": kind, "turn": self.turn_index, **payload})

    def event_log(self) -> str:
        return "\n".join(json.dumps(e, ensure_ascii=False) for e in self.events)

    # -- transitions ----------------------------------------------------------

    def apply(self, actor: str, action: Action) -> None:
        with self._lock:
            self._apply_locked(actor, action)

    def _apply_locked(self, actor: str, action: Action) -> None:
        if not self.open:
            raise SessionClosed(f"session is {self.outcome}")
        if actor not in self.contexts:
            raise NegotiationError(f"unknown player {actor!r}")
        if actor != self.on_turn():
            raise NotYourTurn(f"it is {self.on_turn()}'s turn")
        if action.kind == "propose":
            if len(self.history) >= self.max_offers:
                raise SessionClosed(
                    f"offer limit of {self.max_offers} reached; accept or reject"
                )
            alloc = action.allocation
            if alloc is None or not self.pot.contains(alloc):
                raise OverAllocation(
                    f"proposal {action.allocation} exceeds pot {self.pot.counts}"
                )
            self.history.append((actor, alloc))
            self._log_event("propose", actor=actor, allocation=list(alloc))
            self.turn_index += 1
            return
        if action.kind == "accept":
            last = self.last_offer()
            if last is None:
                raise NoOfferToAccept("nothing has been proposed yet")
            proposer, alloc = last
            self.outcome = "accepted"
            self.accepted_allocation = alloc
            self.accepted_by = actor
            self.rewards = {
                proposer: oracle.deal_value(alloc, self.contexts[proposer].values),
                actor: oracle.deal_value(
                    self.pot.remainder(alloc), self.contexts[actor].values
                ),
            }
            self._log_event(
                "accept", actor=actor, allocation=list(alloc),
                rewards={k: v for k, v in self.rewards.items()},
            )
            return
        if action.kind == "reject":
            self.outcome = "rejected"
            self.rewards = {name: 0.0 for name in self.contexts}
            self._log_event("reject", actor=actor)
            return
        raise NegotiationError(f"unknown action kind {action.kind!r}")


def apply_action(session: NegotiationSession, actor: str, action: Action) -> NegotiationSession:
    session.apply(actor, action)
    return session


# --- the negotiating agent ---------------------------------------------------------


@dataclass
class AgentPolicy:
    """Deterministic seat-of-the-pants policy behind the LLM (and its fallback)."""

    accept_fraction: float = 0.7  # accept when the offer is worth this much of the pot
    concede_step: int = 1


class NegotiationAgent:
    """Drives one side of a session: belief tracking plus propose/accept/reject.

    With a completion backend the turn prompt is compiled and the model's
    action line is parsed (falling back to the deterministic policy on any
    invalid output); without one the deterministic policy plays directly, and
    its reasoning text is rendered the same way for record/replay.
    """

    def __init__(
        self,
        name: str,
        session: NegotiationSession,
        backend: Backend | None = None,
        style_demos: Sequence[str] | None = None,
        policy: AgentPolicy | None = None,
        use_belief: bool = True,
    ):
        self.name = name
        self.partner = session.other(name)
        self.session = session
        self.backend = backend
        self.style_demos = style_demos
        self.policy = policy or AgentPolicy()
        self.use_belief = use_belief
        self.belief = ValueBelief()
        self.last_reasoning = ""

    @property
    def values(self) -> tuple[int, int, int]:
        return self.session.contexts[self.name].values

    def take_turn(self) -> Action:
        action, self.belief = agent_turn(
            self.session,
            self.belief,
            self.style_demos,
            self.backend,
            agent=self.name,
            policy=self.policy,
            use_belief=self.use_belief,
            reasoning_sink=self._sink,
        )
        self.session.apply(self.name, action)
        return action

    def _sink(self, text: str) -> None:
        self.last_reasoning = text


def default_decision(
    session: NegotiationSession,
    belief: ValueBelief,
    agent: str,
    policy: AgentPolicy,
) -> TurnDecision:
    """The deterministic negotiation policy.

    Accept offers worth at least the accept fraction of the whole pot; when
    proposals run out take anything positive; otherwise counter by keeping
    the top-value items and conceding one unit per round.
    """
    pot = session.pot
    values = session.contexts[agent].values
    total = oracle.deal_value(pot.counts, values)
    last = session.last_offer()
    incoming = last[1] if last and last[0] != agent else None
    incoming_value = (
        oracle.deal_value(pot.remainder(incoming), values)
        if incoming is not None
        else None
    )
    if incoming_value is not None and incoming_value >= policy.accept_fraction * total:
        return TurnDecision(action="accept")
    if session.offers_left() == 0:
        if incoming_value is not None and incoming_value > 0:
            return TurnDecision(action="accept")
        return TurnDecision(action="reject")

    own_offers = [alloc for actor, alloc in session.history if actor == agent]
    if own_offers:
        prev = own_offers[-1]
        alloc = _concede(prev, values, policy.concede_step)
    elif belief.observations == 0:
        alloc = pot.counts  # opening ask: everything
    else:
        give = belief.ranking()[0]
        alloc = tuple(
            0 if i == give else c for i, c in enumerate(pot.counts)
        )
    return TurnDecision(action="propose", proposal=alloc)


def _concede(prev: Allocation, values, step: int) -> Allocation:
    """Give up `step` units of the cheapest item still held."""
    held = [(values[i], i) for i in range(3) if prev[i] > 0]
    if not held:
        return prev
    _, idx = min(held)
    alloc = list(prev)
    alloc[idx] = max(0, alloc[idx] - step)
    return tuple(alloc)


def agent_turn(
    session: NegotiationSession,
    belief: ValueBelief,
    style_demos: Sequence[str] | None,
    backend: Backend | None,
    agent: str = "Alice",
    policy: AgentPolicy | None = None,
    use_belief: bool = True,
    reasoning_sink=None,
) -> tuple[Action, ValueBelief]:
    """One agent turn: update belief, choose an action, validate it.

    Invalid or unparseable model output falls back to the deterministic
    policy (accept-if-good-else-counter) and logs the incident; the fallback
    path never errors.
    """
    if not session.open:
        raise SessionClosed(f"session is {session.outcome}")
    policy = policy or AgentPolicy()
    partner = session.other(agent)
    last = session.last_offer()
    incoming = last[1] if last and last[0] == partner else None
    belief_before = belief
    if incoming is not None and use_belief:
        belief = update_belief(belief, incoming, session.pot)

    fallback = default_decision(session, belief, agent, policy)
    decision = fallback
    reasoning = ""
    if backend is not None:
        demo_set = compile_negotiation_turn(
            session.pot.counts,
            session.contexts[agent].values,
            session.history,
            style_demos,
            agent=agent,
            partner=partner,
        )
        prompt = demo_set.flat_prompt(answer_cue="").rstrip("\n")
        try:
            # offer quotes inside the reasoning are single-newline "Bob:" lines;
            # only a paragraph-level partner line ends the turn
            completion = backend.complete(
                CompletionRequest(prompt=prompt, stop=(f"\n\n{partner}:",))
            )
            parsed = parse_agent_action(completion, agent)
            decision = _validate_decision(parsed, session, fallback)
            reasoning = completion
        except NegotiationError as e:
            log.warning("agent output rejected (%s); falling back", e)
            decision = fallback
    if not reasoning:
        reasoning, _ = render_turn_reasoning(
            session.pot.counts,
            session.contexts[agent].values,
            belief_before.scores,
            session.history,
            incoming if use_belief else None,
            decision,
            agent=agent,
            partner=partner,
        )
    if reasoning_sink is not None:
        reasoning_sink(reasoning)

    if decision.action == "propose":
        return Action.propose(decision.proposal), belief
    if decision.action == "accept":
        return Action.accept(), belief
    return Action.reject(), belief


def parse_agent_action(completion: str, agent: str) -> TurnDecision:
    """Read the final propose/accept/reject line out of a completion."""
    lines = [ln.strip() for ln in completion.splitlines() if ln.strip()]
    for line in reversed(lines):
        lowered = line.lower()
        prefix = f"{agent.lower()}:"
        if lowered.startswith(prefix):
            lowered = lowered[len(prefix):].strip()
        if lowered in ("accept", "reject"):
            return TurnDecision(action=lowered)
        if lowered.startswith("propose:"):
            try:
                alloc = _parse_allocation(lowered[len("propose:"):])
            except ValueError as e:
                raise NegotiationError(str(e))
            return TurnDecision(action="propose", proposal=alloc)
    raise NegotiationError("no action line found in completion")


def _parse_allocation(text: str) -> Allocation:
    parts = dict(
        token.split("=", 1) for token in text.strip().split() if "=" in token
    )
    try:
        return tuple(int(parts[name]) for name in ITEM_NAMES)
    except (KeyError, ValueError):
        raise ValueError(f"malformed allocation {text.strip()!r}")


def _validate_decision(
    decision: TurnDecision, session: NegotiationSession, fallback: TurnDecision
) -> TurnDecision:
    if decision.action == "propose":
        if session.offers_left() == 0:
            log.warning("model proposed past the offer cap; falling back")
            return fallback
        if decision.proposal is None or not session.pot.contains(decision.proposal):
            log.warning("model over-allocated %s; falling back", decision.proposal)
            return fallback
    if decision.action == "accept" and session.last_offer() is None:
        log.warning("model accepted with no offer on the table; falling back")
        return fallback
    return decision


# --- the fair broker ----------------------------------------------------------------


@dataclass(frozen=True)
class BrokerResult:
    allocation: Allocation
    score: float  # fairness metric of the returned allocation
    optimum: float  # fairness metric of the enumerated optimum
    gap: float  # |score - optimum|
    trace_text: str


def broker_propose(
    pot: Sequence[int],
    context_a: PlayerContext | Sequence[int],
    context_b: PlayerContext | Sequence[int],
    fairness: str = "equality",
    num_tries: int = 3,
    backend: Backend | None = None,
) -> BrokerResult:
    """Propose/evaluate/revise; returns the best tried allocation.

    Without a backend the revision loop is the documented heuristic with the
    enumerated optimum injected as the final revision (the oracle stands in
    for the model at the proposal step). With a backend the compiled
    demonstration prompts the model and its propose: line is parsed, falling
    back to the heuristic's best try on invalid output.
    """
    values_a = tuple(context_a.values if isinstance(context_a, PlayerContext) else context_a)
    values_b = tuple(context_b.values if isinstance(context_b, PlayerContext) else context_b)
    pot = tuple(int(c) for c in pot)
    optimal = oracle.optimal_fair_deal(pot, values_a, values_b, fairness)

    tries = [first_proposal(values_a, values_b, pot)]
    while len(tries) < num_tries:
        tries.append(
            next_proposal(tries[-1], pot, values_a, values_b, fairness, set(tries))
        )
    chosen: Allocation | None = None
    trace_text = ""
    if backend is not None:
        prompt = (
            broker_instruction(fairness, num_tries)
            + "\n\n"
            + _broker_demo_text(fairness, num_tries)
            + "\n\n"
            + deal_header(pot, values_a, values_b, fairness)
            + "\n\n"
        )
        try:
            completion = backend.complete(
                CompletionRequest(prompt=prompt, stop=("\n## New Deal",))
            )
            trace_text = completion
            marker = completion.rfind("propose:")
            if marker == -1:
                raise NegotiationError("no propose: line in broker completion")
            alloc = _parse_allocation(completion[marker + len("propose:"):])
            if not Pot(pot).contains(alloc):
                raise NegotiationError(f"broker over-allocated {alloc}")
            chosen = alloc
        except NegotiationError as e:
            log.warning("broker output rejected (%s); falling back", e)
            chosen = None
    if chosen is None:
        if backend is None and num_tries >= 1:
            tries[-1] = optimal.allocation  # oracle revision reaches the optimum
        trace = compile_proposal_trace(
            pot, (values_a, values_b), fairness, num_tries, scripted=tries
        )
        trace_text = trace.text
        chosen = _best_of(tries, pot, values_a, values_b, fairness)

    score = _metric(chosen, pot, values_a, values_b, fairness)
    return BrokerResult(
        allocation=tuple(chosen),
        score=score,
        optimum=optimal.score,
        gap=abs(score - optimal.score),
        trace_text=trace_text,
    )


def _metric(alloc, pot, values_a, values_b, fairness) -> float:
    va = oracle.deal_value(alloc, values_a)
    vb = oracle.deal_value([p - a for p, a in zip(pot, alloc)], values_b)
    return abs(va - vb) if fairness == "equality" else min(va, vb)


def _best_of(tries, pot, values_a, values_b, fairness) -> Allocation:
    scored = [(_metric(t, pot, values_a, values_b, fairness), i) for i, t in enumerate(tries)]
    if fairness == "equality":
        _, idx = min(scored)
    else:
        best_score = max(s for s, _ in scored)
        idx = min(i for s, i in scored if s == best_score)
    return tuple(tries[idx])


_BROKER_DEMO = {}


def _broker_demo_text(fairness: str, num_tries: int) -> str:
    key = (fairness, num_tries)
    if key not in _BROKER_DEMO:
        pot = (3, 1, 2)
        values = ((1, 3, 2), (0, 2, 4))
        trace = compile_proposal_trace(
            pot, values, fairness, num_tries,
            scripted=[(3, 1, 0), (3, 0, 1), (2, 0, 2)] if num_tries == 3 else None,
        )
        _BROKER_DEMO[key] = (
            deal_header(pot, values[0], values[1], fairness) + "\n\n" + trace.text
        )
    return _BROKER_DEMO[key]


# --- datasets -----------------------------------------------------------------------


def load_contexts(path: str | Path) -> list[tuple[Allocation, Allocation, Allocation]]:
    """Parse negotiation contexts: the two-line text format or our JSON.

    Text format: two whitespace-separated lines per scenario, each
    "c1 v1 c2 v2 c3 v3"; both lines must agree on the counts.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{") or stripped.startswith("["):
        doc = json.loads(text)
        entries = doc["contexts"] if isinstance(doc, dict) else doc
        out = []
        for entry in entries:
            out.append(
                (
                    tuple(int(x) for x in entry["pot"]),
                    tuple(int(x) for x in entry["values_a"]),
                    tuple(int(x) for x in entry["values_b"]),
                )
            )
        return out

    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 6:
            raise MalformedLine(f"expected 6 integers, got {len(fields)}", lineno)
        try:
            nums = [int(f) for f in fields]
        except ValueError:
            raise MalformedLine("non-integer field", lineno)
        rows.append((lineno, nums))
    if len(rows) % 2:
        raise MalformedLine("dangling player line at end of file", rows[-1][0])
    contexts = []
    for (ln_a, a), (ln_b, b) in zip(rows[::2], rows[1::2]):
        pot_a = (a[0], a[2], a[4])
        pot_b = (b[0], b[2], b[4])
        if pot_a != pot_b:
            raise CountMismatch(
                f"lines {ln_a} and {ln_b} disagree on the pot: {pot_a} vs {pot_b}"
            )
        contexts.append((pot_a, (a[1], a[3], a[5]), (b[1], b[3], b[5])))
    return contexts


def generate_contexts(
    n: int, seed: int = 0, total: int = DEFAULT_TOTAL_VALUE
) -> list[tuple[Allocation, Allocation, Allocation]]:
    """Seeded contexts following the published dataset's shape.

    Three item types, each count >= 1, 5-7 items total; every player's values
    are nonnegative integers whose dot product with the counts is `total`.
    """
    rng = random.Random(seed)
    pots = [
        (b, h, l)
        for b in range(1, 6)
        for h in range(1, 6)
        for l in range(1, 6)
        if 5 <= b + h + l <= 7
    ]
    out = []
    while len(out) < n:
        pot = rng.choice(pots)
        solutions = _value_solutions(pot, total)
        if len(solutions) < 2:
            continue
        va = rng.choice(solutions)
        vb = rng.choice(solutions)
        out.append((pot, va, vb))
    return out


def _value_solutions(pot: Allocation, total: int) -> list[Allocation]:
    b, h, l = pot
    solutions = []
    for vb in range(total + 1):
        for vh in range(total + 1):
            rem = total - b * vb - h * vh
            if rem < 0:
                continue
            if rem % l == 0 and rem // l <= total:
                solutions.append((vb, vh, rem // l))
    return solutions


def write_contexts(path: str | Path, contexts) -> None:
    """Write contexts in the two-line text format."""
    lines = []
    for pot, va, vb in contexts:
        lines.append(" ".join(str(x) for pair in zip(pot, va) for x in pair))
        lines.append(" ".join(str(x) for pair in zip(pot, vb) for x in pair))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def bundled_contexts_path() -> Path:
    return Path(__file__).parent / "data" / "negotiation_contexts.txt"


def random_session(
    seed: int,
    first: str = "Bob",
    names: tuple[str, str] = ("Alice", "Bob"),
    max_offers: int = DEFAULT_MAX_OFFERS,
) -> NegotiationSession:
    """Reproducible session: seeded pot and private values for both sides."""
    (pot, va, vb) = generate_contexts(1, seed=seed)[0]
    agent, human = names
    return NegotiationSession(
        pot=Pot(pot),
        contexts={agent: PlayerContext(va), human: PlayerContext(vb)},
        first=first,
        max_offers=max_offers,
    )
