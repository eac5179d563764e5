"""Negotiation-turn prompts in the annotated-demonstration style.

Each agent turn renders: evaluate the incoming offer, update the belief over
the partner's values with shown fractions, list old proposals, construct a
new proposal (or accept/reject), and end with the action line. A scripted
episode replays to the canonical demonstration byte-for-byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..formatting import fmt_num
from .traces import DemoSet, ReasoningTrace, TraceBuilder

ITEMS = ("book", "hat", "ball")
ITEMS_PLURAL = ("books", "hats", "balls")
# the belief/wants lines use these fixed forms
ITEMS_WANTS = ("book", "hat", "balls")

THINK_CUE = "Let's think step by step for {agent}:"


def count_phrase(counts: Sequence[int]) -> str:
    """Count-aware pluralization: "0 books, 3 hats, 1 ball"."""
    parts = []
    for c, sing, plur in zip(counts, ITEMS, ITEMS_PLURAL):
        parts.append(f"{int(c)} {sing if int(c) == 1 else plur}")
    return ", ".join(parts)


def plural_phrase(counts: Sequence[int]) -> str:
    """Always-plural item listing: "1 books, 1 hats, 0 balls"."""
    return ", ".join(f"{int(c)} {p}" for c, p in zip(counts, ITEMS_PLURAL))


def fraction_phrase(counts: Sequence[int], pot: Sequence[int]) -> str:
    """"1/1 books, 1/4 hats, 0/1 balls" style share listing."""
    return ", ".join(
        f"{int(c)}/{int(p)} {name}"
        for c, p, name in zip(counts, pot, ITEMS_PLURAL)
    )


def offer_line(actor: str, alloc: Sequence[int]) -> str:
    pairs = " ".join(f"{n}={int(c)}" for n, c in zip(ITEMS, alloc))
    return f"{actor}: propose: {pairs}"


def session_header(pot, own_values, agent: str = "Alice", partner: str = "Bob") -> str:
    lines = ["## New Deal", "items available:"]
    lines += [f"{n}={int(c)}" for n, c in zip(ITEMS, pot)]
    values = " ".join(f"{n}={fmt_num(v)}" for n, v in zip(ITEMS, own_values))
    lines.append(f"{agent}'s values: {values}")
    lines.append(f"prior over {partner}'s values: " + " ".join(f"{n}=0" for n in ITEMS))
    return "\n".join(lines)


def _belief_terms(scores) -> str:
    return ", ".join(
        f"{name}: {fmt_num(s)}" for name, s in zip(ITEMS_WANTS, scores)
    )


def _ranked_values(who: str, labels, scores) -> str:
    order = sorted(range(len(labels)), key=lambda i: (-scores[i], i))
    ranked = " > ".join(f"{labels[i]}:{fmt_num(scores[i])}" for i in order)
    return f"{who} values: {ranked}"


def quality_sentence(value: float, total: float, agent: str) -> str:
    if value <= 0.5 * total:
        return f"This is not a good deal for {agent}."
    if value < 0.7 * total:
        return f"This is not a great deal for {agent}."
    return f"This is a good deal for {agent}."


@dataclass(frozen=True)
class TurnDecision:
    """What the agent does this turn, plus optional scripted flavor text."""

    action: str  # "propose" | "accept" | "reject"
    proposal: tuple[int, ...] | None = None
    insight: str | None = None
    quality: str | None = None


def render_turn_reasoning(
    pot: Sequence[int],
    own_values: Sequence[float],
    belief_before: Sequence[float],
    history: Sequence[tuple[str, tuple[int, ...]]],
    incoming: tuple[int, ...] | None,
    decision: TurnDecision,
    agent: str = "Alice",
    partner: str = "Bob",
) -> tuple[str, tuple[float, ...]]:
    """One turn's reasoning block (without the leading think cue).

    history already includes the incoming offer. Returns the text and the
    updated belief scores.
    """
    pot = tuple(int(c) for c in pot)
    total = sum(c * v for c, v in zip(pot, own_values))
    b = TraceBuilder()
    belief_after = tuple(belief_before)

    if incoming is not None:
        b.line(
            "value",
            f"{partner} proposes that he get {count_phrase(incoming)}",
        )
        mine = tuple(p - c for p, c in zip(pot, incoming))
        subtraction = ", ".join(
            f"({p}-{c})={p - c} {name}"
            for p, c, name in zip(pot, incoming, ITEMS_PLURAL)
        )
        b.line("value", f"So, {agent} gets {subtraction}.")
        products = " + ".join(
            f"({m}*{fmt_num(v)})" for m, v in zip(mine, own_values)
        )
        terms = "+".join(fmt_num(m * v) for m, v in zip(mine, own_values))
        value = sum(m * v for m, v in zip(mine, own_values))
        b.line(
            "value",
            f"Value of {agent}'s items: {products} = {terms} = "
            f"{fmt_num(value)}/{fmt_num(total)}",
        )
        b.line("value", decision.quality or quality_sentence(value, total, agent))
        fractions = []
        deltas = []
        for c, p, name in zip(incoming, pot, ITEMS_WANTS):
            if p:
                share = c / p
                fractions.append(f"{int(c)}/{int(p)} = {fmt_num(share)} {name}")
            else:
                share = 0.0
                fractions.append(f"0 {name}")
            deltas.append(share)
        b.line("belief", f"{partner} wants " + ", ".join(fractions) + ".")
        b.line(
            "belief",
            f"Previous belief over values: {_belief_terms(belief_before)}",
        )
        updated = ", ".join(
            f"{name}: {fmt_num(prev)}+{fmt_num(d)}={fmt_num(prev + d)}"
            for name, prev, d in zip(ITEMS_WANTS, belief_before, deltas)
        )
        b.line("belief", f"Updated belief: {updated}")
        belief_after = tuple(p + d for p, d in zip(belief_before, deltas))

    # "Old Proposals" covers what is on the table: the agent's own most
    # recent proposal and everything after it.
    on_table = list(history)
    for i in range(len(on_table) - 1, -1, -1):
        if on_table[i][0] == agent:
            on_table = on_table[i:]
            break
    if on_table:
        b.line("search", "Old Proposals:")
        for actor, alloc in on_table:
            b.line("search", offer_line(actor, alloc))
            mine = alloc if actor == agent else tuple(
                p - c for p, c in zip(pot, alloc)
            )
            b.line("search", f"{agent} gets {fraction_phrase(mine, pot)}.")

    if decision.action == "propose":
        if history:
            b.line("proposal", "New Proposal that is different from old proposals:")
        else:
            b.line("proposal", "New Proposal:")
        b.line("proposal", _ranked_values(partner, ITEMS_PLURAL, belief_after))
        b.line("proposal", _ranked_values(agent, ITEMS_PLURAL, own_values))
        b.line(
            "proposal",
            decision.insight
            or f"{agent} keeps what {agent} values most and gives {partner} "
            f"what {partner} seems to want.",
        )
        alloc = decision.proposal
        b.line(
            "proposal",
            f"{agent} will try to get {fraction_phrase(alloc, pot)}.",
        )
        products = " + ".join(
            f"({int(c)}*{fmt_num(v)})" for c, v in zip(alloc, own_values)
        )
        terms = "+".join(fmt_num(int(c) * v) for c, v in zip(alloc, own_values))
        value = sum(c * v for c, v in zip(alloc, own_values))
        b.line(
            "proposal",
            f"Value of new proposal: {products} = {terms} = "
            f"{fmt_num(value)}/{fmt_num(total)}",
        )
        b.add("conclusion", offer_line(agent, alloc))
        final = "propose"
    elif decision.action == "accept":
        b.line("proposal", f"{agent} is happy with this deal.")
        b.add("conclusion", f"{agent}: accept")
        final = "accept"
    else:
        b.line("proposal", f"No deal is better for {agent} than stopping here.")
        b.add("conclusion", f"{agent}: reject")
        final = "reject"
    trace = b.build(final_action=final)
    return trace.text, belief_after


@dataclass
class EpisodeScript:
    """A scripted episode: incoming offers and the agent's decisions."""

    pot: tuple[int, ...]
    own_values: tuple[float, ...]
    turns: list[tuple[tuple[int, ...] | None, TurnDecision]]
    closing: str | None = None  # e.g. "Bob:accept"
    agent: str = "Alice"
    partner: str = "Bob"


def render_episode(script: EpisodeScript) -> str:
    """Replay a scripted episode into the annotated demonstration text."""
    parts = [session_header(script.pot, script.own_values, script.agent, script.partner)]
    belief = tuple(0.0 for _ in script.pot)
    history: list[tuple[str, tuple[int, ...]]] = []
    for incoming, decision in script.turns:
        if incoming is not None:
            history.append((script.partner, tuple(incoming)))
            parts.append(offer_line(script.partner, incoming))
        block, belief = render_turn_reasoning(
            script.pot,
            script.own_values,
            belief,
            history,
            incoming,
            decision,
            script.agent,
            script.partner,
        )
        parts.append(THINK_CUE.format(agent=script.agent) + "\n" + block)
        if decision.action == "propose":
            history.append((script.agent, tuple(decision.proposal)))
    text = "\n\n".join(parts)
    if script.closing:
        text += "\n\n" + script.closing
    return text


def canonical_episode() -> EpisodeScript:
    """The annotated teaching episode (pot 1/4/1, values 4/1/2)."""
    return EpisodeScript(
        pot=(1, 4, 1),
        own_values=(4, 1, 2),
        turns=[
            (
                (0, 3, 1),
                TurnDecision(
                    action="propose",
                    proposal=(1, 4, 0),
                    insight=(
                        "Alice like books more than Bob, and can try to get more "
                        "hats for a higher value. Bob does not like books but "
                        "wants balls."
                    ),
                ),
            ),
            (
                (0, 2, 1),
                TurnDecision(
                    action="propose",
                    proposal=(1, 3, 0),
                    insight=(
                        "Alice can give take one more hat to increase her value. "
                        "Bob likes balls, doesn't want books."
                    ),
                ),
            ),
        ],
        closing="Bob:accept",
    )


def compile_negotiation_turn(
    pot: Sequence[int],
    own_values: Sequence[float],
    history: Sequence[tuple[str, tuple[int, ...]]],
    style_demos: Sequence[str] | None = None,
    agent: str = "Alice",
    partner: str = "Bob",
) -> DemoSet:
    """Prompt for the agent's current turn.

    The eval question is the running session transcript (header plus offer
    lines) ending with the think cue; style demos are full annotated episode
    texts prepended as demonstrations.
    """
    if style_demos is None:
        style_demos = (render_episode(canonical_episode()),)
    header = session_header(pot, own_values, agent, partner)
    parts = [header]
    for actor, alloc in history:
        parts.append(offer_line(actor, alloc))
    parts.append(THINK_CUE.format(agent=agent))
    question = "\n\n".join(parts)
    demos = tuple(
        ("", ReasoningTrace(text=demo, spans=(), final_action="")) for demo in style_demos
    )
    return DemoSet(instruction="", demos=demos, eval_question=question)
