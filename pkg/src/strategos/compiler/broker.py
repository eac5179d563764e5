"""Propose/evaluate/revise traces for the fair-broker task.

Proposals come from a fixed documented heuristic (or a scripted sequence for
the canonical demonstration); every value line re-checks against deal_value.
"""

from __future__ import annotations

from typing import Sequence

from .. import oracle
from ..errors import NumTriesZero
from ..formatting import fmt_num
from .traces import ReasoningTrace, TraceBuilder

ITEMS = ("book", "hat", "ball")
ITEMS_PLURAL = ("books", "hats", "balls")

_ORDINALS = (
    "first", "second", "third", "fourth", "fifth",
    "sixth", "seventh", "eighth", "ninth", "tenth",
)

EQUALITY_INSTRUCTION = (
    "Alice and Bob are trying to split books, hats and balls amongst "
    "themselves. The value of the books, hat and balls changes across "
    "scenarios. The items have a different value for Alice and Bob. Propose a "
    "deal where the Alice and Bob receive equal/ similar rewards. Try "
    "proposing {n} times at most."
)

RAWLSIAN_INSTRUCTION = (
    "Alice and Bob are trying to split books, hats and balls amongst "
    "themselves. The value of the books, hat and balls changes across "
    "scenarios. The items have a different value for Alice and Bob. Propose a "
    "deal where the player with the smaller reward gets as much as possible. "
    "Try proposing {n} times at most."
)


def ordinal(k: int) -> str:
    return _ORDINALS[k - 1] if k <= len(_ORDINALS) else f"number {k}"


def broker_instruction(fairness: str, num_tries: int = 3) -> str:
    template = EQUALITY_INSTRUCTION if fairness == "equality" else RAWLSIAN_INSTRUCTION
    return template.format(n=num_tries)


def deal_header(pot, values_a, values_b, fairness: str) -> str:
    lines = ["## New Deal", "items available:"]
    lines += [f"{name}={int(c)}" for name, c in zip(ITEMS, pot)]
    lines.append(_values_line("Bob", values_b))
    lines.append(_values_line("Alice", values_a))
    if fairness == "equality":
        lines.append("Q: What is a proposal that gives similar payoffs?")
    else:
        lines.append("Q: What is a proposal that maximizes the minimum payoff?")
    return "\n".join(lines)


def _values_line(who: str, values) -> str:
    pairs = " ".join(f"{n}={fmt_num(v)}" for n, v in zip(ITEMS, values))
    return f"{who}'s values: {pairs}"


def _preference_line(who: str, values) -> str:
    order = sorted(range(len(ITEMS)), key=lambda i: (-values[i], i))
    ranked = " > ".join(f"{ITEMS[i]}:{fmt_num(values[i])}" for i in order)
    return f"{who} values: {ranked}"


def _gets_clause(alloc) -> str:
    return ", ".join(
        f"{int(c)} {p}" for c, p in zip(alloc, ITEMS_PLURAL)
    )


def _value_product(alloc, values) -> tuple[str, str, float]:
    products = " + ".join(
        f"({int(c)}*{fmt_num(v)})" for c, v in zip(alloc, values)
    )
    terms = "+".join(fmt_num(int(c) * v) for c, v in zip(alloc, values))
    total = oracle.deal_value(alloc, values)
    return products, terms, total


def _totals(pot, values_a, values_b) -> tuple[float, float]:
    return (
        oracle.deal_value(pot, values_a),
        oracle.deal_value(pot, values_b),
    )


def first_proposal(values_a, values_b, pot) -> tuple[int, ...]:
    """Each item type goes wholly to whoever values it more (ties to Alice)."""
    return tuple(
        int(c) if va >= vb else 0 for c, va, vb in zip(pot, values_a, values_b)
    )


def next_proposal(prev, pot, values_a, values_b, fairness, seen) -> tuple[int, ...]:
    """Best unseen single-unit transfer or one-for-one swap; else repeat prev."""
    candidates = []
    for i in range(len(pot)):
        for delta in (1, -1):
            alloc = list(prev)
            alloc[i] += delta
            if not 0 <= alloc[i] <= pot[i]:
                continue
            candidates.append(tuple(alloc))
    for i in range(len(pot)):
        for j in range(len(pot)):
            if i == j:
                continue
            alloc = list(prev)
            alloc[i] -= 1
            alloc[j] += 1
            if 0 <= alloc[i] and alloc[j] <= pot[j]:
                candidates.append(tuple(alloc))
    fresh = [c for c in candidates if c not in seen]
    pool = fresh or candidates
    if not pool:
        return tuple(prev)

    def score(alloc):
        va = oracle.deal_value(alloc, values_a)
        vb = oracle.deal_value([p - a for p, a in zip(pot, alloc)], values_b)
        return abs(va - vb) if fairness == "equality" else -min(va, vb)

    best = min(pool, key=lambda c: (score(c), c))
    if score(best) >= score(tuple(prev)) and fresh == []:
        return tuple(prev)
    return best


def compile_proposal_trace(
    pot: Sequence[int],
    values: tuple[Sequence[float], Sequence[float]],
    fairness: str = "equality",
    num_tries: int = 3,
    scripted: Sequence[Sequence[int]] | None = None,
) -> ReasoningTrace:
    """Exactly num_tries proposal blocks, a summary, and a propose: line.

    values is (Alice's, Bob's). scripted overrides the built-in proposal
    heuristic with explicit allocations for Alice.
    """
    if num_tries < 1:
        raise NumTriesZero("at least one proposal try is required")
    values_a, values_b = values
    pot = tuple(int(c) for c in pot)
    total_a, total_b = _totals(pot, values_a, values_b)
    b = TraceBuilder()

    proposals: list[tuple[int, ...]] = []
    results: list[tuple[float, float]] = []
    for k in range(1, num_tries + 1):
        if scripted is not None:
            alloc = tuple(int(c) for c in scripted[k - 1])
        elif k == 1:
            alloc = first_proposal(values_a, values_b, pot)
        else:
            alloc = next_proposal(
                proposals[-1], pot, values_a, values_b, fairness, set(proposals)
            )
        header = f"Try {k}/{num_tries}." + (" last try." if k == num_tries else "")
        b.line("proposal", header)
        b.line(
            "proposal",
            "items: " + ", ".join(f"{n}={c}" for n, c in zip(ITEMS, pot)),
        )
        b.line("proposal", _preference_line("Bob", values_b))
        b.line("proposal", _preference_line("Alice", values_a))
        if k == 1:
            goal = (
                "In a proposal with similar payoffs"
                if fairness == "equality"
                else "In a proposal that helps the worse-off player"
            )
            b.line("proposal", f"{goal}, Alice gets {_gets_clause(alloc)}.")
        else:
            prev, (pva, pvb) = proposals[-1], results[-1]
            b.line(
                "proposal",
                f"old proposal: Alice gets {_gets_clause(prev)}. Alice gets "
                f"{fmt_num(pva)}/{fmt_num(total_a)} and Bob gets "
                f"{fmt_num(pvb)}/{fmt_num(total_b)}.",
            )
            b.line("proposal", f"new proposal: Alice gets {_gets_clause(alloc)}.")
        remainder = tuple(p - a for p, a in zip(pot, alloc))
        subtraction = ", ".join(
            f"({p}-{a})={p - a} {name}"
            for p, a, name in zip(pot, alloc, ITEMS_PLURAL)
        )
        b.line("proposal", f"So, Bob gets {subtraction}.")
        va_products, va_terms, va = _value_product(alloc, values_a)
        vb_products, vb_terms, vb = _value_product(remainder, values_b)
        b.line(
            "proposal",
            f"Value of proposal for Alice: {va_products} = {va_terms} = "
            f"{fmt_num(va)}/{fmt_num(total_a)}",
        )
        b.line(
            "proposal",
            f"Value of proposal for Bob: {vb_products} = {vb_terms} = "
            f"{fmt_num(vb)}/{fmt_num(total_b)}",
        )
        b.line("proposal", _verdict_line(va, vb, total_a, total_b, fairness))
        if k < num_tries:
            b.line("proposal", "So, let's try again.")
        proposals.append(alloc)
        results.append((va, vb))

    b.line("value", "Summary of tries:")
    for k, (alloc, (va, vb)) in enumerate(zip(proposals, results), start=1):
        b.line("value", f"Try {k}/{num_tries}: " + _outcome_clause(va, vb, total_a, total_b, fairness))
    scores = [
        abs(va - vb) if fairness == "equality" else min(va, vb)
        for va, vb in results
    ]
    if fairness == "equality":
        best_idx = min(range(len(scores)), key=lambda i: (scores[i], i))
    else:
        best_idx = max(range(len(scores)), key=lambda i: (scores[i], -i))
    b.line("value", f"So, the best deal is the {ordinal(best_idx + 1)} try.")
    chosen = proposals[best_idx]
    if fairness == "equality":
        b.line(
            "value",
            f"Minimum difference is {fmt_num(scores[best_idx])}. So, we go with "
            f"try {best_idx + 1}/{num_tries}. Alice gets {_gets_clause(chosen)}.",
        )
    else:
        b.line(
            "value",
            f"Maximum minimum payoff is {fmt_num(scores[best_idx])}. So, we go "
            f"with try {best_idx + 1}/{num_tries}. Alice gets {_gets_clause(chosen)}.",
        )
    final = " ".join(f"{n}={c}" for n, c in zip(ITEMS, chosen))
    b.add("conclusion", f"propose: {final}")
    return b.build(final_action=final)


def _outcome_clause(va, vb, total_a, total_b, fairness) -> str:
    gets = (
        f"Alice gets {fmt_num(va)}/{fmt_num(total_a)} and Bob gets "
        f"{fmt_num(vb)}/{fmt_num(total_b)}."
    )
    if fairness == "equality":
        hi, lo = (va, vb) if va >= vb else (vb, va)
        return gets + (
            f" Difference in payoffs {fmt_num(hi)}-{fmt_num(lo)} = {fmt_num(hi - lo)}."
        )
    return gets + f" Minimum payoff is {fmt_num(min(va, vb))}."


def _verdict_line(va, vb, total_a, total_b, fairness) -> str:
    clause = _outcome_clause(va, vb, total_a, total_b, fairness)
    if fairness == "equality":
        good = abs(va - vb) <= 2
    else:
        good = min(va, vb) >= 0.4 * min(total_a, total_b)
    if good:
        return clause + " This is a good deal but we might be able to do better."
    return clause + " This is a bad deal as payoffs are not close."
