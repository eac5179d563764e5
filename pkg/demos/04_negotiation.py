"""Deal-or-No-Deal: sessions, belief tracking, the agent, and the broker.

Replays the canonical annotated episode (pot 1 book / 4 hats / 1 ball),
shows the additive belief arithmetic, runs the deterministic agent, and
brokers fair deals over the bundled context set.
"""

from strategos.compiler import canonical_episode, render_episode
from strategos.harness import random_proposal_gap, score_fairness
from strategos.negotiation import (
    Action,
    NegotiationAgent,
    NegotiationSession,
    PlayerContext,
    Pot,
    ValueBelief,
    broker_propose,
    bundled_contexts_path,
    load_contexts,
    update_belief,
)

print("== The annotated teaching episode ==")
print(render_episode(canonical_episode()))

print("\n== Belief arithmetic ==")
pot = Pot((1, 4, 1))
belief = ValueBelief()
for offer in ((0, 3, 1), (0, 2, 1)):
    belief = update_belief(belief, offer, pot)
    print(f"after {offer}: scores {belief.scores}")

print("\n== A live session against the deterministic agent ==")
session = NegotiationSession(
    pot=pot,
    contexts={"Alice": PlayerContext((4, 1, 2)), "Bob": PlayerContext((0, 2, 4))},
    first="Bob",
)
alice = NegotiationAgent("Alice", session)
session.apply("Bob", Action.propose((0, 3, 1)))
print(f"Bob asks for (0,3,1); Alice counters {alice.take_turn().allocation}")
session.apply("Bob", Action.propose((0, 2, 1)))
print(f"Bob asks for (0,2,1); Alice counters {alice.take_turn().allocation}")
session.apply("Bob", Action.accept())
print(f"Bob accepts: rewards {session.rewards}")
print("event log:")
print(session.event_log())

print("\n== The fair broker over the bundled 100 contexts ==")
contexts = load_contexts(bundled_contexts_path())
print(f"{len(contexts)} contexts loaded from {bundled_contexts_path().name}")
for fairness in ("equality", "rawlsian"):
    proposals = [
        broker_propose(pot_, va, vb, fairness).allocation
        for pot_, va, vb in contexts[:25]
    ]
    gap = score_fairness(proposals, contexts[:25], fairness)
    random_gap = random_proposal_gap(contexts[:25], fairness, draws=200, seed=0)
    print(f"{fairness:9s}: broker gap {gap:.2f}, random-proposal gap {random_gap:.2f}")
