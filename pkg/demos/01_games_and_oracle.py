"""Build matrix games and solve them exactly with the brute-force oracle.

Walks through: payoff tensors, naive (level-0) play, best responses,
iterated level-k reasoning, staged games, hidden states, announced
intentions, and fair-deal enumeration.
"""

from strategos import (
    CommunicationGame,
    GameTree,
    HiddenStateGame,
    Objective,
    best_response,
    best_response_under_belief,
    deal_value,
    hidden_state_posterior,
    infer_truthfulness,
    level0,
    make_game,
    optimal_fair_deal,
    solve_level_k,
    solve_tree,
)

# The descending teaching game: every payoff strictly ordered 8..1.
demo = make_game(
    ["Gopher", "Bob"],
    [["a1", "a2"], ["b1", "b2"]],
    {
        ("a1", "b1"): (8, 7),
        ("a1", "b2"): (6, 5),
        ("a2", "b1"): (4, 3),
        ("a2", "b2"): (2, 1),
    },
)

print("== Naive play ==")
bob = level0(demo, 1, Objective("max", 1))
print(f"Bob's expected values under a uniform Gopher: {bob.values}")
print(f"Bob plays {bob.best[0]}; (7+3)/2 = 5 beats (5+1)/2 = 3")

print("\n== Best response ==")
gopher = best_response(demo, 0, Objective("max", 0), {1: {"b1": 1.0}})
print(f"Gopher against Bob=b1: {gopher.values} -> {gopher.best[0]}")

print("\n== Iterated reasoning on imbalanced matching pennies ==")
pennies = make_game(
    ["Gopher", "Bob"],
    [["a1", "a2"], ["b1", "b2"]],
    {
        ("a1", "b1"): (4, -4),
        ("a1", "b2"): (-1, 1),
        ("a2", "b1"): (-1, 1),
        ("a2", "b2"): (1, -1),
    },
)
objectives = (Objective("max", 0), Objective("max", 1))
for k in range(4):
    choice = solve_level_k(pennies, 0, k, objectives)
    print(f"level {k}: Gopher plays {choice.best[0]} (values {choice.values})")

print("\n== A two-stage game ==")
stage2 = make_game(
    ["Gopher", "Bob"],
    [["a1", "a2"], ["b1", "b2"]],
    {
        ("a1", "b1"): (9, 8),
        ("a1", "b2"): (7, 6),
        ("a2", "b1"): (5, 4),
        ("a2", "b2"): (3, 2),
    },
    mode="sequential",
)
tree = GameTree(demo, {("a2", "b2"): GameTree(stage2)})
print(f"first-stage solution: {solve_tree(tree, 0, objectives).best}")

print("\n== Hidden states ==")
hearts = make_game(
    ["Bob", "Gopher"],
    [["b1", "b2"], ["a1", "a2"]],
    {
        ("b1", "a1"): (8, 7),
        ("b1", "a2"): (6, 5),
        ("b2", "a1"): (4, 3),
        ("b2", "a2"): (2, 1),
    },
)
spades = make_game(
    ["Bob", "Gopher"],
    [["b1", "b2"], ["a1", "a2"]],
    {
        ("b1", "a1"): (2, 1),
        ("b1", "a2"): (4, 3),
        ("b2", "a1"): (6, 5),
        ("b2", "a2"): (8, 7),
    },
)
hs = HiddenStateGame(("hearts", "spades"), (0.5, 0.5), (hearts, spades), 0, 1)
posterior = hidden_state_posterior(hs, "b1")
print(f"after seeing b1 the state belief is {posterior.probs}")
reply = best_response_under_belief(hs, posterior, "b1")
print(f"Gopher best-responds with {reply.best[0]}")

print("\n== Announced intentions ==")
pennies_comm = CommunicationGame(base=pennies, announcer=1, announcement="b1")
verdict = infer_truthfulness(pennies_comm)
print(
    f"Bob says b1 in matching pennies: {verdict.belief}; "
    f"expect {verdict.predicted_plays}, respond {verdict.choice.best[0]}"
)

print("\n== Fair deals ==")
deal = optimal_fair_deal((3, 1, 2), (1, 3, 2), (0, 2, 4), "equality")
print(
    f"pot (3,1,2): give A {deal.allocation} -> values {deal.value_a} vs "
    f"{deal.value_b}, difference {deal.score}"
)
print(f"value check: {deal_value(deal.allocation, (1, 3, 2))} for A")
