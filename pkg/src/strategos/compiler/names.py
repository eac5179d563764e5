"""Naming conventions the demonstration templates rely on.

Default cast: Gopher vs Bob for matrix games, Alice vs Bob for negotiation.
Reward symbols derive from player names (Gopher -> gr, Bob -> br) and rule
indices concatenate 1-based action indices (gr21 = Gopher's 2nd, Bob's 1st).
"""

from __future__ import annotations

_POSSESSIVE = {"Bob": "his", "Gopher": "its", "Alice": "her"}
_SUBJECT = {"Bob": "he", "Gopher": "it", "Alice": "she"}


def possessive(name: str) -> str:
    return _POSSESSIVE.get(name, "their")


def subject(name: str) -> str:
    return _SUBJECT.get(name, "they")


def reward_symbols(players: tuple[str, ...]) -> tuple[str, ...]:
    """Per-player reward symbol prefixes, unique within the game."""
    initials = [p[0].lower() + "r" for p in players]
    if len(set(initials)) == len(initials):
        return tuple(initials)
    return tuple(f"p{i + 1}r" for i in range(len(players)))


def idx_str(indices: tuple[int, ...]) -> str:
    """0-based action indices -> the "11", "21" rule subscript."""
    return "".join(str(i + 1) for i in indices)


def join_names(names: list[str], sep: str = "and") -> str:
    if len(names) == 1:
        return names[0]
    return ", ".join(names[:-1]) + f" {sep} " + names[-1]
