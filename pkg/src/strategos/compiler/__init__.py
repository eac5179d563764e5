"""Deterministic chain-of-thought demonstration compiler."""

from .beliefs import (
    comm_question,
    compile_belief_trace,
    compile_truthfulness_trace,
    hidden_question,
)
from .broker import (
    broker_instruction,
    compile_proposal_trace,
    deal_header,
)
from .demosets import build_demo_set, descending_game, tie_game
from .factored import (
    base_answer,
    base_question,
    compile_factored_demos,
    compile_factored_trace,
)
from .matrix import (
    ACTION_MARKER,
    compile_evaluation,
    compile_exhaustive,
    matrix_question,
    tree_question,
)
from .negotiate import (
    EpisodeScript,
    TurnDecision,
    canonical_episode,
    compile_negotiation_turn,
    render_episode,
    render_turn_reasoning,
    session_header,
)
from .traces import DemoSet, ReasoningTrace, Span, TraceBuilder

__all__ = [
    "ACTION_MARKER",
    "DemoSet",
    "EpisodeScript",
    "ReasoningTrace",
    "Span",
    "TraceBuilder",
    "TurnDecision",
    "base_answer",
    "base_question",
    "broker_instruction",
    "build_demo_set",
    "canonical_episode",
    "comm_question",
    "compile_belief_trace",
    "compile_evaluation",
    "compile_exhaustive",
    "compile_factored_demos",
    "compile_factored_trace",
    "compile_negotiation_turn",
    "compile_proposal_trace",
    "compile_truthfulness_trace",
    "deal_header",
    "descending_game",
    "hidden_question",
    "matrix_question",
    "render_episode",
    "render_turn_reasoning",
    "session_header",
    "tie_game",
    "tree_question",
]
