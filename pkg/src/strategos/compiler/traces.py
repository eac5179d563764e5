"""Trace and demo-set containers produced by the prompt compiler."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import CompilerError

SPAN_KINDS = ("search", "value", "belief", "proposal", "conclusion")


@dataclass(frozen=True)
class Span:
    kind: str
    start: int
    end: int


@dataclass(frozen=True)
class ReasoningTrace:
    """Compiled demonstration text with structural spans.

    Spans tile the text in order; final_action is the action label the trace
    asserts after the action marker (empty for fragments that conclude
    nothing, e.g. broker traces conclude an allocation instead).
    """

    text: str
    spans: tuple[Span, ...]
    final_action: str = ""

    def __post_init__(self):
        pos = 0
        for span in self.spans:
            if span.kind not in SPAN_KINDS:
                raise CompilerError(f"unknown span kind {span.kind!r}")
            if span.start != pos:
                raise CompilerError(
                    f"span {span.kind} starts at {span.start}, expected {pos}"
                )
            if span.end < span.start:
                raise CompilerError("span ends before it starts")
            pos = span.end
        if self.spans and pos != len(self.text):
            raise CompilerError("spans do not tile the text")

    def span_kinds(self) -> tuple[str, ...]:
        """Span kinds in first-appearance order."""
        seen: list[str] = []
        for span in self.spans:
            if span.kind not in seen:
                seen.append(span.kind)
        return tuple(seen)


class TraceBuilder:
    """Accumulates (kind, text) pieces into a tiled ReasoningTrace."""

    def __init__(self):
        self._pieces: list[tuple[str, str]] = []

    def add(self, kind: str, text: str) -> "TraceBuilder":
        if text:
            self._pieces.append((kind, text))
        return self

    def line(self, kind: str, text: str) -> "TraceBuilder":
        return self.add(kind, text + "\n")

    def build(self, final_action: str = "") -> ReasoningTrace:
        text = "".join(piece for _, piece in self._pieces)
        spans = []
        pos = 0
        for kind, piece in self._pieces:
            end = pos + len(piece)
            if spans and spans[-1].kind == kind:
                spans[-1] = Span(kind, spans[-1].start, end)
            else:
                spans.append(Span(kind, pos, end))
            pos = end
        return ReasoningTrace(
            text=text.rstrip("\n"),
            spans=tuple(_clip_last(spans, len(text.rstrip("\n")))),
            final_action=final_action,
        )


def _clip_last(spans: list[Span], end: int) -> list[Span]:
    out = []
    for span in spans:
        if span.start >= end:
            continue
        out.append(Span(span.kind, span.start, min(span.end, end)))
    return out


@dataclass(frozen=True)
class DemoSet:
    """A full prompt: instruction, worked demonstrations, and the question."""

    instruction: str
    demos: tuple[tuple[str, ReasoningTrace], ...]
    eval_question: str = ""

    def flat_prompt(self, answer_cue: str = "A:") -> str:
        """One prompt string ready for completion."""
        parts = []
        if self.instruction:
            parts.append(self.instruction)
        for question, trace in self.demos:
            parts.append(question + "\n\n" + trace.text)
        if self.eval_question:
            parts.append(self.eval_question + "\n\n" + answer_cue)
        return "\n\n".join(parts)

    def demo_text(self) -> str:
        """Instruction plus worked demos only (the golden-file surface)."""
        parts = []
        if self.instruction:
            parts.append(self.instruction)
        for question, trace in self.demos:
            parts.append(question + "\n\n" + trace.text)
        return "\n\n".join(parts)

    def to_json(self) -> dict:
        return {
            "instruction": self.instruction,
            "demos": [
                {
                    "question": q,
                    "answer": t.text,
                    "final_action": t.final_action,
                    "spans": [[s.kind, s.start, s.end] for s in t.spans],
                }
                for q, t in self.demos
            ],
            "eval_question": self.eval_question,
        }
