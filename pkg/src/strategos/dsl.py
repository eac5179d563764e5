"""Grammar, parser, and runtime for the factored-reasoning tool language.

Three tools: search (expected reward in a fresh sub-context), compare
(argmax over bound values), mean (plain average). The interception loop
watches generated text for call sites, evaluates each call, splices the
"= result" back in, and resumes until the action marker appears.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence, Union

from . import oracle
from .compiler.factored import (
    base_question,
    compile_factored_demos,
    compile_factored_trace,
)
from .compiler.matrix import ACTION_MARKER, matrix_question
from .compiler.traces import ReasoningTrace, TraceBuilder
from .errors import (
    ArityMismatch,
    BudgetExhausted,
    DepthExceeded,
    DivergentBackend,
    DslError,
    MaxToolCallsExceeded,
    ParseError,
    UnknownTool,
)
from .formatting import fmt_num
from .games import Game, Objective
from .gateway import Backend, CompletionRequest, estimate_tokens

TOOLS = ("search", "compare", "mean")

MAX_TOOL_CALLS = 64
MAX_ROUNDS = 256
MAX_CASCADE_LEVELS = 3


# --- AST ------------------------------------------------------------------------


@dataclass(frozen=True)
class KV:
    key: str
    value: "Arg"


@dataclass(frozen=True)
class Tagged:
    tag: str
    items: tuple["Arg", ...]


Arg = Union[str, float, tuple, KV, Tagged]


@dataclass(frozen=True)
class ToolCall:
    name: str
    args: tuple[Arg, ...]


_ARITIES = {"mean": (1, 1), "compare": (3, 3), "search": (4, 5)}


def parse_tool_call(text: str, offset: int = 0) -> tuple[ToolCall, int]:
    """Parse one call starting at offset; returns (AST, consumed length).

    Grammar: call := name "(" args ")"; arg := kv | tagged | ident | number |
    list; list := "[" arg ("," arg)* "]"; kv := ident "=" arg; tagged :=
    ident list. Whitespace is tolerated around commas.
    """
    parser = _Parser(text, offset)
    call = parser.call()
    return call, parser.pos - offset


class _Parser:
    _IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_'-]*")
    _NUMBER = re.compile(r"-?\d+(?:\.\d+)?")

    def __init__(self, text: str, pos: int):
        self.text = text
        self.pos = pos

    def error(self, message: str):
        raise ParseError(message, self.pos)

    def ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def expect(self, ch: str):
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def call(self) -> ToolCall:
        m = self._IDENT.match(self.text, self.pos)
        if not m:
            self.error("expected a tool name")
        name = m.group(0)
        self.pos = m.end()
        if name not in TOOLS:
            raise UnknownTool(f"unknown tool {name!r}")
        self.ws()
        self.expect("(")
        args: list[Arg] = []
        self.ws()
        if self.pos < len(self.text) and self.text[self.pos] != ")":
            args.append(self.arg())
            self.ws()
            while self.pos < len(self.text) and self.text[self.pos] == ",":
                self.pos += 1
                self.ws()
                args.append(self.arg())
                self.ws()
        self.expect(")")
        lo, hi = _ARITIES[name]
        if not lo <= len(args) <= hi:
            raise ArityMismatch(
                f"{name} takes {lo}" + (f"-{hi}" if hi != lo else "") +
                f" arguments, got {len(args)}"
            )
        return ToolCall(name=name, args=tuple(args))

    def arg(self) -> Arg:
        self.ws()
        if self.pos >= len(self.text):
            self.error("unexpected end of input")
        ch = self.text[self.pos]
        if ch == "[":
            return self.list()
        m = self._NUMBER.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return float(m.group(0))
        m = self._IDENT.match(self.text, self.pos)
        if not m:
            self.error(f"unexpected character {ch!r}")
        ident = m.group(0)
        self.pos = m.end()
        self.ws()
        if self.pos < len(self.text) and self.text[self.pos] == "=":
            self.pos += 1
            self.ws()
            return KV(key=ident, value=self.arg())
        if self.pos < len(self.text) and self.text[self.pos] == "[":
            items = self.list()
            return Tagged(tag=ident, items=items)
        return ident

    def list(self) -> tuple:
        self.expect("[")
        items: list[Arg] = []
        self.ws()
        if self.pos < len(self.text) and self.text[self.pos] != "]":
            items.append(self.arg())
            self.ws()
            while self.pos < len(self.text) and self.text[self.pos] == ",":
                self.pos += 1
                self.ws()
                items.append(self.arg())
                self.ws()
        self.expect("]")
        return tuple(items)


def render_call(call: ToolCall) -> str:
    return f"{call.name}({', '.join(_render_arg(a) for a in call.args)})"


def _render_arg(arg: Arg) -> str:
    if isinstance(arg, KV):
        return f"{arg.key}={_render_arg(arg.value)}"
    if isinstance(arg, Tagged):
        return f"{arg.tag}[{', '.join(_render_arg(i) for i in arg.items)}]"
    if isinstance(arg, tuple):
        return f"[{', '.join(_render_arg(i) for i in arg)}]"
    if isinstance(arg, float):
        return fmt_num(arg)
    return str(arg)


def render_result(value) -> str:
    """Result rendering in the demos' "= value" format."""
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(str(v) for v in value) + "]"
    return fmt_num(value)


# --- evaluation --------------------------------------------------------------------


@dataclass
class ToolContext:
    """Bindings for eval_call: the game, objectives, and the search backend."""

    game: Game
    objectives: Sequence[Objective] | None = None
    backend: Backend | None = None  # None -> oracle-computed search
    base_demo_text: str | None = None
    depth: int = 0
    max_depth: int = 2

    def player_index(self, name: str) -> int:
        lowered = name.lower()
        for i, p in enumerate(self.game.players):
            if p.lower() == lowered:
                return i
        raise DslError(f"unknown player {name!r}")

    def objective_for(self, kind: str, owner: int) -> Objective:
        if self.objectives is not None and kind == self.objectives[owner].kind:
            return self.objectives[owner]
        return Objective(kind, owner=owner)


def eval_call(call: ToolCall, context: ToolContext):
    """Evaluate one tool call; returns a number or a list of action labels."""
    if call.name == "mean":
        xs = call.args[0]
        if not isinstance(xs, tuple) or not xs:
            raise ArityMismatch("mean takes one nonempty list of numbers")
        nums = []
        for x in xs:
            if not isinstance(x, float):
                raise DslError(f"mean expects numbers, got {x!r}")
            nums.append(x)
        return sum(nums) / len(nums)

    if call.name == "compare":
        agent, objective, pairs = call.args
        if not isinstance(pairs, tuple):
            raise ArityMismatch("compare takes a list of action=value pairs")
        if not pairs:
            raise DslError("compare over an empty list cannot conclude anything")
        values: dict[str, float] = {}
        for item in pairs:
            if not isinstance(item, KV) or not isinstance(item.value, float):
                raise DslError(f"compare expects action=value pairs, got {item!r}")
            values[item.key] = item.value
        if isinstance(objective, str) and objective.lower() == "min":
            return list(oracle.argmin_set(values))
        return list(oracle.argmax_set(values))

    # search(agent, other_agents, objective, action, other_actions?)
    agent_name, others, objective_name, action = call.args[:4]
    restriction_arg = call.args[4] if len(call.args) == 5 else None
    agent = context.player_index(str(agent_name))
    action = str(action)
    kind = str(objective_name)
    if kind not in Objective.KINDS and kind != "min":
        raise DslError(f"unknown objective {kind!r}")
    objective = context.objective_for(kind, agent)
    restriction: dict[int, tuple[str, ...]] = {}
    if restriction_arg is not None:
        if not isinstance(restriction_arg, tuple):
            raise DslError("other_actions must be a bracketed list")
        for item in restriction_arg:
            if not isinstance(item, Tagged):
                raise DslError(f"other_actions entries look like bob[b1], got {item!r}")
            idx = context.player_index(item.tag)
            restriction[idx] = tuple(str(a) for a in item.items)

    if context.backend is None:
        dists = {}
        for opp in context.game.opponents(agent):
            allowed = restriction.get(opp, context.game.actions[opp])
            dists[opp] = {a: 1.0 / len(allowed) for a in allowed}
        choice = oracle.best_response(context.game, agent, objective, dists)
        return choice.values[action]

    # dispatch to a fresh base-case context; no nested tool calls allowed
    if context.depth >= context.max_depth:
        raise DepthExceeded(f"sub-context depth {context.depth} at the cap")
    demo_text = context.base_demo_text
    if demo_text is None:
        demo_text = compile_factored_demos("base").demo_text()
    question = base_question(context.game, agent, action, restriction, objective)
    prompt = demo_text + "\n\n" + question + "\n\nA:"
    completion = context.backend.complete(
        CompletionRequest(prompt=prompt, stop=("\nQ:",), max_tokens=512)
    )
    m = re.search(r"Answer:\s*(-?\d+(?:\.\d+)?)", completion)
    if not m:
        raise DivergentBackend(
            f"sub-context produced no numeric answer: {completion[-80:]!r}"
        )
    return float(m.group(1))


# --- interception loop ----------------------------------------------------------------


_CALL_SITE = re.compile(r"\b(search|compare|mean)\s*\(")


def find_call_site(text: str) -> tuple[int, ToolCall, int] | None:
    """First parseable call site in text: (start, call, consumed)."""
    for m in _CALL_SITE.finditer(text):
        try:
            call, consumed = parse_tool_call(text, m.start())
        except (ParseError, UnknownTool, ArityMismatch):
            continue
        return m.start(), call, consumed
    return None


def intercept_loop(
    prompt: str,
    backend: Backend,
    context: ToolContext,
    max_tool_calls: int = MAX_TOOL_CALLS,
    token_budget: int | None = None,
    action_marker: str = ACTION_MARKER,
) -> ReasoningTrace:
    """Generate, intercept tool calls, splice results, repeat to the marker.

    The backend's own guess after a call site is discarded: the text is cut
    at the end of the call and the evaluated "= result" is spliced in before
    resuming. Terminates at the action marker, the call cap, or the budget.
    """
    builder = TraceBuilder()
    appended = ""
    calls = 0
    if action_marker in prompt.rsplit("Q:", 1)[-1]:
        # the prompt already concludes; zero iterations
        return builder.build(final_action="")
    for _ in range(MAX_ROUNDS):
        if token_budget is not None and estimate_tokens(prompt + appended) > token_budget:
            raise BudgetExhausted(
                f"prompt plus trace exceeds the {token_budget}-token budget"
            )
        completion = backend.complete(
            CompletionRequest(prompt=prompt + appended, stop=("\nQ:",))
        )
        if not completion:
            raise BudgetExhausted("backend returned an empty completion")
        site = find_call_site(completion)
        if site is None:
            appended += completion
            builder.add("search", completion)
            if action_marker in completion:
                trace = builder.build()
                tail = appended[appended.rindex(action_marker) + len(action_marker):]
                final = tail.strip().splitlines()[0].strip().rstrip(".") if tail.strip() else ""
                return ReasoningTrace(
                    text=trace.text, spans=trace.spans, final_action=final
                )
            continue
        start, call, consumed = site
        calls += 1
        if calls > max_tool_calls:
            raise MaxToolCallsExceeded(f"more than {max_tool_calls} tool calls")
        kept = completion[: start + consumed]
        appended += kept
        builder.add("search", kept)
        sub = ToolContext(
            game=context.game,
            objectives=context.objectives,
            backend=context.backend,
            base_demo_text=context.base_demo_text,
            depth=context.depth + 1,
            max_depth=context.max_depth,
        )
        result = eval_call(call, sub)
        splice = f" = {render_result(result)}."
        appended += splice
        builder.add("value", splice)
    raise BudgetExhausted(f"no action marker after {MAX_ROUNDS} rounds")


# --- level-n cascade --------------------------------------------------------------------


@dataclass(frozen=True)
class CascadeConfig:
    levels: int = 1
    backends: tuple[Backend | None, ...] = (None,)  # None -> oracle search
    max_levels: int = MAX_CASCADE_LEVELS

    def __post_init__(self):
        if self.levels < 1:
            raise DslError("a cascade needs at least one level")
        if self.levels > self.max_levels:
            raise DslError(
                f"levels {self.levels} above the configured maximum {self.max_levels}"
            )
        if len(self.backends) not in (1, self.levels):
            raise DslError("provide one backend or one per level")

    def backend_for(self, level: int) -> Backend | None:
        if len(self.backends) == 1:
            return self.backends[0]
        return self.backends[level - 1]


CASCADE_PREAMBLE = (
    "I thought through my opponent's actions and chose action {prev}. But if "
    "my opponent knows that I thought through their actions and that I will "
    "play {prev}, then what action should {player} play?"
)


def cascade_question(game: Game, prev_action: str, player: int = 0) -> str:
    base = matrix_question(game, opponent_model=True, pick_from=False)
    question_start = base.rindex("What action should")
    acts = list(game.actions[player])
    pick = f" Pick from {', '.join(acts)}, {' or '.join(acts)}?"
    return base[:question_start] + CASCADE_PREAMBLE.format(
        prev=prev_action, player=game.players[player]
    ) + pick


def compile_cascade_trace(
    game: Game,
    prev_action: str,
    player: int = 0,
    objectives: Sequence[Objective] | None = None,
) -> ReasoningTrace:
    """Oracle-filled factored trace for one higher cascade level."""
    if objectives is None:
        objectives = tuple(Objective("max", i) for i in range(game.n_players))
    opp = 1 - player
    me, other = game.players[player], game.players[opp]
    b = TraceBuilder()
    b.line(
        "search",
        f"A:{me} said {me} will play {prev_action}. Let's reason about what "
        f"{other} does knowing that.",
    )
    reply = oracle.best_response(
        game, opp, objectives[opp], {player: {prev_action: 1.0}}
    )
    for action in game.actions[opp]:
        b.line(
            "search",
            f"If {other} plays {action}, exepected reward for {action} is "
            f"search({other}, {me}, {objectives[opp].kind}, {action}, "
            f"[{me.lower()}[{prev_action}]]) = {fmt_num(reply.values[action])}.",
        )
    kv = ", ".join(f"{a}={fmt_num(reply.values[a])}" for a in game.actions[opp])
    b.line(
        "value",
        f"So, {other} will play compare({other}, {objectives[opp].kind}, [{kv}])"
        f" = [{','.join(reply.best)}].",
    )
    b.line("search", f"Now let's reason for {me}.")
    dist = {opp: reply.uniform()}
    mine = oracle.best_response(game, player, objectives[player], dist)
    plays = " or ".join(reply.best)
    b.line(
        "search",
        f"As {other} plays {plays} we calculate the expected reward for each action,",
    )
    restriction = f"[{other.lower()}[{', '.join(reply.best)}]]"
    for action in game.actions[player]:
        b.line(
            "search",
            f"If {me} plays {action}, exepected reward for {action} is "
            f"search({me}, {other}, {objectives[player].kind}, {action}, "
            f"{restriction}) = {fmt_num(mine.values[action])}.",
        )
    kv = ", ".join(f"{a}={fmt_num(mine.values[a])}" for a in game.actions[player])
    b.line(
        "value",
        f"So, {me} will play compare({me}, {objectives[player].kind}, [{kv}]) = "
        f"[{','.join(mine.best)}].",
    )
    final = mine.best[0]
    b.add("conclusion", f"{me}{ACTION_MARKER}{final}.")
    return b.build(final_action=final)


def cascade_demos(level: int) -> str:
    """Teaching text for one cascade level (level 1 is the plain factored set)."""
    from .compiler.demosets import descending_game, tie_game

    if level == 1:
        return compile_factored_demos("recursive").demo_text()
    parts = [compile_factored_demos("recursive").instruction]
    for game in (descending_game(), tie_game()):
        prev = oracle.solve_level_k(
            game, 0, level - 1, (Objective("max", 0), Objective("max", 1))
        ).best[0]
        parts.append(
            cascade_question(game, prev)
            + "\n\n"
            + compile_cascade_trace(game, prev).text
        )
    return "\n\n".join(parts)


def run_cascade(
    game: Game,
    config: CascadeConfig,
    objectives: Sequence[Objective] | None = None,
    player: int = 0,
) -> str:
    """Chain of contexts: each level re-solves given the previous prediction.

    Level 1 solves against a naive opponent; level k embeds the level k-1
    action and best-responds to the opponent's reply to it. A None backend
    for a level means the full interception loop still runs, driven by a
    scripted-oracle completion of the level's compiled trace. Returns the
    top level's predicted action.
    """
    from .gateway import ScriptedOracleBackend

    if objectives is None:
        objectives = tuple(Objective("max", i) for i in range(game.n_players))
    action = ""
    for level in range(1, config.levels + 1):
        backend = config.backend_for(level)
        if level == 1:
            question = matrix_question(
                game, objectives, opponent_model=True, pick_from=True
            )
        else:
            question = cascade_question(game, action, player)
        if backend is None:
            if level == 1:
                trace = compile_factored_trace(game, player, objectives)
            else:
                trace = compile_cascade_trace(game, action, player, objectives)
            backend = ScriptedOracleBackend()
            backend.register(question, trace.text)
        prompt = cascade_demos(level) + "\n\n" + question + "\n\nA:"
        context = ToolContext(game=game, objectives=tuple(objectives), backend=None)
        trace = intercept_loop(prompt, backend, context)
        action = trace.final_action
    return action
