"""Number and text rendering rules shared by the trace compiler and the DSL.

The demonstration prompts are matched byte-for-byte by golden tests, so every
numeric string in a trace funnels through fmt_num: integers print without a
decimal point, everything else in minimal decimal form.
"""

from __future__ import annotations

import re

_TRAILING_ZEROS = re.compile(r"(\.\d*?)0+$")


def fmt_num(x: float) -> str:
    """Render a number the way the demonstration prompts write them."""
    f = float(x)
    if f == int(f) and abs(f) < 1e15:
        return str(int(f))
    s = repr(f)
    if "e" in s or "E" in s:
        s = f"{f:.12f}"
        m = _TRAILING_ZEROS.search(s)
        if m:
            s = s[: m.start()] + m.group(1).rstrip("0").rstrip(".")
    return s


def fmt_sum(terms: list) -> str:
    """"7+3" style sum chain (negative terms keep their sign: "7+-3")."""
    return "+".join(fmt_num(t) for t in terms)


def normalize_ws(text: str) -> str:
    """Whitespace-normalize for golden comparison.

    Collapses runs of spaces/tabs to one space, strips line edges, and drops
    blank lines. Two texts that differ only in spacing or blank-line layout
    normalize to the same string.
    """
    lines = []
    for raw in text.splitlines():
        line = re.sub(r"[ \t]+", " ", raw).strip()
        if line:
            lines.append(line)
    return "\n".join(lines)


# An "arithmetic chain" is e.g. "(7+3)/2 = 10/2 = 5" or "8-6 = 2": segments of
# bare arithmetic joined by "=". The lookbehind rejects identifier bindings
# like "a1=8" or "gr11=8". Segments may not start with an operator other
# than "-" or "(" so ")" left over from ignored text never opens a chain.
_CHAIN = re.compile(
    r"(?<![A-Za-z0-9_./*+)-])"
    r"((?:[-(]|\d)[0-9()+\-*/. ]*?(?:\s*=\s*(?:[-(]|\d)[0-9()+\-*/. ]*?)+)"
    r"(?=[^0-9()+\-*/. =]|$)"
)

_SCORE = re.compile(r"^(\d+(?:\.\d+)?)/(\d+)\.?$")


def check_arithmetic(text: str, tol: float = 1e-9) -> list[str]:
    """Re-evaluate every "x+y... = z" substring of a trace.

    Returns the offending chains (empty when the trace is honest). Each "="
    link in a chain must hold; a trailing "5/10" style segment is also
    accepted as score-out-of-total notation when its numerator matches.
    """
    bad = []
    for m in _CHAIN.finditer(text):
        chain = m.group(1)
        segments = [s.strip() for s in chain.split("=")]
        values = []
        for seg in segments:
            seg = seg.strip().rstrip(".").strip()
            if not seg:
                values.append(None)
                continue
            try:
                values.append(_eval_arith(seg))
            except (ValueError, ZeroDivisionError, IndexError):
                values.append(None)
        ok = True
        prev = values[0]
        for seg, val in zip(segments[1:], values[1:]):
            if prev is None or val is None:
                ok = False
                break
            if abs(prev - val) <= tol:
                prev = val
                continue
            score = _SCORE.match(seg.strip())
            if score and abs(prev - float(score.group(1))) <= tol:
                continue  # score notation: "... = 5/10" with running value 5
            ok = False
            break
        if not ok:
            bad.append(chain.strip())
    return bad


def _eval_arith(expr: str) -> float:
    """Evaluate +-*/ arithmetic with parentheses, no names, no eval()."""
    tokens = _tokenize(expr)
    value, pos = _parse_sum(tokens, 0)
    if pos != len(tokens):
        raise ValueError(f"trailing tokens in {expr!r}")
    return value


def _tokenize(expr: str) -> list[str]:
    tokens: list[str] = []
    i = 0
    n = len(expr)
    while i < n:
        c = expr[i]
        if c.isspace():
            i += 1
        elif c in "+*/()":
            tokens.append(c)
            i += 1
        elif c == "-":
            # unary minus only at expression start or after an operator
            if not tokens or tokens[-1] in "+-*/(":
                j = i + 1
                while j < n and (expr[j].isdigit() or expr[j] == "."):
                    j += 1
                if j == i + 1:
                    raise ValueError(f"dangling '-' in {expr!r}")
                tokens.append(expr[i:j])
                i = j
            else:
                tokens.append(c)
                i += 1
        elif c.isdigit() or c == ".":
            j = i
            while j < n and (expr[j].isdigit() or expr[j] == "."):
                j += 1
            tokens.append(expr[i:j])
            i = j
        else:
            raise ValueError(f"bad character {c!r} in {expr!r}")
    return tokens


def _parse_sum(tokens: list[str], pos: int) -> tuple[float, int]:
    value, pos = _parse_product(tokens, pos)
    while pos < len(tokens) and tokens[pos] in "+-":
        op = tokens[pos]
        rhs, pos = _parse_product(tokens, pos + 1)
        value = value + rhs if op == "+" else value - rhs
    return value, pos


def _parse_product(tokens: list[str], pos: int) -> tuple[float, int]:
    value, pos = _parse_atom(tokens, pos)
    while pos < len(tokens) and tokens[pos] in "*/":
        op = tokens[pos]
        rhs, pos = _parse_atom(tokens, pos + 1)
        value = value * rhs if op == "*" else value / rhs
    return value, pos


def _parse_atom(tokens: list[str], pos: int) -> tuple[float, int]:
    if pos >= len(tokens):
        raise ValueError("unexpected end of expression")
    tok = tokens[pos]
    if tok == "(":
        value, pos = _parse_sum(tokens, pos + 1)
        if pos >= len(tokens) or tokens[pos] != ")":
            raise ValueError("unbalanced parenthesis")
        return value, pos + 1
    return float(tok), pos + 1
