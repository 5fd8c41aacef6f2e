"""Tokenizer for ``.ers`` sources and for mixfix operator names."""

from __future__ import annotations

from dataclasses import dataclass

SPECIALS = set("()[]{},_")
WORD_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789'#$")
LETTERS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")


@dataclass(frozen=True)
class Token:
    kind: str  # word | int | sym | special | dot | eof
    text: str
    start: int
    end: int
    line: int
    col: int
    spaced: bool  # whitespace (or start of input) precedes the token

    def __repr__(self) -> str:
        return f"{self.kind}:{self.text!r}@{self.line}:{self.col}"


class LexError(Exception):
    def __init__(self, message: str, pos: int, line: int, col: int):
        super().__init__(message)
        self.pos, self.line, self.col = pos, line, col


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i, n = 0, len(text)
    line, line_start = 1, 0
    spaced = True

    def emit(kind: str, start: int, end: int) -> None:
        nonlocal spaced
        toks.append(Token(kind, text[start:end], start, end, line, start - line_start + 1, spaced))
        spaced = False

    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            line_start = i + 1
            i += 1
            spaced = True
            continue
        if c.isspace():
            i += 1
            spaced = True
            continue
        if text.startswith("---", i) or text.startswith("***", i):
            while i < n and text[i] != "\n":
                i += 1
            spaced = True
            continue
        if text.startswith("=[", i):
            emit("sym", i, i + 2)
            i += 2
            continue
        if text.startswith("]=>", i):
            emit("sym", i, i + 3)
            i += 3
            continue
        if c in SPECIALS:
            emit("special", i, i + 1)
            i += 1
            continue
        if c == ".":
            emit("dot", i, i + 1)
            i += 1
            continue
        if c in WORD_CHARS:
            j = i + 1
            while j < n:
                d = text[j]
                if d in WORD_CHARS:
                    j += 1
                elif d in "-." and j + 1 < n and text[j - 1] in WORD_CHARS and (
                        text[j + 1] in LETTERS if d == "-" else text[j + 1] in WORD_CHARS):
                    j += 2
                else:
                    break
            word = text[i:j]
            emit("int" if word.isdigit() else "word", i, j)
            i = j
            continue
        j = i + 1
        while j < n:
            d = text[j]
            if d.isspace() or d in SPECIALS or d in WORD_CHARS or d == ".":
                break
            if text.startswith("=[", j) or text.startswith("---", j) or text.startswith("***", j):
                break
            j += 1
        emit("sym", i, j)
        i = j
    toks.append(Token("eof", "", n, n, line, n - line_start + 1, True))
    return toks


def keyword_tokens(chunk: str) -> list[str]:
    """Split one underscore-free piece of an operator name into keywords."""
    return [t.text for t in tokenize(chunk) if t.kind != "eof"]


def name_parts(name: str, arity: int) -> list[str | None]:
    """Mixfix pattern of an operator name: keywords and ``None`` holes.

    Names without underscores use prefix function syntax ``f(_, ..., _)``.
    """
    if "_" not in name:
        parts: list[str | None] = list(keyword_tokens(name))
        if arity:
            parts.append("(")
            for k in range(arity):
                if k:
                    parts.append(",")
                parts.append(None)
            parts.append(")")
        return parts
    parts = []
    buf = ""
    for ch in name:
        if ch == "_":
            if buf:
                parts.extend(keyword_tokens(buf))
                buf = ""
            parts.append(None)
        else:
            buf += ch
    if buf:
        parts.extend(keyword_tokens(buf))
    return parts


def default_prec(parts: list[str | None]) -> int:
    if not parts or None not in parts:
        return 0
    if parts[0] is None:
        return 41
    if parts[-1] is None:
        return 15
    return 0
