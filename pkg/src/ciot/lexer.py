"""Tokenizer for the component-model DSL.

Produces a flat token list ending in an end-of-input token. Each token keeps
its raw source text, so joining token texts reproduces the input modulo
whitespace and ``//`` comments.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .diagnostics import E_LEX, CiotError, SourceSpan, error


class TokenKind(Enum):
    IDENT = "identifier"
    KEYWORD = "keyword"
    INT = "int literal"
    FLOAT = "float literal"
    STRING = "string literal"
    PUNCT = "punctuation"
    EOI = "end of input"


KEYWORDS = frozenset(
    {
        "payload",
        "interface",
        "component",
        "op",
        "port",
        "provides",
        "requires",
        "property",
        "instance",
        "connect",
        "event",
        "action",
        "incoming",
        "outgoing",
        "generic",
        "send",
        "receive",
        "statemachine",
        "initial",
        "state",
        "entry",
        "exit",
        "continuous",
        "transition",
        "when",
        "self",
        "and",
        "or",
        "not",
        "true",
        "false",
        "int",
        "float",
        "bool",
        "string",
    }
)

# Names that keep their meaning inside expressions and therefore can never be
# used as member names (payload fields, properties, assignment targets).
EXPR_RESERVED = frozenset({"and", "or", "not", "true", "false", "payload"})

# Longest first so ":=", "->", "--", and the two-char comparisons win.
_PUNCT = (":=", "->", "--", "==", "!=", "<=", ">=", "{", "}", "(", ")", "[", "]", ":", ";", ",", ".", "<", ">", "=")


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    column: int

    @property
    def span(self) -> SourceSpan:
        end_col = self.column + max(len(self.text), 1) - 1
        return SourceSpan(self.line, self.column, self.line, end_col)

    def describe(self) -> str:
        if self.kind is TokenKind.EOI:
            return "end of input"
        return f"{self.kind.value} {self.text!r}"


def tokenize(source: str, file: str | None = None) -> list[Token]:
    """Tokenize ``source``; raises CiotError (E_LEX) on the first bad character."""
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)

    def fail(message: str, at_line: int, at_col: int) -> CiotError:
        diag = error(E_LEX, message, SourceSpan.point(at_line, at_col), file)
        return CiotError(E_LEX, [diag])

    while i < n:
        c = source[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if c == '"':
            start_line, start_col = line, col
            j = i + 1
            closed = False
            while j < n and source[j] != "\n":
                if source[j] == "\\":
                    if j + 1 < n and source[j + 1] != "\n":
                        j += 2
                        continue
                    break
                if source[j] == '"':
                    closed = True
                    break
                j += 1
            if not closed:
                raise fail("unterminated string literal", start_line, start_col)
            tokens.append(Token(TokenKind.STRING, source[i : j + 1], start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            is_float = False
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                is_float = True
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            text = source[i:j]
            kind = TokenKind.FLOAT if is_float else TokenKind.INT
            tokens.append(Token(kind, text, line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.IDENT
            tokens.append(Token(kind, text, line, col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if source.startswith(p, i):
                tokens.append(Token(TokenKind.PUNCT, p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise fail(f"unexpected character {c!r}", line, col)

    tokens.append(Token(TokenKind.EOI, "", line, col))
    return tokens


def decode_string(token: Token) -> str:
    """Decode a STRING token's raw text (strip quotes, resolve escapes)."""
    raw = token.text[1:-1]
    out: list[str] = []
    i = 0
    while i < len(raw):
        c = raw[i]
        if c == "\\" and i + 1 < len(raw):
            nxt = raw[i + 1]
            mapped = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(nxt)
            if mapped is None:
                out.append(nxt)
            else:
                out.append(mapped)
            i += 2
            continue
        out.append(c)
        i += 1
    return "".join(out)
