"""Tokenizer for Petit source and test files."""

from __future__ import annotations

from dataclasses import dataclass

KEYWORDS = frozenset(
    {
        "type",
        "fn",
        "let",
        "if",
        "else",
        "while",
        "return",
        "test",
        "assert",
        "true",
        "false",
        "int",
        "float",
        "bool",
        "str",
        "char",
    }
)

# Longest-match first.
PUNCT = (
    "->",
    "==",
    "!=",
    "<=",
    ">=",
    "&&",
    "||",
    "(",
    ")",
    "{",
    "}",
    ",",
    ";",
    ":",
    ".",
    "=",
    "<",
    ">",
    "+",
    "-",
    "*",
    "/",
    "%",
    "!",
)

# Token kinds
IDENT = "ident"
INT = "int_lit"
FLOAT = "float_lit"
STR = "str_lit"
CHAR = "char_lit"
KW = "keyword"
OP = "punct"
EOF = "eof"


class PetitSyntaxError(Exception):
    def __init__(self, message: str, path: str, line: int, col: int):
        super().__init__(f"{path}:{line}:{col}: {message}")
        self.message = message
        self.path = path
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str
    lexeme: str
    line: int
    col: int


_ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", '"': '"', "'": "'", "0": "\0"}


def unescape(body: str, path: str, line: int, col: int) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            if i + 1 >= len(body) or body[i + 1] not in _ESCAPES:
                raise PetitSyntaxError("invalid escape sequence", path, line, col)
            out.append(_ESCAPES[body[i + 1]])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def escape(value: str, quote: str) -> str:
    out = []
    for ch in value:
        if ch == "\\":
            out.append("\\\\")
        elif ch == quote:
            out.append("\\" + quote)
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\0":
            out.append("\\0")
        else:
            out.append(ch)
    return "".join(out)


def tokenize(text: str, path: str = "<text>") -> list[Token]:
    """Lex ``text`` into tokens; comments run from ``#`` to end of line."""
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def err(msg: str) -> PetitSyntaxError:
        return PetitSyntaxError(msg, path, line, col)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            is_float = False
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                is_float = True
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    is_float = True
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lexeme = text[i:j]
            tokens.append(Token(FLOAT if is_float else INT, lexeme, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            lexeme = text[i:j]
            kind = KW if lexeme in KEYWORDS else IDENT
            tokens.append(Token(kind, lexeme, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch == '"' or ch == "'":
            quote = ch
            j = i + 1
            while j < n and text[j] != quote:
                if text[j] == "\n":
                    raise err("unterminated literal")
                if text[j] == "\\":
                    j += 1
                j += 1
            if j >= n:
                raise err("unterminated literal")
            lexeme = text[i : j + 1]
            body = unescape(text[i + 1 : j], path, start_line, start_col)
            if quote == "'" and len(body) != 1:
                raise err("char literal must contain exactly one character")
            tokens.append(Token(CHAR if quote == "'" else STR, lexeme, start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        for p in PUNCT:
            if text.startswith(p, i):
                tokens.append(Token(OP, p, start_line, start_col))
                i += len(p)
                col += len(p)
                break
        else:
            raise err(f"unexpected character {ch!r}")
    tokens.append(Token(EOF, "", line, col))
    return tokens


def literal_value(tok: Token, path: str = "<text>") -> object:
    if tok.kind == INT:
        return int(tok.lexeme)
    if tok.kind == FLOAT:
        return float(tok.lexeme)
    if tok.kind in (STR, CHAR):
        return unescape(tok.lexeme[1:-1], path, tok.line, tok.col)
    raise ValueError(f"not a literal token: {tok}")
