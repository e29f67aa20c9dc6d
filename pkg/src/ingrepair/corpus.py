"""Keyed, normalized token corpora at file, type, and executable granularity.

Each corpus line is the left-to-right terminal yield of one program
element's syntax tree, keyed by the element's unique id (file path,
``path::Type``, or ``path::Type::fn(sig)->ret``). Literal tokens are
replaced by type sentinels chosen to be non-parsable so they can never
collide with program identifiers. The file-level corpus is the training
corpus; type and executable corpora are encode-only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .petit import ast, tokenize
from .petit.lexer import EOF
from .petit.render import file_text, fn_lines, type_lines

INT_SENTINEL = "<INT>"
FLOAT_SENTINEL = "<FLOAT>"
STR_SENTINEL = "<STR>"
CHAR_SENTINEL = "<CHAR>"

FILE = "file"
TYPE = "type"
EXECUTABLE = "executable"

_INT_RE = re.compile(r"^[0-9]+$")
_FLOAT_RE = re.compile(r"^[0-9]+(\.[0-9]+)?([eE][+-]?[0-9]+)?$")


@dataclass
class Corpus:
    granularity: str
    entries: list[tuple[str, tuple[str, ...]]]

    @property
    def keys(self) -> list[str]:
        return [key for key, _ in self.entries]

    def tokens(self, key: str) -> tuple[str, ...]:
        for k, toks in self.entries:
            if k == key:
                return toks
        raise KeyError(f"unknown corpus key: {key}")

    def vocabulary(self) -> list[str]:
        """Distinct terms in first-occurrence order."""
        seen: dict[str, None] = {}
        for _key, toks in self.entries:
            for tok in toks:
                seen.setdefault(tok)
        return list(seen)

    def __len__(self) -> int:
        return len(self.entries)


def element_yield(text: str) -> tuple[str, ...]:
    """Terminal yield of an element given its canonical rendering."""
    return tuple(tok.lexeme for tok in tokenize(text) if tok.kind != EOF)


def exec_key(path: str, type_name: str, fn: ast.FnDecl) -> str:
    return f"{path}::{type_name}::{fn.signature}"


def type_key(path: str, type_name: str) -> str:
    return f"{path}::{type_name}"


def extract_corpora(program: ast.Program) -> tuple[Corpus, Corpus, Corpus]:
    """Corpora at file, type, and executable granularity (program order)."""
    file_entries = []
    type_entries = []
    exec_entries = []
    for f in program.files:
        file_entries.append((f.path, element_yield(file_text(f))))
        for t in f.types:
            type_entries.append((type_key(f.path, t.name), element_yield("\n".join(type_lines(t)))))
            for fn in t.fns:
                exec_entries.append((exec_key(f.path, t.name, fn), element_yield("\n".join(fn_lines(fn)))))
    return (
        Corpus(FILE, file_entries),
        Corpus(TYPE, type_entries),
        Corpus(EXECUTABLE, exec_entries),
    )


def normalize_token(tok: str) -> str:
    if tok.startswith('"'):
        return STR_SENTINEL
    if tok.startswith("'"):
        return CHAR_SENTINEL
    if _INT_RE.match(tok):
        return INT_SENTINEL
    if _FLOAT_RE.match(tok):
        return FLOAT_SENTINEL
    return tok


def normalize(tokens) -> list[str]:
    """Replace char/float/int/string literal lexemes with type sentinels.

    Booleans, identifiers, keywords, and operators pass through; the map
    is idempotent.
    """
    return [normalize_token(t) for t in tokens]


def normalized(corpus: Corpus) -> Corpus:
    return Corpus(corpus.granularity, [(k, tuple(normalize(toks))) for k, toks in corpus.entries])


# ---------------------------------------------------------------------------
# .key / .src file pairs

_BASENAMES = {FILE: "files", TYPE: "types", EXECUTABLE: "execs"}


def corpus_paths(directory: Path, granularity: str) -> tuple[Path, Path]:
    base = _BASENAMES[granularity]
    return directory / f"{base}.key", directory / f"{base}.src"


def save_corpus(corpus: Corpus, directory: Path) -> tuple[Path, Path]:
    key_path, src_path = corpus_paths(Path(directory), corpus.granularity)
    for _key, toks in corpus.entries:
        for tok in toks:
            if any(c.isspace() for c in tok):
                raise ValueError(
                    f"token {tok!r} contains whitespace; normalize the corpus before saving"
                )
    key_path.write_text("".join(k + "\n" for k, _ in corpus.entries), encoding="utf-8")
    src_path.write_text("".join(" ".join(toks) + "\n" for _, toks in corpus.entries), encoding="utf-8")
    return key_path, src_path


def load_corpus(directory: Path, granularity: str) -> Corpus:
    key_path, src_path = corpus_paths(Path(directory), granularity)
    keys = key_path.read_text(encoding="utf-8").splitlines()
    lines = src_path.read_text(encoding="utf-8").splitlines()
    if len(keys) != len(lines):
        raise ValueError(f"{key_path} and {src_path} line counts differ")
    return Corpus(granularity, [(k, tuple(line.split())) for k, line in zip(keys, lines)])
