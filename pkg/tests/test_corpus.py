import pytest

from ingrepair.corpus import (
    Corpus,
    extract_corpora,
    load_corpus,
    normalize,
    normalized,
    save_corpus,
)
from ingrepair.petit import parse

from conftest import CALC_SRC


def test_corpus_sizes_one_file_one_type_two_fns():
    program = parse(
        {"m.pt": "type M { fn a() -> int { return 1; } fn b() -> int { return 2; } }"}
    )
    files, types, execs = extract_corpora(program)
    assert (len(files), len(types), len(execs)) == (1, 1, 2)


def test_executable_key_format():
    program = parse(
        {
            "math.pt": """
type MathUtils {
    fn equals(x: float, y: float) -> bool {
        return x == y;
    }
}
"""
        }
    )
    _files, _types, execs = extract_corpora(program)
    assert execs.keys == ["math.pt::MathUtils::equals(float,float)->bool"]


def test_type_key_and_counts(calc_program):
    files, types, execs = extract_corpora(calc_program)
    assert files.keys == ["a/one.pt", "a/two.pt", "b/three.pt"]
    assert types.keys == ["a/one.pt::Calc", "a/two.pt::Helper", "b/three.pt::Other"]
    assert len(execs) == 4


def test_type_line_is_header_plus_member_yields(calc_program):
    files, types, execs = extract_corpora(calc_program)
    type_toks = list(types.tokens("a/two.pt::Helper"))
    fn_toks = list(execs.tokens("a/two.pt::Helper::twice(int)->int"))
    assert type_toks == ["type", "Helper", "{"] + fn_toks + ["}"]


def test_file_line_is_concatenation_of_type_lines(calc_program):
    files, types, execs = extract_corpora(calc_program)
    for f in calc_program.files:
        expected = []
        for t in f.types:
            expected.extend(types.tokens(f"{f.path}::{t.name}"))
        # Petit has no file-level punctuation outside type declarations.
        assert list(files.tokens(f.path)) == expected


def test_normalize_rules():
    assert normalize(["return", "x", "==", "1", ";"]) == ["return", "x", "==", "<INT>", ";"]
    assert normalize(["true", "false"]) == ["true", "false"]
    assert normalize(["1.5", "1e-07", '"hi"', "'c'"]) == ["<FLOAT>", "<FLOAT>", "<STR>", "<CHAR>"]
    assert normalize(["ident", "+", "while"]) == ["ident", "+", "while"]


def test_normalize_idempotent(calc_program):
    files, _t, _e = extract_corpora(calc_program)
    for _key, toks in files.entries:
        once = normalize(toks)
        assert normalize(once) == once


def test_normalized_vocab_has_no_raw_literals(mathfix_program):
    files, _t, _e = extract_corpora(mathfix_program)
    vocab = normalized(files).vocabulary()
    for term in vocab:
        assert not term[0].isdigit()
        assert not term.startswith('"') and not term.startswith("'")


def test_corpus_file_round_trip(tmp_path, calc_program):
    files, types, execs = extract_corpora(calc_program)
    for corpus in (files, types, execs):
        norm = normalized(corpus)
        key_path, src_path = save_corpus(norm, tmp_path)
        loaded = load_corpus(tmp_path, corpus.granularity)
        assert loaded == norm
    assert sorted(p.name for p in tmp_path.iterdir()) == [
        "execs.key",
        "execs.src",
        "files.key",
        "files.src",
        "types.key",
        "types.src",
    ]


def test_save_rejects_tokens_with_spaces(tmp_path):
    corpus = Corpus("file", [("k", ('"a b"',))])
    with pytest.raises(ValueError, match="normalize"):
        save_corpus(corpus, tmp_path)


def test_unknown_key():
    corpus = Corpus("file", [("k", ("a",))])
    with pytest.raises(KeyError):
        corpus.tokens("missing")
