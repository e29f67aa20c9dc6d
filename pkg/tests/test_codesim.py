import itertools

import numpy as np
import pytest

from ingrepair.codesim import (
    SimilarityTable,
    build_table,
    encode_fragment,
    load_table,
    save_table,
    similar_fragments,
)
from ingrepair.corpus import Corpus
from ingrepair.rae import greedy_encode


def _corpus(entries):
    return Corpus("executable", entries)


def test_single_token_fragment_is_term_embedding(tiny_params):
    corpus = _corpus([("k", ("t3",))])
    vec = encode_fragment("k", corpus, tiny_params)
    assert np.array_equal(vec, tiny_params.embeddings[3])


def test_identical_streams_identical_encodings(tiny_params):
    corpus = _corpus([("a", ("t1", "t2", "t3")), ("b", ("t1", "t2", "t3"))])
    assert np.array_equal(
        encode_fragment("a", corpus, tiny_params), encode_fragment("b", corpus, tiny_params)
    )


def test_encoding_matches_independent_greedy_root(tiny_params):
    corpus = _corpus([("a", ("t5", "t0", "t9", "t2"))])
    assert np.array_equal(
        encode_fragment("a", corpus, tiny_params),
        greedy_encode(("t5", "t0", "t9", "t2"), tiny_params).root,
    )


def test_unknown_fragment_key(tiny_params):
    corpus = _corpus([("a", ("t1",))])
    with pytest.raises(KeyError):
        encode_fragment("zzz", corpus, tiny_params)


def test_single_fragment_table_empty_neighbors(tiny_params):
    table = build_table(_corpus([("only", ("t1", "t2"))]), tiny_params)
    assert similar_fragments(table, "only") == []


def test_hand_placed_distances():
    table = SimilarityTable(
        "type",
        ["A", "B", "C"],
        np.array([[0.0, 1.0, 3.0], [1.0, 0.0, 2.0], [3.0, 2.0, 0.0]]),
    )
    assert similar_fragments(table, "A") == ["B", "C"]
    assert table.distance("A", "B") == 1.0
    assert table.distance("A", "C") == 3.0


def test_neighbor_lists_are_permutations(tiny_params):
    corpus = _corpus(
        [("a", ("t0", "t1")), ("b", ("t2", "t3")), ("c", ("t4", "t5")), ("d", ("t6",))]
    )
    table = build_table(corpus, tiny_params)
    for key in corpus.keys:
        neighbors = similar_fragments(table, key)
        assert len(neighbors) == 3
        assert sorted(neighbors + [key]) == sorted(corpus.keys)


def test_tie_break_lexicographic(tiny_params):
    # identical streams → zero distance to both; order must be by key
    corpus = _corpus([("mid", ("t1", "t2")), ("zz", ("t1", "t2")), ("aa", ("t1", "t2"))])
    table = build_table(corpus, tiny_params)
    assert similar_fragments(table, "mid") == ["aa", "zz"]


def test_table_metric_properties(tiny_params):
    corpus = _corpus([(f"k{i}", ("t%d" % (i % 10), "t%d" % ((i * 3) % 10))) for i in range(8)])
    table = build_table(corpus, tiny_params)
    d = table.dist
    assert np.allclose(d, d.T)
    assert np.allclose(np.diag(d), 0.0)
    assert (d >= 0).all()
    for i, j, k in itertools.permutations(range(len(corpus.keys)), 3):
        assert d[i, j] <= d[i, k] + d[k, j] + 1e-9


def test_table_reproducible(tiny_params):
    corpus = _corpus([("a", ("t0", "t1", "t2")), ("b", ("t3", "t4"))])
    t1 = build_table(corpus, tiny_params)
    t2 = build_table(corpus, tiny_params)
    assert np.array_equal(t1.dist, t2.dist)
    assert t1.keys == t2.keys


def test_save_load_round_trip(tmp_path, tiny_params):
    corpus = _corpus([("a", ("t0", "t1")), ("b", ("t2", "t3")), ("c", ("t4",))])
    table = build_table(corpus, tiny_params)
    pairs = tmp_path / "execs.similarities.txt"
    sorted_path = tmp_path / "execs.similarities.sorted"
    save_table(table, pairs, sorted_path)
    lines = pairs.read_text().splitlines()
    assert len(lines) == 3  # C(3,2)
    for line in lines:
        key1, key2, dist = line.split("\t")
        assert float(dist) >= 0
    loaded = load_table(pairs, sorted_path, "executable")
    assert loaded.keys == table.keys
    for key in table.keys:
        assert loaded.neighbors(key) == table.neighbors(key)
