import numpy as np
import pytest

from ingrepair.corpus import Corpus
from ingrepair.embed import (
    Dictionary,
    SkipGram,
    SkipGramConfig,
    load_dictionary,
    nearest_terms,
    save_dictionary,
    train_skipgram,
)


def _corpus(lines):
    return Corpus("file", [(f"k{i}", tuple(line.split())) for i, line in enumerate(lines)])


RANKING_LINES = [
    "a x b a x b a x b",
    "a y b a y b a y b",
    "c z d c z d c z d",
] * 4


def test_shapes_and_finiteness():
    corpus = _corpus(["a b c d e"])
    dictionary = train_skipgram(corpus, SkipGramConfig(dim=32, epochs=2, seed=1))
    assert dictionary.vectors.shape == (5, 32)
    assert np.all(np.isfinite(dictionary.vectors))
    assert dictionary.vocab == ["a", "b", "c", "d", "e"]


def test_defaults_match_reference_settings():
    config = SkipGramConfig()
    assert config.dim == 400
    assert config.window == 10
    assert config.epochs == 20


def test_empty_corpus_rejected():
    with pytest.raises(ValueError, match="empty"):
        train_skipgram(_corpus([]))
    with pytest.raises(ValueError, match="dimension"):
        train_skipgram(_corpus(["a b"]), SkipGramConfig(dim=1))


def test_determinism_bit_identical():
    corpus = _corpus(RANKING_LINES)
    config = SkipGramConfig(dim=16, epochs=3, seed=9)
    d1 = train_skipgram(corpus, config)
    d2 = train_skipgram(corpus, config)
    assert d1.vocab == d2.vocab
    assert np.array_equal(d1.vectors, d2.vectors)


def test_identical_contexts_cluster_by_cosine():
    corpus = _corpus(RANKING_LINES)
    dictionary = train_skipgram(corpus, SkipGramConfig(dim=16, epochs=10, window=2, seed=4))

    def cosine(u, v):
        return float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))

    x, y, z = (dictionary.vector(t) for t in "xyz")
    assert cosine(x, y) > cosine(x, z)
    assert cosine(x, y) > cosine(y, z)


def test_nll_decreases_over_first_epoch():
    corpus = _corpus(RANKING_LINES)
    model = SkipGram([toks for _k, toks in corpus.entries], SkipGramConfig(dim=16, window=2, epochs=5, seed=2))
    before = model.nll()
    model.train_epoch()
    assert model.nll() < before


def test_nearest_terms_two_term_vocab():
    dictionary = Dictionary(["a", "b"], np.array([[0.0, 0.0], [1.0, 0.0]]), SkipGramConfig(dim=2))
    assert nearest_terms(dictionary, "a", 1) == [("b", 1.0)]


def test_nearest_terms_sorted_and_excludes_query():
    rng = np.random.default_rng(0)
    vocab = [f"w{i}" for i in range(20)]
    dictionary = Dictionary(vocab, rng.normal(size=(20, 8)), SkipGramConfig(dim=8))
    result = nearest_terms(dictionary, "w3", 19)
    assert "w3" not in [t for t, _ in result]
    dists = [d for _t, d in result]
    assert dists == sorted(dists)


def test_nearest_terms_matches_exhaustive_scan():
    rng = np.random.default_rng(5)
    vocab = [f"w{i}" for i in range(50)]
    vectors = rng.normal(size=(50, 6))
    dictionary = Dictionary(vocab, vectors, SkipGramConfig(dim=6))
    # independent brute-force oracle
    query = vectors[7]
    scan = []
    for i, term in enumerate(vocab):
        if i == 7:
            continue
        scan.append((float(np.sqrt(np.sum((vectors[i] - query) ** 2))), i, term))
    scan.sort()
    expected = [(term, d) for d, _i, term in scan[:10]]
    got = nearest_terms(dictionary, "w7", 10)
    assert [t for t, _ in got] == [t for t, _ in expected]
    assert np.allclose([d for _, d in got], [d for _, d in expected])


def test_nearest_terms_unknown_term():
    dictionary = Dictionary(["a"], np.zeros((1, 2)), SkipGramConfig(dim=2))
    with pytest.raises(KeyError):
        nearest_terms(dictionary, "zz", 1)


def test_dictionary_txt_round_trip(tmp_path):
    corpus = _corpus(["a b c a b"])
    dictionary = train_skipgram(corpus, SkipGramConfig(dim=8, epochs=2, seed=3))
    path = tmp_path / "dictionary.txt"
    save_dictionary(dictionary, path)
    header = path.read_text().splitlines()[0]
    assert header == "3 8"
    loaded = load_dictionary(path)
    assert loaded.vocab == dictionary.vocab
    assert np.array_equal(loaded.vectors, dictionary.vectors)


def test_single_word_corpus():
    dictionary = train_skipgram(_corpus(["solo solo solo"]), SkipGramConfig(dim=4, epochs=1, seed=0))
    assert dictionary.vocab == ["solo"]
    assert np.all(np.isfinite(dictionary.vectors))
