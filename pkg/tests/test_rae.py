import numpy as np
import pytest

from ingrepair.corpus import Corpus
from ingrepair.embed import Dictionary, SkipGramConfig
from ingrepair.rae import (
    UNK,
    EncoderParams,
    RaeConfig,
    RaeTrainingError,
    decode,
    encode_pair,
    gradient_check,
    greedy_encode,
    init_params,
    load_params,
    reconstruction_error,
    save_params,
    trace_errors,
    train_rae,
)


def _params_n1(enc_row, dec_col, bias_z=0.0, bias_y=(0.0, 0.0)):
    return EncoderParams(
        vocab=[UNK],
        embeddings=np.zeros((1, 1)),
        enc=np.array([enc_row], dtype=float),
        dec=np.array([[dec_col[0]], [dec_col[1]]], dtype=float),
        bias_z=np.array([bias_z]),
        bias_y=np.array(bias_y, dtype=float),
    )


def _toy_dictionary(n=4, vocab_size=10, seed=7):
    rng = np.random.default_rng(seed)
    vocab = [f"t{i}" for i in range(vocab_size)]
    return Dictionary(vocab, rng.normal(size=(vocab_size, n)), SkipGramConfig(dim=n))


def _toy_corpus():
    return Corpus(
        "file",
        [
            ("line0", ("t0", "t1", "t2", "t3", "t1", "t0")),
            ("line1", ("t4", "t5", "t6", "t2", "t7")),
        ],
    )


# -- cell ops -----------------------------------------------------------------


def test_encode_pair_zero_params_gives_zero_vector():
    params = _params_n1([0.0, 0.0], (0.0, 0.0))
    z = encode_pair(np.array([0.3]), np.array([0.9]), params)
    assert np.array_equal(z, np.zeros(1))


def test_encode_pair_hand_value_prenorm():
    params = _params_n1([1.0, 1.0], (0.0, 0.0))
    z = encode_pair(np.array([0.5]), np.array([0.5]), params, normalize=False)
    assert np.isclose(z[0], np.tanh(1.0))
    assert np.isclose(z[0], 0.76159, atol=5e-6)


def test_encode_pair_prenorm_bounded_by_tanh():
    rng = np.random.default_rng(0)
    n = 6
    params = EncoderParams(
        vocab=[UNK],
        embeddings=np.zeros((1, n)),
        enc=rng.normal(size=(n, 2 * n)) * 3,
        dec=rng.normal(size=(2 * n, n)),
        bias_z=rng.normal(size=n),
        bias_y=rng.normal(size=2 * n),
    )
    for _ in range(20):
        z = encode_pair(rng.normal(size=n) * 10, rng.normal(size=n) * 10, params, normalize=False)
        assert np.all(z >= -1.0) and np.all(z <= 1.0)


def test_encode_pair_unit_norm():
    rng = np.random.default_rng(1)
    n = 5
    params = EncoderParams(
        vocab=[UNK],
        embeddings=np.zeros((1, n)),
        enc=rng.normal(size=(n, 2 * n)),
        dec=rng.normal(size=(2 * n, n)),
        bias_z=rng.normal(size=n),
        bias_y=rng.normal(size=2 * n),
    )
    z = encode_pair(rng.normal(size=n), rng.normal(size=n), params)
    assert np.isclose(np.linalg.norm(z), 1.0)


def test_encode_pair_dimension_mismatch():
    params = _params_n1([1.0, 1.0], (0.0, 0.0))
    with pytest.raises(ValueError):
        encode_pair(np.zeros(2), np.zeros(2), params)


def test_decode_bias_only():
    params = _params_n1([0.0, 0.0], (0.0, 0.0), bias_y=(2.5, -1.0))
    left, right = decode(np.zeros(1), params)
    assert left[0] == 2.5 and right[0] == -1.0


def test_decode_hand_value():
    params = _params_n1([0.0, 0.0], (2.0, 3.0))
    left, right = decode(np.array([0.5]), params)
    assert np.isclose(left[0], 1.0) and np.isclose(right[0], 1.5)


def test_decode_affine_linearity():
    rng = np.random.default_rng(3)
    n = 4
    params = EncoderParams(
        vocab=[UNK],
        embeddings=np.zeros((1, n)),
        enc=rng.normal(size=(n, 2 * n)),
        dec=rng.normal(size=(2 * n, n)),
        bias_z=rng.normal(size=n),
        bias_y=rng.normal(size=2 * n),
    )
    z = rng.normal(size=n)
    alpha = 2.7
    base = np.concatenate(decode(np.zeros(n), params))
    scaled = np.concatenate(decode(alpha * z, params))
    once = np.concatenate(decode(z, params))
    assert np.allclose(scaled - base, alpha * (once - base))


def test_reconstruction_error_perfect_is_zero():
    # dec undoes enc for a fixed point: engineer by zero enc so z = 0,
    # then bias_y reproduces the inputs exactly.
    params = _params_n1([0.0, 0.0], (0.0, 0.0), bias_y=(0.25, -0.5))
    assert reconstruction_error(np.array([0.25]), np.array([-0.5]), params) == 0.0


def test_reconstruction_error_hand_value():
    n = 2
    params = EncoderParams(
        vocab=[UNK],
        embeddings=np.zeros((1, n)),
        enc=np.zeros((n, 2 * n)),
        dec=np.zeros((2 * n, n)),
        bias_z=np.zeros(n),
        bias_y=np.zeros(2 * n),
    )
    # reconstruction is (0,0),(0,0): E = |(1,0)|^2 + |(0,1)|^2 = 2
    assert reconstruction_error(np.array([1.0, 0.0]), np.array([0.0, 1.0]), params) == 2.0


def test_reconstruction_error_nonnegative():
    rng = np.random.default_rng(4)
    n = 3
    params = EncoderParams(
        vocab=[UNK],
        embeddings=np.zeros((1, n)),
        enc=rng.normal(size=(n, 2 * n)),
        dec=rng.normal(size=(2 * n, n)),
        bias_z=rng.normal(size=n),
        bias_y=rng.normal(size=2 * n),
    )
    for _ in range(25):
        assert reconstruction_error(rng.normal(size=n), rng.normal(size=n), params) >= 0.0


# -- greedy stream encoding ---------------------------------------------------


def test_greedy_two_terms_single_merge(tiny_params):
    trace = greedy_encode(["t0", "t1"], tiny_params)
    assert len(trace.merges) == 1
    expected = encode_pair(tiny_params.embeddings[0], tiny_params.embeddings[1], tiny_params)
    assert np.allclose(trace.root, expected)


def test_greedy_three_terms_picks_argmin(tiny_params):
    stream = ["t2", "t5", "t9"]
    trace = greedy_encode(stream, tiny_params)
    e01 = reconstruction_error(tiny_params.embeddings[2], tiny_params.embeddings[5], tiny_params)
    e12 = reconstruction_error(tiny_params.embeddings[5], tiny_params.embeddings[9], tiny_params)
    expected_first = 0 if e01 <= e12 else 1
    assert trace.merges[0].left == expected_first
    assert np.isclose(trace.merges[0].error, min(e01, e12))


def test_greedy_trace_length(tiny_params):
    trace = greedy_encode([f"t{i}" for i in range(7)], tiny_params)
    assert len(trace.merges) == 6
    assert all(step.right == step.left + 1 for step in trace.merges)


def test_greedy_single_term_returns_embedding(tiny_params):
    trace = greedy_encode(["t3"], tiny_params)
    assert trace.merges == []
    assert np.array_equal(trace.root, tiny_params.embeddings[3])


def test_greedy_empty_stream_rejected(tiny_params):
    with pytest.raises(ValueError):
        greedy_encode([], tiny_params)


def test_greedy_oov_maps_to_unk(tiny_params):
    trace_unk = greedy_encode(["t0", "nope"], tiny_params)
    trace_explicit = greedy_encode(["t0", UNK], tiny_params)
    assert np.array_equal(trace_unk.root, trace_explicit.root)


def test_greedy_deterministic_and_order_sensitive(tiny_params):
    stream = ["t0", "t1", "t2", "t3"]
    a = greedy_encode(stream, tiny_params)
    b = greedy_encode(stream, tiny_params)
    assert np.array_equal(a.root, b.root)
    reversed_trace = greedy_encode(list(reversed(stream)), tiny_params)
    assert len(reversed_trace.merges) == len(a.merges)  # mechanism runs either way


def test_trace_errors_replay_exact(tiny_params):
    trace = greedy_encode(["t0", "t4", "t2", "t8", "t1"], tiny_params)
    replayed = trace_errors(trace, tiny_params)
    assert replayed.tolist() == [step.error for step in trace.merges]


# -- training -------------------------------------------------------------------


def test_train_reduces_total_error():
    result = train_rae(_toy_corpus(), _toy_dictionary(), RaeConfig(epochs=15, seed=0))
    assert result.losses[-1] <= result.losses[0]
    assert len(result.losses) >= 2


def test_train_monotone_losses():
    result = train_rae(_toy_corpus(), _toy_dictionary(), RaeConfig(epochs=12, seed=1))
    assert all(b <= a for a, b in zip(result.losses, result.losses[1:]))


def test_gradient_check_toy_corpus():
    worst = gradient_check(_toy_corpus(), _toy_dictionary(n=4), seed=0)
    assert worst < 1e-4


def test_train_identical_two_token_lines_halves_error():
    corpus = Corpus("file", [(f"k{i}", ("a", "b")) for i in range(4)])
    rng = np.random.default_rng(9)
    dictionary = Dictionary(["a", "b"], rng.normal(size=(2, 4)), SkipGramConfig(dim=4))
    params0 = init_params(dictionary, seed=0)
    initial = trace_errors(greedy_encode(("a", "b"), params0), params0).sum()
    result = train_rae(corpus, dictionary, RaeConfig(epochs=50, seed=0))
    final = trace_errors(greedy_encode(("a", "b"), result.params), result.params).sum()
    assert final <= 0.5 * initial


def test_train_determinism():
    r1 = train_rae(_toy_corpus(), _toy_dictionary(), RaeConfig(epochs=6, seed=5))
    r2 = train_rae(_toy_corpus(), _toy_dictionary(), RaeConfig(epochs=6, seed=5))
    assert np.array_equal(r1.params.enc, r2.params.enc)
    assert np.array_equal(r1.params.embeddings, r2.params.embeddings)
    assert r1.losses == r2.losses


def test_train_freeze_embeddings():
    dictionary = _toy_dictionary()
    result = train_rae(_toy_corpus(), dictionary, RaeConfig(epochs=5, seed=0, finetune_embeddings=False))
    assert np.array_equal(result.params.embeddings[:-1], dictionary.vectors)


def test_train_empty_corpus_rejected():
    with pytest.raises(RaeTrainingError, match="empty"):
        train_rae(Corpus("file", []), _toy_dictionary())


def test_train_requires_dictionary_coverage():
    corpus = Corpus("file", [("k", ("zz", "t0"))])
    with pytest.raises(RaeTrainingError, match="cover"):
        train_rae(corpus, _toy_dictionary())


def test_train_lbfgs_drop_in():
    result = train_rae(_toy_corpus(), _toy_dictionary(), RaeConfig(epochs=4, seed=0, optimizer="lbfgs"))
    assert result.losses[-1] <= result.losses[0]


def test_structure_stays_frozen_within_replay():
    result = train_rae(_toy_corpus(), _toy_dictionary(), RaeConfig(epochs=5, seed=2))
    params = result.params
    trace = greedy_encode(("t0", "t1", "t2", "t3"), params)
    assert trace_errors(trace, params).tolist() == [m.error for m in trace.merges]


def test_encoder_mat_round_trip(tmp_path):
    result = train_rae(_toy_corpus(), _toy_dictionary(), RaeConfig(epochs=3, seed=4))
    path = tmp_path / "encoder.mat"
    save_params(result.params, path)
    loaded = load_params(path)
    assert loaded.vocab == result.params.vocab
    for attr in ("embeddings", "enc", "dec", "bias_z", "bias_y"):
        assert np.array_equal(getattr(loaded, attr), getattr(result.params, attr))
    assert path.read_text().splitlines()[0] == "4"
