"""Skip-gram term embeddings with hierarchical softmax.

Trained on the normalized file-level corpus; the vectors serve as priors
for the recursive autoencoder and as the term space for identifier
clustering. Training is single-threaded and fully deterministic for a
fixed seed. Defaults follow the classic setup: 400-dimensional vectors,
maximum skip length 10, 20 epochs, Huffman-coded output layer, min-count
1 (corpora here are small), initial learning rate 0.025 decaying linearly
to 1e-4.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.special import expit

from .corpus import Corpus


@dataclass(frozen=True)
class SkipGramConfig:
    dim: int = 400
    window: int = 10
    epochs: int = 20
    alpha: float = 0.025
    min_alpha: float = 1e-4
    seed: int = 1


@dataclass
class Dictionary:
    vocab: list[str]
    vectors: np.ndarray  # (V, dim)
    config: SkipGramConfig
    _index: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self._index:
            self._index = {term: i for i, term in enumerate(self.vocab)}

    def __contains__(self, term: str) -> bool:
        return term in self._index

    def index(self, term: str) -> int:
        return self._index[term]

    def vector(self, term: str) -> np.ndarray:
        return self.vectors[self._index[term]]

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


def _huffman(counts: list[int]) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Huffman codes and inner-node paths per word (word2vec two-pointer
    construction; ties resolved by the count-descending word order)."""
    V = len(counts)
    order = sorted(range(V), key=lambda i: (-counts[i], i))
    count = [counts[i] for i in order] + [int(1e15)] * max(V - 1, 0)
    binary = [0] * (2 * V - 1)
    parent = [0] * (2 * V - 1)
    pos1, pos2 = V - 1, V
    for a in range(V - 1):
        if pos1 >= 0 and count[pos1] < count[pos2]:
            min1, pos1 = pos1, pos1 - 1
        else:
            min1, pos2 = pos2, pos2 + 1
        if pos1 >= 0 and count[pos1] < count[pos2]:
            min2, pos1 = pos1, pos1 - 1
        else:
            min2, pos2 = pos2, pos2 + 1
        count[V + a] = count[min1] + count[min2]
        parent[min1] = V + a
        parent[min2] = V + a
        binary[min2] = 1
    codes: list[np.ndarray] = [np.empty(0, dtype=np.int64)] * V
    points: list[np.ndarray] = [np.empty(0, dtype=np.int64)] * V
    root = 2 * V - 2
    for sorted_pos, word in enumerate(order):
        code = []
        path = []
        node = sorted_pos
        while node != root and V > 1:
            code.append(binary[node])
            path.append(parent[node] - V)
            node = parent[node]
        codes[word] = np.array(list(reversed(code)), dtype=np.int64)
        points[word] = np.array(list(reversed(path)), dtype=np.int64)
    return codes, points


class SkipGram:
    """Incremental trainer; ``train_skipgram`` is the one-shot wrapper."""

    def __init__(self, lines: list[tuple[str, ...]], config: SkipGramConfig):
        if not any(lines):
            raise ValueError("empty corpus")
        if config.dim < 2:
            raise ValueError("embedding dimension must be >= 2")
        self.config = config
        vocab: dict[str, int] = {}
        counts: list[int] = []
        for line in lines:
            for tok in line:
                if tok not in vocab:
                    vocab[tok] = len(vocab)
                    counts.append(0)
                counts[vocab[tok]] += 1
        self.vocab = list(vocab)
        self.lines = [np.array([vocab[t] for t in line], dtype=np.int64) for line in lines]
        self.codes, self.points = _huffman(counts)
        rng = np.random.default_rng(config.seed)
        V = len(self.vocab)
        self.syn0 = (rng.random((V, config.dim)) - 0.5) / config.dim
        self.syn1 = np.zeros((max(V - 1, 1), config.dim))
        self.rng = rng
        self.total_words = sum(len(line) for line in self.lines) * config.epochs
        self.processed = 0

    def _pair(self, context_word: int, center_word: int, alpha: float) -> None:
        l1 = self.syn0[context_word]
        points = self.points[center_word]
        if len(points) == 0:
            return
        codes = self.codes[center_word]
        l2 = self.syn1[points]
        f = expit(l2 @ l1)
        g = (1.0 - codes - f) * alpha
        neu1e = g @ l2
        self.syn1[points] += np.outer(g, l1)
        l1 += neu1e

    def train_epoch(self) -> None:
        cfg = self.config
        for line in self.lines:
            frac = self.processed / max(self.total_words, 1)
            alpha = max(cfg.min_alpha, cfg.alpha * (1.0 - frac))
            length = len(line)
            for t in range(length):
                eff = int(self.rng.integers(1, cfg.window + 1))
                for c in range(max(0, t - eff), min(length, t + eff + 1)):
                    if c != t:
                        self._pair(int(line[c]), int(line[t]), alpha)
            self.processed += length

    def nll(self, window: int | None = None) -> float:
        """Corpus negative log-likelihood under hierarchical softmax,
        evaluated with the full (non-shrunk) window for determinism."""
        window = window or self.config.window
        total = 0.0
        for line in self.lines:
            length = len(line)
            for t in range(length):
                points = self.points[line[t]]
                if len(points) == 0:
                    continue
                codes = self.codes[line[t]]
                sign = 1.0 - 2.0 * codes
                for c in range(max(0, t - window), min(length, t + window + 1)):
                    if c == t:
                        continue
                    x = sign * (self.syn1[points] @ self.syn0[line[c]])
                    total += float(np.logaddexp(0.0, -x).sum())
        return total

    def to_dictionary(self) -> Dictionary:
        return Dictionary(list(self.vocab), self.syn0.copy(), self.config)


def train_skipgram(corpus: Corpus, config: SkipGramConfig | None = None, **overrides) -> Dictionary:
    """Train term embeddings on a (normalized) corpus.

    Deterministic for a fixed seed; every corpus term is kept (min-count
    1), so the dictionary covers the corpus vocabulary exactly.
    """
    config = replace(config or SkipGramConfig(), **overrides)
    model = SkipGram([toks for _k, toks in corpus.entries], config)
    for _ in range(config.epochs):
        model.train_epoch()
    return model.to_dictionary()


def nearest_terms(dictionary: Dictionary, term: str, k: int) -> list[tuple[str, float]]:
    """The k nearest vocabulary terms by ascending Euclidean distance
    (query excluded, ties broken by vocabulary index)."""
    if term not in dictionary:
        raise KeyError(f"unknown term: {term!r}")
    if k < 1:
        raise ValueError("k must be >= 1")
    i = dictionary.index(term)
    deltas = dictionary.vectors - dictionary.vectors[i]
    dists = np.sqrt(np.sum(deltas * deltas, axis=1))
    order = sorted((j for j in range(len(dictionary.vocab)) if j != i), key=lambda j: (dists[j], j))
    return [(dictionary.vocab[j], float(dists[j])) for j in order[:k]]


# ---------------------------------------------------------------------------
# dictionary.txt


def save_dictionary(dictionary: Dictionary, path: Path) -> None:
    V, n = dictionary.vectors.shape
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{V} {n}\n")
        for term, row in zip(dictionary.vocab, dictionary.vectors):
            fh.write(term + " " + " ".join(f"{x:.17g}" for x in row) + "\n")


def load_dictionary(path: Path, config: SkipGramConfig | None = None) -> Dictionary:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        V, n = int(header[0]), int(header[1])
        vocab = []
        vectors = np.empty((V, n))
        for i in range(V):
            parts = fh.readline().split()
            vocab.append(parts[0])
            vectors[i] = [float(x) for x in parts[1 : n + 1]]
    return Dictionary(vocab, vectors, config or SkipGramConfig(dim=n))
