"""Cached pairwise fragment similarities.

Every type and executable is encoded once with the trained autoencoder
(root of the greedy merge over its normalized token line) and the full
pairwise Euclidean distance table is cached eagerly; the repair phase
only ever reads sorted neighbor lists and never encodes on the fly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .corpus import Corpus
from .rae import EncoderParams, greedy_encode


@dataclass
class SimilarityTable:
    granularity: str
    keys: list[str]
    dist: np.ndarray  # (m, m) symmetric, zero diagonal
    _neighbors: dict[str, list[str]] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self._neighbors:
            index = {k: i for i, k in enumerate(self.keys)}
            for key in self.keys:
                i = index[key]
                others = sorted(
                    (k for k in self.keys if k != key),
                    key=lambda k: (self.dist[i, index[k]], k),
                )
                self._neighbors[key] = others

    def distance(self, a: str, b: str) -> float:
        i = self.keys.index(a)
        j = self.keys.index(b)
        return float(self.dist[i, j])

    def neighbors(self, key: str) -> list[str]:
        if key not in self._neighbors:
            raise KeyError(f"unknown fragment key: {key}")
        return list(self._neighbors[key])


def encode_fragment(key: str, corpus: Corpus, params: EncoderParams) -> np.ndarray:
    """Root encoding of one corpus fragment."""
    return greedy_encode(corpus.tokens(key), params).root


def build_table(corpus: Corpus, params: EncoderParams) -> SimilarityTable:
    """Encode every fragment and cache all pairwise Euclidean distances."""
    keys = corpus.keys
    roots = np.array([greedy_encode(toks, params).root for _k, toks in corpus.entries])
    if len(keys) == 0:
        return SimilarityTable(corpus.granularity, [], np.zeros((0, 0)))
    d2 = kernels.pairwise_sq_dists(roots)
    np.fill_diagonal(d2, 0.0)
    dist = np.sqrt(d2)
    dist = (dist + dist.T) / 2.0
    return SimilarityTable(corpus.granularity, list(keys), dist)


def similar_fragments(table: SimilarityTable, key: str) -> list[str]:
    """All other fragments in ascending-distance order (ties by key)."""
    return table.neighbors(key)


# ---------------------------------------------------------------------------
# similarities.txt / .sorted


def save_table(table: SimilarityTable, pairs_path: Path, sorted_path: Path) -> None:
    with open(pairs_path, "w", encoding="utf-8") as fh:
        for i, a in enumerate(table.keys):
            for j in range(i + 1, len(table.keys)):
                fh.write(f"{a}\t{table.keys[j]}\t{table.dist[i, j]:.9g}\n")
    with open(sorted_path, "w", encoding="utf-8") as fh:
        for key in table.keys:
            fh.write("\t".join([key] + table.neighbors(key)) + "\n")


def load_table(pairs_path: Path, sorted_path: Path, granularity: str) -> SimilarityTable:
    neighbors: dict[str, list[str]] = {}
    keys: list[str] = []
    for line in Path(sorted_path).read_text(encoding="utf-8").splitlines():
        parts = line.split("\t")
        keys.append(parts[0])
        neighbors[parts[0]] = parts[1:]
    index = {k: i for i, k in enumerate(keys)}
    dist = np.zeros((len(keys), len(keys)))
    for line in Path(pairs_path).read_text(encoding="utf-8").splitlines():
        a, b, d = line.split("\t")
        dist[index[a], index[b]] = dist[index[b], index[a]] = float(d)
    return SimilarityTable(granularity, keys, dist, _neighbors=neighbors)
