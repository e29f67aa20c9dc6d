"""Identifier clustering over term embeddings.

k-means (k-means++ seeding, Lloyd iterations to an assignment fixpoint)
with k chosen by simulated annealing minimizing the number of points with
negative silhouette values; both k and the initial temperature start at
the square root of the vocabulary size. Only identifier-class terms are
clustered: transforming ingredients must never substitute keywords,
operators, or literal sentinels.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .kernels import pairwise_sq_dists
from .petit.lexer import KEYWORDS

LLOYD_MAX_ITERS = 300
ANNEAL_MAX_PROPOSALS = 200
ANNEAL_COOLING = 0.95
ANNEAL_MIN_TEMPERATURE = 0.1

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def is_identifier(term: str) -> bool:
    return bool(_IDENT_RE.match(term)) and term not in KEYWORDS


def identifier_points(vocab, vectors) -> dict[str, np.ndarray]:
    """The identifier-class subset of a term table, in vocabulary order."""
    return {t: vectors[i] for i, t in enumerate(vocab) if is_identifier(t)}


@dataclass
class ClusterMap:
    terms: list[str]
    labels: np.ndarray  # (V,) cluster id per term
    k: int
    centroids: np.ndarray  # (k, n)
    silhouettes: np.ndarray  # (V,) in [-1, 1]
    _index: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self._index:
            self._index = {t: i for i, t in enumerate(self.terms)}

    def __contains__(self, term: str) -> bool:
        return term in self._index

    def cluster_of(self, term: str) -> int:
        if term not in self._index:
            raise KeyError(f"unclustered term: {term!r}")
        return int(self.labels[self._index[term]])

    def silhouette_of(self, term: str) -> float:
        return float(self.silhouettes[self._index[term]])

    @property
    def negative_count(self) -> int:
        return int(np.sum(self.silhouettes < 0.0))


def _as_matrix(points: dict[str, np.ndarray]) -> tuple[list[str], np.ndarray]:
    terms = list(points)
    return terms, np.array([points[t] for t in terms], dtype=np.float64)


def _kmeans_pp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    m = X.shape[0]
    chosen = [int(rng.integers(m))]
    d2 = np.sum((X - X[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            chosen.append(int(rng.integers(m)))
        else:
            chosen.append(int(rng.choice(m, p=d2 / total)))
        d2 = np.minimum(d2, np.sum((X - X[chosen[-1]]) ** 2, axis=1))
    return X[chosen].copy()


def _lloyd(X: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k = centroids.shape[0]
    labels = None
    for _ in range(LLOYD_MAX_ITERS):
        d2 = np.sum((X[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(d2, axis=1)
        # repair empty clusters by reseeding each to the farthest point
        # from its assigned centroid (one distinct point per repair)
        taken: set[int] = set()
        for c in range(k):
            if not np.any(new_labels == c):
                dist_to_own = d2[np.arange(len(X)), new_labels].copy()
                for t in taken:
                    dist_to_own[t] = -1.0
                far = int(np.argmax(dist_to_own))
                centroids[c] = X[far]
                new_labels[far] = c
                taken.add(far)
        if labels is not None and np.array_equal(labels, new_labels):
            break
        labels = new_labels
        for c in range(k):
            members = labels == c
            if np.any(members):
                centroids[c] = X[members].mean(axis=0)
    return labels, centroids


def silhouette_values(X: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-point silhouette s = (b - a) / max(a, b); singleton clusters and
    the degenerate 0/0 case score 0."""
    m = X.shape[0]
    dist = np.sqrt(pairwise_sq_dists(X))
    clusters = np.unique(labels)
    values = np.zeros(m)
    if len(clusters) < 2:
        return values
    for i in range(m):
        own = labels[i]
        same = labels == own
        same_count = int(same.sum())
        if same_count <= 1:
            values[i] = 0.0
            continue
        a = float(dist[i, same].sum() / (same_count - 1))
        b = math.inf
        for c in clusters:
            if c == own:
                continue
            b = min(b, float(dist[i, labels == c].mean()))
        denom = max(a, b)
        values[i] = (b - a) / denom if denom > 0.0 else 0.0
    return values


def kmeans(points: dict[str, np.ndarray], k: int, seed: int) -> ClusterMap:
    """Deterministic k-means++ / Lloyd clustering of a term → vector map."""
    terms, X = _as_matrix(points)
    if not 1 <= k <= len(terms):
        raise ValueError(f"k={k} out of range for {len(terms)} points")
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp(X, k, rng)
    labels, centroids = _lloyd(X, centroids)
    return ClusterMap(terms, labels, k, centroids, silhouette_values(X, labels))


def anneal_k(points: dict[str, np.ndarray], seed: int) -> ClusterMap:
    """Choose k by simulated annealing on the negative-silhouette count.

    k and the temperature are initialized to sqrt(V); proposals step k by
    ±1, acceptance is Metropolis, cooling is geometric (0.95), and the
    best map seen is returned.
    """
    terms, _X = _as_matrix(points)
    V = len(terms)
    if V < 2:
        raise ValueError("need at least 2 points to anneal k")
    rng = np.random.default_rng(seed)
    k = min(max(int(round(math.sqrt(V))), 1), V)
    temperature = math.sqrt(V)

    cache: dict[int, ClusterMap] = {}

    def evaluate(kk: int) -> ClusterMap:
        if kk not in cache:
            cache[kk] = kmeans(points, kk, seed)
        return cache[kk]

    current = evaluate(k)
    best = current
    for _ in range(ANNEAL_MAX_PROPOSALS):
        if temperature < ANNEAL_MIN_TEMPERATURE:
            break
        delta = int(rng.choice((-1, 1)))
        k_next = min(max(k + delta, 1), V)
        candidate = evaluate(k_next)
        dj = candidate.negative_count - current.negative_count
        if dj <= 0 or rng.random() < math.exp(-dj / temperature):
            k, current = k_next, candidate
            if current.negative_count < best.negative_count:
                best = current
        temperature *= ANNEAL_COOLING
    return best


def same_cluster(cmap: ClusterMap, term_a: str, term_b: str) -> bool:
    return cmap.cluster_of(term_a) == cmap.cluster_of(term_b)


# ---------------------------------------------------------------------------
# classes.txt


def save_clusters(cmap: ClusterMap, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for term, label in zip(cmap.terms, cmap.labels):
            fh.write(f"{term}\t{int(label)}\n")


def load_clusters(path: Path) -> ClusterMap:
    terms: list[str] = []
    labels: list[int] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        term, label = line.split("\t")
        terms.append(term)
        labels.append(int(label))
    arr = np.array(labels, dtype=np.int64)
    k = len(set(labels)) if labels else 0
    return ClusterMap(terms, arr, k, np.zeros((k, 0)), np.zeros(len(terms)))
