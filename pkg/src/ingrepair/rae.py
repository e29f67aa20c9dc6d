"""Recursive autoencoder over token streams.

A single autoencoder cell encodes an adjacent pair ``[x_l; x_r]`` to
``z = tanh(enc @ [x_l; x_r] + bias_z)`` (unit-normalized; an all-zero
pre-activation passes through unchanged), decodes ``y = dec @ z + bias_y``,
and scores the merge by the squared reconstruction error
``||x_l - y_l||^2 + ||x_r - y_r||^2``. Streams longer than two tokens are
reduced greedily: the adjacent pair with the lowest reconstruction error
is merged first (ties leftmost), the pair is replaced by its encoding,
and the procedure repeats until a single root vector remains. The
procedure is deliberately not syntax directed.

Training minimizes the total greedy reconstruction error over a corpus by
backprop through the merge structure. The structure is recomputed from
the current parameters each epoch and frozen while gradients are taken.
The baseline optimizer is full-batch gradient descent with a backtracking
(Armijo) line search; a limited-memory quasi-Newton optimizer is an
optional drop-in behind the same interface. Term embeddings are
initialized from the skip-gram dictionary and fine-tuned unless frozen.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import kernels
from .corpus import Corpus
from .embed import Dictionary

UNK = "<UNK>"

ARMIJO_C = 1e-4


class RaeTrainingError(Exception):
    pass


@dataclass
class EncoderParams:
    """Autoencoder matrices/biases plus the (fine-tuned) term table."""

    vocab: list[str]
    embeddings: np.ndarray  # (V, n); includes the reserved <UNK> row
    enc: np.ndarray  # (n, 2n)  [enc_left | enc_right]
    dec: np.ndarray  # (2n, n)  [dec_left ; dec_right]
    bias_z: np.ndarray  # (n,)
    bias_y: np.ndarray  # (2n,)
    _index: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self._index:
            self._index = {term: i for i, term in enumerate(self.vocab)}
        self._check_dims()

    def _check_dims(self) -> None:
        n = self.n
        if self.enc.shape != (n, 2 * n) or self.dec.shape != (2 * n, n):
            raise ValueError("encoder/decoder dimensions inconsistent")
        if self.bias_z.shape != (n,) or self.bias_y.shape != (2 * n,):
            raise ValueError("bias dimensions inconsistent")
        for arr in (self.embeddings, self.enc, self.dec, self.bias_z, self.bias_y):
            if not np.all(np.isfinite(arr)):
                raise ValueError("non-finite parameter")

    @property
    def n(self) -> int:
        return int(self.embeddings.shape[1])

    def token_ids(self, tokens) -> np.ndarray:
        unk = self._index[UNK]
        return np.array([self._index.get(t, unk) for t in tokens], dtype=np.int64)

    def leaf_matrix(self, tokens) -> np.ndarray:
        return self.embeddings[self.token_ids(tokens)]


def init_params(dictionary: Dictionary, seed: int = 0) -> EncoderParams:
    """Fresh cell matrices; embeddings copied from the dictionary with one
    reserved <UNK> row (the mean vector) appended."""
    n = dictionary.dim
    rng = np.random.default_rng(seed)
    scale = 1.0 / np.sqrt(2 * n)
    vocab = list(dictionary.vocab)
    if UNK in vocab:
        raise ValueError(f"{UNK!r} may not appear in the training vocabulary")
    vocab.append(UNK)
    unk_row = dictionary.vectors.mean(axis=0, keepdims=True)
    embeddings = np.vstack([dictionary.vectors, unk_row])
    return EncoderParams(
        vocab=vocab,
        embeddings=embeddings,
        enc=rng.uniform(-scale, scale, size=(n, 2 * n)),
        dec=rng.uniform(-scale, scale, size=(2 * n, n)),
        bias_z=np.zeros(n),
        bias_y=np.zeros(2 * n),
    )


# ---------------------------------------------------------------------------
# cell operations


def encode_pair(x_l, x_r, params: EncoderParams, normalize: bool = True) -> np.ndarray:
    """Encode one adjacent pair (unit-normalized unless ``normalize=False``;
    a zero vector is returned unnormalized)."""
    x_l = np.asarray(x_l, dtype=np.float64)
    x_r = np.asarray(x_r, dtype=np.float64)
    if x_l.shape != (params.n,) or x_r.shape != (params.n,):
        raise ValueError(f"expected {params.n}-vectors")
    t = np.tanh(params.enc @ np.concatenate((x_l, x_r)) + params.bias_z)
    if not normalize:
        return t
    r = float(np.sqrt(t @ t))
    return t / r if r > 0.0 else t


def decode(z, params: EncoderParams) -> tuple[np.ndarray, np.ndarray]:
    """Reconstruct the pair from an encoding."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (params.n,):
        raise ValueError(f"expected a {params.n}-vector")
    y = params.dec @ z + params.bias_y
    return y[: params.n], y[params.n :]


def reconstruction_error(x_l, x_r, params: EncoderParams) -> float:
    """Squared reconstruction error of encoding then decoding the pair."""
    x_hat_l, x_hat_r = decode(encode_pair(x_l, x_r, params), params)
    dl = np.asarray(x_l, dtype=np.float64) - x_hat_l
    dr = np.asarray(x_r, dtype=np.float64) - x_hat_r
    return float(dl @ dl + dr @ dr)


# ---------------------------------------------------------------------------
# greedy stream encoding


@dataclass(frozen=True)
class MergeStep:
    left: int  # position of the left element in the then-current stream
    right: int
    error: float


@dataclass
class MergeTrace:
    tokens: tuple[str, ...]
    merges: list[MergeStep]
    root: np.ndarray
    child: np.ndarray = field(repr=False)  # (m, 2) node ids for replay

    @property
    def total_error(self) -> float:
        return float(sum(step.error for step in self.merges))


def greedy_encode(stream, params: EncoderParams) -> MergeTrace:
    """Greedy reduction of a token stream; length-1 streams return the
    term embedding with an empty trace. Out-of-vocabulary terms map to
    the reserved <UNK> vector."""
    tokens = tuple(stream)
    if not tokens:
        raise ValueError("cannot encode an empty stream")
    X = params.leaf_matrix(tokens)
    if len(tokens) == 1:
        return MergeTrace(tokens, [], X[0].copy(), np.empty((0, 2), dtype=np.int64))
    positions, child, errors, nodes = kernels.greedy_encode(
        X, params.enc, params.dec, params.bias_z, params.bias_y
    )
    merges = [
        MergeStep(int(p), int(p) + 1, float(e)) for p, e in zip(positions, errors)
    ]
    return MergeTrace(tokens, merges, nodes[-1].copy(), child)


def trace_errors(trace: MergeTrace, params: EncoderParams) -> np.ndarray:
    """Per-merge errors of a recorded trace recomputed under ``params``."""
    X = params.leaf_matrix(trace.tokens)
    return kernels.structure_errors(
        X, params.enc, params.dec, params.bias_z, params.bias_y, trace.child
    )


# ---------------------------------------------------------------------------
# corpus objective (frozen structures)


def _line_ids(corpus: Corpus, params: EncoderParams) -> list[np.ndarray]:
    return [params.token_ids(toks) for _k, toks in corpus.entries]


def corpus_structures(line_ids, params: EncoderParams) -> list[np.ndarray]:
    """Greedy merge structure of every line under the current parameters."""
    structures = []
    for ids in line_ids:
        if len(ids) < 2:
            structures.append(np.empty((0, 2), dtype=np.int64))
            continue
        _pos, child, _err, _nodes = kernels.greedy_encode(
            params.embeddings[ids], params.enc, params.dec, params.bias_z, params.bias_y
        )
        structures.append(child)
    return structures


def corpus_loss(line_ids, structures, params: EncoderParams) -> float:
    """Total reconstruction error over lines with frozen merge structures."""
    total = 0.0
    for ids, child in zip(line_ids, structures):
        if len(ids) < 2:
            continue
        errs = kernels.structure_errors(
            params.embeddings[ids], params.enc, params.dec, params.bias_z, params.bias_y, child
        )
        total += float(errs.sum())
    return total


def corpus_grad(line_ids, structures, params: EncoderParams):
    """Loss and gradients (enc, dec, bias_z, bias_y, embeddings) with the
    merge structures frozen; per-line contributions are summed in fixed
    line order."""
    genc = np.zeros_like(params.enc)
    gdec = np.zeros_like(params.dec)
    gbz = np.zeros_like(params.bias_z)
    gby = np.zeros_like(params.bias_y)
    gemb = np.zeros_like(params.embeddings)
    total = 0.0
    for ids, child in zip(line_ids, structures):
        if len(ids) < 2:
            continue
        loss, ge, gd, gz, gy, gX = kernels.structure_grad(
            params.embeddings[ids], params.enc, params.dec, params.bias_z, params.bias_y, child
        )
        total += loss
        genc += ge
        gdec += gd
        gbz += gz
        gby += gy
        np.add.at(gemb, ids, gX)
    return total, genc, gdec, gbz, gby, gemb


def greedy_corpus_loss(line_ids, params: EncoderParams) -> float:
    """The true training objective: greedy structures recomputed under
    ``params`` before summing reconstruction errors."""
    return corpus_loss(line_ids, corpus_structures(line_ids, params), params)


# ---------------------------------------------------------------------------
# training


@dataclass(frozen=True)
class RaeConfig:
    epochs: int = 50
    seed: int = 0
    finetune_embeddings: bool = True
    optimizer: str = "gd"  # "gd" | "lbfgs"
    max_backtracks: int = 40
    lbfgs_steps_per_epoch: int = 10


@dataclass
class RaeTrainResult:
    params: EncoderParams
    losses: list[float]  # greedy corpus loss per epoch boundary (first = init)


def _apply_step(params: EncoderParams, direction, alpha: float, finetune: bool) -> EncoderParams:
    denc, ddec, dbz, dby, demb = direction
    return EncoderParams(
        vocab=params.vocab,
        embeddings=params.embeddings + alpha * demb if finetune else params.embeddings,
        enc=params.enc + alpha * denc,
        dec=params.dec + alpha * ddec,
        bias_z=params.bias_z + alpha * dbz,
        bias_y=params.bias_y + alpha * dby,
        _index=params._index,
    )


def train_rae(corpus: Corpus, dictionary: Dictionary, config: RaeConfig | None = None, **overrides) -> RaeTrainResult:
    """Fit the autoencoder (and, by default, the term embeddings) to a
    corpus. Deterministic for a fixed seed; loss is monotonically
    non-increasing across epochs because steps are only accepted when the
    recomputed greedy objective decreases."""
    config = replace(config or RaeConfig(), **overrides)
    if not corpus.entries:
        raise RaeTrainingError("empty corpus")
    missing = [t for t in corpus.vocabulary() if t not in dictionary]
    if missing:
        raise RaeTrainingError(f"dictionary does not cover corpus terms: {missing[:5]}")
    params = init_params(dictionary, seed=config.seed)
    line_ids = _line_ids(corpus, params)
    if config.optimizer == "lbfgs":
        return _train_lbfgs(line_ids, params, config)
    if config.optimizer != "gd":
        raise ValueError(f"unknown optimizer {config.optimizer!r}")

    losses = [greedy_corpus_loss(line_ids, params)]
    if not np.isfinite(losses[0]):
        raise RaeTrainingError(f"non-finite loss at initialization: {losses[0]}")
    alpha = 1.0
    for _epoch in range(config.epochs):
        structures = corpus_structures(line_ids, params)
        loss, genc, gdec, gbz, gby, gemb = corpus_grad(line_ids, structures, params)
        if not config.finetune_embeddings:
            gemb = np.zeros_like(gemb)
        gnorm2 = sum(float(np.sum(g * g)) for g in (genc, gdec, gbz, gby, gemb))
        if gnorm2 == 0.0:
            break
        direction = (-genc, -gdec, -gbz, -gby, -gemb)
        alpha = min(alpha * 2.0, 1.0)
        accepted = None
        for _ in range(config.max_backtracks):
            candidate = _apply_step(params, direction, alpha, config.finetune_embeddings)
            cand_loss = greedy_corpus_loss(line_ids, candidate)
            if not np.isfinite(cand_loss):
                raise RaeTrainingError(f"non-finite loss during line search: {cand_loss}")
            if cand_loss <= loss - ARMIJO_C * alpha * gnorm2:
                accepted = (candidate, cand_loss)
                break
            alpha *= 0.5
        if accepted is None:
            break
        params, new_loss = accepted
        losses.append(new_loss)
    return RaeTrainResult(params, losses)


def _train_lbfgs(line_ids, params: EncoderParams, config: RaeConfig) -> RaeTrainResult:
    """Quasi-Newton drop-in: per epoch, a limited-memory BFGS run on the
    frozen-structure objective, accepted only when the recomputed greedy
    loss decreases."""
    from scipy.optimize import minimize

    n = params.n
    shapes = [(n, 2 * n), (2 * n, n), (n,), (2 * n,), params.embeddings.shape]
    sizes = [int(np.prod(s)) for s in shapes]

    def pack(p: EncoderParams) -> np.ndarray:
        return np.concatenate([a.ravel() for a in (p.enc, p.dec, p.bias_z, p.bias_y, p.embeddings)])

    def unpack(x: np.ndarray) -> EncoderParams:
        parts = []
        offset = 0
        for shape, size in zip(shapes, sizes):
            parts.append(x[offset : offset + size].reshape(shape))
            offset += size
        return EncoderParams(
            vocab=params.vocab,
            enc=parts[0],
            dec=parts[1],
            bias_z=parts[2],
            bias_y=parts[3],
            embeddings=parts[4],
            _index=params._index,
        )

    losses = [greedy_corpus_loss(line_ids, params)]
    for _epoch in range(config.epochs):
        structures = corpus_structures(line_ids, params)

        def objective(x):
            p = unpack(x)
            loss, genc, gdec, gbz, gby, gemb = corpus_grad(line_ids, structures, p)
            if not config.finetune_embeddings:
                gemb = np.zeros_like(gemb)
            grad = np.concatenate([g.ravel() for g in (genc, gdec, gbz, gby, gemb)])
            return loss, grad

        res = minimize(
            objective,
            pack(params),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": config.lbfgs_steps_per_epoch},
        )
        candidate = unpack(res.x)
        cand_loss = greedy_corpus_loss(line_ids, candidate)
        if not np.isfinite(cand_loss):
            raise RaeTrainingError(f"non-finite loss during optimization: {cand_loss}")
        if cand_loss >= losses[-1]:
            break
        params = candidate
        losses.append(cand_loss)
    return RaeTrainResult(params, losses)


# ---------------------------------------------------------------------------
# diagnostics


def gradient_check(corpus: Corpus, dictionary: Dictionary, seed: int = 0, h: float = 1e-5):
    """Compare analytic backprop-through-structure gradients against
    central finite differences of the frozen-structure loss.

    Returns the worst relative error over every parameter (cell matrices,
    biases, and term embeddings).
    """
    params = init_params(dictionary, seed=seed)
    line_ids = _line_ids(corpus, params)
    structures = corpus_structures(line_ids, params)
    _loss, genc, gdec, gbz, gby, gemb = corpus_grad(line_ids, structures, params)
    worst = 0.0
    arrays = (
        (params.enc, genc),
        (params.dec, gdec),
        (params.bias_z, gbz),
        (params.bias_y, gby),
        (params.embeddings, gemb),
    )
    for arr, grad in arrays:
        flat = arr.reshape(-1)
        gflat = grad.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = corpus_loss(line_ids, structures, params)
            flat[i] = orig - h
            down = corpus_loss(line_ids, structures, params)
            flat[i] = orig
            fd = (up - down) / (2.0 * h)
            rel = abs(fd - gflat[i]) / max(abs(fd), abs(gflat[i]), 1e-8)
            worst = max(worst, rel)
    return worst


# ---------------------------------------------------------------------------
# encoder.mat


def save_params(params: EncoderParams, path: Path) -> None:
    n = params.n
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{n}\n")
        for matrix in (params.enc, params.dec):
            for row in matrix:
                fh.write(" ".join(f"{x:.17g}" for x in row) + "\n")
        fh.write(" ".join(f"{x:.17g}" for x in params.bias_z) + "\n")
        fh.write(" ".join(f"{x:.17g}" for x in params.bias_y) + "\n")
        V = len(params.vocab)
        fh.write(f"{V} {n}\n")
        for term, row in zip(params.vocab, params.embeddings):
            fh.write(term + " " + " ".join(f"{x:.17g}" for x in row) + "\n")


def load_params(path: Path) -> EncoderParams:
    with open(path, encoding="utf-8") as fh:
        n = int(fh.readline())

        def read_rows(rows: int) -> np.ndarray:
            return np.array([[float(x) for x in fh.readline().split()] for _ in range(rows)])

        enc = read_rows(n)
        dec = read_rows(2 * n)
        bias_z = read_rows(1)[0]
        bias_y = read_rows(1)[0]
        header = fh.readline().split()
        V = int(header[0])
        vocab = []
        embeddings = np.empty((V, n))
        for i in range(V):
            parts = fh.readline().split()
            vocab.append(parts[0])
            embeddings[i] = [float(x) for x in parts[1:]]
    return EncoderParams(vocab, embeddings, enc, dec, bias_z, bias_y)
