"""Pure-numpy reference implementation of the autoencoder hot kernels.

The compiled backend (``_speedups``) exposes the same four functions with
identical semantics; this module is the import-time fallback and the
ground truth the extension is tested against.

Conventions: ``X`` is the (L, n) float64 matrix of leaf embeddings for one
token stream; ``enc`` is (n, 2n), ``dec`` is (2n, n), ``bz`` is (n,),
``by`` is (2n,). Each composed encoding is unit-normalized (an all-zero
pre-activation passes through unchanged). ``child`` rows index into the
node array where rows ``0..L-1`` are leaves and row ``L+j`` is the output
of merge ``j``.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def _pair(cl, cr, enc, dec, bz, by):
    """Encode one adjacent pair; returns (z, error)."""
    n = cl.shape[0]
    cat = np.concatenate((cl, cr))
    t = np.tanh(enc @ cat + bz)
    r = float(np.sqrt(t @ t))
    z = t / r if r > 0.0 else t
    y = dec @ z + by
    dl = cl - y[:n]
    dr = cr - y[n:]
    return z, float(dl @ dl + dr @ dr)


def greedy_encode(X, enc, dec, bz, by):
    """Greedily merge the lowest-reconstruction-error adjacent pair until
    one node remains (ties broken leftmost).

    Returns ``(positions, child, errors, nodes)``: for merge ``j``,
    ``positions[j]`` is the left slot in the then-current stream,
    ``child[j]`` the two node ids merged, ``errors[j]`` the reconstruction
    error of that pair, and ``nodes`` the full (2L-1, n) node matrix.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    L, n = X.shape
    nodes = np.empty((2 * L - 1, n), dtype=np.float64)
    nodes[:L] = X
    positions = np.empty(L - 1, dtype=np.int64)
    child = np.empty((L - 1, 2), dtype=np.int64)
    errors = np.empty(L - 1, dtype=np.float64)

    active = list(range(L))
    slots: list[tuple[np.ndarray, float]] = [
        _pair(nodes[active[i]], nodes[active[i + 1]], enc, dec, bz, by) for i in range(L - 1)
    ]
    for step in range(L - 1):
        best = 0
        for i in range(1, len(slots)):
            if slots[i][1] < slots[best][1]:
                best = i
        z, err = slots[best]
        node_id = L + step
        nodes[node_id] = z
        positions[step] = best
        child[step, 0] = active[best]
        child[step, 1] = active[best + 1]
        errors[step] = err
        active[best] = node_id
        del active[best + 1]
        del slots[best]
        if best < len(slots):
            slots[best] = _pair(nodes[active[best]], nodes[active[best + 1]], enc, dec, bz, by)
        if best > 0:
            slots[best - 1] = _pair(nodes[active[best - 1]], nodes[active[best]], enc, dec, bz, by)
    return positions, child, errors, nodes


def structure_errors(X, enc, dec, bz, by, child):
    """Per-merge reconstruction errors of a fixed merge structure."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    L, n = X.shape
    m = child.shape[0]
    nodes = np.empty((L + m, n), dtype=np.float64)
    nodes[:L] = X
    errors = np.empty(m, dtype=np.float64)
    for j in range(m):
        z, err = _pair(nodes[child[j, 0]], nodes[child[j, 1]], enc, dec, bz, by)
        nodes[L + j] = z
        errors[j] = err
    return errors


def structure_grad(X, enc, dec, bz, by, child):
    """Backprop through structure: loss and gradients for one stream.

    Returns ``(loss, genc, gdec, gbz, gby, gX)`` where the loss is the sum
    of per-merge reconstruction errors under the fixed structure and
    ``gX`` holds per-leaf gradients.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    L, n = X.shape
    m = child.shape[0]
    nodes = np.empty((L + m, n), dtype=np.float64)
    nodes[:L] = X

    cats = np.empty((m, 2 * n))
    ts = np.empty((m, n))
    rs = np.empty(m)
    ys = np.empty((m, 2 * n))
    loss = 0.0
    for j in range(m):
        cl = nodes[child[j, 0]]
        cr = nodes[child[j, 1]]
        cat = np.concatenate((cl, cr))
        t = np.tanh(enc @ cat + bz)
        r = float(np.sqrt(t @ t))
        z = t / r if r > 0.0 else t
        y = dec @ z + by
        d = cat - y
        loss += float(d @ d)
        cats[j] = cat
        ts[j] = t
        rs[j] = r
        ys[j] = y
        nodes[L + j] = z

    genc = np.zeros_like(enc)
    gdec = np.zeros_like(dec)
    gbz = np.zeros_like(bz)
    gby = np.zeros_like(by)
    gnodes = np.zeros((L + m, n))
    for j in range(m - 1, -1, -1):
        cat = cats[j]
        t = ts[j]
        r = rs[j]
        y = ys[j]
        z = nodes[L + j]
        gz = gnodes[L + j].copy()
        dy = 2.0 * (y - cat)
        gdec += np.outer(dy, z)
        gby += dy
        gz += dec.T @ dy
        gt = (gz - z * float(z @ gz)) / r if r > 0.0 else gz
        ga = gt * (1.0 - t * t)
        genc += np.outer(ga, cat)
        gbz += ga
        gcat = enc.T @ ga
        gnodes[child[j, 0]] += gcat[:n] + 2.0 * (cat[:n] - y[:n])
        gnodes[child[j, 1]] += gcat[n:] + 2.0 * (cat[n:] - y[n:])
    return loss, genc, gdec, gbz, gby, gnodes[:L]


def pairwise_sq_dists(V):
    """Squared Euclidean distances between all rows of ``V`` (m, n)."""
    V = np.asarray(V, dtype=np.float64)
    sq = np.sum(V * V, axis=1)
    d = sq[:, None] + sq[None, :] - 2.0 * (V @ V.T)
    np.maximum(d, 0.0, out=d)
    return d
