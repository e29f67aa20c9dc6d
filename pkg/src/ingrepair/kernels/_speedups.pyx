# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the autoencoder hot kernels.

Mirrors ``_ref`` exactly: greedy pair merging, frozen-structure error
replay, and backprop through structure. See ``_ref`` for the contract.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt, tanh

cnp.import_array()

BACKEND_NAME = "cython"


cdef void _pair_c(
    double[:, ::1] nodes,
    Py_ssize_t il,
    Py_ssize_t ir,
    double[:, ::1] enc,
    double[:, ::1] dec,
    double[::1] bz,
    double[::1] by,
    double[::1] tbuf,
    double[::1] zout,
    double* err_out,
) noexcept nogil:
    cdef Py_ssize_t n = bz.shape[0]
    cdef Py_ssize_t i, k
    cdef double acc, r, e, d
    for i in range(n):
        acc = bz[i]
        for k in range(n):
            acc += enc[i, k] * nodes[il, k]
        for k in range(n):
            acc += enc[i, n + k] * nodes[ir, k]
        tbuf[i] = tanh(acc)
    r = 0.0
    for i in range(n):
        r += tbuf[i] * tbuf[i]
    r = sqrt(r)
    if r > 0.0:
        for i in range(n):
            zout[i] = tbuf[i] / r
    else:
        for i in range(n):
            zout[i] = tbuf[i]
    e = 0.0
    for i in range(2 * n):
        acc = by[i]
        for k in range(n):
            acc += dec[i, k] * zout[k]
        if i < n:
            d = nodes[il, i] - acc
        else:
            d = nodes[ir, i - n] - acc
        e += d * d
    err_out[0] = e


def greedy_encode(X, enc, dec, bz, by):
    X = np.ascontiguousarray(X, dtype=np.float64)
    enc = np.ascontiguousarray(enc, dtype=np.float64)
    dec = np.ascontiguousarray(dec, dtype=np.float64)
    bz = np.ascontiguousarray(bz, dtype=np.float64)
    by = np.ascontiguousarray(by, dtype=np.float64)

    cdef Py_ssize_t L = X.shape[0]
    cdef Py_ssize_t n = X.shape[1]
    nodes_arr = np.empty((2 * L - 1, n), dtype=np.float64)
    nodes_arr[:L] = X
    positions_arr = np.empty(L - 1, dtype=np.int64)
    child_arr = np.empty((L - 1, 2), dtype=np.int64)
    errors_arr = np.empty(L - 1, dtype=np.float64)
    if L == 1:
        return positions_arr, child_arr, errors_arr, nodes_arr

    cdef double[:, ::1] nodes = nodes_arr
    cdef double[:, ::1] enc_v = enc
    cdef double[:, ::1] dec_v = dec
    cdef double[::1] bz_v = bz
    cdef double[::1] by_v = by
    cdef long long[::1] positions = positions_arr
    cdef long long[:, ::1] child = child_arr
    cdef double[::1] errors = errors_arr

    active_arr = np.arange(L, dtype=np.int64)
    errs_arr = np.empty(L - 1, dtype=np.float64)
    zbuf_arr = np.empty((L - 1, n), dtype=np.float64)
    tbuf_arr = np.empty(n, dtype=np.float64)
    cdef long long[::1] active = active_arr
    cdef double[::1] errs = errs_arr
    cdef double[:, ::1] zbuf = zbuf_arr
    cdef double[::1] tbuf = tbuf_arr

    cdef Py_ssize_t count = L
    cdef Py_ssize_t nslots = L - 1
    cdef Py_ssize_t step, i, k, best, node_id
    cdef double err

    with nogil:
        for i in range(nslots):
            _pair_c(nodes, active[i], active[i + 1], enc_v, dec_v, bz_v, by_v, tbuf, zbuf[i], &err)
            errs[i] = err
        for step in range(L - 1):
            best = 0
            for i in range(1, nslots):
                if errs[i] < errs[best]:
                    best = i
            node_id = L + step
            for k in range(n):
                nodes[node_id, k] = zbuf[best, k]
            positions[step] = best
            child[step, 0] = active[best]
            child[step, 1] = active[best + 1]
            errors[step] = errs[best]
            active[best] = node_id
            for i in range(best + 1, count - 1):
                active[i] = active[i + 1]
            count -= 1
            for i in range(best, nslots - 1):
                errs[i] = errs[i + 1]
                for k in range(n):
                    zbuf[i, k] = zbuf[i + 1, k]
            nslots -= 1
            if best < nslots:
                _pair_c(nodes, active[best], active[best + 1], enc_v, dec_v, bz_v, by_v, tbuf, zbuf[best], &err)
                errs[best] = err
            if best > 0:
                _pair_c(nodes, active[best - 1], active[best], enc_v, dec_v, bz_v, by_v, tbuf, zbuf[best - 1], &err)
                errs[best - 1] = err
    return positions_arr, child_arr, errors_arr, nodes_arr


def structure_errors(X, enc, dec, bz, by, child):
    X = np.ascontiguousarray(X, dtype=np.float64)
    enc = np.ascontiguousarray(enc, dtype=np.float64)
    dec = np.ascontiguousarray(dec, dtype=np.float64)
    bz = np.ascontiguousarray(bz, dtype=np.float64)
    by = np.ascontiguousarray(by, dtype=np.float64)
    child = np.ascontiguousarray(child, dtype=np.int64)

    cdef Py_ssize_t L = X.shape[0]
    cdef Py_ssize_t n = X.shape[1]
    cdef Py_ssize_t m = child.shape[0]
    nodes_arr = np.empty((L + m, n), dtype=np.float64)
    nodes_arr[:L] = X
    errors_arr = np.empty(m, dtype=np.float64)

    cdef double[:, ::1] nodes = nodes_arr
    cdef double[:, ::1] enc_v = enc
    cdef double[:, ::1] dec_v = dec
    cdef double[::1] bz_v = bz
    cdef double[::1] by_v = by
    cdef long long[:, ::1] child_v = child
    cdef double[::1] errors = errors_arr
    tbuf_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] tbuf = tbuf_arr
    cdef Py_ssize_t j
    cdef double err

    with nogil:
        for j in range(m):
            _pair_c(nodes, child_v[j, 0], child_v[j, 1], enc_v, dec_v, bz_v, by_v, tbuf, nodes[L + j], &err)
            errors[j] = err
    return errors_arr


def structure_grad(X, enc, dec, bz, by, child):
    X = np.ascontiguousarray(X, dtype=np.float64)
    enc = np.ascontiguousarray(enc, dtype=np.float64)
    dec = np.ascontiguousarray(dec, dtype=np.float64)
    bz = np.ascontiguousarray(bz, dtype=np.float64)
    by = np.ascontiguousarray(by, dtype=np.float64)
    child = np.ascontiguousarray(child, dtype=np.int64)

    cdef Py_ssize_t L = X.shape[0]
    cdef Py_ssize_t n = X.shape[1]
    cdef Py_ssize_t m = child.shape[0]

    nodes_arr = np.empty((L + m, n), dtype=np.float64)
    nodes_arr[:L] = X
    ts_arr = np.empty((m, n), dtype=np.float64)
    rs_arr = np.empty(m, dtype=np.float64)
    ys_arr = np.empty((m, 2 * n), dtype=np.float64)
    genc_arr = np.zeros_like(enc)
    gdec_arr = np.zeros_like(dec)
    gbz_arr = np.zeros_like(bz)
    gby_arr = np.zeros_like(by)
    gnodes_arr = np.zeros((L + m, n), dtype=np.float64)
    gz_arr = np.empty(n, dtype=np.float64)
    ga_arr = np.empty(n, dtype=np.float64)
    dy_arr = np.empty(2 * n, dtype=np.float64)

    cdef double[:, ::1] nodes = nodes_arr
    cdef double[:, ::1] enc_v = enc
    cdef double[:, ::1] dec_v = dec
    cdef double[::1] bz_v = bz
    cdef double[::1] by_v = by
    cdef long long[:, ::1] child_v = child
    cdef double[:, ::1] ts = ts_arr
    cdef double[::1] rs = rs_arr
    cdef double[:, ::1] ys = ys_arr
    cdef double[:, ::1] genc = genc_arr
    cdef double[:, ::1] gdec = gdec_arr
    cdef double[::1] gbz = gbz_arr
    cdef double[::1] gby = gby_arr
    cdef double[:, ::1] gnodes = gnodes_arr
    cdef double[::1] gz = gz_arr
    cdef double[::1] ga = ga_arr
    cdef double[::1] dy = dy_arr

    cdef Py_ssize_t j, i, k, il, ir
    cdef double acc, r, e, d, zdot, loss = 0.0

    with nogil:
        # forward, saving (t, r, y) per merge
        for j in range(m):
            il = child_v[j, 0]
            ir = child_v[j, 1]
            for i in range(n):
                acc = bz_v[i]
                for k in range(n):
                    acc += enc_v[i, k] * nodes[il, k]
                for k in range(n):
                    acc += enc_v[i, n + k] * nodes[ir, k]
                ts[j, i] = tanh(acc)
            r = 0.0
            for i in range(n):
                r += ts[j, i] * ts[j, i]
            r = sqrt(r)
            rs[j] = r
            if r > 0.0:
                for i in range(n):
                    nodes[L + j, i] = ts[j, i] / r
            else:
                for i in range(n):
                    nodes[L + j, i] = ts[j, i]
            for i in range(2 * n):
                acc = by_v[i]
                for k in range(n):
                    acc += dec_v[i, k] * nodes[L + j, k]
                ys[j, i] = acc
                if i < n:
                    d = nodes[il, i] - acc
                else:
                    d = nodes[ir, i - n] - acc
                loss += d * d

        # backward
        for j in range(m - 1, -1, -1):
            il = child_v[j, 0]
            ir = child_v[j, 1]
            for i in range(n):
                gz[i] = gnodes[L + j, i]
            for i in range(2 * n):
                if i < n:
                    d = nodes[il, i]
                else:
                    d = nodes[ir, i - n]
                dy[i] = 2.0 * (ys[j, i] - d)
            for i in range(2 * n):
                for k in range(n):
                    gdec[i, k] += dy[i] * nodes[L + j, k]
                gby[i] += dy[i]
            for k in range(n):
                acc = 0.0
                for i in range(2 * n):
                    acc += dec_v[i, k] * dy[i]
                gz[k] += acc
            r = rs[j]
            if r > 0.0:
                zdot = 0.0
                for i in range(n):
                    zdot += nodes[L + j, i] * gz[i]
                for i in range(n):
                    ga[i] = ((gz[i] - nodes[L + j, i] * zdot) / r) * (1.0 - ts[j, i] * ts[j, i])
            else:
                for i in range(n):
                    ga[i] = gz[i] * (1.0 - ts[j, i] * ts[j, i])
            for i in range(n):
                for k in range(n):
                    genc[i, k] += ga[i] * nodes[il, k]
                for k in range(n):
                    genc[i, n + k] += ga[i] * nodes[ir, k]
                gbz[i] += ga[i]
            for k in range(n):
                acc = 0.0
                for i in range(n):
                    acc += enc_v[i, k] * ga[i]
                gnodes[il, k] += acc + 2.0 * (nodes[il, k] - ys[j, k])
            for k in range(n):
                acc = 0.0
                for i in range(n):
                    acc += enc_v[i, n + k] * ga[i]
                gnodes[ir, k] += acc + 2.0 * (nodes[ir, k] - ys[j, n + k])

    return loss, genc_arr, gdec_arr, gbz_arr, gby_arr, gnodes_arr[:L].copy()
