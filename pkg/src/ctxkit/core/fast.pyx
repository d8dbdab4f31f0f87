# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contracts as :mod:`ctxkit.core.purepy`."""

import numpy as np

from libc.stdint cimport uint64_t


def rref(rows, Py_ssize_t ncols):
    """Gauss-Jordan elimination over GF(2) on 64-bit packed rows."""
    rows = [x for x in rows if x]
    cdef Py_ssize_t n = len(rows)
    if n == 0:
        return []
    cdef Py_ssize_t top = max(ncols, max(x.bit_length() for x in rows))
    cdef Py_ssize_t nw = (top + 63) // 64
    nbytes = nw * 8
    buf = bytearray(b"".join([x.to_bytes(nbytes, "little") for x in rows]))
    arr = np.frombuffer(buf, dtype=np.uint64).reshape(n, nw)
    cdef uint64_t[:, ::1] M = arr
    cdef Py_ssize_t rk = 0, col, w, i, j, k
    cdef uint64_t bit, tmp
    pivots = []
    for col in range(top):
        w = col >> 6
        bit = (<uint64_t>1) << (col & 63)
        i = rk
        while i < n and not (M[i, w] & bit):
            i += 1
        if i == n:
            continue
        if i != rk:
            for k in range(w, nw):
                tmp = M[i, k]
                M[i, k] = M[rk, k]
                M[rk, k] = tmp
        for j in range(n):
            if j != rk and (M[j, w] & bit):
                for k in range(w, nw):
                    M[j, k] ^= M[rk, k]
        pivots.append(col)
        rk += 1
        if rk == n:
            break
    out = []
    for i in range(rk):
        out.append((pivots[i], int.from_bytes(arr[i].tobytes(), "little")))
    return out
