# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled elimination kernel over GF(p), p < 2**31."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef long long i64


cdef inline i64 _inv_mod(i64 a, i64 p) noexcept nogil:
    cdef i64 t = 0, new_t = 1, r = p, new_r = a, quo, tmp
    while new_r != 0:
        quo = r // new_r
        tmp = t - quo * new_t
        t = new_t
        new_t = tmp
        tmp = r - quo * new_r
        r = new_r
        new_r = tmp
    if t < 0:
        t += p
    return t


def rref_inplace(cnp.ndarray m_arr, long long p, long long ncols=-1):
    if m_arr.dtype != np.int64 or not m_arr.flags.c_contiguous:
        raise TypeError("expected a C-contiguous int64 array")
    cdef i64[:, ::1] m = m_arr
    cdef Py_ssize_t rows = m.shape[0], cols = m.shape[1]
    cdef Py_ssize_t limit = cols if ncols < 0 else ncols
    cdef Py_ssize_t r = 0, c, i, k, piv
    cdef i64 inv, f, tmp
    pivots = []
    with nogil:
        for c in range(limit):
            if r == rows:
                break
            piv = -1
            for i in range(r, rows):
                if m[i, c] != 0:
                    piv = i
                    break
            if piv < 0:
                continue
            if piv != r:
                for k in range(cols):
                    tmp = m[r, k]
                    m[r, k] = m[piv, k]
                    m[piv, k] = tmp
            inv = _inv_mod(m[r, c], p)
            if inv != 1:
                for k in range(c, cols):
                    m[r, k] = (m[r, k] * inv) % p
            for i in range(rows):
                if i == r:
                    continue
                f = m[i, c]
                if f == 0:
                    continue
                for k in range(c, cols):
                    if m[r, k] != 0:
                        m[i, k] = (m[i, k] - f * m[r, k]) % p
                        if m[i, k] < 0:
                            m[i, k] += p
            with gil:
                pivots.append(c)
            r += 1
    return pivots
