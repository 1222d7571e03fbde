# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled table-agent decision step; mirrors ``_table_py.table_step``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()


cdef inline int _bucket(int64_t c, int64_t a) noexcept nogil:
    cdef double r
    if a == 0:
        return -1
    r = <double>c / <double>a
    if r < 0.33:
        return 0
    if r > 0.66:
        return 2
    return 1


cdef inline double _prob(int tier, int last, int own, int inner, double first,
                         const double[::1] la, const double[:, :, ::1] grid) noexcept nogil:
    if tier == 0 or last < 0:
        return first
    if tier == 1 or own < 0 or inner < 0:
        return la[last]
    return grid[last, own, inner]


def table_step(const int64_t[::1] ei, const int64_t[::1] ej, const signed char[::1] tiers,
               const signed char[::1] last, const int64_t[::1] coops, const int64_t[::1] acts,
               const int64_t[::1] indptr, const int64_t[::1] indices,
               const double[::1] ui, const double[::1] uj, double first,
               const double[::1] la, const double[:, :, ::1] nr, const double[:, :, ::1] ar):
    cdef Py_ssize_t m = ei.shape[0]
    cdef Py_ssize_t n = coops.shape[0]
    cdef Py_ssize_t e, a, k
    cdef int64_t i, j, nc, na
    cdef int ti, tj, lc, lm, bi, bj, ni, nj
    cdef double pi, pj
    out_arr = np.empty((m, 2), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    nb_arr = np.empty(n, dtype=np.int32)
    cdef int[::1] nb = nb_arr
    with nogil:
        for a in range(n):
            nc = 0
            na = 0
            for k in range(indptr[a], indptr[a + 1]):
                nc += coops[indices[k]]
                na += acts[indices[k]]
            nb[a] = _bucket(nc, na)
        for e in range(m):
            i = ei[e]
            j = ej[e]
            ti = tiers[i]
            tj = tiers[j]
            lc = last[e]
            lm = -1 if lc < 0 else (((lc & 1) << 1) | (lc >> 1))
            bi = _bucket(coops[i], acts[i])
            bj = _bucket(coops[j], acts[j])
            if ti == 2:
                pi = _prob(ti, lc, bi, bj, first, la, ar)
            else:
                pi = _prob(ti, lc, bi, nb[i], first, la, nr)
            if tj == 2:
                pj = _prob(tj, lm, bj, bi, first, la, ar)
            else:
                pj = _prob(tj, lm, bj, nb[j], first, la, nr)
            out[e, 0] = 0 if ui[e] < pi else 1
            out[e, 1] = 0 if uj[e] < pj else 1
    return out_arr
