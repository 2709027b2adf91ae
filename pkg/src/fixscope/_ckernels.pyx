# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; same contracts as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log2
from libc.stdlib cimport qsort, malloc, calloc, free
from libc.stdint cimport int64_t, uint16_t

from ._pykernels import interior_bounds

cnp.import_array()

# Alphabet products up to this size are histogrammed in a dense table,
# larger ones fall back to sorting.
cdef enum:
    DENSE_LIMIT = 1 << 22


cdef int _cmp_i64(const void *a, const void *b) noexcept nogil:
    cdef int64_t x = (<int64_t *>a)[0]
    cdef int64_t y = (<int64_t *>b)[0]
    return (x > y) - (x < y)


cdef double _clogc(int64_t c) noexcept nogil:
    return c * log2(<double>c) if c > 1 else 0.0


cdef double _sorted_sum_clogc(int64_t *buf, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    cdef int64_t run = 1
    cdef double acc = 0.0
    qsort(buf, n, sizeof(int64_t), _cmp_i64)
    for i in range(1, n):
        if buf[i] == buf[i - 1]:
            run += 1
        else:
            acc += _clogc(run)
            run = 1
    return acc + _clogc(run)


cdef double _dense_sum_clogc(const int64_t *keys, Py_ssize_t n, int64_t *table) noexcept nogil:
    """Histogram ``keys`` into ``table`` (all zero on entry and on exit)."""
    cdef Py_ssize_t i
    cdef int64_t c
    cdef double acc = 0.0
    for i in range(n):
        table[keys[i]] += 1
    for i in range(n):
        c = table[keys[i]]
        if c:
            acc += _clogc(c)
            table[keys[i]] = 0
    return acc


cdef _linear_offsets(offsets, Py_ssize_t M, Py_ssize_t N):
    off = np.ascontiguousarray(offsets, dtype=np.int64).reshape(-1, 3)
    return np.ascontiguousarray(off[:, 0] * M * N + off[:, 1] * N + off[:, 2])


def neighbor_sum(const uint16_t[:, :, ::1] vol, offsets):
    cdef Py_ssize_t K = vol.shape[0], M = vol.shape[1], N = vol.shape[2]
    (k0, m0, n0), (k1, m1, n1) = interior_bounds((K, M, N), offsets)
    out_arr = np.zeros((max(k1 - k0, 0), max(m1 - m0, 0), max(n1 - n0, 0)), dtype=np.int64)
    if out_arr.size == 0:
        return out_arr
    cdef int64_t[::1] lin = _linear_offsets(offsets, M, N)
    cdef int64_t[:, :, ::1] out = out_arr
    cdef Py_ssize_t K0 = k0, M0 = m0, N0 = n0
    cdef Py_ssize_t nk = out.shape[0], nm = out.shape[1], nn = out.shape[2]
    cdef Py_ssize_t no = lin.shape[0]
    cdef const uint16_t *base = &vol[0, 0, 0]
    cdef const uint16_t *p
    cdef Py_ssize_t k, m, n, j
    cdef int64_t acc
    with nogil:
        for k in range(nk):
            for m in range(nm):
                p = base + ((K0 + k) * M + M0 + m) * N + N0
                for n in range(nn):
                    acc = 0
                    for j in range(no):
                        acc += p[n + lin[j]]
                    out[k, m, n] = acc
    return out_arr


def neighbor_joint_table(const uint16_t[:, :, ::1] vol, offsets, int64_t max_symbol):
    cdef Py_ssize_t K = vol.shape[0], M = vol.shape[1], N = vol.shape[2]
    (k0, m0, n0), (k1, m1, n1) = interior_bounds((K, M, N), offsets)
    cdef int64_t[::1] lin = _linear_offsets(offsets, M, N)
    cdef Py_ssize_t no = lin.shape[0]
    cdef int64_t zdim = no * max_symbol + 1
    table_arr = np.zeros((max_symbol + 1, zdim), dtype=np.int64)
    cdef int64_t *table = <int64_t *>cnp.PyArray_DATA(table_arr)
    cdef Py_ssize_t K0 = k0, K1 = k1, M0 = m0, M1 = m1, N0 = n0, N1 = n1
    cdef const uint16_t *base = &vol[0, 0, 0]
    cdef const uint16_t *p
    cdef Py_ssize_t k, m, n, j
    cdef int64_t acc
    with nogil:
        for k in range(K0, K1):
            for m in range(M0, M1):
                p = base + (k * M + m) * N
                for n in range(N0, N1):
                    acc = 0
                    for j in range(no):
                        acc += p[n + lin[j]]
                    table[p[n] * zdim + acc] += 1
    return table_arr


def grouped_entropies(x, y):
    x = np.ascontiguousarray(x, dtype=np.int64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    cdef int64_t[:, ::1] xv = x
    cdef int64_t[:, ::1] yv = y
    cdef Py_ssize_t G = xv.shape[0], S = xv.shape[1]
    if S == 0:
        raise ValueError("groups must be non-empty")
    cdef int64_t xdim = int(x.max()) + 1 if G else 1
    cdef int64_t ydim = int(y.max()) + 1 if G else 1
    cdef bint dense = xdim * ydim <= DENSE_LIMIT and x.min() >= 0 and y.min() >= 0
    hx_arr = np.empty(G)
    hy_arr = np.empty(G)
    hxy_arr = np.empty(G)
    cdef double[::1] hx = hx_arr, hy = hy_arr, hxy = hxy_arr
    cdef double base = log2(<double>S)
    cdef int64_t *buf = <int64_t *>malloc(S * sizeof(int64_t))
    cdef int64_t *table = NULL
    if dense:
        table = <int64_t *>calloc(xdim * ydim, sizeof(int64_t))
    if buf == NULL or (dense and table == NULL):
        free(buf)
        free(table)
        raise MemoryError()
    cdef Py_ssize_t g, i
    try:
        with nogil:
            for g in range(G):
                if dense:
                    hx[g] = base - _dense_sum_clogc(&xv[g, 0], S, table) / S
                    hy[g] = base - _dense_sum_clogc(&yv[g, 0], S, table) / S
                    for i in range(S):
                        buf[i] = xv[g, i] * ydim + yv[g, i]
                    hxy[g] = base - _dense_sum_clogc(buf, S, table) / S
                else:
                    for i in range(S):
                        buf[i] = xv[g, i]
                    hx[g] = base - _sorted_sum_clogc(buf, S) / S
                    for i in range(S):
                        buf[i] = yv[g, i]
                    hy[g] = base - _sorted_sum_clogc(buf, S) / S
                    for i in range(S):
                        buf[i] = xv[g, i] * ydim + yv[g, i]
                    hxy[g] = base - _sorted_sum_clogc(buf, S) / S
    finally:
        free(buf)
        free(table)
    return np.maximum(hx_arr, 0.0), np.maximum(hy_arr, 0.0), np.maximum(hxy_arr, 0.0)
