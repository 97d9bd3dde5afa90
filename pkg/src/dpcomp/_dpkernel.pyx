# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled knapsack-counting inner loop.

Same normalized recurrence as the NumPy fallback (see _kernel_py.py), updated
in place from high capacity to low so a single row per table suffices. Built
with -ffp-contract=off so results are bit-identical to the fallback.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


cdef void _advance_row(double[::1] g, Py_ssize_t a, double w) noexcept nogil:
    cdef Py_ssize_t capacity = g.shape[0] - 1
    cdef double c = 1.0 / (1.0 + w)
    cdef double wc = w * c
    cdef Py_ssize_t s
    cdef double t
    if a <= 0:
        for s in range(capacity, -1, -1):
            t = g[s] * c
            g[s] = t + wc * g[s]
        return
    for s in range(capacity, a - 1, -1):
        t = g[s] * c
        g[s] = t + wc * g[s - a]
    for s in range(min(a, capacity + 1) - 1, -1, -1):
        g[s] = g[s] * c


def knapsack_pair(levels, Py_ssize_t capacity, w_minus, w_plus):
    """Final normalized sums G_minus(k, B), G_plus(k, B) for two weight vectors."""
    cdef cnp.int64_t[::1] a = np.ascontiguousarray(levels, dtype=np.int64)
    cdef double[::1] wm = np.ascontiguousarray(w_minus, dtype=np.float64)
    cdef double[::1] wp = np.ascontiguousarray(w_plus, dtype=np.float64)
    cdef Py_ssize_t k = a.shape[0]
    if wm.shape[0] != k or wp.shape[0] != k:
        raise ValueError("levels and weights must have equal length")
    gm_arr = np.ones(capacity + 1, dtype=np.float64)
    gp_arr = np.ones(capacity + 1, dtype=np.float64)
    cdef double[::1] gm = gm_arr
    cdef double[::1] gp = gp_arr
    cdef Py_ssize_t r
    with nogil:
        for r in range(k):
            _advance_row(gm, a[r], wm[r])
            _advance_row(gp, a[r], wp[r])
    return gm_arr[capacity], gp_arr[capacity]


def knapsack_single(levels, Py_ssize_t capacity, weights):
    """Final normalized sum G(k, B) for one weight vector."""
    cdef cnp.int64_t[::1] a = np.ascontiguousarray(levels, dtype=np.int64)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t k = a.shape[0]
    if w.shape[0] != k:
        raise ValueError("levels and weights must have equal length")
    g_arr = np.ones(capacity + 1, dtype=np.float64)
    cdef double[::1] g = g_arr
    cdef Py_ssize_t r
    with nogil:
        for r in range(k):
            _advance_row(g, a[r], w[r])
    return g_arr[capacity]
