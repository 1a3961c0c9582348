# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernels; see ``_fallback.py`` for the reference semantics.

Each kernel walks the sequence tree depth-first, carrying one running
value per codeword, so no table larger than the output is materialized.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, INFINITY

cnp.import_array()


def mixture_density(factors, sizes):
    cdef double[:, :, ::1] f = np.ascontiguousarray(factors, dtype=np.float64)
    cdef Py_ssize_t n = f.shape[0], m_count = f.shape[1]
    cdef Py_ssize_t[::1] sz = np.ascontiguousarray(sizes, dtype=np.intp)
    cdef Py_ssize_t total = 1, t, m, leaf, depth, c
    for t in range(n):
        total *= sz[t]
    out_arr = np.zeros(total)
    cdef double[::1] out = out_arr
    if n == 0:
        out[0] = m_count
        return out_arr
    # run[t, m]: product of factors over times < t along the current path
    cdef double[:, ::1] run = np.ones((n + 1, m_count))
    cdef Py_ssize_t[::1] digit = np.zeros(n, dtype=np.intp)
    cdef double acc
    for t in range(n):
        for m in range(m_count):
            run[t + 1, m] = run[t, m] * f[t, m, 0]
    for leaf in range(total):
        acc = 0.0
        for m in range(m_count):
            acc += run[n, m]
        out[leaf] = acc
        if leaf + 1 == total:
            break
        # advance the odometer and recompute the changed suffix of the path
        depth = n - 1
        while digit[depth] + 1 == sz[depth]:
            digit[depth] = 0
            depth -= 1
        digit[depth] += 1
        for t in range(depth, n):
            c = digit[t]
            for m in range(m_count):
                run[t + 1, m] = run[t, m] * f[t, m, c]
    return out_arr


def log_sequence_table(logf):
    cdef double[:, :, ::1] lf = np.ascontiguousarray(logf, dtype=np.float64)
    cdef Py_ssize_t n = lf.shape[0], a = lf.shape[1], m_count = lf.shape[2]
    cdef Py_ssize_t total = a ** n, t, m, leaf, depth, c
    out_arr = np.zeros((total, m_count))
    if n == 0:
        return out_arr
    cdef double[:, ::1] out = out_arr
    cdef double[:, ::1] run = np.zeros((n + 1, m_count))
    cdef Py_ssize_t[::1] digit = np.zeros(n, dtype=np.intp)
    for t in range(n):
        for m in range(m_count):
            run[t + 1, m] = run[t, m] + lf[t, 0, m]
    for leaf in range(total):
        for m in range(m_count):
            out[leaf, m] = run[n, m]
        if leaf + 1 == total:
            break
        depth = n - 1
        while digit[depth] + 1 == a:
            digit[depth] = 0
            depth -= 1
        digit[depth] += 1
        for t in range(depth, n):
            c = digit[t]
            for m in range(m_count):
                run[t + 1, m] = run[t, m] + lf[t, c, m]
    return out_arr


def log_marginal_over_codebook(log_base, logf):
    cdef double[:, ::1] base = np.ascontiguousarray(log_base, dtype=np.float64)
    cdef double[:, :, ::1] lf = np.ascontiguousarray(logf, dtype=np.float64)
    cdef Py_ssize_t n = lf.shape[0], a = lf.shape[1], m_count = lf.shape[2]
    cdef Py_ssize_t total = a ** n, t, m, leaf, depth, c
    if base.shape[0] != total or base.shape[1] != m_count:
        raise ValueError("log_base shape does not match logf")
    out_arr = np.empty(total)
    cdef double[::1] out = out_arr
    cdef double[:, ::1] run = np.zeros((n + 1, m_count))
    cdef Py_ssize_t[::1] digit = np.zeros(max(n, 1), dtype=np.intp)
    cdef double peak, v, acc
    for t in range(n):
        for m in range(m_count):
            run[t + 1, m] = run[t, m] + lf[t, 0, m]
    for leaf in range(total):
        peak = -INFINITY
        for m in range(m_count):
            v = base[leaf, m] + run[n, m]
            if v > peak:
                peak = v
        if peak == -INFINITY:
            out[leaf] = -INFINITY
        else:
            acc = 0.0
            for m in range(m_count):
                acc += exp(base[leaf, m] + run[n, m] - peak)
            out[leaf] = peak + log(acc)
        if leaf + 1 == total or n == 0:
            break
        depth = n - 1
        while digit[depth] + 1 == a:
            digit[depth] = 0
            depth -= 1
        digit[depth] += 1
        for t in range(depth, n):
            c = digit[t]
            for m in range(m_count):
                run[t + 1, m] = run[t, m] + lf[t, c, m]
    return out_arr
