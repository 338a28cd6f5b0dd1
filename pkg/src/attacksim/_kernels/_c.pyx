# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled decision-math kernels.

Loop-for-loop twin of ``_py.py``; compiled with -ffp-contract=off so both
backends produce bit-identical floats.
"""

from libc.math cimport sqrt

BACKEND = "compiled"


def profile_distances(double[::1] theta, double[::1] gammas, long[::1] rows,
                      double[::1] inv_beta_sq, unsigned char[::1] unordered,
                      double[::1] out):
    cdef Py_ssize_t n = theta.shape[0]
    cdef Py_ssize_t m = rows.shape[0]
    cdef Py_ssize_t k, j, base
    cdef double acc, diff, t, g
    for k in range(m):
        base = rows[k] * n
        acc = 0.0
        for j in range(n):
            t = theta[j]
            g = gammas[base + j]
            if unordered[j]:
                diff = 0.0 if t == g else 1.0
            else:
                diff = t - g
            acc += inv_beta_sq[j] * diff * diff
        out[k] = sqrt(acc)


def scores_from_distances(double[::1] d, double[::1] out):
    cdef Py_ssize_t m = d.shape[0]
    cdef Py_ssize_t i
    cdef double total = 0.0
    if m == 1:
        out[0] = 1.0
        return
    for i in range(m):
        total += d[i]
    if total == 0.0:
        for i in range(m):
            out[i] = 1.0
        return
    for i in range(m):
        out[i] = 1.0 - d[i] / total


def probabilities_from_scores(double[::1] s, double[::1] out):
    cdef Py_ssize_t m = s.shape[0]
    cdef Py_ssize_t i
    cdef double total = 0.0
    for i in range(m):
        total += s[i]
    for i in range(m):
        out[i] = s[i] / total


def weighted_index(double[::1] p, double u):
    cdef Py_ssize_t last = p.shape[0] - 1
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(last):
        acc += p[i]
        if u < acc:
            return i
    return last
