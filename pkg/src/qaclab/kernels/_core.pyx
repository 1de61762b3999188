# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled batched state-vector kernels.

Same contract as ``qaclab.kernels._numpy``: in-place single-qubit gate
application, in-place scalar phases on an index set, and the one-qubit
pair contraction used for gradients.
"""

import numpy as np

cimport numpy as cnp

ctypedef double complex cplx


def apply_1q(cplx[:, ::1] states, const cplx[:, ::1] gate, Py_ssize_t right):
    cdef Py_ssize_t rows = states.shape[0]
    cdef Py_ssize_t dim = states.shape[1]
    cdef Py_ssize_t block = 2 * right
    cdef cplx g00 = gate[0, 0]
    cdef cplx g01 = gate[0, 1]
    cdef cplx g10 = gate[1, 0]
    cdef cplx g11 = gate[1, 1]
    cdef Py_ssize_t r, base, i
    cdef cplx lo, hi
    for r in range(rows):
        for base in range(0, dim, block):
            for i in range(base, base + right):
                lo = states[r, i]
                hi = states[r, i + right]
                states[r, i] = g00 * lo + g01 * hi
                states[r, i + right] = g10 * lo + g11 * hi


def apply_phase(cplx[:, ::1] states, const cnp.int64_t[::1] idx, cplx phase):
    cdef Py_ssize_t rows = states.shape[0]
    cdef Py_ssize_t k = idx.shape[0]
    cdef Py_ssize_t r, j
    for r in range(rows):
        for j in range(k):
            states[r, idx[j]] = states[r, idx[j]] * phase


def pair_contract(const cplx[:, ::1] bra, const cplx[:, ::1] ket, Py_ssize_t right):
    cdef Py_ssize_t rows = bra.shape[0]
    cdef Py_ssize_t dim = bra.shape[1]
    cdef Py_ssize_t block = 2 * right
    cdef cplx e00 = 0, e01 = 0, e10 = 0, e11 = 0
    cdef cplx b0, b1, k0, k1
    cdef Py_ssize_t r, base, i
    for r in range(rows):
        for base in range(0, dim, block):
            for i in range(base, base + right):
                b0 = bra[r, i].conjugate()
                b1 = bra[r, i + right].conjugate()
                k0 = ket[r, i]
                k1 = ket[r, i + right]
                e00 += b0 * k0
                e01 += b0 * k1
                e10 += b1 * k0
                e11 += b1 * k1
    return np.array([[e00, e01], [e10, e11]], dtype=np.complex128)
