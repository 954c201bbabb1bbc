# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for multi-time phase-space arrays.

fill_w walks every (left tuple, right tuple) of kernel nodes and evaluates
Tr(L_n ... L_1 rho R_1 ... R_m).  Left chains are built incrementally with
an odometer over the node tuple so each step costs one d x d product.
"""

import numpy as np
cimport numpy as cnp

ctypedef double complex cplx


cdef inline void _matmul(const cplx[:, ::1] a, const cplx[:, ::1] b, cplx[:, ::1] out,
                         Py_ssize_t d) nogil:
    cdef Py_ssize_t i, j, k
    cdef cplx s
    for i in range(d):
        for j in range(d):
            s = 0
            for k in range(d):
                s = s + a[i, k] * b[k, j]
            out[i, j] = s


def right_chains(const cplx[:, :, :, ::1] right):
    """All products R_1(y_1) ... R_m(y_m), y_1 slowest; shape (N**m, d, d)."""
    cdef Py_ssize_t m = right.shape[0], N = right.shape[1], d = right.shape[2]
    cdef Py_ssize_t total = N ** m
    cdef Py_ssize_t idx, lvl, i
    out_arr = np.zeros((total, d, d), dtype=np.complex128)
    cdef cplx[:, :, ::1] out = out_arr
    if m == 0:
        for i in range(d):
            out[0, i, i] = 1
        return out_arr
    stack_arr = np.zeros((m, d, d), dtype=np.complex128)
    cdef cplx[:, :, ::1] stack = stack_arr
    cdef Py_ssize_t[::1] digit = np.zeros(m, dtype=np.intp)
    cdef Py_ssize_t first_changed = 0
    with nogil:
        for idx in range(total):
            for lvl in range(first_changed, m):
                if lvl == 0:
                    stack[0, :, :] = right[0, digit[0], :, :]
                else:
                    _matmul(stack[lvl - 1], right[lvl, digit[lvl]], stack[lvl], d)
            out[idx, :, :] = stack[m - 1, :, :]
            # advance odometer, last digit fastest
            lvl = m - 1
            while lvl >= 0:
                digit[lvl] += 1
                if digit[lvl] < N:
                    break
                digit[lvl] = 0
                lvl -= 1
            first_changed = lvl if lvl >= 0 else 0
    return out_arr


def fill_w(const cplx[:, :, :, ::1] left, const cplx[:, ::1] rho,
           const cplx[:, :, :, ::1] right):
    """Flat array W[x_1..x_n, y_1..y_m] = Tr(L_n(x_n)..L_1(x_1) rho R_1(y_1)..R_m(y_m))."""
    cdef Py_ssize_t n = left.shape[0], d = rho.shape[0]
    cdef Py_ssize_t N = left.shape[1] if n > 0 else (right.shape[1] if right.shape[0] > 0 else 1)
    cdef Py_ssize_t nl = N ** n
    rch_arr = right_chains(right)
    cdef const cplx[:, :, ::1] rch = rch_arr
    cdef Py_ssize_t nr = rch.shape[0]
    out_arr = np.empty(nl * nr, dtype=np.complex128)
    cdef cplx[::1] out = out_arr
    stack_arr = np.zeros((n + 1, d, d), dtype=np.complex128)
    cdef cplx[:, :, ::1] stack = stack_arr
    mrho_arr = np.zeros((d, d), dtype=np.complex128)
    cdef cplx[:, ::1] mrho = mrho_arr
    cdef Py_ssize_t[::1] digit = np.zeros(max(n, 1), dtype=np.intp)
    cdef Py_ssize_t idx, lvl, r, i, j, first_changed = 0
    cdef cplx s
    stack[0, :, :] = rho
    with nogil:
        for idx in range(nl):
            # stack[k] = L_k .. L_1 rho
            for lvl in range(first_changed, n):
                _matmul(left[lvl, digit[lvl]], stack[lvl], stack[lvl + 1], d)
            mrho[:, :] = stack[n, :, :]
            for r in range(nr):
                s = 0
                for i in range(d):
                    for j in range(d):
                        s = s + mrho[i, j] * rch[r, j, i]
                out[idx * nr + r] = s
            if n == 0:
                break
            lvl = n - 1
            while lvl >= 0:
                digit[lvl] += 1
                if digit[lvl] < N:
                    break
                digit[lvl] = 0
                lvl -= 1
            first_changed = lvl if lvl >= 0 else 0
    return out_arr
