# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Fused power-sum kernels for batched field samples.

Single pass per sample over the amplitude row: accumulates the quadratic
and quartic power over the full grid and over a region index set without
materializing |phi|^2 temporaries.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def power_sums(cnp.complex128_t[:, ::1] amp, double h, cnp.int64_t[::1] idx):
    """Per-sample region/full quadratic and quartic power sums.

    Returns (p2_region, p2_full, p4_region, p4_full), each of length
    amp.shape[0].
    """
    cdef Py_ssize_t m = amp.shape[0]
    cdef Py_ssize_t n = amp.shape[1]
    cdef Py_ssize_t k = idx.shape[0]
    cdef Py_ssize_t s, j, jj
    cdef double re, im, a2
    cdef double t2, t4, r2, r4

    p2r_arr = np.empty(m, dtype=np.float64)
    p2f_arr = np.empty(m, dtype=np.float64)
    p4r_arr = np.empty(m, dtype=np.float64)
    p4f_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] p2r = p2r_arr
    cdef double[::1] p2f = p2f_arr
    cdef double[::1] p4r = p4r_arr
    cdef double[::1] p4f = p4f_arr

    for s in range(m):
        t2 = 0.0
        t4 = 0.0
        for j in range(n):
            re = amp[s, j].real
            im = amp[s, j].imag
            a2 = re * re + im * im
            t2 += a2
            t4 += a2 * a2
        r2 = 0.0
        r4 = 0.0
        for j in range(k):
            jj = idx[j]
            re = amp[s, jj].real
            im = amp[s, jj].imag
            a2 = re * re + im * im
            r2 += a2
            r4 += a2 * a2
        p2f[s] = h * t2
        p4f[s] = h * t4
        p2r[s] = h * r2
        p4r[s] = h * r4

    return p2r_arr, p2f_arr, p4r_arr, p4f_arr


def mixture_power_sums(cnp.complex128_t[:, ::1] z, cnp.complex128_t[:, ::1] mat,
                       double h, cnp.int64_t[::1] idx):
    """Power sums of phi = sum_i z[s, i] * mat[i, :] without materializing phi.

    Same contract as power_sums, but takes the mixture coefficients and
    component matrix; avoids the (n_samples, n) field allocation, which
    dominates the cost on memory-bound hosts.
    """
    cdef Py_ssize_t ns = z.shape[0]
    cdef Py_ssize_t m = z.shape[1]
    cdef Py_ssize_t n = mat.shape[1]
    cdef Py_ssize_t k = idx.shape[0]
    cdef Py_ssize_t s, j, jj, i
    cdef double re, im, a2, zr, zi, mr, mi
    cdef double t2, t4, r2, r4

    p2r_arr = np.empty(ns, dtype=np.float64)
    p2f_arr = np.empty(ns, dtype=np.float64)
    p4r_arr = np.empty(ns, dtype=np.float64)
    p4f_arr = np.empty(ns, dtype=np.float64)
    cdef double[::1] p2r = p2r_arr
    cdef double[::1] p2f = p2f_arr
    cdef double[::1] p4r = p4r_arr
    cdef double[::1] p4f = p4f_arr

    for s in range(ns):
        t2 = 0.0
        t4 = 0.0
        for j in range(n):
            re = 0.0
            im = 0.0
            for i in range(m):
                zr = z[s, i].real
                zi = z[s, i].imag
                mr = mat[i, j].real
                mi = mat[i, j].imag
                re += zr * mr - zi * mi
                im += zr * mi + zi * mr
            a2 = re * re + im * im
            t2 += a2
            t4 += a2 * a2
        r2 = 0.0
        r4 = 0.0
        for j in range(k):
            jj = idx[j]
            re = 0.0
            im = 0.0
            for i in range(m):
                zr = z[s, i].real
                zi = z[s, i].imag
                mr = mat[i, jj].real
                mi = mat[i, jj].imag
                re += zr * mr - zi * mi
                im += zr * mi + zi * mr
            a2 = re * re + im * im
            r2 += a2
            r4 += a2 * a2
        p2f[s] = h * t2
        p4f[s] = h * t4
        p2r[s] = h * r2
        p4r[s] = h * r4

    return p2r_arr, p2f_arr, p4r_arr, p4f_arr
