# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled roof optimizer kernel; same algorithm and API as ``_jacobi_py``."""
from libc.math cimport cos, sin, sqrt
from libc.stdlib cimport malloc, free

import numpy as np

cdef double Q_FLOOR = 1e-15


cdef inline double abs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef void matvec(const double complex[:, ::1] B, double complex* u, int m,
                 double complex* out) nogil:
    cdef int i, k
    cdef double complex acc
    for i in range(m):
        acc = 0.0
        for k in range(m):
            acc = acc + B[i, k] * u[k]
        out[i] = acc


cdef void column(double complex* u, double complex* bu, int m, const double[::1] lam,
                 double* q, double complex* s) nogil:
    # bu caches B @ u so a rotated column costs O(m)
    cdef int i
    cdef double qq = 0.0
    cdef double complex ss = 0.0
    for i in range(m):
        qq += lam[i] * abs2(u[i])
        ss = ss + u[i].conjugate() * bu[i]
    q[0] = qq
    s[0] = ss


cdef inline void contrib(double q, double complex s, double* a, double complex* z) nogil:
    if q <= Q_FLOOR:
        a[0] = 0.0
        z[0] = 0.0
    else:
        a[0] = abs2(s) / q
        z[0] = s * s / q


cdef inline double value(double c_n, double complex c_xi, double a_sum,
                         double complex z_sum, double eps) nogil:
    cdef double complex z = c_xi - z_sum
    return c_n - a_sum + sqrt(abs2(z) + eps * eps)


cdef double run(double complex[:, ::1] UT, const double[::1] lam,
                const double complex[:, ::1] B, double c_n, double complex c_xi,
                const double[::1] eps_schedule, double step0, double step_min,
                double tol, int max_sweeps, long* n_evals) nogil:
    # UT is U transposed so each ensemble member is a contiguous row
    cdef int n = UT.shape[0], m = UT.shape[1]
    cdef int e, i, j, k, sweep, p, sg, done
    cdef double eps, step, f, f2, f_start, c, sn, th, a_sum, a2
    cdef double ai, aj, ai2, aj2, qi, qj
    cdef double complex z_sum, z2, zi, zj, zi2, zj2, si, sj, ph
    cdef double* q = <double*> malloc(n * sizeof(double))
    cdef double complex* s = <double complex*> malloc(n * sizeof(double complex))
    cdef double complex* ui = <double complex*> malloc(m * sizeof(double complex))
    cdef double complex* uj = <double complex*> malloc(m * sizeof(double complex))
    cdef double complex* bi = <double complex*> malloc(m * sizeof(double complex))
    cdef double complex* bj = <double complex*> malloc(m * sizeof(double complex))
    cdef double complex* BU = <double complex*> malloc(n * m * sizeof(double complex))
    cdef double complex I = 1j

    for e in range(eps_schedule.shape[0]):
        eps = eps_schedule[e]
        a_sum = 0.0
        z_sum = 0.0
        for j in range(n):
            matvec(B, &UT[j, 0], m, &BU[j * m])
            column(&UT[j, 0], &BU[j * m], m, lam, &q[j], &s[j])
            contrib(q[j], s[j], &ai, &zi)
            a_sum += ai
            z_sum = z_sum + zi
        f = value(c_n, c_xi, a_sum, z_sum, eps)
        step = step0
        while step >= step_min:
            for sweep in range(max_sweeps):
                f_start = f
                for i in range(n):
                    for j in range(i + 1, n):
                        contrib(q[i], s[i], &ai, &zi)
                        contrib(q[j], s[j], &aj, &zj)
                        done = 0
                        for p in range(2):
                            ph = 1.0 if p == 0 else I
                            for sg in range(2):
                                th = step if sg == 0 else -step
                                c = cos(th)
                                sn = sin(th)
                                for k in range(m):
                                    ui[k] = c * UT[i, k] - ph * sn * UT[j, k]
                                    uj[k] = ph.conjugate() * sn * UT[i, k] + c * UT[j, k]
                                    bi[k] = c * BU[i * m + k] - ph * sn * BU[j * m + k]
                                    bj[k] = ph.conjugate() * sn * BU[i * m + k] + c * BU[j * m + k]
                                column(ui, bi, m, lam, &qi, &si)
                                column(uj, bj, m, lam, &qj, &sj)
                                contrib(qi, si, &ai2, &zi2)
                                contrib(qj, sj, &aj2, &zj2)
                                a2 = a_sum - ai - aj + ai2 + aj2
                                z2 = z_sum - zi - zj + zi2 + zj2
                                f2 = value(c_n, c_xi, a2, z2, eps)
                                n_evals[0] += 1
                                if f2 < f:
                                    for k in range(m):
                                        UT[i, k] = ui[k]
                                        UT[j, k] = uj[k]
                                        BU[i * m + k] = bi[k]
                                        BU[j * m + k] = bj[k]
                                    q[i] = qi
                                    s[i] = si
                                    q[j] = qj
                                    s[j] = sj
                                    a_sum = a2
                                    z_sum = z2
                                    f = f2
                                    done = 1
                                    break
                            if done:
                                break
                if f_start - f < tol:
                    break
            step *= 0.5

    free(q)
    free(s)
    free(ui)
    free(uj)
    free(bi)
    free(bj)
    free(BU)
    return f


def ensemble_value(U, lam, B, double c_n, c_xi):
    """Exact (unsmoothed) objective of the ensemble generated by ``U``."""
    cdef double complex[:, ::1] UT = np.ascontiguousarray(np.asarray(U, dtype=complex).T)
    cdef const double[::1] lv = np.ascontiguousarray(lam, dtype=float)
    cdef const double complex[:, ::1] Bv = np.ascontiguousarray(B, dtype=complex)
    cdef int n = UT.shape[0], m = UT.shape[1], j
    cdef double q, a, a_sum = 0.0
    cdef double complex s, z, z_sum = 0.0
    cdef double complex[::1] bu = np.empty(m, dtype=complex)
    for j in range(n):
        matvec(Bv, &UT[j, 0], m, &bu[0])
        column(&UT[j, 0], &bu[0], m, lv, &q, &s)
        contrib(q, s, &a, &z)
        a_sum += a
        z_sum = z_sum + z
    return value(c_n, complex(c_xi), a_sum, z_sum, 0.0)


def jacobi_minimize(U, lam, B, double c_n, c_xi, eps_schedule, double step0,
                    double step_min, double tol, int max_sweeps):
    """Minimize in place over ``U -> U G``; returns ``(value, n_evals)``.

    Releases the GIL for the whole search.
    """
    cdef double complex[:, ::1] UT = np.ascontiguousarray(np.asarray(U, dtype=complex).T)
    cdef const double[::1] lv = np.ascontiguousarray(lam, dtype=float)
    cdef const double complex[:, ::1] Bv = np.ascontiguousarray(B, dtype=complex)
    cdef const double[::1] ev = np.ascontiguousarray(eps_schedule, dtype=float)
    cdef double complex cx = complex(c_xi)
    cdef long n_evals = 0
    with nogil:
        run(UT, lv, Bv, c_n, cx, ev, step0, step_min, tol, max_sweeps, &n_evals)
    U[...] = np.asarray(UT).T
    return ensemble_value(U, lam, B, c_n, c_xi), n_evals
