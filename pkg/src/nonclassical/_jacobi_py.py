"""Pure-Python roof optimizer kernel.

Mirrors ``_jacobi.pyx`` line for line; used when the compiled extension is
unavailable or ``NONCLASSICAL_PURE_PYTHON`` is set.

Notation: ``U`` is the ``m x n`` isometry (rows = eigen-directions of rho,
columns = ensemble members), ``lam`` the eigenvalues and
``B = sqrt(lam) V^H a V sqrt(lam)``.  Column ``j`` has weight
``q_j = sum_i lam_i |U_ij|^2`` and ``s_j = u_j^H B u_j = q_j <a>_j``, so the
ensemble objective is ``c_n - sum |s_j|^2/q_j + |c_xi - sum s_j^2/q_j|``.
"""
from __future__ import annotations

import math

import numpy as np

Q_FLOOR = 1e-15


def _column(u, bu, lam):
    # bu caches B @ u so a rotated column costs O(m)
    q = float(np.dot(lam, (u.real * u.real + u.imag * u.imag)))
    s = complex(np.vdot(u, bu))
    return q, s


def _contrib(q, s):
    if q <= Q_FLOOR:
        return 0.0, 0j
    return (s.real * s.real + s.imag * s.imag) / q, s * s / q


def _value(c_n, c_xi, a_sum, z_sum, eps):
    z = c_xi - z_sum
    return c_n - a_sum + math.sqrt(z.real * z.real + z.imag * z.imag + eps * eps)


def ensemble_value(U, lam, B, c_n, c_xi):
    """Exact (unsmoothed) objective of the ensemble generated by ``U``."""
    a_sum, z_sum = 0.0, 0j
    BU = np.asarray(B, dtype=complex) @ U
    for j in range(U.shape[1]):
        da, dz = _contrib(*_column(U[:, j], BU[:, j], lam))
        a_sum += da
        z_sum += dz
    return _value(c_n, c_xi, a_sum, z_sum, 0.0)


def jacobi_minimize(U, lam, B, c_n, c_xi, eps_schedule, step0, step_min, tol, max_sweeps):
    """Minimize in place over ``U -> U G`` with two-column Givens rotations ``G``.

    Every accepted move is unitary on the column space so ``U U^H`` stays the
    identity.  The ``|.|`` term is smoothed to ``sqrt(|z|^2 + eps^2)`` and
    ``eps`` follows ``eps_schedule`` down to zero.  Returns
    ``(value, n_evals)``.
    """
    m, n = U.shape
    lam = np.asarray(lam, dtype=float)
    B = np.asarray(B, dtype=complex)
    n_evals = 0
    q = np.empty(n)
    s = np.empty(n, dtype=complex)
    for eps in eps_schedule:
        BU = B @ U
        a_sum, z_sum = 0.0, 0j
        for j in range(n):
            q[j], s[j] = _column(U[:, j], BU[:, j], lam)
            da, dz = _contrib(q[j], s[j])
            a_sum += da
            z_sum += dz
        f = _value(c_n, c_xi, a_sum, z_sum, eps)
        step = step0
        while step >= step_min:
            for _ in range(max_sweeps):
                f_start = f
                for i in range(n):
                    for j in range(i + 1, n):
                        ai, zi = _contrib(q[i], s[i])
                        aj, zj = _contrib(q[j], s[j])
                        done = False
                        for ph in (1.0, 1j):
                            for sign in (1.0, -1.0):
                                c, sn = math.cos(sign * step), math.sin(sign * step)
                                ui = c * U[:, i] - ph * sn * U[:, j]
                                uj = ph.conjugate() * sn * U[:, i] + c * U[:, j]
                                bi = c * BU[:, i] - ph * sn * BU[:, j]
                                bj = ph.conjugate() * sn * BU[:, i] + c * BU[:, j]
                                qi, si = _column(ui, bi, lam)
                                qj, sj = _column(uj, bj, lam)
                                ai2, zi2 = _contrib(qi, si)
                                aj2, zj2 = _contrib(qj, sj)
                                a2 = a_sum - ai - aj + ai2 + aj2
                                z2 = z_sum - zi - zj + zi2 + zj2
                                f2 = _value(c_n, c_xi, a2, z2, eps)
                                n_evals += 1
                                if f2 < f:
                                    U[:, i], U[:, j] = ui, uj
                                    BU[:, i], BU[:, j] = bi, bj
                                    q[i], s[i], q[j], s[j] = qi, si, qj, sj
                                    a_sum, z_sum, f = a2, z2, f2
                                    done = True
                                    break
                            if done:
                                break
                if f_start - f < tol:
                    break
            step *= 0.5
    return ensemble_value(U, lam, B, c_n, c_xi), n_evals
