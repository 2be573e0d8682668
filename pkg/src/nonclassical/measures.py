"""Pure-state nonclassicality, quadrature QFI, metrological power and the MZI.

Mixed-state nonclassicality is a convex-roof problem and lives in
:mod:`nonclassical.roof`; everything here is either a closed form in the
moments or a direct eigendecomposition.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import InternalConsistencyError, NotADistributionError
from .fock import DensityMatrix, Moments, PureFockState, annihilation, moments_mixed, moments_pure

#: eigenvalue pairs with lambda_k + lambda_l below this are skipped in the QFI sum
QFI_EPS = 1e-12
CLAMP_TOL = 1e-9


def clamp_nonnegative(value: float, what: str = "value") -> float:
    """Round tiny negative rounding noise to zero; reject real negatives."""
    if value >= 0.0:
        return float(value)
    if value >= -CLAMP_TOL:
        return 0.0
    raise InternalConsistencyError(f"{what} = {value!r} is negative beyond rounding")


def ort_pure(m: Moments) -> float:
    """``nbar - |<a>|^2 + |<a^2> - <a>^2|``."""
    return clamp_nonnegative(m.nbar - abs(m.alpha) ** 2 + abs(m.xi - m.alpha**2), "N")


def quadrature_variance(m: Moments, mu: float) -> float:
    """Variance of ``X_mu = i(e^{-i mu} a^dag - e^{i mu} a)/sqrt(2)``."""
    return 0.5 + m.nbar - abs(m.alpha) ** 2 - (cmath.exp(2j * mu) * (m.xi - m.alpha**2)).real


def optimal_quadrature_angle(m: Moments) -> float:
    """Angle in ``[0, pi)`` maximizing :func:`quadrature_variance`."""
    z = m.xi - m.alpha**2
    if abs(z) == 0.0:
        return 0.0
    return ((math.pi - cmath.phase(z)) / 2) % math.pi


def measure_Q_pure(m: Moments) -> float:
    """Comparison measure ``2(nbar - |<a>|^2)`` (pure states only)."""
    return clamp_nonnegative(2.0 * (m.nbar - abs(m.alpha) ** 2), "Q")


# ------------------------------------------------------------------ QFI


def qfi_coefficients(rho: DensityMatrix) -> tuple[float, complex]:
    """``(C0, C2)`` with ``F(mu) = C0 + Re(C2 e^{2 i mu})`` for generator ``X_mu``.

    The matrix is padded by two levels so ``a^dag`` acting on the top retained
    level is not cut off.
    """
    D = rho.cutoff + 2
    lam, V = np.linalg.eigh(rho.padded(D).entries)
    A = V.conj().T @ annihilation(D) @ V
    lk, ll = lam[:, None], lam[None, :]
    s = lk + ll
    w = np.zeros_like(s)
    keep = s > QFI_EPS
    w[keep] = (lk - ll)[keep] ** 2 / s[keep]
    C0 = 2.0 * float(np.sum(w * np.abs(A) ** 2))
    C2 = complex(-2.0 * np.sum(w * A * A.T))
    return C0, C2


def qfi_quadrature_at(rho: DensityMatrix, mu: float) -> float:
    C0, C2 = qfi_coefficients(rho)
    return C0 + (C2 * cmath.exp(2j * mu)).real


def qfi_quadrature(rho: DensityMatrix) -> tuple[float, float]:
    """Quadrature QFI maximized over the angle; returns ``(F_X, mu_star)``.

    ``mu_star`` lies in ``[0, pi)``; ``mu_star + pi`` is equally optimal.
    """
    C0, C2 = qfi_coefficients(rho)
    F = clamp_nonnegative(C0 + abs(C2), "F_X")
    mu = (-cmath.phase(C2) / 2) % math.pi if abs(C2) > 0 else 0.0
    return F, mu


def _as_density(state) -> DensityMatrix:
    return state.projector() if isinstance(state, PureFockState) else state


def metrological_power(rho) -> float:
    """``max(F_X - 2, 0) / 4``."""
    F, _ = qfi_quadrature(_as_density(rho))
    return max(F - 2.0, 0.0) / 4.0


def diagonal_w_sum(p) -> float:
    """Unclamped ``sum_i i p_i (p_i - p_{i-1}) / (p_i + p_{i-1})``."""
    p = np.asarray(p, dtype=float)
    i = np.arange(1, p.size)
    num = i * p[1:] * (p[1:] - p[:-1])
    den = p[1:] + p[:-1]
    ok = den > 0
    return float(np.sum(num[ok] / den[ok]))


def _check_distribution(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0 or np.any(p < 0) or not np.all(np.isfinite(p)):
        raise NotADistributionError("probabilities must be a finite non-negative vector")
    if abs(p.sum() - 1.0) > 1e-10:
        raise NotADistributionError(f"probabilities sum to {p.sum()!r}, expected 1")
    return p


def metrological_power_diagonal(p) -> float:
    """Metrological power of ``sum_i p_i |i><i|`` in closed form."""
    return max(diagonal_w_sum(_check_distribution(p)), 0.0)


# ------------------------------------------------------------------ reports


@dataclass(frozen=True)
class MeasureReport:
    N: float
    N_per_energy: float
    W: float
    F_X: float
    mu_star: float
    nbar: float


def measure_pure(state: PureFockState) -> MeasureReport:
    """Measure, QFI and metrological power of a pure state."""
    m = moments_pure(state)
    N = ort_pure(m)
    F, mu = qfi_quadrature(state.projector())
    W = max(F - 2.0, 0.0) / 4.0
    if W > N + 1e-9:
        raise InternalConsistencyError(f"W = {W} exceeds N = {N} for a pure state")
    per = N / m.nbar if m.nbar > 0 else math.nan
    return MeasureReport(N, per, W, F, mu, m.nbar)


@dataclass(frozen=True)
class MziReport:
    F_theta: float
    N_total: float
    alpha_r: complex


def mzi_qfi(rho, alpha_r: complex, F_X: float | None = None) -> MziReport:
    """Optimal phase QFI of a balanced MZI fed with ``rho`` and ``|alpha_r>``."""
    rho = _as_density(rho)
    if F_X is None:
        F_X, _ = qfi_quadrature(rho)
    ar2 = abs(complex(alpha_r)) ** 2
    n_total = ar2 + moments_mixed(rho).nbar
    return MziReport(n_total + 0.5 * ar2 * (F_X - 2.0), n_total, complex(alpha_r))
