"""Convex-roof nonclassicality of mixed states.

Every pure-state decomposition of ``rho = sum_i lam_i |v_i><v_i|`` has the form
``sqrt(q_j) |phi_j> = sum_i U_ij sqrt(lam_i) |v_i>`` for an isometry ``U``
(orthonormal rows).  :func:`minimize` searches over ``U`` and returns an upper
bound on the measure together with the ensemble that attains it.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import gammaln
from scipy.stats import unitary_group

from . import _backend
from .errors import (
    DimensionMismatchError,
    DimensionTooLargeError,
    InternalConsistencyError,
    NoSignChangeError,
    NotADistributionError,
    NotIsometryError,
    TailMassExceededError,
)
from .fock import TAIL_TOL, DensityMatrix, PureFockState, annihilation, moments_pure
from .measures import clamp_nonnegative, diagonal_w_sum

ISOMETRY_TOL = 1e-10
SUPPORT_EPS = 1e-14
OPTIMIZER_CAP = 24
SUPPORT_TOL = 1e-6
DEFAULT_RESTARTS = 32
DEFAULT_TOL = 1e-12
EPS_SCHEDULE = (1e-2, 1e-4, 1e-6, 0.0)


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class DiagonalFockMixture:
    """``sum_i p_i |i><i|``."""

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 1 or p.size == 0 or not np.all(np.isfinite(p)):
            raise NotADistributionError("p must be a finite non-empty vector")
        if np.any(p < 0):
            raise NotADistributionError("probabilities must be non-negative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise NotADistributionError(f"probabilities sum to {p.sum()!r}, expected 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def L(self) -> int:
        return self.p.size - 1

    @property
    def nbar(self) -> float:
        return float(np.dot(np.arange(self.p.size), self.p))

    def density(self, D: int | None = None) -> DensityMatrix:
        """Density matrix padded to ``D`` levels (default ``L + 3``)."""
        D = self.p.size + 2 if D is None else D
        return DensityMatrix.diagonal(np.pad(self.p, (0, max(D - self.p.size, 0))))


@dataclass(frozen=True)
class EnsembleDecomposition:
    weights: np.ndarray
    members: tuple[PureFockState, ...]

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size != len(self.members) or w.size == 0:
            raise ValueError("need one positive weight per member")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {w.sum()!r}, expected 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "members", tuple(self.members))

    def __len__(self) -> int:
        return len(self.members)

    @property
    def cutoff(self) -> int:
        return max(m.cutoff for m in self.members)

    def reconstruct(self) -> np.ndarray:
        D = self.cutoff
        rho = np.zeros((D, D), dtype=complex)
        for q, m in zip(self.weights, self.members):
            c = m.padded(D).amplitudes
            rho += q * np.outer(c, c.conj())
        return rho


def check_isometry(U, rows=None, tol: float = ISOMETRY_TOL) -> np.ndarray:
    """Validate ``U U^H = 1`` (restricted to ``rows`` if given)."""
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2:
        raise NotIsometryError(f"isometry must be a matrix, got shape {U.shape}")
    sub = U if rows is None else U[rows]
    if sub.shape[0] > sub.shape[1]:
        raise NotIsometryError(f"isometry needs at least as many columns as rows, got {sub.shape}")
    err = np.max(np.abs(sub @ sub.conj().T - np.eye(sub.shape[0]))) if sub.size else 0.0
    if err > tol:
        raise NotIsometryError(f"rows are not orthonormal (deviation {err:.3g})")
    return U


# ---------------------------------------------------------------- decomposition


def _eigen(rho: DensityMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs on the support, eigenvalues descending."""
    lam, V = np.linalg.eigh(rho.entries)
    order = np.argsort(lam)[::-1]
    lam, V = lam[order], V[:, order]
    keep = lam > SUPPORT_EPS
    return lam[keep], V[:, keep]


def _build(lam, V, U, what: str) -> EnsembleDecomposition:
    # columns of amp are the unnormalized members sqrt(q_j) |phi_j>
    amp = V @ (np.sqrt(lam)[:, None] * U)
    q = np.sum(np.abs(amp) ** 2, axis=0)
    keep = q > 1e-15
    if not np.any(keep):
        raise DimensionMismatchError(f"{what}: isometry yields no members")
    q = q[keep]
    members = tuple(PureFockState.from_unnormalized(amp[:, j]) for j in np.nonzero(keep)[0])
    return EnsembleDecomposition(q / q.sum(), members)


def decompose(rho, U) -> EnsembleDecomposition:
    """Ensemble generated by the isometry ``U`` (rows index the basis of ``rho``).

    For a :class:`DiagonalFockMixture` the rows are Fock levels ``0..L`` (rows
    with ``p_i = 0`` are irrelevant).  For a :class:`DensityMatrix` the rows are
    its support eigenvectors in descending eigenvalue order.
    """
    U = np.asarray(U, dtype=complex)
    if isinstance(rho, DiagonalFockMixture):
        if U.ndim != 2 or U.shape[0] != rho.p.size:
            raise DimensionMismatchError(f"U needs {rho.p.size} rows, got shape {U.shape}")
        check_isometry(U, rows=np.nonzero(rho.p > 0)[0])
        D = rho.p.size + 2
        V = np.eye(D, rho.p.size)
        return _build(rho.p, V, U, "decompose")
    lam, V = _eigen(rho)
    if U.ndim != 2 or U.shape[0] != lam.size:
        raise DimensionMismatchError(f"rho has support dimension {lam.size}, U has shape {U.shape}")
    check_isometry(U)
    return _build(lam, V, U, "decompose")


def objective(ensemble: EnsembleDecomposition) -> float:
    """``sum q_j (n_j - |a_j|^2) + |sum q_j (xi_j - a_j^2)|``."""
    var, z = 0.0, 0j
    for q, m in zip(ensemble.weights, ensemble.members):
        mo = moments_pure(m)
        var += q * (mo.nbar - abs(mo.alpha) ** 2)
        z += q * (mo.xi - mo.alpha**2)
    return clamp_nonnegative(var + abs(z), "ensemble objective")


def diagonal_sum_rules(p: DiagonalFockMixture, U) -> tuple[float, complex, complex]:
    """``(sum q_j n_j, sum q_j a_j, sum q_j xi_j)`` of the generated ensemble."""
    ens = decompose(p, U)
    sn, sa, sx = 0.0, 0j, 0j
    for q, m in zip(ens.weights, ens.members):
        mo = moments_pure(m)
        sn += q * mo.nbar
        sa += q * mo.alpha
        sx += q * mo.xi
    return sn, sa, sx


# ---------------------------------------------------------------- optimizer


@dataclass(frozen=True)
class RoofResult:
    """Best ensemble found; ``n_upper`` is an upper bound on the measure."""

    n_upper: float
    ensemble: EnsembleDecomposition
    restart_values: tuple[float, ...] = ()
    best_restart: int = 0
    n_evals: int = 0
    support: int = 0
    trimmed_mass: float = 0.0
    backend: str = field(default="")

    def __iter__(self):
        yield self.n_upper
        yield self.ensemble


def _trivial_result(lam, V, backend) -> RoofResult:
    ens = _build(lam, V, np.eye(lam.size), "trivial")
    val = objective(ens)
    return RoofResult(val, ens, (val,), 0, 0, lam.size, 0.0, backend)


def minimize(
    rho,
    K: int | None = None,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    *,
    cap: int = OPTIMIZER_CAP,
    support_tol: float = SUPPORT_TOL,
    step0: float = 0.5,
    step_min: float = 1e-7,
    max_sweeps: int = 20,
    workers: int = 1,
) -> RoofResult:
    """Smallest ensemble objective found over ``restarts`` local searches.

    ``K + 1`` is the number of ensemble members (default twice the support
    dimension).  Restart 0 starts from the eigen-decomposition, the others from
    Haar-random isometries seeded by ``SeedSequence(seed)``.  If the support
    exceeds ``cap``, the trailing eigen-directions are frozen as fixed members
    provided their total weight is at most ``support_tol``; otherwise
    :class:`DimensionTooLargeError` is raised.
    """
    if isinstance(rho, DiagonalFockMixture):
        rho = rho.density()
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    lam, V = _eigen(rho)
    D = rho.cutoff + 2
    Vp = np.vstack([V, np.zeros((2, V.shape[1]))])
    a = annihilation(D)
    sq = np.sqrt(lam)
    A = Vp.conj().T @ a @ Vp
    B = sq[:, None] * A * sq[None, :]

    # B = 0 means every member has <a> = 0, so all ensembles give tr(rho N) + |tr(rho a^2)|
    if np.max(np.abs(B), initial=0.0) < 1e-14:
        return _trivial_result(lam, Vp, _backend.BACKEND)

    m = lam.size
    trimmed = 0.0
    a_off, z_off = 0.0, 0j
    fixed = []
    if m > cap:
        trimmed = float(lam[cap:].sum())
        if trimmed > support_tol:
            raise DimensionTooLargeError(
                f"support dimension {m} exceeds the optimizer cap {cap} "
                f"(trailing weight {trimmed:.3g} > {support_tol:g})"
            )
        diag = np.diag(A)[cap:]
        a_off = float(np.sum(lam[cap:] * np.abs(diag) ** 2))
        z_off = complex(np.sum(lam[cap:] * diag**2))
        fixed = list(range(cap, m))
        m = cap
    if K is None:
        K = 2 * m - 1
    if K + 1 < m:
        raise DimensionMismatchError(f"K + 1 = {K + 1} members cannot span a support of dimension {m}")

    full = Vp @ (lam[:, None] * Vp.conj().T)
    c_n = float(np.trace(full @ (a.conj().T @ a)).real) - a_off
    c_xi = complex(np.trace(full @ (a @ a))) - z_off
    lam_w, B_w = lam[:m], np.ascontiguousarray(B[:m, :m])
    eps = np.array(EPS_SCHEDULE)
    seeds = np.random.SeedSequence(seed).spawn(restarts)

    def run(r: int):
        if r == 0:
            U = np.eye(m, K + 1, dtype=complex)
        else:
            U = unitary_group.rvs(K + 1, random_state=np.random.default_rng(seeds[r]))[:m].copy()
        val, ev = _backend.jacobi_minimize(U, lam_w, B_w, c_n, c_xi, eps, step0, step_min, tol, max_sweeps)
        return val, ev, U

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(run, range(restarts)))
    else:
        runs = [run(r) for r in range(restarts)]
    values = tuple(float(v) for v, _, _ in runs)
    best = int(np.argmin(values))  # ties resolve to the lowest restart index
    U = runs[best][2]

    # polar projection removes drift accumulated over many rotations
    W, _, Zh = np.linalg.svd(U, full_matrices=False)
    U = W @ Zh
    if fixed:
        Ufull = np.zeros((lam.size, K + 1 + len(fixed)), dtype=complex)
        Ufull[:m, : K + 1] = U
        Ufull[fixed, K + 1 + np.arange(len(fixed))] = 1.0
        U = Ufull
    ens = _build(lam, Vp, U, "minimize")
    n_upper = objective(ens)
    if abs(n_upper - values[best]) > 1e-7:
        raise InternalConsistencyError(
            f"kernel value {values[best]!r} disagrees with the ensemble objective {n_upper!r}"
        )
    return RoofResult(
        n_upper, ens, values, best, sum(ev for _, ev, _ in runs), lam.size, trimmed, _backend.BACKEND
    )


# ---------------------------------------------------------------- closed forms and examples


def closed_form_two_fock(n: int, p: float) -> float:
    """Measure of ``p|n><n| + (1-p)|n+1><n+1|``: ``(n+1)(1-p)^2 + n p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if n < 0:
        raise ValueError("n must be non-negative")
    return (n + 1) * (1 - p) ** 2 + n * p


def two_fock(n: int, p: float) -> DiagonalFockMixture:
    out = np.zeros(n + 2)
    out[n], out[n + 1] = p, 1 - p
    return DiagonalFockMixture(out)


def two_fock_isometry(n: int, theta: float = math.pi / 4, phi: float = 0.0) -> np.ndarray:
    """Four-member isometry on the levels ``0..n+1`` of a two-Fock mixture.

    Only rows ``n`` and ``n+1`` are populated; at ``theta = pi/4`` the ensemble
    attains the closed form.
    """
    th = np.array([theta, theta + math.pi / 2, theta, theta + math.pi / 2])
    ph = np.array([phi, phi, phi + math.pi / 2, phi + math.pi / 2])
    U = np.zeros((n + 2, 4), dtype=complex)
    U[n] = np.sin(th) / math.sqrt(2)
    U[n + 1] = np.exp(1j * ph) * np.cos(th) / math.sqrt(2)
    return U


def _diagonal(p: np.ndarray, tail_tol: float, what: str) -> DiagonalFockMixture:
    tail = float(p[-2:].sum())
    if tail >= tail_tol:
        raise TailMassExceededError(f"{what}: tail mass {tail:.3g} at D={p.size} (tolerance {tail_tol:g})")
    return DiagonalFockMixture(p / p.sum())


def _auto_size(probs, tail_tol: float, what: str) -> int:
    """Smallest ``D`` whose top two levels of ``probs(D)`` hold less than ``tail_tol``."""
    D = 8
    while probs(D)[-2:].sum() >= tail_tol:
        D *= 2
        if D > 1 << 16:
            raise TailMassExceededError(f"{what}: cutoff exceeds 65536 levels")
    lo, hi = D // 2, D
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if probs(mid)[-2:].sum() < tail_tol:
            hi = mid
        else:
            lo = mid
    return max(hi, 3)


def phase_damped_squeezed_vacuum_probs(r: float, D: int) -> np.ndarray:
    p = np.zeros(D)
    if r == 0:
        p[0] = 1.0
        return p
    i = np.arange((D + 1) // 2)
    logp = -math.log(math.cosh(r)) + gammaln(2 * i + 1) - 2 * gammaln(i + 1) + 2 * i * math.log(math.tanh(r) / 2)
    p[0::2] = np.exp(logp)
    return p


def phase_damped_squeezed_vacuum(
    r: float, D: int | None = None, tail_tol: float = TAIL_TOL
) -> DiagonalFockMixture:
    """Fully dephased squeezed vacuum: only even levels are populated."""
    if r < 0:
        raise ValueError("r must be non-negative")
    what = f"phase-damped squeezed vacuum r={r}"
    if D is None:
        D = _auto_size(lambda d: phase_damped_squeezed_vacuum_probs(r, d), tail_tol, what)
    return _diagonal(phase_damped_squeezed_vacuum_probs(r, D), tail_tol, what)


def photon_added_thermal_probs(nbar_th: float, D: int) -> np.ndarray:
    """Unnormalized ``p_i = (i / nbar^2) (nbar / (nbar + 1))^{i+1}`` for ``i < D``."""
    i = np.arange(D)
    x = nbar_th / (nbar_th + 1)
    return i / nbar_th**2 * np.exp((i + 1) * math.log(x))


def photon_added_thermal(nbar_th: float, D: int | None = None, tail_tol: float = TAIL_TOL) -> DiagonalFockMixture:
    """Single-photon-added thermal state; ``D=None`` sizes the cutoff from ``tail_tol``."""
    if not nbar_th > 0:
        raise ValueError("nbar_th must be positive")
    what = f"photon-added thermal nbar={nbar_th}"
    if D is None:
        D = _auto_size(lambda d: photon_added_thermal_probs(nbar_th, d), tail_tol, what)
    # the exact distribution sums to one; renormalizing only absorbs the tail
    return _diagonal(photon_added_thermal_probs(nbar_th, D), tail_tol, what)


def thermal(nbar_th: float, D: int | None = None, tail_tol: float = TAIL_TOL) -> DiagonalFockMixture:
    """Thermal state ``p_i = nbar^i / (nbar + 1)^{i+1}``."""
    if not nbar_th > 0:
        raise ValueError("nbar_th must be positive")

    def probs(d):
        return np.exp(np.arange(d) * math.log(nbar_th / (nbar_th + 1))) / (nbar_th + 1)

    what = f"thermal nbar={nbar_th}"
    if D is None:
        D = _auto_size(probs, tail_tol, what)
    return _diagonal(probs(D), tail_tol, what)


def photon_added_thermal_w_sum(nbar_th: float, tail_tol: float = 1e-14) -> float:
    return diagonal_w_sum(photon_added_thermal(nbar_th, tail_tol=tail_tol).p)


def w_threshold(bracket: tuple[float, float] = (0.3, 0.6), tol: float = 1e-8) -> float:
    """Thermal occupation where the photon-added thermal state's W reaches zero."""
    lo, hi = bracket
    f_lo, f_hi = photon_added_thermal_w_sum(lo), photon_added_thermal_w_sum(hi)
    if f_lo * f_hi > 0:
        raise NoSignChangeError(
            f"diagonal W sum has the same sign at {lo} ({f_lo:.3g}) and {hi} ({f_hi:.3g})"
        )
    return float(optimize.bisect(photon_added_thermal_w_sum, lo, hi, xtol=tol))
