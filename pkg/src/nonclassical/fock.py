"""Truncated Fock-space states, constructors and moments.

Everything here is a plain number-basis representation: a pure state is a
complex amplitude vector ``c_0 .. c_{D-1}``, a mixed state a ``D x D``
density matrix.  Infinite-dimensional families are truncated with explicit
tail-mass accounting: the last two retained levels must carry less than
``tail_tol`` of probability, since the moment ``<a^2>`` couples ``n`` to
``n + 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import expm_multiply
from scipy.special import gammaln

from .errors import (
    CutoffCapExceededError,
    CutoffTooSmallError,
    NotADensityMatrixError,
    NotNormalizedError,
    TailMassExceededError,
    ZeroNormError,
)

TAIL_TOL = 1e-12
NORM_TOL = 1e-12
D_MIN = 3
D_MAX = 4096

CAT_VARIANTS = ("even", "odd", "three-headed", "four-headed")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PureFockState:
    """Normalized amplitude vector in the truncated number basis."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 1:
            raise ValueError("amplitudes must be a non-empty 1-D vector")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise NotNormalizedError(f"sum |c_n|^2 = {norm2!r}, expected 1")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def from_unnormalized(cls, amps) -> PureFockState:
        amps = np.asarray(amps, dtype=complex)
        norm = np.linalg.norm(amps)
        if not norm > 0 or not np.isfinite(norm):
            raise ZeroNormError("state vector has zero norm")
        return cls(amps / norm)

    @property
    def cutoff(self) -> int:
        return self.amplitudes.size

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def tail_mass(self) -> float:
        """Probability in the two highest retained levels."""
        return float(self.probabilities[max(self.cutoff - 2, 0):].sum())

    def padded(self, D: int) -> PureFockState:
        if D < self.cutoff:
            raise CutoffTooSmallError(f"cannot pad a D={self.cutoff} state down to {D}")
        out = np.zeros(D, dtype=complex)
        out[: self.cutoff] = self.amplitudes
        return PureFockState(out)

    def projector(self) -> DensityMatrix:
        c = self.amplitudes
        return DensityMatrix(np.outer(c, c.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix on ``D`` levels."""

    entries: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 1:
            raise NotADensityMatrixError(f"expected a square matrix, got shape {rho.shape}")
        if not np.all(np.isfinite(rho)):
            raise NotADensityMatrixError("entries must be finite")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
            raise NotADensityMatrixError("matrix is not Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > 1e-10:
            raise NotADensityMatrixError(f"trace is {tr!r}, expected 1")
        lam_min = np.linalg.eigvalsh(rho)[0]
        if lam_min < -1e-10:
            raise NotADensityMatrixError(f"negative eigenvalue {lam_min!r}")
        object.__setattr__(self, "entries", _frozen(rho))

    @classmethod
    def diagonal(cls, p) -> DensityMatrix:
        return cls(np.diag(np.asarray(p, dtype=float)))

    @classmethod
    def mixture(cls, weights, states) -> DensityMatrix:
        """Convex combination of pure states (padded to a common cutoff)."""
        D = max(s.cutoff for s in states)
        rho = np.zeros((D, D), dtype=complex)
        for w, s in zip(weights, states):
            c = s.padded(D).amplitudes
            rho += w * np.outer(c, c.conj())
        return cls(rho)

    @property
    def cutoff(self) -> int:
        return self.entries.shape[0]

    def padded(self, D: int) -> DensityMatrix:
        if D < self.cutoff:
            raise CutoffTooSmallError(f"cannot pad a D={self.cutoff} matrix down to {D}")
        out = np.zeros((D, D), dtype=complex)
        out[: self.cutoff, : self.cutoff] = self.entries
        return DensityMatrix(out)


@dataclass(frozen=True)
class Moments:
    """``(<a^dag a>, <a>, <a^2>)``; these fix the pure-state measure."""

    nbar: float
    alpha: complex
    xi: complex

    def __post_init__(self):
        object.__setattr__(self, "nbar", float(self.nbar))
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "xi", complex(self.xi))
        if self.nbar < -1e-10:
            raise ValueError(f"nbar must be non-negative, got {self.nbar}")
        if abs(self.alpha) ** 2 > self.nbar + 1e-10:
            raise ValueError("|alpha|^2 exceeds nbar (Cauchy-Schwarz violated)")

    def displaced(self, beta: complex) -> Moments:
        """Moments after the displacement ``a -> a + beta``."""
        beta = complex(beta)
        return Moments(
            self.nbar + abs(beta) ** 2 + 2 * (beta.conjugate() * self.alpha).real,
            self.alpha + beta,
            self.xi + 2 * beta * self.alpha + beta**2,
        )


# ---------------------------------------------------------------- operators


def annihilation(D: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, D, dtype=float)), 1)


def number(D: int) -> np.ndarray:
    return np.diag(np.arange(D, dtype=float))


# ---------------------------------------------------------------- amplitudes
#
# Each ``*_amplitudes(..., D)`` returns the first D coefficients of the exact
# (untruncated) family member.  They drive both construction and auto_cutoff.


def coherent_amplitudes(alpha: complex, D: int) -> np.ndarray:
    alpha = complex(alpha)
    n = np.arange(D)
    if alpha == 0:
        out = np.zeros(D, dtype=complex)
        out[0] = 1.0
        return out
    x = abs(alpha)
    logmag = -0.5 * x * x + n * math.log(x) - 0.5 * gammaln(n + 1)
    return np.exp(logmag + 1j * n * np.angle(alpha))


def cat_norm(alpha: complex, variant: str) -> float:
    """Normalization constants N_+, N_-, N_3h, N_4h of the cat variants."""
    x = abs(complex(alpha)) ** 2
    if variant == "even":
        return 2.0 + 2.0 * math.exp(-2 * x)
    if variant == "odd":
        return -2.0 * math.expm1(-2 * x)
    if variant == "three-headed":
        return 3.0 + 4.0 * math.exp(-x / 2) + 2.0 * math.exp(-2 * x)
    if variant == "four-headed":
        if x < 1.0:
            # 4 - 8 e^-x cos x + 4 e^-2x cancels badly near 0; use the n = 2 mod 4 series
            s, term, k = 0.0, x * x / 2.0, 2
            while term > 1e-18 * max(s, 1e-300):
                s += term
                term *= x**4 / ((k + 1) * (k + 2) * (k + 3) * (k + 4))
                k += 4
            return 16.0 * math.exp(-x) * s
        return 4.0 - 8.0 * math.exp(-x) * math.cos(x) + 4.0 * math.exp(-2 * x)
    raise ValueError(f"unknown cat variant {variant!r}; expected one of {CAT_VARIANTS}")


def cat_terms(alpha: complex, variant: str) -> list[tuple[complex, complex]]:
    """(coefficient, amplitude) pairs of the unnormalized superposition."""
    a = complex(alpha)
    if variant == "even":
        return [(1, a), (1, -a)]
    if variant == "odd":
        return [(1, a), (-1, -a)]
    if variant == "three-headed":
        return [(1, a), (1, 0j), (1, -a)]
    if variant == "four-headed":
        return [(1, a), (-1, 1j * a), (1, -a), (-1, -1j * a)]
    raise ValueError(f"unknown cat variant {variant!r}; expected one of {CAT_VARIANTS}")


def cat_amplitudes(alpha: complex, variant: str, D: int) -> np.ndarray:
    norm = cat_norm(alpha, variant)
    if norm <= 0.0:
        raise ZeroNormError(f"{variant} cat at alpha={alpha} has zero norm")
    amps = sum(c * coherent_amplitudes(a, D) for c, a in cat_terms(alpha, variant))
    return amps / math.sqrt(norm)


def squeezed_vacuum_amplitudes(r: float, theta: float, D: int) -> np.ndarray:
    """Amplitudes of ``S(xi)|0>`` with ``xi = r e^{i theta}``; only even levels."""
    out = np.zeros(D, dtype=complex)
    if r == 0:
        out[0] = 1.0
        return out
    m = np.arange((D + 1) // 2)
    logmag = (
        -0.5 * math.log(math.cosh(r))
        + m * math.log(math.tanh(r) / 2)
        + 0.5 * gammaln(2 * m + 1)
        - gammaln(m + 1)
    )
    out[0::2] = np.exp(logmag) * (-np.exp(1j * theta)) ** m
    return out


def squeezed_coherent_amplitudes(alpha: complex, r: float, theta: float, D: int) -> np.ndarray:
    """Amplitudes of ``D(alpha) S(xi)|0>`` from its three-term recurrence.

    Used to size the cutoff; construction goes through :func:`displace`.
    """
    alpha = complex(alpha)
    ch, sh = math.cosh(r), math.sinh(r)
    e = complex(math.cos(theta), math.sin(theta))
    gamma = alpha * ch + alpha.conjugate() * e * sh
    c = np.zeros(D, dtype=complex)
    c[0] = np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * alpha.conjugate() ** 2 * e * math.tanh(r)) / math.sqrt(ch)
    if D > 1:
        c[1] = gamma * c[0] / ch
    for n in range(1, D - 1):
        c[n + 1] = (gamma * c[n] - e * sh * math.sqrt(n) * c[n - 1]) / (ch * math.sqrt(n + 1))
    return c


def _tail(amps: np.ndarray) -> float:
    """Mass outside levels ``0 .. D-3`` of an exact family member."""
    D = amps.size
    kept = float(np.sum(np.abs(amps[: max(D - 2, 0)]) ** 2))
    return max(0.0, 1.0 - kept)


def auto_cutoff(
    amplitudes: Callable[[int], np.ndarray],
    tail_tol: float = TAIL_TOL,
    d_min: int = D_MIN,
    d_max: int = D_MAX,
) -> int:
    """Smallest cutoff whose tail mass is below ``tail_tol``.

    ``amplitudes(D)`` must return the leading D coefficients of the exact,
    normalized family member.  Search doubles from ``d_min`` and then bisects.
    """
    lo, hi = d_min - 1, d_min
    while _tail(amplitudes(hi)) >= tail_tol:
        if hi >= d_max:
            raise CutoffCapExceededError(
                f"tail mass still >= {tail_tol:g} at the cutoff cap D_max={d_max}"
            )
        lo, hi = hi, min(2 * hi, d_max)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _tail(amplitudes(mid)) < tail_tol:
            hi = mid
        else:
            lo = mid
    return hi


def _truncate(amps: np.ndarray, tail_tol: float, what: str) -> PureFockState:
    tail = _tail(amps)
    if tail >= tail_tol:
        raise TailMassExceededError(
            f"{what}: truncation at D={amps.size} loses {tail:.3g} (tolerance {tail_tol:g})"
        )
    return PureFockState.from_unnormalized(amps)


# ---------------------------------------------------------------- constructors


def make_fock(n: int, D: int | None = None) -> PureFockState:
    if n < 0:
        raise ValueError("photon number must be non-negative")
    if D is None:
        D = n + 3
    if n >= D - 1:
        raise CutoffTooSmallError(f"|{n}> needs cutoff D > {n + 1}, got {D}")
    amps = np.zeros(D, dtype=complex)
    amps[n] = 1.0
    return PureFockState(amps)


def make_fock_superposition(n: int, D: int | None = None) -> PureFockState:
    """``(|0> + |n>)/sqrt(2)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if D is None:
        D = n + 3
    if n >= D - 1:
        raise CutoffTooSmallError(f"|{n}> needs cutoff D > {n + 1}, got {D}")
    amps = np.zeros(D, dtype=complex)
    amps[0] = amps[n] = 1 / math.sqrt(2)
    return PureFockState(amps)


def make_coherent(alpha: complex, D: int | None = None, tail_tol: float = TAIL_TOL) -> PureFockState:
    def amps(d):
        return coherent_amplitudes(alpha, d)

    if D is None:
        D = auto_cutoff(amps, tail_tol)
    return _truncate(amps(D), tail_tol, f"coherent alpha={alpha}")


def make_cat(
    alpha: complex, variant: str = "even", D: int | None = None, tail_tol: float = TAIL_TOL
) -> PureFockState:
    """Even, odd, three-headed or four-headed cat state."""
    if cat_norm(alpha, variant) == 0.0:
        raise ZeroNormError(f"{variant} cat at alpha={alpha} has zero norm")

    def amps(d):
        return cat_amplitudes(alpha, variant, d)

    if D is None:
        D = auto_cutoff(amps, tail_tol)
    return _truncate(amps(D), tail_tol, f"{variant} cat alpha={alpha}")


def make_squeezed_coherent(
    alpha: complex,
    r: float,
    theta: float = 0.0,
    D: int | None = None,
    tail_tol: float = TAIL_TOL,
) -> PureFockState:
    """``D(alpha) S(r e^{i theta}) |0>``; alpha = 0 gives the squeezed vacuum."""
    if r < 0:
        raise ValueError("squeezing r must be non-negative")
    alpha = complex(alpha)

    def sv(d):
        return squeezed_vacuum_amplitudes(r, theta, d)

    if alpha == 0:
        if D is None:
            D = auto_cutoff(sv, tail_tol)
        return _truncate(sv(D), tail_tol, f"squeezed vacuum r={r}")

    if D is None:
        D = auto_cutoff(lambda d: squeezed_coherent_amplitudes(alpha, r, theta, d), tail_tol)
    # amplitude errors after displacement scale with sqrt(input tail); doubling
    # the cutoff of the geometrically decaying input squares its tail
    d_sv = 2 * auto_cutoff(sv, tail_tol)
    return displace(_truncate(sv(d_sv), tail_tol, f"squeezed vacuum r={r}"), alpha, D=D, tail_tol=tail_tol)


def make_squeezed_vacuum(r: float, theta: float = 0.0, D: int | None = None, tail_tol: float = TAIL_TOL):
    return make_squeezed_coherent(0.0, r, theta, D=D, tail_tol=tail_tol)


# ---------------------------------------------------------------- operations


def photon_add(state: PureFockState, tail_tol: float = TAIL_TOL) -> PureFockState:
    """``a^dag|psi> / sqrt(1 + nbar)``; the cutoff grows by one."""
    c = state.amplitudes
    out = np.zeros(state.cutoff + 1, dtype=complex)
    out[1:] = np.sqrt(np.arange(1, state.cutoff + 1)) * c
    tail = float(np.sum(np.abs(out[-2:]) ** 2)) / float(np.vdot(out, out).real)
    if tail >= tail_tol:
        raise TailMassExceededError(
            f"photon-added state has tail mass {tail:.3g} at D={out.size}; use a larger input cutoff"
        )
    return PureFockState.from_unnormalized(out)


def displacement_padding(beta: complex) -> int:
    return max(20, math.ceil(4 * abs(beta) ** 2))


def displace(
    state: PureFockState, beta: complex, D: int | None = None, tail_tol: float = TAIL_TOL
) -> PureFockState:
    """Apply ``exp(beta a^dag - beta^* a)`` on an enlarged truncated space.

    The generator is truncated at ``max(D_in, D) + padding`` levels, with the
    padding doubled until the outer half of it stays empty.  With ``D=None``
    the result keeps the smallest cutoff meeting ``tail_tol``.
    """
    beta = complex(beta)
    if beta == 0:
        return state if D is None else _resize(state, D, tail_tol)
    pad = displacement_padding(beta)
    base = max(state.cutoff, D or 0)
    while True:
        work = base + pad
        sub = np.sqrt(np.arange(1, work, dtype=float))
        gen = sparse.diags([beta * sub, -beta.conjugate() * sub], [-1, 1], format="csc", dtype=complex)
        v = expm_multiply(gen, state.padded(work).amplitudes)
        probs = np.abs(v) ** 2
        # norm reflected off the artificial boundary must be negligible
        if float(probs[work - pad // 2:].sum()) < 1e-6 * tail_tol:
            break
        if work > 4 * D_MAX:
            raise TailMassExceededError(f"displacement by {beta} does not fit below D={work}")
        pad *= 2
    # suffix[k] = mass on levels >= k inside the working space
    suffix = np.cumsum(probs[::-1])[::-1]
    if D is None:
        ok = np.nonzero(suffix < tail_tol)[0]
        D = max(int(ok[0]) + 2, D_MIN)
    lost = float(suffix[D - 2]) if D - 2 < work else 0.0
    if lost >= tail_tol:
        raise TailMassExceededError(
            f"displaced state (beta={beta}): truncation at D={D} loses {lost:.3g} (tolerance {tail_tol:g})"
        )
    return PureFockState.from_unnormalized(v[:D])


def _truncate_vector(v: np.ndarray, tail_tol: float, what: str) -> PureFockState:
    state = PureFockState.from_unnormalized(v)
    if state.tail_mass() >= tail_tol:
        raise TailMassExceededError(f"{what}: tail mass {state.tail_mass():.3g} at D={state.cutoff}")
    return state


def _resize(state: PureFockState, D: int, tail_tol: float) -> PureFockState:
    if D >= state.cutoff:
        return state.padded(D)
    return _truncate_vector(state.amplitudes[:D], tail_tol, "resized state")


# ---------------------------------------------------------------- moments


def moments_pure(state: PureFockState) -> Moments:
    c = state.amplitudes
    n = np.arange(state.cutoff)
    nbar = float(np.sum(n * np.abs(c) ** 2))
    alpha = np.sum(np.sqrt(n[1:]) * c[:-1].conj() * c[1:])
    xi = np.sum(np.sqrt(n[2:] * (n[2:] - 1.0)) * c[:-2].conj() * c[2:])
    return Moments(nbar, alpha, xi)


def moments_mixed(rho: DensityMatrix) -> Moments:
    r = rho.entries
    n = np.arange(rho.cutoff)
    nbar = float(np.sum(n * np.diag(r).real))
    alpha = np.sum(np.sqrt(n[1:]) * np.diag(r, -1))
    xi = np.sum(np.sqrt(n[2:] * (n[2:] - 1.0)) * np.diag(r, -2))
    return Moments(nbar, alpha, xi)
