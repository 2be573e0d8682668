"""Exact coherent-superposition algebra and closed-form family catalogue."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import fock
from .errors import NotNormalizedError, UnknownFamilyError, ZeroNormError
from .fock import Moments, PureFockState


def overlap(alpha_j: complex, alpha_k: complex) -> complex:
    """``<alpha_k|alpha_j>``."""
    aj, ak = complex(alpha_j), complex(alpha_k)
    return complex(np.exp(-0.5 * abs(aj) ** 2 - 0.5 * abs(ak) ** 2 + ak.conjugate() * aj))


def gram(alphas) -> np.ndarray:
    """Matrix ``f[j, k] = <alpha_k|alpha_j>``."""
    a = np.asarray(alphas, dtype=complex)
    return np.exp(-0.5 * np.abs(a[:, None]) ** 2 - 0.5 * np.abs(a[None, :]) ** 2 + a[None, :].conj() * a[:, None])


@dataclass(frozen=True)
class CoherentSuperposition:
    """``sum_k c_k |alpha_k>`` with exact overlap algebra.

    Build it with :meth:`from_terms`, which rescales the coefficients to unit
    norm and records the factor that was applied in ``norm_factor``.
    """

    coeffs: tuple[complex, ...]
    alphas: tuple[complex, ...]
    norm_factor: float = field(default=1.0, compare=False)

    def __post_init__(self):
        if len(self.coeffs) != len(self.alphas) or not self.coeffs:
            raise ValueError("need L >= 1 matching coefficients and amplitudes")
        if not all(np.isfinite(complex(a)) for a in self.alphas):
            raise ValueError("amplitudes must be finite")
        norm2 = self._norm2(self.coeffs, self.alphas)
        if abs(norm2 - 1.0) > 1e-12:
            raise NotNormalizedError(f"superposition has norm^2 {norm2!r}; use from_terms()")

    @staticmethod
    def _norm2(coeffs, alphas) -> float:
        c = np.asarray(coeffs, dtype=complex)
        f = gram(alphas)
        return float(np.real(np.einsum("j,k,jk->", c, c.conj(), f)))

    @classmethod
    def from_terms(cls, coeffs, alphas) -> CoherentSuperposition:
        coeffs = tuple(complex(c) for c in coeffs)
        alphas = tuple(complex(a) for a in alphas)
        norm2 = cls._norm2(coeffs, alphas)
        if not norm2 > 1e-300:
            raise ZeroNormError("coherent superposition has zero norm")
        scale = 1.0 / math.sqrt(norm2)
        return cls(tuple(c * scale for c in coeffs), alphas, norm_factor=scale)

    @classmethod
    def cat(cls, alpha: complex, variant: str = "even") -> CoherentSuperposition:
        terms = fock.cat_terms(alpha, variant)
        return cls.from_terms([t[0] for t in terms], [t[1] for t in terms])

    def to_fock(self, D: int | None = None, tail_tol: float = fock.TAIL_TOL) -> PureFockState:
        def amps(d):
            return sum(c * fock.coherent_amplitudes(a, d) for c, a in zip(self.coeffs, self.alphas))

        if D is None:
            D = fock.auto_cutoff(amps, tail_tol)
        return fock._truncate(amps(D), tail_tol, "coherent superposition")


def exact_moments(state: CoherentSuperposition) -> Moments:
    """Moments from the overlap sums, with no truncation."""
    c = np.asarray(state.coeffs, dtype=complex)
    a = np.asarray(state.alphas, dtype=complex)
    f = gram(a)
    w = c[:, None] * c[None, :].conj() * f  # c_j c_k^* f_jk
    alpha = np.sum(w * a[:, None])
    xi = np.sum(w * a[:, None] ** 2)
    nbar = np.sum(w * a[:, None] * a[None, :].conj())
    if abs(nbar.imag) > 1e-12 * max(1.0, abs(nbar.real)):
        raise NotNormalizedError(f"nbar has imaginary part {nbar.imag!r}")
    return Moments(nbar.real, alpha, xi)


# ------------------------------------------------------------------ catalogue


@dataclass(frozen=True)
class ClosedFormReport:
    family: str
    params: dict
    N: float
    N_per_energy: float
    nbar: float


def _per_energy(N: float, nbar: float) -> float:
    return N / nbar if nbar > 0 else math.nan


def _cat_ratio(x: float, variant: str) -> float:
    """``N_-/N_+`` for the even cat, ``N_+/N_-`` for the odd cat."""
    n_plus = 2.0 + 2.0 * math.exp(-2 * x)
    n_minus = -2.0 * math.expm1(-2 * x)
    if variant == "even":
        return n_minus / n_plus
    if n_minus == 0.0:
        raise ZeroNormError("odd cat at alpha = 0 has zero norm")
    return n_plus / n_minus


def _canon(family: str) -> str:
    return family.replace("-", "_").lower()


def _cf_coherent(alpha=0.0):
    return 0.0, abs(complex(alpha)) ** 2


def _cf_squeezed_coherent(r, alpha=0.0):
    if r < 0:
        raise ValueError("r must be non-negative")
    N = math.sinh(r) ** 2 + math.cosh(r) * math.sinh(r)
    return N, abs(complex(alpha)) ** 2 + math.sinh(r) ** 2


def _cf_squeezed_vacuum(r):
    return _cf_squeezed_coherent(r, 0.0)


def _cf_fock(n):
    if n < 0:
        raise ValueError("n must be non-negative")
    return float(n), float(n)


def _cf_fock_superposition(n):
    # (|0> + |n>)/sqrt(2): <a> = delta_{n,1}/2, <a^2> = delta_{n,2}/sqrt(2)
    if n < 1:
        raise ValueError("n must be >= 1")
    nbar = n / 2
    if n == 1:
        return 0.5, nbar
    if n == 2:
        return 1.0 + 1 / math.sqrt(2), nbar
    return nbar, nbar


def _cf_cat(variant):
    def cf(alpha):
        x = abs(complex(alpha)) ** 2
        R = _cat_ratio(x, variant)
        return x * (1.0 + R), x * R

    return cf


def _cf_three_headed_cat(alpha):
    x = abs(complex(alpha)) ** 2
    if x == 0:
        return 0.0, 0.0
    n_plus = 2.0 + 2.0 * math.exp(-2 * x)
    n_minus = -2.0 * math.expm1(-2 * x)
    n3h = fock.cat_norm(alpha, "three-headed")
    nbar = x * n_minus / n3h
    return nbar * (1.0 + (n_plus + 2 * math.exp(-x / 2)) / n_minus), nbar


def four_headed_nbar(alpha) -> float:
    x = abs(complex(alpha)) ** 2
    n4h = fock.cat_norm(alpha, "four-headed")
    if n4h == 0.0:
        raise ZeroNormError("four-headed cat at alpha = 0 has zero norm")
    if x < 1.0:
        # x d/dx of the n = 2 mod 4 series, same cancellation issue as the norm
        s, term, k = 0.0, x * x / 2.0, 2
        while term > 1e-18 * max(s, 1e-300):
            s += k * term
            term *= x**4 / ((k + 1) * (k + 2) * (k + 3) * (k + 4))
            k += 4
        return 16.0 * math.exp(-x) * s / n4h
    return 8.0 * math.exp(-x) * x * (math.sinh(x) + math.sin(x)) / n4h


def _cf_four_headed_cat(alpha):
    nbar = four_headed_nbar(alpha)
    return nbar, nbar  # <a> = <a^2> = 0 by the mod-4 structure


CLOSED_FORMS = {
    "coherent": _cf_coherent,
    "squeezed_vacuum": _cf_squeezed_vacuum,
    "squeezed_coherent": _cf_squeezed_coherent,
    "fock": _cf_fock,
    "fock_superposition": _cf_fock_superposition,
    "even_cat": _cf_cat("even"),
    "odd_cat": _cf_cat("odd"),
    "three_headed_cat": _cf_three_headed_cat,
    "four_headed_cat": _cf_four_headed_cat,
}


def closed_form(family: str, **params) -> ClosedFormReport:
    """Closed-form ``N``, ``nbar`` and ``N / nbar`` for a named pure family.

    ``N_per_energy`` is NaN for states with zero mean excitation.
    """
    key = _canon(family)
    try:
        fn = CLOSED_FORMS[key]
    except KeyError:
        raise UnknownFamilyError(f"no closed form for family {family!r}") from None
    N, nbar = fn(**params)
    return ClosedFormReport(key, dict(params), N, _per_energy(N, nbar), nbar)


@dataclass(frozen=True)
class Table1Entry:
    """Nonclassicality before and after single-photon addition."""

    N: float
    N_per_energy: float
    N_added: float
    N_added_per_energy: float
    nbar: float
    nbar_added: float


def table1(family: str, **params) -> Table1Entry:
    """Photon-addition catalogue for coherent, squeezed-vacuum and cat inputs.

    The per-energy values after addition divide by the mean excitation of the
    photon-added state itself.  For the coherent input this gives
    ``1/(1 + 3|alpha|^2 + |alpha|^4)``, which is what the Fock-space pipeline
    produces.
    """
    key = _canon(family)
    if key == "coherent":
        x = abs(complex(params["alpha"])) ** 2
        N_add = 1.0 / (1.0 + x)
        nbar_add = (x * x + 3 * x + 1) / (1 + x)
        return Table1Entry(0.0, 0.0 if x > 0 else math.nan, N_add, N_add / nbar_add, x, nbar_add)
    if key == "squeezed_vacuum":
        r = float(params["r"])
        s = math.sinh(r) ** 2
        nbar_add = 3 * s + 1
        N = 0.5 * math.expm1(2 * r)
        N_add = 0.5 * (3 * math.exp(2 * r) - 1)
        per = 1 + math.sqrt(1 + 1 / s) if s > 0 else math.nan
        per_add = 1 + math.sqrt(1 + 1 / nbar_add - 2 / nbar_add**2)
        return Table1Entry(N, per, N_add, per_add, s, nbar_add)
    if key in ("even_cat", "odd_cat"):
        x = abs(complex(params["alpha"])) ** 2
        R = _cat_ratio(x, key.split("_")[0])
        num = x * (x + 3) * (1 + R) + 1
        nbar_add = (x * (x + 3 * R) + 1) / (x * R + 1)
        N = x * (1 + R)
        per = 1 + 1 / R if R > 0 else math.nan
        return Table1Entry(N, per, num / (x * R + 1), num / (x * (x + 3 * R) + 1), x * R, nbar_add)
    raise UnknownFamilyError(f"table1 has no entry for {family!r}")


# ------------------------------------------------------------------ classes


class PureClass(enum.Enum):
    CLASS1 = "Class1"
    CLASS2 = "Class2"
    CLASS3 = "Class3"
    CLASSICAL = "Classical"


def class_of(limit_value: float) -> PureClass:
    """Class from the large-energy limit of the nonclassicality per unit energy."""
    if limit_value < 0:
        raise ValueError(f"limit must be non-negative, got {limit_value}")
    if abs(limit_value - 2.0) <= 1e-9:
        return PureClass.CLASS1
    if limit_value > 2.0:
        raise ValueError(f"limit {limit_value} exceeds the squeezed-vacuum maximum 2")
    if limit_value >= 1.0:
        return PureClass.CLASS2
    if limit_value > 0.0:
        return PureClass.CLASS3
    return PureClass.CLASSICAL


def class_limit(family: str, **params) -> float:
    """``lim N/nbar`` as ``nbar -> inf`` along a family, from its closed form.

    ``squeezed_coherent`` is taken along a ray of fixed
    ``kappa = |alpha|^2 / (cosh r sinh r)``; ``photon_added_*`` families use the
    photon-addition catalogue.
    """
    key = _canon(family)
    if key in ("squeezed_vacuum", "even_cat", "odd_cat", "three_headed_cat",
               "photon_added_squeezed_vacuum", "photon_added_even_cat", "photon_added_odd_cat"):
        return 2.0
    if key in ("fock", "fock_superposition", "four_headed_cat"):
        return 1.0
    if key in ("coherent", "photon_added_coherent"):
        return 0.0
    if key == "squeezed_coherent":
        kappa = float(params.get("kappa", 0.0))
        if kappa < 0:
            raise ValueError("kappa must be non-negative")
        return 2.0 / (1.0 + kappa)
    raise UnknownFamilyError(f"no class limit for family {family!r}")
