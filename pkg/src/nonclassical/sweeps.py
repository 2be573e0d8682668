"""Figure datasets as rows of numbers (no plotting)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import analytic
from .fock import cat_norm
from .measures import diagonal_w_sum
from .roof import photon_added_thermal

FIGURES = ("fig3", "fig4", "fig5", "fig6", "fig7")

DEFAULT_GRIDS = {
    "fig3": (0.5, 50.0, 100),
    "fig4": (0.0, 2.0, 101),
    "fig5": (0.1, 5.0, 50),
    "fig6": (0.1, 5.0, 50),
    "fig7": (0.05, 1.0, 96),
}

COLUMNS = {
    "fig3": ("nbar", "even_cat", "odd_cat", "three_headed_cat", "four_headed_cat",
             "fock", "fock_superposition", "squeezed_vacuum"),
    "fig4": ("alpha2_normalized", "alpha2", "nbar", "N", "N_per_energy"),
    "fig5": ("nbar", "alpha2", "N", "N_added"),
    "fig6": ("nbar", "alpha2", "N_per_energy", "N_added_per_energy"),
    "fig7": ("nbar_th", "W"),
}


@dataclass(frozen=True)
class SweepSpec:
    figure: str
    start: float
    stop: float
    points: int

    def __post_init__(self):
        if self.figure not in FIGURES:
            raise ValueError(f"unknown figure {self.figure!r}; expected one of {FIGURES}")
        if int(self.points) != self.points or self.points < 2:
            raise ValueError("a sweep needs at least 2 points")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)) or not self.start < self.stop:
            raise ValueError("sweep grid needs finite start < stop")
        lo = 0.0
        if self.figure == "fig4":
            ok = self.start >= lo
        else:
            ok = self.start > lo
        if not ok:
            raise ValueError(f"{self.figure} grid must start above {lo}")

    @classmethod
    def default(cls, figure: str) -> SweepSpec:
        return cls(figure, *DEFAULT_GRIDS[figure])

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, int(self.points))


def _invert(fn: Callable[[float], float], target: float, lo: float = 0.0) -> float:
    """Solve ``fn(x) = target`` for increasing ``fn`` with ``fn(lo) < target``."""
    hi = max(1.0, 2 * target)
    while fn(hi) < target:
        hi *= 2
    return brentq(lambda x: fn(x) - target, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def cat_nbar(x: float, variant: str) -> float:
    """Mean photon number of a cat with ``|alpha|^2 = x``."""
    if x == 0.0:
        return 0.0
    n_plus = 2.0 + 2.0 * math.exp(-2 * x)
    n_minus = -2.0 * math.expm1(-2 * x)
    if variant == "even":
        return x * n_minus / n_plus
    if variant == "odd":
        return x * n_plus / n_minus
    if variant == "three-headed":
        return x * n_minus / cat_norm(math.sqrt(x), "three-headed")
    if variant == "four-headed":
        return analytic.four_headed_nbar(math.sqrt(x))
    raise ValueError(f"unknown cat variant {variant!r}")


def cat_x_for_nbar(nbar: float, variant: str) -> float:
    """``|alpha|^2`` giving mean photon number ``nbar`` (NaN if unreachable)."""
    floor = {"odd": 1.0, "four-headed": 2.0}.get(variant, 0.0)
    if nbar <= floor:
        return math.nan
    return _invert(lambda x: cat_nbar(x, variant) if x > 0 else floor, nbar)


def _cat_per_energy(nbar: float, family: str, variant: str) -> float:
    x = cat_x_for_nbar(nbar, variant)
    if math.isnan(x):
        return math.nan
    return analytic.closed_form(family, alpha=math.sqrt(x)).N_per_energy


def _integer(v: float) -> int | None:
    k = round(v)
    return int(k) if abs(v - k) < 1e-9 else None


def fig3_row(nbar: float) -> dict:
    """Per-energy nonclassicality of the pure families at mean photon number ``nbar``.

    Fock states exist only at integer ``nbar`` and ``(|0> + |n>)/sqrt(2)`` only
    at half-integers; other grid points are NaN.  The four-headed cat has
    ``nbar > 2`` and per-energy value 1, with ``nbar = 2`` its vacuum limit.
    """
    n = _integer(nbar)
    n2 = _integer(2 * nbar)
    return {
        "nbar": nbar,
        "even_cat": _cat_per_energy(nbar, "even_cat", "even"),
        "odd_cat": _cat_per_energy(nbar, "odd_cat", "odd"),
        "three_headed_cat": _cat_per_energy(nbar, "three_headed_cat", "three-headed"),
        "four_headed_cat": 1.0 if nbar >= 2.0 else math.nan,
        "fock": analytic.closed_form("fock", n=n).N_per_energy if n and n >= 1 else math.nan,
        "fock_superposition": (
            analytic.closed_form("fock_superposition", n=n2).N_per_energy if n2 and n2 >= 1 else math.nan
        ),
        "squeezed_vacuum": 1.0 + math.sqrt(1.0 + 1.0 / nbar),
    }


def fig4_row(t: float, r: float = 5.0) -> dict:
    """Squeezed coherent state at fixed ``r`` with ``|alpha|^2 = t sinh(2r)/2``."""
    x = t * math.sinh(2 * r) / 2
    rep = analytic.closed_form("squeezed_coherent", r=r, alpha=math.sqrt(x))
    return {"alpha2_normalized": t, "alpha2": x, "nbar": rep.nbar, "N": rep.N, "N_per_energy": rep.N_per_energy}


def _even_cat_added(nbar: float) -> tuple[float, analytic.Table1Entry]:
    x = cat_x_for_nbar(nbar, "even")
    return x, analytic.table1("even_cat", alpha=math.sqrt(x))


def fig5_row(nbar: float) -> dict:
    x, e = _even_cat_added(nbar)
    return {"nbar": nbar, "alpha2": x, "N": e.N, "N_added": e.N_added}


def fig6_row(nbar: float) -> dict:
    x, e = _even_cat_added(nbar)
    return {"nbar": nbar, "alpha2": x, "N_per_energy": e.N_per_energy, "N_added_per_energy": e.N_added_per_energy}


def fig7_row(nbar_th: float) -> dict:
    p = photon_added_thermal(nbar_th, tail_tol=1e-14).p
    return {"nbar_th": nbar_th, "W": max(diagonal_w_sum(p), 0.0)}


def sweep(spec: SweepSpec, **options) -> tuple[tuple[str, ...], list[dict]]:
    """Columns and rows (in grid order) for one figure."""
    fn = {"fig3": fig3_row, "fig4": fig4_row, "fig5": fig5_row, "fig6": fig6_row, "fig7": fig7_row}[spec.figure]
    rows = [fn(float(v), **options) for v in spec.grid]
    return COLUMNS[spec.figure], rows
