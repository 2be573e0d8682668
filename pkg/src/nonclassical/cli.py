"""``nonclassical`` command-line interface.

Exit codes: 0 success, 1 invariant failure, 2 unknown family, 3 bad
parameters or malformed input, 4 I/O error, 5 resource cap exceeded.
Every shared flag can be overridden from the environment with
``NONCLASSICAL_<FLAG>`` (for example ``NONCLASSICAL_TAIL_TOL=1e-10``); the
environment wins over the command line.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Callable

from . import analytic, checks, io
from . import fock as F
from . import measures as M
from . import roof as R
from .errors import (
    RESOURCE_ERRORS,
    InternalConsistencyError,
    MalformedInputError,
    UnknownFamilyError,
)
from .sweeps import FIGURES, SweepSpec, sweep

EXIT_OK, EXIT_INVARIANT, EXIT_FAMILY, EXIT_PARAMS, EXIT_IO, EXIT_RESOURCE = range(6)
ENV_PREFIX = "NONCLASSICAL_"
AGREE_TOL = 1e-8

RECORD_COLUMNS = ("family", "params", "provenance", "N", "N_per_energy", "W", "F_X", "F_theta", "nbar")
TABLE1_COLUMNS = ("family", "params", "provenance", "N", "N_per_energy", "N_added",
                  "N_added_per_energy", "nbar", "nbar_added")
ROOF_COLUMNS = ("member", "q", "nbar", "alpha_re", "alpha_im", "xi_re", "xi_im", "N_upper", "W", "gap")
CHECK_COLUMNS = ("suite", "check", "status", "detail")


class UsageError(Exception):
    """Bad command line; maps to the bad-parameters exit code."""


class InvariantFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- shared options


@dataclass(frozen=True)
class Shared:
    name: str
    type: Callable
    default: object
    help: str
    choices: tuple | None = None
    dest: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "dest", self.name.replace("-", "_"))


SHARED = (
    Shared("cutoff", int, None, "Fock cutoff D (default: sized from --tail-tol)"),
    Shared("tail-tol", float, F.TAIL_TOL, "maximum probability in the two highest retained levels"),
    Shared("tol", float, R.DEFAULT_TOL, "optimizer stopping tolerance per sweep"),
    Shared("seed", int, 0, "master random seed"),
    Shared("restarts", int, R.DEFAULT_RESTARTS, "optimizer restarts"),
    Shared("ensemble-size", int, None, "number of ensemble members K+1 (default 2 x support)"),
    Shared("out", str, None, "output file (default stdout)"),
    Shared("format", str, "csv", "output format", ("csv", "json")),
)


def _shared_parent() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    for opt in SHARED:
        p.add_argument(f"--{opt.name}", dest=opt.dest, type=opt.type, default=opt.default,
                       choices=opt.choices, help=opt.help)
    return p


def apply_env(args: argparse.Namespace, environ=None) -> argparse.Namespace:
    """Overwrite shared options from ``NONCLASSICAL_*`` environment variables."""
    environ = os.environ if environ is None else environ
    for opt in SHARED:
        raw = environ.get(ENV_PREFIX + opt.dest.upper())
        if raw is None or raw == "":
            continue
        try:
            value = opt.type(raw)
        except ValueError:
            raise UsageError(f"{ENV_PREFIX}{opt.dest.upper()}={raw!r} is not a valid {opt.type.__name__}") from None
        if opt.choices and value not in opt.choices:
            raise UsageError(f"{ENV_PREFIX}{opt.dest.upper()} must be one of {opt.choices}")
        setattr(args, opt.dest, value)
    return args


def _validate(args) -> None:
    if args.tail_tol <= 0 or not math.isfinite(args.tail_tol):
        raise UsageError("--tail-tol must be positive")
    if args.tol < 0:
        raise UsageError("--tol must be non-negative")
    if args.restarts < 1:
        raise UsageError("--restarts must be >= 1")
    if args.cutoff is not None and args.cutoff < F.D_MIN:
        raise UsageError(f"--cutoff must be >= {F.D_MIN}")
    if args.ensemble_size is not None and args.ensemble_size < 1:
        raise UsageError("--ensemble-size must be >= 1")


# ---------------------------------------------------------------- formatting


def _param_text(params: dict) -> str:
    parts = []
    for k, v in params.items():
        if isinstance(v, complex):
            v = v.real if v.imag == 0 else v
        if isinstance(v, complex):
            parts.append(f"{k}={io.fmt(v.real)}{'+' if v.imag >= 0 else '-'}{io.fmt(abs(v.imag))}j")
        else:
            parts.append(f"{k}={io.fmt(v)}")
    return ";".join(parts)


def _emit(args, columns, rows, payload=None) -> None:
    if args.format == "json":
        text = io.json_text(payload if payload is not None else rows)
    else:
        flat = [{**r, "params": _param_text(r["params"])} if isinstance(r.get("params"), dict) else r for r in rows]
        text = io.csv_text(flat, columns)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- measure


@dataclass(frozen=True)
class Family:
    required: tuple[str, ...]
    optional: tuple[str, ...]
    build: Callable
    closed: Callable | None


def _cat(variant):
    return lambda p, D, tol: F.make_cat(p["alpha"], variant, D=D, tail_tol=tol)


def _closed(name):
    return lambda p: analytic.closed_form(name, **{k: v for k, v in p.items() if k != "theta"})


def _added_closed(name):
    def cf(p):
        e = analytic.table1(name, **{k: v for k, v in p.items() if k != "theta"})
        return e.N_added, e.nbar_added

    return cf


def _added(builder):
    # the base state gets a tighter tail so the photon-added tail still meets tol
    return lambda p, D, tol: F.photon_add(builder(p, None if D is None else D - 1, tol * 1e-3), tail_tol=tol)


_BUILDERS = {
    "coherent": lambda p, D, tol: F.make_coherent(p["alpha"], D=D, tail_tol=tol),
    "squeezed-vacuum": lambda p, D, tol: F.make_squeezed_vacuum(p["r"], p.get("theta", 0.0), D=D, tail_tol=tol),
    "squeezed-coherent": lambda p, D, tol: F.make_squeezed_coherent(
        p["alpha"], p["r"], p.get("theta", 0.0), D=D, tail_tol=tol),
    "fock": lambda p, D, tol: F.make_fock(p["n"], D=D),
    "fock-superposition": lambda p, D, tol: F.make_fock_superposition(p["n"], D=D),
    "even-cat": _cat("even"),
    "odd-cat": _cat("odd"),
    "three-headed-cat": _cat("three-headed"),
    "four-headed-cat": _cat("four-headed"),
}

FAMILIES: dict[str, Family] = {
    "coherent": Family(("alpha",), (), _BUILDERS["coherent"], _closed("coherent")),
    "squeezed-vacuum": Family(("r",), ("theta",), _BUILDERS["squeezed-vacuum"], _closed("squeezed_vacuum")),
    "squeezed-coherent": Family(("r", "alpha"), ("theta",), _BUILDERS["squeezed-coherent"],
                                _closed("squeezed_coherent")),
    "fock": Family(("n",), (), _BUILDERS["fock"], _closed("fock")),
    "fock-superposition": Family(("n",), (), _BUILDERS["fock-superposition"], _closed("fock_superposition")),
    "even-cat": Family(("alpha",), (), _BUILDERS["even-cat"], _closed("even_cat")),
    "odd-cat": Family(("alpha",), (), _BUILDERS["odd-cat"], _closed("odd_cat")),
    "three-headed-cat": Family(("alpha",), (), _BUILDERS["three-headed-cat"], _closed("three_headed_cat")),
    "four-headed-cat": Family(("alpha",), (), _BUILDERS["four-headed-cat"], _closed("four_headed_cat")),
    "photon-added-coherent": Family(("alpha",), (), _added(_BUILDERS["coherent"]), _added_closed("coherent")),
    "photon-added-squeezed-vacuum": Family(("r",), (), _added(_BUILDERS["squeezed-vacuum"]),
                                           _added_closed("squeezed_vacuum")),
    "photon-added-even-cat": Family(("alpha",), (), _added(_BUILDERS["even-cat"]), _added_closed("even_cat")),
    "photon-added-odd-cat": Family(("alpha",), (), _added(_BUILDERS["odd-cat"]), _added_closed("odd_cat")),
}

PARAM_FLAGS = {"alpha": complex, "r": float, "theta": float, "n": int, "p": float, "nbar": float}


def _family_params(family: str, args) -> dict:
    spec = FAMILIES[family]
    given = {k: getattr(args, k) for k in PARAM_FLAGS if getattr(args, k, None) is not None}
    extra = set(given) - set(spec.required) - set(spec.optional)
    if extra:
        raise UsageError(f"{family} does not take {', '.join('--' + e for e in sorted(extra))}")
    missing = [k for k in spec.required if k not in given]
    if missing:
        raise UsageError(f"{family} needs {', '.join('--' + m for m in missing)}")
    out = {k: given[k] for k in spec.required + spec.optional if k in given}
    # a real amplitude stays real in the output
    return {k: v.real if isinstance(v, complex) and v.imag == 0 else v for k, v in out.items()}


def _record(family, params, provenance, N, nbar, W, F_X, alpha_r) -> dict:
    ar2 = abs(alpha_r) ** 2
    n_total = ar2 + nbar
    return {
        "family": family,
        "params": params,
        "provenance": provenance,
        "N": N,
        "N_per_energy": N / nbar if nbar > 0 else math.nan,
        "W": W,
        "F_X": F_X,
        "F_theta": n_total + 0.5 * ar2 * (F_X - 2.0),
        "nbar": nbar,
    }


def _canonical_family(name: str) -> str:
    key = name.strip().lower().replace("_", "-")
    if key not in FAMILIES:
        raise UnknownFamilyError(f"unknown family {name!r}; known: {', '.join(FAMILIES)}")
    return key


def cmd_measure(args) -> int:
    family = _canonical_family(args.family)
    params = _family_params(family, args)
    spec = FAMILIES[family]
    alpha_r = complex(args.alpha_r)
    records = []
    if spec.closed is not None:
        cf = spec.closed(params)
        N, nbar = (cf.N, cf.nbar) if isinstance(cf, analytic.ClosedFormReport) else cf
        # for pure states W = N and F_X = 4 N + 2
        records.append(_record(family, params, "closed-form", N, nbar, N, 4 * N + 2, alpha_r))
    state = spec.build(params, args.cutoff, args.tail_tol)
    rep = M.measure_pure(state)
    records.append(_record(family, params, "fock-oracle", rep.N, rep.nbar, rep.W, rep.F_X, alpha_r))
    _emit(args, RECORD_COLUMNS, records, {"records": records})
    if len(records) == 2:
        a, b = records
        for key in ("N", "nbar"):
            if abs(a[key] - b[key]) > AGREE_TOL * max(1.0, abs(a[key])):
                raise InvariantFailure(
                    f"closed-form and fock-oracle {key} disagree: {a[key]!r} vs {b[key]!r}"
                )
    return EXIT_OK


# ---------------------------------------------------------------- sweep


def cmd_sweep(args) -> int:
    spec = SweepSpec.default(args.figure) if args.figure in FIGURES else None
    if spec is None:
        raise UnknownFamilyError(f"unknown figure {args.figure!r}; expected one of {FIGURES}")
    spec = SweepSpec(
        args.figure,
        spec.start if args.start is None else args.start,
        spec.stop if args.stop is None else args.stop,
        spec.points if args.points is None else args.points,
    )
    options = {}
    if args.r is not None:
        if args.figure != "fig4":
            raise UsageError("--r applies to fig4 only")
        options["r"] = args.r
    columns, rows = sweep(spec, **options)
    _emit(args, columns, rows, {"figure": spec.figure, "columns": list(columns), "rows": rows})
    return EXIT_OK


# ---------------------------------------------------------------- roof


MIXTURES = {
    "two-fock": (("n", "p"), lambda a: R.two_fock(a.n, a.p)),
    "phase-damped-squeezed-vacuum": (
        ("r",), lambda a: R.phase_damped_squeezed_vacuum(a.r, D=a.cutoff, tail_tol=a.tail_tol)),
    "photon-added-thermal": (
        ("nbar",), lambda a: R.photon_added_thermal(a.nbar, D=a.cutoff, tail_tol=a.tail_tol)),
    "thermal": (("nbar",), lambda a: R.thermal(a.nbar, D=a.cutoff, tail_tol=a.tail_tol)),
}


def _roof_input(args):
    src = args.input
    if src.startswith("file:"):
        path = src[len("file:"):]
        return path, {}, io.read_density(path)
    key = src.strip().lower().replace("_", "-")
    if key not in MIXTURES:
        raise UnknownFamilyError(f"unknown mixture {src!r}; known: {', '.join(MIXTURES)} or file:PATH")
    needs, build = MIXTURES[key]
    given = {k for k in PARAM_FLAGS if getattr(args, k, None) is not None}
    if given - set(needs):
        raise UsageError(f"{key} does not take {', '.join('--' + e for e in sorted(given - set(needs)))}")
    missing = [k for k in needs if getattr(args, k, None) is None]
    if missing:
        raise UsageError(f"{key} needs {', '.join('--' + m for m in missing)}")
    return key, {k: getattr(args, k) for k in needs}, build(args)


def cmd_roof(args) -> int:
    name, params, state = _roof_input(args)
    rho = state.density() if isinstance(state, R.DiagonalFockMixture) else state
    K = None if args.ensemble_size is None else args.ensemble_size - 1
    res = R.minimize(state, K=K, restarts=args.restarts, seed=args.seed, tol=args.tol)
    W = M.metrological_power(rho)
    gap = res.n_upper - W
    if gap < -1e-6:
        raise InvariantFailure(f"N_upper = {res.n_upper!r} is below W = {W!r}")
    members = []
    for j, (q, m) in enumerate(zip(res.ensemble.weights, res.ensemble.members)):
        mo = F.moments_pure(m)
        members.append({
            "member": j, "q": float(q), "nbar": mo.nbar,
            "alpha_re": mo.alpha.real, "alpha_im": mo.alpha.imag,
            "xi_re": mo.xi.real, "xi_im": mo.xi.imag,
            "N_upper": res.n_upper, "W": W, "gap": gap,
        })
    payload = {
        "input": name,
        "params": params,
        "provenance": "roof-upper-bound",
        "N_upper": res.n_upper,
        "W": W,
        "gap": gap,
        "restarts": args.restarts,
        "best_restart": res.best_restart,
        "support": res.support,
        "trimmed_mass": res.trimmed_mass,
        "backend": res.backend,
        "ensemble": [
            {"q": r["q"], "nbar": r["nbar"], "alpha": [r["alpha_re"], r["alpha_im"]], "xi": [r["xi_re"], r["xi_im"]]}
            for r in members
        ],
    }
    _emit(args, ROOF_COLUMNS, members, payload)
    return EXIT_OK


# ---------------------------------------------------------------- table1


TABLE1_POINTS = {
    "coherent": ("alpha", (0.5, 1.0, 1.5)),
    "squeezed-vacuum": ("r", (0.3, 0.6, 1.0)),
    "even-cat": ("alpha", (0.8, 1.2, 1.6)),
    "odd-cat": ("alpha", (0.8, 1.2, 1.6)),
}


def _table1_rows(family: str, key: str, value, tail_tol: float) -> list[dict]:
    name = family.replace("-", "_")
    params = {key: value}
    e = analytic.table1(name, **params)
    base = _BUILDERS[family](params, None, tail_tol * 1e-3)
    m0 = F.moments_pure(base)
    added = F.photon_add(base, tail_tol=tail_tol)
    m1 = F.moments_pure(added)
    N0, N1 = M.ort_pure(m0), M.ort_pure(m1)
    closed = {"family": family, "params": params, "provenance": "closed-form", "N": e.N,
              "N_per_energy": e.N_per_energy, "N_added": e.N_added, "N_added_per_energy": e.N_added_per_energy,
              "nbar": e.nbar, "nbar_added": e.nbar_added}
    oracle = {"family": family, "params": params, "provenance": "fock-oracle", "N": N0,
              "N_per_energy": N0 / m0.nbar if m0.nbar > 0 else math.nan, "N_added": N1,
              "N_added_per_energy": N1 / m1.nbar, "nbar": m0.nbar, "nbar_added": m1.nbar}
    return [closed, oracle]


def cmd_table1(args) -> int:
    if args.family is None:
        if args.alpha is not None or args.r is not None:
            raise UsageError("--alpha/--r need a family")
        jobs = [(fam, key, v) for fam, (key, vals) in TABLE1_POINTS.items() for v in vals]
    else:
        fam = args.family.strip().lower().replace("_", "-")
        if fam not in TABLE1_POINTS:
            raise UnknownFamilyError(f"table1 has no family {args.family!r}; known: {', '.join(TABLE1_POINTS)}")
        key, vals = TABLE1_POINTS[fam]
        other = "r" if key == "alpha" else "alpha"
        if getattr(args, other) is not None:
            raise UsageError(f"{fam} takes --{key}, not --{other}")
        given = getattr(args, key)
        jobs = [(fam, key, v) for v in ((given,) if given is not None else vals)]
    rows = []
    for fam, key, v in jobs:
        if key == "r":
            v = float(v.real if isinstance(v, complex) else v)
        rows.extend(_table1_rows(fam, key, v, args.tail_tol))
    _emit(args, TABLE1_COLUMNS, rows, {"rows": rows})
    for a, b in zip(rows[::2], rows[1::2]):
        for col in TABLE1_COLUMNS[3:]:
            x, y = a[col], b[col]
            if math.isnan(x) and math.isnan(y):
                continue
            if not abs(x - y) <= AGREE_TOL * max(1.0, abs(x)):
                raise InvariantFailure(f"{a['family']} {_param_text(a['params'])}: {col} {x!r} vs {y!r}")
    return EXIT_OK


# ---------------------------------------------------------------- check


def cmd_check(args) -> int:
    results = checks.run_suite(args.suite, seed=args.seed)
    rows = [{"suite": r.suite, "check": r.name, "status": "PASS" if r.passed else "FAIL", "detail": r.detail}
            for r in results]
    _emit(args, CHECK_COLUMNS, rows, {"suite": args.suite, "seed": args.seed, "results": rows})
    failed = [r for r in results if not r.passed]
    for r in failed:
        print(f"FAIL {r.suite}: {r.name} ({r.detail})", file=sys.stderr)
    return EXIT_INVARIANT if failed else EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    shared = _shared_parent()
    parser = _Parser(prog="nonclassical", description="Nonclassicality, quadrature QFI and convex-roof tools.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def params(p, names):
        for n in names:
            p.add_argument(f"--{n.replace('_', '-')}", dest=n, type=PARAM_FLAGS[n], default=None)

    p = sub.add_parser("measure", parents=[shared], help="pure-state measures for a named family")
    p.add_argument("family")
    params(p, ("alpha", "r", "theta", "n"))
    p.add_argument("--alpha-r", type=complex, default=1.0, help="MZI reference amplitude")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("sweep", parents=[shared], help="figure data as CSV/JSON")
    p.add_argument("figure", help="one of " + ", ".join(FIGURES))
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--r", type=float, help="squeezing for fig4 (default 5)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("roof", parents=[shared], help="convex-roof upper bound for a mixed state")
    p.add_argument("input", help="file:PATH (JSON density matrix) or " + ", ".join(MIXTURES))
    params(p, ("n", "p", "r", "nbar"))
    p.set_defaults(func=cmd_roof)

    p = sub.add_parser("table1", parents=[shared], help="photon-addition catalogue vs Fock pipeline")
    p.add_argument("family", nargs="?")
    params(p, ("alpha", "r"))
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("check", parents=[shared], help="run invariant batteries")
    p.add_argument("suite", nargs="?", default="all", choices=checks.SUITES + ("all",))
    p.set_defaults(func=cmd_check)
    return parser


def run(argv=None, environ=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        apply_env(args, environ)
        _validate(args)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except UnknownFamilyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAMILY
    except (InvariantFailure, InternalConsistencyError) as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except RESOURCE_ERRORS as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except MalformedInputError as exc:
        print(f"malformed input: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
