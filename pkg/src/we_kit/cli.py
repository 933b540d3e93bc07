"""Batch command line: run a verification suite, write a JSON report or a CSV
scan table, exit 0 only if every check passed.

Exit codes: 0 all checks pass, 1 some check failed, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from typing import Any, Callable, Iterator

import numpy as np

from . import __version__, _kernels
from .conditions import basis_oracle, equiv_conditions, identity_suite, kahler_spectrum_check
from .examples import constant_curvature, eps_space, product_surfaces, random_curvature, \
    random_kahler_curvature
from .family import (FAMILY_ORIENTATION, FamilyParams, curvature_from_connection, family_scan,
                     frame_point, koszul_check, positive_window, ricci_eigs_potential_path)
from .lemma_f import nonrealizability_sweep, verify_lemma
from .ode_q import QSpec, ode_residual, positivity_scan, q_eval
from .tensors import (act_on_form, contraction_bundle, form_norm, hodge_split, j_ops,
                      multiple_of_metric)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
GENERATOR = "PCG64"
SCAN_COMMANDS = {"family", "ode-q", "nonrealizability"}


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# Report assembly and serialization
# --------------------------------------------------------------------------

class Results:
    def __init__(self) -> None:
        self.items: list[dict] = []

    def add(self, name: str, value: Any, expected: Any = None, tol: float | None = None,
            passed: bool | None = None) -> None:
        if passed is None:
            if tol is not None:
                passed = bool(abs(value - expected) <= tol)
            elif expected is not None:
                passed = bool(value == expected)
            else:
                passed = True
        self.items.append({"name": name, "value": value, "expected": expected,
                           "tol": tol, "pass": bool(passed)})

    def at_most(self, name: str, value: float, bound: float) -> None:
        self.add(name, float(value), 0.0, bound, passed=bool(value <= bound))

    def info(self, name: str, value: Any) -> None:
        self.add(name, value)

    @property
    def failures(self) -> list[str]:
        return [r["name"] for r in self.items if not r["pass"]]


def _plain(x: Any) -> Any:
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    return x


def format_float(x: float) -> str:
    """17 significant digits, always with a '.' or exponent so it reads back as a float."""
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    return text if any(ch in text for ch in ".e") else text + ".0"


def to_json(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """json.dumps with floats at 17 significant digits and non-finite as null."""
    obj = _plain(obj)
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        body = ",\n".join(f"{inner}{json.dumps(k)}: {to_json(v, indent, _level + 1)}"
                          for k, v in obj.items())
        return "{\n" + body + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        body = ",\n".join(inner + to_json(v, indent, _level + 1) for v in obj)
        return "[\n" + body + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(v: Any) -> str:
    v = _plain(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v) if math.isfinite(v) else ""
    return "" if v is None else str(v)


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if rows:
        header = list(rows[0])
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(row[k]) for k in header])
    return buf.getvalue()


# --------------------------------------------------------------------------
# Parallel map
# --------------------------------------------------------------------------

def thread_count() -> int:
    raw = os.environ.get("WE_KIT_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"WE_KIT_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError("WE_KIT_THREADS must be at least 1")
    return n


@contextmanager
def ordered_mapper(threads: int) -> Iterator[Callable]:
    """A map whose results come back in input order regardless of threads."""
    if threads <= 1:
        yield map
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        yield pool.map


# --------------------------------------------------------------------------
# Suites; each returns (Results, csv rows or None)
# --------------------------------------------------------------------------

def child_seeds(seed: int, count: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count, dtype=np.uint64)]


def run_identities(args, mapper) -> tuple[Results, None]:
    res = Results()
    seeds = child_seeds(args.seed, args.samples)
    for n in args.n:
        g = np.eye(n)

        def one(s, n=n, g=g):
            return identity_suite(random_curvature(s, n), g, args.tol)

        reps = list(mapper(one, seeds))
        res.at_most(f"n{n}.trw1_max", max(r.trw1_residual for r in reps), args.tol)
        res.at_most(f"n{n}.trw2_max", max(r.trw2_residual for r in reps), args.tol)
        if n == 4:
            res.at_most("n4.trf_max", max(r.trf_residual for r in reps), args.tol)
            res.at_most("n4.trm_max", max(r.trm_residual for r in reps), args.tol)
            res.at_most("n4.trcW_multiple_max", max(r.trcW_multiple_residual for r in reps),
                        args.tol)
            res.add("n4.iff_disagreements", sum(not r.iff_consistency for r in reps), 0)
    return res, None


def _product_checks(res: Results, K1: float, K2: float, tol: float) -> None:
    ex = product_surfaces(K1, K2)
    b = contraction_bundle(ex.R, ex.g)
    expected = bool(math.isclose(K1, K2) or math.isclose(K1, -K2))
    rep = equiv_conditions(ex.R, ex.g, ex.J, tol)
    res.info("trc_diagonal", np.diag(b.trc))
    res.info("scalar", b.scalar)
    res.add("weakly_einstein", rep.cond_a, expected)
    res.add("spectrum_ok", rep.spectrum_ok, True)
    res.info("a_value", rep.a_value)
    for key, val in zip("abcd", rep.conditions):
        res.add(f"cond_{key}", val, expected)
    res.add("conditions_agree", rep.agree, True)
    omega = ex.J.kahler_form(ex.g)
    twr = form_norm(act_on_form(b.weyl, omega, ex.g) - b.scalar / 6 * omega, ex.g)
    res.at_most("kahler_weyl_residual", twr, 1e-12)


def run_example(args, mapper) -> tuple[Results, None]:
    res = Results()
    tol = args.tol
    if args.kind == "product":
        _product_checks(res, args.k1, args.k2, tol)
    elif args.kind == "eps":
        a = args.a
        ex = eps_space(a)
        b = contraction_bundle(ex.R, ex.g)
        a2 = a * a
        ric = np.diag(b.ricci)
        res.add("ricci_eigenvalues_max_dev",
                float(np.abs(ric - np.array([-3 * a2, a2, -a2, -a2])).max()), 0.0, 1e-12)
        trc = multiple_of_metric(b.trc, ex.g, tol)
        res.add("weakly_einstein", trc.is_multiple, True)
        res.add("trc_factor", trc.factor, 6 * a2 * a2, 1e-12 * max(1.0, 6 * a2 * a2))
        spec = kahler_spectrum_check(b.einstein, ex.g, tol, b.scalar)
        res.add("spectrum_ok", spec.spectrum_ok, False)
    elif args.kind == "constant":
        ex = constant_curvature(args.kappa, args.dim)
        b = contraction_bundle(ex.R, ex.g)
        n = args.dim
        res.add("ricci_dev", float(np.abs(b.ricci - (n - 1) * args.kappa * np.eye(n)).max()),
                0.0, 1e-12)
        res.add("scalar", b.scalar, n * (n - 1) * args.kappa, 1e-12 * max(1.0, abs(b.scalar)))
        res.add("weakly_einstein", multiple_of_metric(b.trc, ex.g, tol).is_multiple, True)
        res.at_most("weyl_max", float(np.abs(b.weyl).max()), 1e-12)
    elif args.kind == "kahler-random":
        seeds = child_seeds(args.seed, args.samples)

        def one(s):
            ex = random_kahler_curvature(s)
            rep = equiv_conditions(ex.R, ex.g, ex.J, tol)
            oracle, _ = basis_oracle(ex.R, ex.g, ex.J, tol)
            return rep.agree, oracle is None or oracle == rep.cond_d

        out = list(mapper(one, seeds))
        res.add("condition_disagreements", sum(not a for a, _ in out), 0)
        res.add("basis_oracle_disagreements", sum(not o for _, o in out), 0)
        grid = (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0)
        cells = 0
        for x in grid:
            for y in grid:
                ex = product_surfaces(x, y)
                cells += equiv_conditions(ex.R, ex.g, ex.J, tol).cond_a
        res.add("product_grid_weakly_einstein_cells", cells, 13)
    return res, None


def _qspec(args) -> QSpec:
    return QSpec(args.K, args.gamma, args.eps, args.A, args.B)


def run_family(args, mapper) -> tuple[Results, list[dict]]:
    res = Results()
    qs = _qspec(args)
    params = FamilyParams.from_qspec(qs, p=args.p)
    lo, hi = sorted((args.t_min, args.t_max))
    ts = positive_window(qs, lo, hi, args.samples)
    rows = family_scan(params, ts, args.tol, mapper)
    cond_d = {r.t: r.report.cond_d for r in rows}

    def pointwise(t):
        fp = frame_point(params, t)
        b = contraction_bundle(fp.R, fp.g)
        mu, lam = ricci_eigs_potential_path(qs, t)
        scale = max(1.0, abs(fp.mu), abs(fp.lam))
        omega = fp.J.kahler_form(fp.g)
        eta = j_ops(b.einstein, fp.J).aJ
        oracle, _ = basis_oracle(fp.R, fp.g, fp.J, args.tol)
        return (koszul_check(params, t), curvature_from_connection(params, t),
                max(abs(mu - fp.mu), abs(lam - fp.lam)) / scale,
                form_norm(act_on_form(b.weyl, omega, fp.g) - b.scalar / 6 * omega, fp.g),
                form_norm(hodge_split(eta, fp.g, FAMILY_ORIENTATION)[0], fp.g),
                oracle is None or oracle == cond_d[t])

    pts = list(mapper(pointwise, [r.t for r in rows]))
    res.info("points", len(rows))
    res.at_most("umq_residual_max", max(r.umq_residual for r in rows), args.tol)
    res.info("einstein_residual_max", max(r.einstein_residual for r in rows))
    res.add("all_conditions_true", all(all(r.report.conditions) for r in rows), True)
    res.at_most("koszul_max", max(p[0] for p in pts), 1e-10)
    res.at_most("curvature_from_connection_max", max(p[1] for p in pts), 1e-6)
    res.at_most("ricci_cross_path_max", max(p[2] for p in pts), 1e-9)
    res.at_most("kahler_weyl_residual_max", max(p[3] for p in pts), 1e-9)
    res.at_most("einstein_form_self_dual_part_max", max(p[4] for p in pts), 1e-10)
    res.add("basis_oracle_agrees", all(p[5] for p in pts), True)
    mus = np.array([r.mu for r in rows])
    spread = float(mus.max() - mus.min())
    res.add("mu_nonconstant", spread > 1e-12, not qs.is_einstein)
    return res, [r.as_dict() for r in rows]


def run_ode_q(args, mapper) -> tuple[Results, list[dict]]:
    res = Results()
    qs = _qspec(args)
    intervals = positivity_scan(qs, args.t_lo, args.t_hi, args.grid)
    res.info("intervals", len(intervals))
    roots = [x for iv in intervals for x, k in ((iv.lo, iv.lo_kind), (iv.hi, iv.hi_kind))
             if k == "zero"]
    root_q = max((abs(q_eval(qs, r)[0]) for r in roots), default=0.0)
    res.at_most("root_abs_Q_max", root_q, 1e-10)
    mids_ok = all(q_eval(qs, 0.5 * (iv.lo + iv.hi))[0] > 0 for iv in intervals)
    res.add("midpoints_positive", mids_ok, True)
    disjoint = all(a.hi <= b.lo for a, b in zip(intervals, intervals[1:]))
    res.add("intervals_disjoint", disjoint, True)
    rng = np.random.default_rng(args.seed)
    ts = rng.uniform(args.t_lo, args.t_hi, args.samples)
    ts = ts[ts != qs.gamma]
    res.at_most("ode_residual_max", float(np.max(ode_residual(qs, ts))), 1e-10)
    rows = [{"lo": iv.lo, "hi": iv.hi, "q_lo_slope": iv.q_lo_slope,
             "q_hi_slope": iv.q_hi_slope, "lo_kind": iv.lo_kind, "hi_kind": iv.hi_kind}
            for iv in intervals]
    return res, rows


def run_lemma(args, mapper) -> tuple[Results, None]:
    res = Results()
    rep = verify_lemma(args.grid, args.margin, args.seed)
    for c in rep.checks:
        res.add(c.name, c.value, c.expected, c.tol, c.passed)
    res.add("verdict", rep.verdict, True)
    return res, None


def run_nonrealizability(args, mapper) -> tuple[Results, list[dict]]:
    res = Results()
    rep = nonrealizability_sweep(args.phases, tuple(args.K), gamma=args.gamma,
                                 periods=args.periods, grid=args.grid, tol=args.tol,
                                 mapper=mapper)
    res.info("specs", len(rep.rows))
    res.info("closed_intervals", rep.closed_intervals)
    res.info("min_slope_mismatch", rep.min_mismatch)
    res.add("counterexamples", rep.counterexamples, 0)
    res.at_most("roundtrip_residual_max", rep.max_roundtrip, 1e-10)
    rows = [{"K": r.K, "eps": r.eps, "phase": r.phase, "intervals": r.intervals,
             "closed_intervals": r.closed_intervals, "min_mismatch": r.min_mismatch,
             "boundary_match": r.matches > 0} for r in rep.rows]
    return res, rows


RUNNERS = {
    "identities": run_identities,
    "example": run_example,
    "family": run_family,
    "ode-q": run_ode_q,
    "lemma-f": run_lemma,
    "nonrealizability": run_nonrealizability,
}


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------

def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _sign(text: str) -> int:
    v = int(text)
    if v not in (1, -1):
        raise argparse.ArgumentTypeError("must be 1 or -1")
    return v


def _common(tol: float = 1e-9) -> argparse.ArgumentParser:
    # a fresh parent per subcommand: argparse shares parent actions, so a
    # per-command default set on one copy would leak into the others
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=_positive_float, default=tol)
    common.add_argument("-o", "--output", default="-", help="report path, '-' for stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    return common


def build_parser() -> argparse.ArgumentParser:

    qspec = argparse.ArgumentParser(add_help=False)
    qspec.add_argument("--K", type=float, default=4.0)
    qspec.add_argument("--gamma", type=float, default=0.0)
    qspec.add_argument("--eps", type=_sign, default=1)
    qspec.add_argument("--A", type=float, default=0.3)
    qspec.add_argument("--B", type=float, default=0.0)

    parser = argparse.ArgumentParser(prog="we-kit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("identities", parents=[_common()], help="curvature identity fuzzing")
    p.add_argument("--n", type=int, nargs="+", default=[4], choices=range(4, 9), metavar="N")
    p.add_argument("--samples", type=_positive_int, default=1000)

    p = sub.add_parser("example", parents=[_common()], help="named example tensors")
    p.add_argument("kind", choices=("product", "eps", "constant", "kahler-random"))
    p.add_argument("--k1", type=float, default=1.0)
    p.add_argument("--k2", type=float, default=-1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--dim", type=int, default=4, choices=range(2, 9), metavar="N")
    p.add_argument("--samples", type=_positive_int, default=200)

    p = sub.add_parser("family", parents=[_common(1e-8), qspec], help="cohomogeneity-one family scan")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--t-min", type=float, default=0.5)
    p.add_argument("--t-max", type=float, default=2.0)
    p.add_argument("--samples", type=_positive_int, default=10)

    p = sub.add_parser("ode-q", parents=[_common(), qspec], help="positivity intervals of Q")
    p.add_argument("--t-lo", type=float, default=0.1)
    p.add_argument("--t-hi", type=float, default=10.0)
    p.add_argument("--grid", type=int, default=2000)
    p.add_argument("--samples", type=_positive_int, default=10_000)

    p = sub.add_parser("lemma-f", parents=[_common()], help="level-matching map checks")
    p.add_argument("--grid", type=int, default=100_000)
    p.add_argument("--margin", type=_positive_float, default=1e-3)

    p = sub.add_parser("nonrealizability", parents=[_common(1e-6)], help="boundary-slope sweep")
    p.add_argument("--phases", type=_positive_int, default=360)
    p.add_argument("--K", type=float, nargs="+", default=[-1.0, 1.0])
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--periods", type=_positive_float, default=3.0)
    p.add_argument("--grid", type=int, default=4000)
    return parser


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("output",)}
    cfg["generator"] = GENERATOR
    cfg["backend"] = _kernels.BACKEND
    cfg["version"] = __version__
    return cfg


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors this way
        return EXIT_USAGE if exc.code else EXIT_OK

    try:
        if args.format == "csv" and args.command not in SCAN_COMMANDS:
            raise UsageError(f"--format csv is only available for {sorted(SCAN_COMMANDS)}")
        threads = thread_count()
        with ordered_mapper(threads) as mapper:
            results, rows = RUNNERS[args.command](args, mapper)
    except UsageError as exc:
        print(f"we-kit: error: {exc}", file=stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # invalid parameter combinations surface as ValueError from the library
        print(f"we-kit: error: {exc}", file=stderr)
        return EXIT_USAGE

    ok = not results.failures
    if args.format == "csv":
        text = to_csv(rows)
    else:
        report = {"command": args.command, "config": _config(args), "results": results.items,
                  "pass": ok, "failures": results.failures}
        text = to_json(report) + "\n"

    try:
        if args.output == "-":
            stdout.write(text)
        else:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    except OSError as exc:
        print(f"we-kit: cannot write {args.output}: {exc}", file=stderr)
        return EXIT_IO
    if not ok:
        print(f"we-kit: failed checks: {', '.join(results.failures)}", file=stderr)
    return EXIT_OK if ok else EXIT_FAIL


def main() -> None:
    sys.exit(run())
