"""Batch experiment runner: the ``oscfred`` command.

Subcommands
-----------
convergence   error/order tables over doubling mesh levels (fixed kappa)
sweep         error and condition number over a kappa grid (fixed mesh)
table1        linear-interpolation oscillation experiment
verify        closed-form assembly self-test against quadrature oracles

Output is CSV (default) or JSON with one row per run:
``method,kappa,N,order,error,co,cond,seconds``.  ``order`` is the order
of the coefficient matrix (3*(N+m) for the enriched method, N+m for the
conventional one), ``error`` the sampled relative error e_N, ``co`` the
convergence order against the previous level (empty on the first).
Numbers carry six significant digits and are deterministic across runs;
only the ``seconds`` column varies.

Exit codes: 0 success, 1 failed verification, 2 invalid configuration,
3 at least one singular discrete system (remaining rows still run).
The ``OSCFRED_THREADS`` environment variable caps the worker count used
to run independent (method, kappa, N) jobs concurrently.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import galerkin, linalg
from .bspline import SplineSpace, make_uniform_knots
from .galerkin import OscKernel, TrialSpace
from .problems import (
    Problem,
    manufactured,
    paper_benchmark,
    problem_from_dict,
    run_galerkin,
    table1_experiment,
)

__all__ = ["ExperimentConfig", "RunRecord", "build_parser", "main", "run_verify"]

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_BAD_CONFIG = 2
EXIT_SINGULAR = 3

_DEFAULT_TABLE1_KAPPAS = (40.0, 80.0, 160.0, 320.0, 640.0)
_SWEEP_DEFAULT_POINTS = 40
_SWEEP_DEFAULT_RANGE = (10.0, 1e4)
# default mesh levels: matrix orders 198 (enriched) and 258 (conventional) at m=2
_SWEEP_DEFAULT_N = {"opgm": 64, "cgm": 256}
_BASE_N = {"opgm": 16, "cgm": 64}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str
    method: str = "both"
    kappas: tuple[float, ...] = ()
    n_levels: int = 6
    order: int = 2
    out: str | None = None
    fmt: str = "csv"
    problem_path: str | None = None
    perturb: float = 0.0

    def methods(self) -> tuple[str, ...]:
        return ("cgm", "opgm") if self.method == "both" else (self.method,)

    def validate(self) -> None:
        if self.method not in ("cgm", "opgm", "both"):
            raise ConfigError(f"unknown method {self.method!r}")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        if self.order < 1:
            raise ConfigError("spline order must be >= 1")
        if self.command == "convergence":
            if not self.kappas and self.problem_path is None:
                raise ConfigError("convergence requires at least one --kappa (or a --problem file)")
            if self.n_levels < 2:
                raise ConfigError("convergence needs at least two mesh levels")
        if any(k <= 1.0 for k in self.kappas) and self.command in ("convergence", "sweep"):
            raise ConfigError("wavenumbers must exceed 1")


@dataclass
class RunRecord:
    method: str
    kappa: float
    N: int
    order: int
    error: float = float("nan")
    co: float = float("nan")
    cond: float = float("nan")
    seconds: float = float("nan")
    singular: bool = False

    def as_row(self) -> list[str]:
        return [
            self.method,
            _fmt(self.kappa),
            str(self.N),
            str(self.order),
            _fmt(self.error),
            _fmt(self.co),
            _fmt(self.cond),
            _fmt(self.seconds),
        ]


def _fmt(x: float) -> str:
    if x != x:  # nan: blank field (first-level co, missing exact solution)
        return ""
    if math.isinf(x):
        return "inf"
    return f"{x:.6g}"


def _worker_count() -> int:
    raw = os.environ.get("OSCFRED_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _run_jobs(jobs):
    """Run callables preserving order; parallel only when the cap allows it."""
    workers = min(_worker_count(), max(1, len(jobs)))
    if workers == 1:
        return [job() for job in jobs]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: job(), jobs))


def _load_file_problem(config: ExperimentConfig) -> Problem | None:
    if config.problem_path is None:
        return None
    with open(config.problem_path) as fh:
        return problem_from_dict(json.load(fh))


def _single_run(config: ExperimentConfig, method: str, kappa: float, N: int,
                problem: Problem | None = None) -> RunRecord:
    m = config.order
    blocks = 3 if method == "opgm" else 1
    record = RunRecord(method=method, kappa=kappa, N=N, order=blocks * (N + m))
    try:
        if problem is None:
            problem = paper_benchmark(kappa)
        run = run_galerkin(problem, method, N, m, compute_cond=True)
    except linalg.SingularMatrixError:
        record.singular = True
        record.cond = float("inf")
        return record
    record.error = run.e_N
    record.cond = run.cond
    record.seconds = run.seconds
    return record


def cmd_convergence(config: ExperimentConfig) -> tuple[list[RunRecord], int]:
    # a problem file fixes the equation (and its wavenumber) for every level
    file_problem = _load_file_problem(config)
    kappas = (file_problem.kappa,) if file_problem is not None else config.kappas
    jobs = []
    keys = []
    for kappa in kappas:
        for method in config.methods():
            base = _BASE_N[method]
            for level in range(config.n_levels):
                N = base * 2**level
                jobs.append(lambda m=method, k=kappa, n=N: _single_run(config, m, k, n, file_problem))
                keys.append((kappa, method))
    records = _run_jobs(jobs)
    # convergence order against the previous level of the same (kappa, method)
    prev: dict[tuple[float, str], float] = {}
    for key, rec in zip(keys, records):
        last = prev.get(key)
        if last is not None and last > 0 and rec.error > 0:
            rec.co = math.log2(last / rec.error)
        prev[key] = rec.error
    code = EXIT_SINGULAR if any(r.singular for r in records) else EXIT_OK
    return records, code


def cmd_sweep(config: ExperimentConfig) -> tuple[list[RunRecord], int]:
    kappas = config.kappas
    if not kappas:
        lo, hi = _SWEEP_DEFAULT_RANGE
        kappas = tuple(np.geomspace(lo, hi, _SWEEP_DEFAULT_POINTS))
    jobs = []
    for method in config.methods():
        N = _SWEEP_DEFAULT_N[method]
        for kappa in kappas:
            jobs.append(lambda m=method, k=float(kappa), n=N: _single_run(config, m, k, n))
    records = _run_jobs(jobs)
    code = EXIT_SINGULAR if any(r.singular for r in records) else EXIT_OK
    return records, code


def cmd_table1(config: ExperimentConfig) -> list[dict]:
    kappas = config.kappas or _DEFAULT_TABLE1_KAPPAS
    errors = table1_experiment(list(kappas))
    return [
        {"kappa": float(k), "g1": float(e[0]), "g2": float(e[1]), "g3": float(e[2])}
        for k, e in zip(kappas, errors)
    ]


# ---------------------------------------------------------------------------
# verify: closed-form assembly against the quadrature oracles
# ---------------------------------------------------------------------------

def run_verify(perturb: float = 0.0, out=None) -> int:
    """Compare every assembled entry of a small system with brute-force quadrature.

    ``perturb`` injects an artificial defect into one operator entry and
    exists so the test harness can confirm the check has teeth.
    """
    out = sys.stdout if out is None else out
    kappa = 5.0
    sp = SplineSpace(make_uniform_knots(3, 2))
    space = TrialSpace.opgm(sp, kappa)
    kernel = OscKernel.polynomial([[1.0]], kappa)
    problem = paper_benchmark(50.0)

    ok = True

    E = galerkin.assemble_mass(space)
    worst = 0.0
    for r in range(space.dimension):
        for c in range(space.dimension):
            worst = max(worst, abs(E[r, c] - galerkin.mass_entry_quadrature(space, r, c)))
    ok &= worst <= 1e-10
    print(f"mass entries vs quadrature oracle: max |diff| = {worst:.3e} "
          f"[{'ok' if worst <= 1e-10 else 'FAIL'}]", file=out)

    K = galerkin.assemble_operator(space, kernel)
    if perturb:
        K = K.copy()
        K[0, 0] += perturb
    worst = 0.0
    for r in range(space.dimension):
        for c in range(space.dimension):
            worst = max(worst, abs(K[r, c] - galerkin.operator_entry_quadrature(space, kernel, r, c)))
    ok &= worst <= 1e-10
    print(f"operator entries vs quadrature oracle: max |diff| = {worst:.3e} "
          f"[{'ok' if worst <= 1e-10 else 'FAIL'}]", file=out)

    f_bench = paper_benchmark(kappa).rhs
    F = galerkin.assemble_rhs(space, f_bench)
    worst = 0.0
    for r in range(space.dimension):
        worst = max(worst, abs(F[r] - galerkin.rhs_entry_quadrature(space, f_bench, r)))
    ok &= worst <= 1e-10
    print(f"load entries vs quadrature oracle: max |diff| = {worst:.3e} "
          f"[{'ok' if worst <= 1e-10 else 'FAIL'}]", file=out)

    mf = manufactured(problem.kernel, problem.exact)
    s = np.random.default_rng(2024).uniform(-1.0, 1.0, 64)
    worst = float(np.max(np.abs(problem.rhs(s) - mf.rhs(s))))
    ok &= worst <= 1e-10
    print(f"closed-form f vs benchmark formula:  max |diff| = {worst:.3e} "
          f"[{'ok' if worst <= 1e-10 else 'FAIL'}]", file=out)

    print("verify:", "all checks passed" if ok else "FAILURES detected", file=out)
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------

_RUN_HEADER = ["method", "kappa", "N", "order", "error", "co", "cond", "seconds"]


def _emit_runs(records: list[RunRecord], config: ExperimentConfig) -> None:
    if config.fmt == "csv":
        lines = [",".join(_RUN_HEADER)]
        lines += [",".join(r.as_row()) for r in records]
        text = "\n".join(lines) + "\n"
    else:
        payload = []
        for r in records:
            payload.append({
                "method": r.method,
                "kappa": r.kappa,
                "N": r.N,
                "order": r.order,
                "error": None if r.error != r.error else r.error,
                "co": None if r.co != r.co else r.co,
                "cond": None if r.cond != r.cond else ("inf" if math.isinf(r.cond) else r.cond),
                "seconds": None if r.seconds != r.seconds else r.seconds,
            })
        text = json.dumps(payload, indent=2) + "\n"
    _write(text, config.out)


def _emit_table1(rows: list[dict], config: ExperimentConfig) -> None:
    if config.fmt == "csv":
        lines = ["kappa,g1,g2,g3"]
        lines += [f"{_fmt(r['kappa'])},{_fmt(r['g1'])},{_fmt(r['g2'])},{_fmt(r['g3'])}" for r in rows]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(rows, indent=2) + "\n"
    _write(text, config.out)


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oscfred",
        description="Benchmark runner for oscillatory Fredholm solvers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, with_method: bool = True) -> None:
        p.add_argument("--kappa", action="append", type=float, default=None,
                       help="wavenumber (repeatable)")
        if with_method:
            p.add_argument("--method", choices=["cgm", "opgm", "both"], default="both")
            p.add_argument("--order", type=int, default=2, help="spline order m (default 2)")
            p.add_argument("--problem", dest="problem_path", default=None,
                           help="JSON problem description (defaults to the built-in benchmark)")
        p.add_argument("--out", default=None, help="output file (stdout if omitted)")
        p.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")

    p = sub.add_parser("convergence", help="error/order table over doubling mesh levels")
    common(p)
    p.add_argument("--n-levels", type=int, default=6, help="number of mesh levels (default 6)")

    p = sub.add_parser("sweep", help="error and condition number over a kappa grid")
    common(p)

    p = sub.add_parser("table1", help="linear-interpolation oscillation experiment")
    common(p, with_method=False)

    p = sub.add_parser("verify", help="assembly self-test against quadrature oracles")
    p.add_argument("--perturb", type=float, default=0.0,
                   help="inject a defect into one operator entry (test hook)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return run_verify(perturb=args.perturb)
    config = ExperimentConfig(
        command=args.command,
        method=getattr(args, "method", "both"),
        kappas=tuple(args.kappa) if args.kappa else (),
        n_levels=getattr(args, "n_levels", 6),
        order=getattr(args, "order", 2),
        out=args.out,
        fmt=args.fmt,
        problem_path=getattr(args, "problem_path", None),
    )
    try:
        config.validate()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG

    try:
        if args.command == "convergence":
            records, code = cmd_convergence(config)
            _emit_runs(records, config)
            return code
        if args.command == "sweep":
            records, code = cmd_sweep(config)
            _emit_runs(records, config)
            return code
        if args.command == "table1":
            _emit_table1(cmd_table1(config), config)
            return EXIT_OK
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
