"""Benchmark problems and experiment drivers.

Contains the reference scattering-like benchmark (kernel factor 1, exact
solution 1 + s^3 e^{i*kappa*s}), a manufactured-solution generator that
builds the right-hand side f = y - Ky in closed form for any structured
exact solution, the linear-interpolation oscillation experiment, and a
small runner that assembles and solves one Galerkin discretization while
recording the quantities the benchmark tables report.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import galerkin, linalg
from .bspline import SplineSpace, interp_linear, make_uniform_knots, max_error_on_grid
from .galerkin import (
    EN_GRID,
    OscKernel,
    Polynomial,
    StructuredFunction,
    TrialSpace,
    apply_kernel_structured,
    eval_solution,
    relative_error_eN,
)

__all__ = [
    "GalerkinRun",
    "OscProbeFunction",
    "Problem",
    "manufactured",
    "paper_benchmark",
    "problem_from_dict",
    "problem_to_dict",
    "run_galerkin",
    "table1_experiment",
]


@dataclass(frozen=True)
class Problem:
    """One instance of the integral equation y - Ky = f.

    ``exact`` and ``norm_exact`` are optional; when the exact solution is
    known, errors are reported relative to ``norm_exact`` (computed with
    the same 2048-point sampling rule as the error metric if not given).
    """

    kernel: OscKernel
    rhs: object
    exact: StructuredFunction | None = None
    norm_exact: float | None = None

    @property
    def kappa(self) -> float:
        return self.kernel.kappa

    def norm_y(self) -> float:
        if self.norm_exact is not None:
            return self.norm_exact
        if self.exact is None:
            raise ValueError("problem has no exact solution to normalize against")
        vals = np.asarray(self.exact(EN_GRID))
        return float(np.sqrt(np.mean(np.abs(vals) ** 2)))


def paper_benchmark(kappa: float) -> Problem:
    """The reference benchmark: K(s,t) = 1 with exact solution y(s) = 1 + s^3 e^{i*kappa*s}.

    The right-hand side is the closed-form f = y - Ky, a structured
    function with carriers (+1, -1, 0); its exact L2 norm is
    4*sqrt(7)/7 for every kappa (the oscillatory cross term integrates to
    zero by parity).
    """
    if not kappa > 1.0:
        raise ValueError("wavenumber must exceed 1")
    k = float(kappa)
    eik = np.exp(1j * k)
    w_plus = Polynomial([
        0.25 - 3.0 / (8.0 * k**4) + 1j * eik / k,
        0.75j / k**3,
        0.75 / k**2,
        1.0 - 0.5j / k,
        -0.25,
    ])
    w_minus = Polynomial([
        -(np.exp(2j * k) * (-3.0 + 6j * k + 6.0 * k**2 - 4j * k**3) / (8.0 * k**4) - 1j * eik / k)
    ])
    w_zero = Polynomial([1.0 - 2j / k])
    f = StructuredFunction(k, {1: w_plus, -1: w_minus, 0: w_zero})
    y = StructuredFunction(k, {0: Polynomial([1.0]), 1: Polynomial([0.0, 0.0, 0.0, 1.0])})
    return Problem(
        kernel=OscKernel.polynomial([[1.0]], k),
        rhs=f,
        exact=y,
        norm_exact=4.0 / np.sqrt(7.0),
    )


def manufactured(kernel: OscKernel, y: StructuredFunction) -> Problem:
    """Problem with prescribed structured exact solution: f = y - Ky in closed form.

    Requires a polynomial kernel factor; amplitude degrees are capped so
    the construction stays exact (degree overflow raises).
    """
    f = y - apply_kernel_structured(kernel, y)
    return Problem(kernel=kernel, rhs=f, exact=y)


# ---------------------------------------------------------------------------
# Oscillation-order experiment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OscProbeFunction:
    """Probe g_j(t) = t^2 + sin(kappa*t) / kappa^(j-1), j in {1, 2, 3}.

    The three probes share one wavenumber but their amplitudes scale down
    with kappa, so the same oscillation affects their interpolation error
    very differently: doubling kappa multiplies the error of g_1 by ~4,
    g_2 by ~2, and leaves g_3 unchanged.
    """

    index: int
    kappa: float

    def __post_init__(self):
        if self.index not in (1, 2, 3):
            raise ValueError("probe index must be 1, 2, or 3")
        if self.kappa <= 0:
            raise ValueError("wavenumber must be positive")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return t**2 + np.sin(self.kappa * t) / self.kappa ** (self.index - 1)


def table1_experiment(
    kappas: Sequence[float],
    interp_points: int = 1281,
    check_points: int = 2049,
    interval: tuple[float, float] = (-1.0, 1.0),
) -> np.ndarray:
    """Max interpolation errors of the probes g_1, g_2, g_3 on a uniform grid.

    Each probe is interpolated linearly on ``interp_points`` uniform
    points of ``interval`` and the maximum error is measured on the
    ``check_points`` uniform grid; both grids include the endpoints.
    Returns an array of shape (len(kappas), 3).
    """
    out = np.zeros((len(kappas), 3))
    xs = np.linspace(interval[0], interval[1], interp_points)
    for i, kappa in enumerate(kappas):
        if kappa <= 0:
            raise ValueError("wavenumbers must be positive")
        for j in (1, 2, 3):
            g = OscProbeFunction(index=j, kappa=float(kappa))
            approx = interp_linear(g(xs), interval)
            out[i, j - 1] = max_error_on_grid(g, approx, check_points, interval)
    return out


# ---------------------------------------------------------------------------
# Single-run driver
# ---------------------------------------------------------------------------

_METHOD_MULTIPLIERS = {
    "cgm": galerkin.CGM_MULTIPLIERS,
    "opgm": galerkin.OPGM_MULTIPLIERS,
}


@dataclass
class GalerkinRun:
    """Outcome of one assemble-and-solve at a given mesh level."""

    method: str
    kappa: float
    N: int
    spline_order: int
    matrix_order: int
    coeffs: np.ndarray
    space: TrialSpace
    seconds: float
    e_N: float = float("nan")
    cond: float = float("nan")

    @property
    def e_l2(self) -> float:
        """Relative L2 error (integral weight); sqrt(2) times the sampled-mean e_N."""
        return float(np.sqrt(2.0) * self.e_N)

    def evaluate(self, s):
        return eval_solution(self.space, self.coeffs, s)


def run_galerkin(
    problem: Problem,
    method: str,
    N: int,
    spline_order: int = 2,
    *,
    compute_cond: bool = False,
) -> GalerkinRun:
    """Assemble and solve one discretization of ``problem``.

    ``seconds`` measures assembly plus solve; the optional condition
    number (of E - K, by power iteration) is timed separately and not
    included.  Raises :class:`oscfred.linalg.SingularMatrixError` if the
    discrete system is exactly singular.
    """
    method = method.lower()
    if method not in _METHOD_MULTIPLIERS:
        raise ValueError(f"unknown method {method!r}; expected 'cgm' or 'opgm'")
    splines = SplineSpace(make_uniform_knots(N, spline_order))
    space = TrialSpace(splines=splines, kappa=problem.kappa, multipliers=_METHOD_MULTIPLIERS[method])
    t0 = time.perf_counter()
    system = galerkin.assemble_system(space, problem.kernel, problem.rhs)
    coeffs = galerkin.solve_system(system)
    seconds = time.perf_counter() - t0
    run = GalerkinRun(
        method=method,
        kappa=problem.kappa,
        N=N,
        spline_order=spline_order,
        matrix_order=space.dimension,
        coeffs=coeffs,
        space=space,
        seconds=seconds,
    )
    if problem.exact is not None:
        run.e_N = relative_error_eN(run.evaluate, problem.exact, problem.norm_y())
    if compute_cond:
        run.cond = linalg.cond2(system.matrix)
    return run


# ---------------------------------------------------------------------------
# JSON problem descriptions (consumed by the command-line runner)
# ---------------------------------------------------------------------------

def _coeff_to_json(c: complex):
    if c.imag == 0.0:
        return c.real
    return [c.real, c.imag]


def _coeff_from_json(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    re, im = v
    return complex(re, im)


def _structured_to_dict(f: StructuredFunction) -> dict:
    return {
        "terms": [
            {"tau": tau, "coeffs": [_coeff_to_json(c) for c in p.coeffs]}
            for tau, p in f.terms
        ]
    }


def _structured_from_dict(d: dict, kappa: float) -> StructuredFunction:
    terms = {}
    for item in d["terms"]:
        terms[int(item["tau"])] = Polynomial([_coeff_from_json(v) for v in item["coeffs"]])
    return StructuredFunction(kappa, terms)


def problem_to_dict(problem: Problem) -> dict:
    if not isinstance(problem.rhs, StructuredFunction):
        raise ValueError("only problems with structured right-hand sides are serializable")
    if not problem.kernel.is_polynomial:
        raise ValueError("only problems with polynomial kernel factors are serializable")
    C = problem.kernel.coefficient_matrix()
    return {
        "kappa": problem.kappa,
        "kernel": {"poly_st": [[_coeff_to_json(c) for c in row] for row in C]},
        "rhs": _structured_to_dict(problem.rhs),
        "exact": None if problem.exact is None else _structured_to_dict(problem.exact),
    }


def problem_from_dict(d: dict) -> Problem:
    kappa = float(d["kappa"])
    C = [[_coeff_from_json(v) for v in row] for row in d["kernel"]["poly_st"]]
    kernel = OscKernel.polynomial(C, kappa)
    rhs = _structured_from_dict(d["rhs"], kappa)
    exact = None
    if d.get("exact") is not None:
        exact = _structured_from_dict(d["exact"], kappa)
    return Problem(kernel=kernel, rhs=rhs, exact=exact)
