"""B-spline spaces on an interval, with per-cell polynomial pieces.

Knot vectors carry full boundary multiplicity (each endpoint repeated
``order`` times), which yields the smoothest nondegenerate spline space of
a given order: dimension ``N + order`` for ``N`` interior breakpoints.
Basis functions are evaluated with the Cox-de Boor recurrence; the same
recurrence run in coefficient space provides the exact polynomial piece of
every basis function on every mesh cell, expressed in the normalized local
coordinate x in [-1, 1] of the cell.  Those local pieces are what the
Galerkin assembly integrates in closed form.

Also here: piecewise-linear interpolation and the max-on-grid error
measure used by the oscillation-order experiment.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .oscquad import gauss_legendre_rule

__all__ = [
    "KnotVector",
    "PiecewiseLinearInterpolant",
    "SplineSpace",
    "gram_matrix",
    "interp_linear",
    "make_knots",
    "make_uniform_knots",
    "max_error_on_grid",
]


@dataclass(frozen=True)
class KnotVector:
    """Clamped knot sequence: ``order`` copies of each endpoint plus interior breakpoints."""

    order: int
    knots: np.ndarray

    def __post_init__(self):
        m = self.order
        if m < 1:
            raise ValueError("spline order must be >= 1")
        k = np.asarray(self.knots, dtype=float)
        if k.ndim != 1 or len(k) < 2 * m:
            raise ValueError("knot sequence must contain at least 2*order entries")
        if not (np.all(k[:m] == k[0]) and np.all(k[-m:] == k[-1])):
            raise ValueError("first and last knots must each be repeated 'order' times")
        interior = k[m:-m] if len(k) > 2 * m else k[:0]
        full = np.concatenate(([k[0]], interior, [k[-1]]))
        if np.any(np.diff(full) <= 0):
            raise ValueError("breakpoints must be strictly increasing inside the interval")
        k = k.copy()
        k.setflags(write=False)
        object.__setattr__(self, "knots", k)

    @property
    def a(self) -> float:
        return float(self.knots[0])

    @property
    def b(self) -> float:
        return float(self.knots[-1])

    @property
    def dimension(self) -> int:
        """Number of B-spline basis functions: len(knots) - order = N + order."""
        return len(self.knots) - self.order

    @property
    def breakpoints(self) -> np.ndarray:
        """Distinct breakpoints including endpoints (length N + 2)."""
        m = self.order
        return np.concatenate(([self.knots[0]], self.knots[m:-m], [self.knots[-1]]))

    @property
    def num_cells(self) -> int:
        return len(self.breakpoints) - 1

    @property
    def h(self) -> float:
        """Mesh width: largest gap between successive breakpoints."""
        return float(np.max(np.diff(self.breakpoints)))


def make_knots(breakpoints: Sequence[float], m: int, interval: tuple[float, float] = (-1.0, 1.0)) -> KnotVector:
    """Knot vector with the given interior breakpoints and order-m clamping."""
    a, b = interval
    inner = np.asarray(breakpoints, dtype=float)
    knots = np.concatenate((np.full(m, a), inner, np.full(m, b)))
    return KnotVector(order=m, knots=knots)


def make_uniform_knots(N: int, m: int, interval: tuple[float, float] = (-1.0, 1.0)) -> KnotVector:
    """Uniform mesh with N interior breakpoints: h = (b - a)/(N + 1)."""
    if N < 0:
        raise ValueError("N must be >= 0")
    a, b = interval
    h = (b - a) / (N + 1)
    inner = a + h * np.arange(1, N + 1)
    return make_knots(inner, m, interval)


class SplineSpace:
    """B-spline basis of a clamped knot vector.

    Basis index j runs over 0..dimension-1; function j is supported on the
    knot span [knots[j], knots[j + order]].  On any cell exactly ``order``
    basis functions are nonzero, with indices c..c+order-1 for cell c.
    All evaluation state is immutable after construction except a
    memoized per-cell piece table whose fill is idempotent, so concurrent
    use is safe.
    """

    def __init__(self, knots: KnotVector):
        self.knots = knots
        self._pieces: dict[int, np.ndarray] = {}

    @property
    def order(self) -> int:
        return self.knots.order

    @property
    def dimension(self) -> int:
        return self.knots.dimension

    def support(self, j: int) -> tuple[float, float]:
        self._check_index(j)
        m = self.order
        return float(self.knots.knots[j]), float(self.knots.knots[j + m])

    def _check_index(self, j: int) -> None:
        if not 0 <= j < self.dimension:
            raise IndexError(f"basis index {j} out of range [0, {self.dimension})")

    # -- pointwise evaluation (Cox-de Boor) ---------------------------------
    def find_cell(self, s: float) -> int:
        """Cell index c with breakpoints[c] <= s < breakpoints[c+1] (right end clamped)."""
        z = self.knots.breakpoints
        if not z[0] <= s <= z[-1]:
            raise ValueError(f"point {s} outside [{z[0]}, {z[-1]}]")
        c = int(np.searchsorted(z, s, side="right") - 1)
        return min(c, len(z) - 2)

    def eval_nonzero(self, s: float) -> tuple[int, np.ndarray]:
        """Values of the ``order`` basis functions alive at s: (first index, values)."""
        m = self.order
        t = self.knots.knots
        c = self.find_cell(s)
        i = m - 1 + c  # span index in the full knot sequence
        vals = np.zeros(m)
        vals[0] = 1.0
        left = np.zeros(m)
        right = np.zeros(m)
        for k in range(1, m):
            left[k] = s - t[i + 1 - k]
            right[k] = t[i + k] - s
            saved = 0.0
            for r in range(k):
                tmp = vals[r] / (right[r + 1] + left[k - r])
                vals[r] = saved + right[r + 1] * tmp
                saved = left[k - r] * tmp
            vals[k] = saved
        return i - m + 1, vals

    def eval_basis(self, j: int, s: float) -> float:
        """Value of basis function j at s (0 outside its support)."""
        self._check_index(j)
        j0, vals = self.eval_nonzero(s)
        if j0 <= j < j0 + self.order:
            return float(vals[j - j0])
        return 0.0

    # -- exact polynomial pieces --------------------------------------------
    def cell_bounds(self, c: int) -> tuple[float, float]:
        z = self.knots.breakpoints
        return float(z[c]), float(z[c + 1])

    def cell_mid_half(self, c: int) -> tuple[float, float]:
        zl, zr = self.cell_bounds(c)
        return 0.5 * (zl + zr), 0.5 * (zr - zl)

    def cell_pieces(self, c: int) -> np.ndarray:
        """(order, order) coefficient rows of basis functions c..c+order-1 on cell c.

        Row r holds ascending monomial coefficients in the normalized local
        coordinate x, where s = mid + half*x and x in [-1, 1].  The same
        recurrence as pointwise Cox-de Boor, run on polynomials.
        """
        cached = self._pieces.get(c)
        if cached is not None:
            return cached
        m = self.order
        t = self.knots.knots
        s0, h2 = self.cell_mid_half(c)
        i0 = m - 1 + c
        funcs: dict[int, np.ndarray] = {i0: np.array([1.0])}
        for k in range(2, m + 1):
            new: dict[int, np.ndarray] = {}
            for j in range(i0 - k + 1, i0 + 1):
                acc = np.zeros(k)
                lower = funcs.get(j)
                if lower is not None:
                    den = t[j + k - 1] - t[j]
                    if den > 0:
                        lin = np.array([(s0 - t[j]) / den, h2 / den])
                        acc[: len(lower) + 1] += np.convolve(lin, lower)
                upper = funcs.get(j + 1)
                if upper is not None:
                    den = t[j + k] - t[j + 1]
                    if den > 0:
                        lin = np.array([(t[j + k] - s0) / den, -h2 / den])
                        acc[: len(upper) + 1] += np.convolve(lin, upper)
                new[j] = acc
            funcs = new
        out = np.zeros((m, m))
        for r in range(m):
            coeffs = funcs.get(i0 - m + 1 + r)
            if coeffs is not None:
                out[r, : len(coeffs)] = coeffs
        out.setflags(write=False)
        self._pieces[c] = out
        return out

    def cells_of_basis(self, j: int) -> range:
        """Indices of the cells on which basis function j is not identically zero."""
        self._check_index(j)
        m = self.order
        return range(max(0, j - m + 1), min(self.knots.num_cells, j + 1))


def gram_matrix(space: SplineSpace) -> np.ndarray:
    """Gram matrix G[l, j] = int B_l B_j, exact via per-cell Gauss-Legendre.

    The integrand is a polynomial of degree <= 2*order - 2 on every cell,
    so ``order`` Gauss nodes are exact.  The result is symmetric positive
    definite and banded with bandwidth order - 1.
    """
    m = space.order
    d = space.dimension
    x, w = gauss_legendre_rule(m)
    G = np.zeros((d, d))
    for c in range(space.knots.num_cells):
        _, h2 = space.cell_mid_half(c)
        P = space.cell_pieces(c)
        vals = np.empty((m, m))
        for r in range(m):
            acc = np.zeros_like(x)
            for ck in P[r, ::-1]:
                acc = acc * x + ck
            vals[r] = acc
        for r1 in range(m):
            for r2 in range(r1, m):
                v = h2 * float(np.sum(w * vals[r1] * vals[r2]))
                G[c + r1, c + r2] += v
                if r2 != r1:
                    G[c + r2, c + r1] += v
    return G


@dataclass(frozen=True)
class PiecewiseLinearInterpolant:
    """Broken-line interpolant of samples on a uniform grid (real or complex)."""

    xs: np.ndarray
    ys: np.ndarray

    def __call__(self, t):
        if np.iscomplexobj(self.ys):
            return np.interp(t, self.xs, self.ys.real) + 1j * np.interp(t, self.xs, self.ys.imag)
        return np.interp(t, self.xs, self.ys)


def interp_linear(values: Sequence[complex], interval: tuple[float, float] = (-1.0, 1.0)) -> PiecewiseLinearInterpolant:
    """Piecewise-linear interpolant of ``values`` on the uniform closed grid of the interval."""
    ys = np.asarray(values)
    if ys.ndim != 1 or len(ys) < 2:
        raise ValueError("interp_linear needs at least two samples")
    xs = np.linspace(interval[0], interval[1], len(ys))
    return PiecewiseLinearInterpolant(xs=xs, ys=ys)


def max_error_on_grid(f: Callable, approx: Callable, n: int, interval: tuple[float, float] = (-1.0, 1.0)) -> float:
    """max_j |f(s_j) - approx(s_j)| over the uniform closed n-point grid."""
    s = np.linspace(interval[0], interval[1], n)
    fv = np.asarray(f(s)) if callable(f) else np.asarray(f)
    av = np.asarray(approx(s))
    return float(np.max(np.abs(fv - av)))
