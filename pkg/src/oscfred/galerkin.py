"""Galerkin discretization of y - Ky = f with an oscillatory kernel.

The integral operator is (Ky)(s) = int_I K(s,t) e^{i*kappa*|s-t|} y(t) dt
on I = [-1, 1], with a smooth kernel factor K independent of kappa.  Two
trial spaces are supported on the same B-spline mesh:

* the plain spline space (conventional method, multiplier set {0});
* the enriched space spanned by B_j(s) e^{i*eps*kappa*s} for
  eps in (-1, 0, +1), which carries the oscillatory structure of the
  solution (oscillation preserving method).

Blocks are ordered by multiplier (-1, 0, +1).  Rows of the assembled
system correspond to test functions B_j e^{i*eps_q*kappa*s}, columns to
trial functions B_l e^{i*eps_p*kappa*s}, with the L2 inner product
conjugate-linear in the test slot, so

    E[(q,j),(p,l)] = int B_l B_j e^{i(eps_p - eps_q) kappa t} dt
    K[(q,j),(p,l)] = int int K(s,t) B_l(t) B_j(s)
                     e^{i kappa (|s-t| + eps_p t - eps_q s)} dt ds
    f[(q,j)]       = int f(t) B_j(t) e^{-i eps_q kappa t} dt

and the coefficients solve (E - K) a = f.

Assembly is exact (up to roundoff) for polynomial kernel factors and
structured right-hand sides: the inner t-integral of every entry is split
at t = s, where the phase has its kink, and each piece collapses to
polynomial-times-exponential moments whose cost does not depend on kappa.
Smooth non-polynomial data is reduced to the same path by Chebyshev
interpolation (a Filon-type approximation of the amplitude), which keeps
assembly kappa-independent but requires the data itself to be
non-oscillatory -- oscillatory right-hand sides must be expressed as a
:class:`StructuredFunction`.

Every assembled entry is a pure function of immutable inputs, so entries
may be computed concurrently; the quadrature oracles at the bottom of the
module integrate the defining formulas numerically and exist to
cross-check the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from . import linalg
from .bspline import SplineSpace
from .oscquad import (
    Polynomial,
    SmoothAmplitude,
    _as_coeffs,
    _compose_affine,
    _pem,
    _polyint,
    _polyval,
    _sigma_coeffs,
    _trim,
    gauss_legendre_rule,
    oscillatory_quad,
)

__all__ = [
    "CGM_MULTIPLIERS",
    "EN_GRID",
    "OPGM_MULTIPLIERS",
    "DiscreteSystem",
    "OscKernel",
    "StructuredFunction",
    "TrialSpace",
    "apply_kernel_structured",
    "assemble_mass",
    "assemble_operator",
    "assemble_rhs",
    "assemble_system",
    "convergence_order",
    "eval_solution",
    "mass_entry_quadrature",
    "operator_entry_quadrature",
    "relative_error_eN",
    "relative_error_l2",
    "rhs_entry_quadrature",
    "solve_system",
]

CGM_MULTIPLIERS = (0,)
OPGM_MULTIPLIERS = (-1, 0, 1)

#: Sample grid of the relative-error metric: s_j = -1 + j/1024, j = 1..2048.
EN_GRID = -1.0 + np.arange(1, 2049) / 1024.0
EN_GRID.setflags(write=False)

_KERNEL_FIT_DEGREE = 16
_RHS_FIT_DEGREE = 12
_STRUCTURE_RANGE = 2  # carriers e^{i*tau*kappa*s} with |tau| <= 2
_MAX_AMPLITUDE_DEGREE = 16


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

class StructuredFunction:
    """Finite sum  sum_tau w_tau(s) e^{i*tau*kappa*s}  with polynomial amplitudes.

    This is the closed-form representation of oscillatory data: the
    carriers e^{i*tau*kappa*s} are explicit, the amplitudes are smooth
    polynomials, so all Galerkin integrals against it reduce to exact
    moments.  At most one term per tau, with tau in [-2, 2].
    """

    __slots__ = ("kappa", "terms")

    def __init__(self, kappa: float, terms: Mapping[int, object] | Iterable[tuple[int, object]]):
        if kappa <= 0:
            raise ValueError("wavenumber must be positive")
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[int, Polynomial] = {}
        for tau, amp in items:
            tau = int(tau)
            if abs(tau) > _STRUCTURE_RANGE:
                raise ValueError(f"carrier index {tau} outside [-{_STRUCTURE_RANGE}, {_STRUCTURE_RANGE}]")
            p = amp if isinstance(amp, Polynomial) else Polynomial(_as_coeffs(amp))
            merged[tau] = merged[tau] + p if tau in merged else p
        self.kappa = float(kappa)
        self.terms = tuple(sorted((t, p) for t, p in merged.items() if not p.is_zero()))

    def amplitude(self, tau: int) -> Polynomial:
        for t, p in self.terms:
            if t == tau:
                return p
        return Polynomial([0.0])

    @property
    def max_degree(self) -> int:
        return max((p.degree for _, p in self.terms), default=0)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape, dtype=complex) if s.ndim else 0.0 + 0.0j
        for tau, p in self.terms:
            out = out + p(s) * np.exp(1j * tau * self.kappa * s)
        return out

    def __add__(self, other: "StructuredFunction") -> "StructuredFunction":
        self._check_compatible(other)
        terms = list(self.terms) + list(other.terms)
        return StructuredFunction(self.kappa, terms)

    def __sub__(self, other: "StructuredFunction") -> "StructuredFunction":
        self._check_compatible(other)
        terms = list(self.terms) + [(t, -p) for t, p in other.terms]
        return StructuredFunction(self.kappa, terms)

    def __neg__(self) -> "StructuredFunction":
        return StructuredFunction(self.kappa, [(t, -p) for t, p in self.terms])

    def _check_compatible(self, other: "StructuredFunction") -> None:
        if not isinstance(other, StructuredFunction):
            raise TypeError("expected a StructuredFunction")
        if not math.isclose(self.kappa, other.kappa, rel_tol=1e-12):
            raise ValueError("structured functions carry different wavenumbers")

    def __repr__(self) -> str:
        taus = [t for t, _ in self.terms]
        return f"StructuredFunction(kappa={self.kappa}, carriers={taus})"


class OscKernel:
    """Smooth kernel factor K(s,t) of the oscillatory kernel K(s,t) e^{i*kappa*|s-t|}.

    The factor is either a bivariate polynomial (coefficient matrix
    ``poly_st`` with entry [a, b] multiplying s^a t^b) or a smooth
    non-oscillatory callable, which assembly replaces by its degree-16
    tensor Chebyshev interpolant on I^2.  The factor must not depend on
    kappa; the wavenumber lives in (1, inf).
    """

    __slots__ = ("kappa", "poly_st", "func", "_fit")

    def __init__(self, kappa: float, poly_st=None, func: Callable | None = None):
        if not kappa > 1.0:
            raise ValueError("wavenumber must exceed 1")
        if (poly_st is None) == (func is None):
            raise ValueError("provide exactly one of poly_st or func")
        if poly_st is not None:
            C = np.atleast_2d(np.asarray(poly_st, dtype=complex))
            if C.ndim != 2:
                raise ValueError("poly_st must be a 2-d coefficient array")
            poly_st = C
        self.kappa = float(kappa)
        self.poly_st = poly_st
        self.func = func
        self._fit = None

    @classmethod
    def polynomial(cls, coeffs, kappa: float) -> "OscKernel":
        return cls(kappa=kappa, poly_st=coeffs)

    @classmethod
    def smooth(cls, func: Callable, kappa: float) -> "OscKernel":
        return cls(kappa=kappa, func=func)

    @property
    def is_polynomial(self) -> bool:
        return self.poly_st is not None

    def coefficient_matrix(self) -> np.ndarray:
        """Monomial coefficient matrix of the factor (fitted if necessary)."""
        if self.poly_st is not None:
            return self.poly_st
        if self._fit is None:
            self._fit = _chebfit_2d(self.func, _KERNEL_FIT_DEGREE)
        return self._fit

    def eval_grid(self, S, T):
        """Factor values on broadcastable arrays (used by the quadrature oracle)."""
        if self.poly_st is not None:
            Sb, Tb = np.broadcast_arrays(np.asarray(S, float), np.asarray(T, float))
            return np.polynomial.polynomial.polyval2d(Sb, Tb, self.poly_st)
        try:
            vals = np.asarray(self.func(S, T))
            if vals.shape == np.broadcast_shapes(np.shape(S), np.shape(T)):
                return vals
        except (TypeError, ValueError):
            pass
        S, T = np.broadcast_arrays(np.asarray(S, float), np.asarray(T, float))
        out = np.empty(S.shape, dtype=complex)
        for idx in np.ndindex(S.shape):
            out[idx] = self.func(S[idx], T[idx])
        return out


@dataclass(frozen=True)
class TrialSpace:
    """A spline space together with the oscillatory carriers of its basis.

    The basis consists of B_j(s) e^{i*eps*kappa*s} for every spline index j
    and every multiplier eps, blocks ordered as ``multipliers``.
    """

    splines: SplineSpace
    kappa: float
    multipliers: tuple[int, ...]

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("wavenumber must be positive")
        if len(set(self.multipliers)) != len(self.multipliers) or not self.multipliers:
            raise ValueError("multipliers must be a nonempty set of distinct integers")

    @classmethod
    def cgm(cls, splines: SplineSpace, kappa: float) -> "TrialSpace":
        return cls(splines=splines, kappa=kappa, multipliers=CGM_MULTIPLIERS)

    @classmethod
    def opgm(cls, splines: SplineSpace, kappa: float) -> "TrialSpace":
        return cls(splines=splines, kappa=kappa, multipliers=OPGM_MULTIPLIERS)

    @property
    def block_dim(self) -> int:
        return self.splines.dimension

    @property
    def dimension(self) -> int:
        return len(self.multipliers) * self.splines.dimension


@dataclass(frozen=True)
class DiscreteSystem:
    """Assembled Galerkin system (E - K) a = f."""

    space: TrialSpace
    mass: np.ndarray
    operator: np.ndarray
    load: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return self.mass - self.operator

    @property
    def order(self) -> int:
        return self.mass.shape[0]


# ---------------------------------------------------------------------------
# Chebyshev fitting of smooth (non-oscillatory) data
# ---------------------------------------------------------------------------

def _chebfit_1d(func: Callable, lo: float, hi: float, deg: int, what: str) -> np.ndarray:
    """Monomial coefficients, in the normalized coordinate of [lo, hi], of a smooth function."""
    cheb = np.polynomial.chebyshev
    pts = cheb.chebpts1(deg + 1)
    s = 0.5 * (lo + hi) + 0.5 * (hi - lo) * pts
    vals = np.asarray([func(si) for si in s], dtype=complex)
    coef = cheb.chebfit(pts, vals, deg)
    scale = max(float(np.max(np.abs(coef))), 1e-300)
    if float(np.max(np.abs(coef[-2:]))) > 1e-10 * scale:
        raise ValueError(
            f"{what} is not resolved by a degree-{deg} fit; oscillatory data must be "
            "given in structured form"
        )
    return cheb.cheb2poly(coef)


def _chebfit_2d(func: Callable, deg: int) -> np.ndarray:
    """Monomial coefficient matrix of a smooth bivariate function on [-1, 1]^2."""
    cheb = np.polynomial.chebyshev
    pts = cheb.chebpts1(deg + 1)
    S, T = np.meshgrid(pts, pts, indexing="ij")
    F = np.empty(S.shape, dtype=complex)
    try:
        vals = np.asarray(func(S, T))
        if vals.shape == S.shape:
            F[:] = vals
        else:
            raise ValueError
    except (TypeError, ValueError):
        for idx in np.ndindex(S.shape):
            F[idx] = func(S[idx], T[idx])
    A = cheb.chebfit(pts, F, deg)          # fit columns along s: (deg+1, n_t)
    B = cheb.chebfit(pts, A.T, deg)        # fit along t: (deg+1, deg+1) = [b, a]
    C_cheb = B.T
    scale = max(float(np.max(np.abs(C_cheb))), 1e-300)
    tail = max(float(np.max(np.abs(C_cheb[-2:, :]))), float(np.max(np.abs(C_cheb[:, -2:]))))
    if tail > 1e-10 * scale:
        raise ValueError(
            f"kernel factor is not resolved by a degree-{deg} tensor fit; "
            "the smooth factor must be non-oscillatory"
        )
    C_cheb = np.where(np.abs(C_cheb) < 1e-15 * scale, 0.0, C_cheb)

    def c2p(col: np.ndarray) -> np.ndarray:
        out = np.zeros(len(col), dtype=complex)
        conv = cheb.cheb2poly(col)
        out[: len(conv)] = conv
        return out

    tmp = np.column_stack([c2p(C_cheb[:, b]) for b in range(C_cheb.shape[1])])
    out = np.vstack([c2p(tmp[a, :]) for a in range(tmp.shape[0])])
    # drop trailing all-zero rows/columns
    while out.shape[0] > 1 and not np.any(out[-1, :]):
        out = out[:-1, :]
    while out.shape[1] > 1 and not np.any(out[:, -1]):
        out = out[:, :-1]
    return out


# ---------------------------------------------------------------------------
# Closed-form cell integrals
# ---------------------------------------------------------------------------

def _moment_table(sp: SplineSpace, amp: np.ndarray | None, omega: float) -> np.ndarray:
    """M[j, c] = int_{cell c} amp(s) B_j(s) e^{i*omega*s} ds  (dense (d, ncells))."""
    d = sp.dimension
    nc = sp.knots.num_cells
    m = sp.order
    M = np.zeros((d, nc), dtype=complex)
    for c in range(nc):
        s0, h2 = sp.cell_mid_half(c)
        P = sp.cell_pieces(c)
        ax = None if amp is None else _compose_affine(amp, s0, h2)
        pre = h2 * np.exp(1j * omega * s0)
        wh = omega * h2
        for r in range(m):
            cf = P[r] if ax is None else np.convolve(P[r], ax)
            M[c + r, c] = pre * _pem(cf, -1.0, 1.0, wh)
    return M


def _cum_before(Y: np.ndarray) -> np.ndarray:
    out = np.zeros_like(Y)
    out[:, 1:] = np.cumsum(Y[:, :-1], axis=1)
    return out


def _cum_after(Y: np.ndarray) -> np.ndarray:
    out = np.zeros_like(Y)
    out[:, :-1] = np.cumsum(Y[:, :0:-1], axis=1)[:, ::-1]
    return out


def _shift_scale_matrix(deg: int, s0: float, h2: float) -> np.ndarray:
    """T with column a = coefficients of (s0 + h2*x)^a, so local = T_s @ C @ T_t^T."""
    T = np.zeros((deg + 1, deg + 1))
    T[0, 0] = 1.0
    col = np.array([1.0])
    lin = np.array([s0, h2])
    for a in range(1, deg + 1):
        col = np.convolve(col, lin)
        T[: a + 1, a] = col
    return T


def _bipoly_conv(W: np.ndarray, pu: np.ndarray, pv: np.ndarray) -> np.ndarray:
    """Multiply a bivariate coefficient matrix by pu(u) along axis 0 and pv(v) along axis 1."""
    A, B = W.shape
    tmp = np.zeros((A + len(pu) - 1, B), dtype=complex)
    for b in range(B):
        col = W[:, b]
        if np.any(col):
            tmp[:, b] = np.convolve(col, pu)
    out = np.zeros((tmp.shape[0], B + len(pv) - 1), dtype=complex)
    for a in range(tmp.shape[0]):
        row = tmp[a, :]
        if np.any(row):
            out[a, :] = np.convolve(row, pv)
    return out


_TAYLOR_EPS = 1e-18


def _taylor_terms(x: float) -> int:
    """Smallest K with x^K / K! below the Taylor remainder target."""
    term = 1.0
    for k in range(1, 60):
        term *= x / k
        if term < _TAYLOR_EPS:
            return k
    return 60


def _tri_x(W: np.ndarray, ls: float, lt: float, lower: bool) -> complex:
    """Triangle moment on the normalized cell square.

    Computes  int_{-1}^{1} du int_L W(u, v) e^{i(ls*u + lt*v)} dv  with
    L = [-1, u] (``lower``, the t <= s half) or L = [u, 1] (upper half).
    W[alpha, beta] multiplies u^alpha v^beta.  Exact up to roundoff; all
    paths reduce to 1-d moments so the cost is phase-independent.
    """
    total = 0.0 + 0.0j
    v0 = -1.0 if lower else 1.0
    Bv = W.shape[1]
    for beta in range(Bv):
        wb = _trim(W[:, beta].astype(complex))
        if len(wb) == 1 and wb[0] == 0:
            continue
        x = abs(2.0 * lt)
        if lt == 0.0:
            # plain antiderivative of v^beta over the v-range
            arr = np.zeros(beta + 2, dtype=complex)
            if lower:
                arr[beta + 1] = 1.0 / (beta + 1)
                arr[0] = -((-1.0) ** (beta + 1)) / (beta + 1)
            else:
                arr[beta + 1] = -1.0 / (beta + 1)
                arr[0] = 1.0 / (beta + 1)
            total += _pem(np.convolve(wb, arr), -1.0, 1.0, ls)
        elif x >= max(1.0, 0.5 * beta):
            eb = np.zeros(beta + 1, dtype=complex)
            eb[beta] = 1.0
            sg = _sigma_coeffs(eb, lt)
            inner_at_end = np.exp(1j * lt * v0) * _polyval(sg, v0)
            if lower:
                total += _pem(np.convolve(wb, sg), -1.0, 1.0, ls + lt)
                total -= inner_at_end * _pem(wb, -1.0, 1.0, ls)
            else:
                total += inner_at_end * _pem(wb, -1.0, 1.0, ls)
                total -= _pem(np.convolve(wb, sg), -1.0, 1.0, ls + lt)
        else:
            # small phase: expand e^{i*lt*v} around the fixed endpoint v0
            K = _taylor_terms(x)
            base = np.array([1.0 + 0.0j])      # (v - v0)^k, ascending in v
            coef = np.exp(1j * lt * v0)
            S = np.zeros(beta + K + 2, dtype=complex)
            for k in range(K + 1):
                pk = np.zeros(beta + len(base), dtype=complex)
                pk[beta:] = base
                A = _polyint(pk)
                if lower:
                    contrib = A.copy()
                    contrib[0] -= _polyval(A, v0)
                else:
                    contrib = -A
                    contrib[0] += _polyval(A, 1.0)
                S[: len(contrib)] += coef * contrib
                coef *= 1j * lt / (k + 1)
                base = np.convolve(base, np.array([-v0, 1.0]))
            total += _pem(np.convolve(wb, _trim(S)), -1.0, 1.0, ls)
    return total


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------

def _check_kappa(space: TrialSpace, kappa: float) -> None:
    if not math.isclose(space.kappa, kappa, rel_tol=1e-12):
        raise ValueError(f"wavenumber mismatch: trial space has {space.kappa}, data has {kappa}")


def assemble_mass(space: TrialSpace) -> np.ndarray:
    """Block Gram matrix E of the trial basis (Hermitian, diagonal blocks real)."""
    sp = space.splines
    kappa = space.kappa
    mult = space.multipliers
    d = sp.dimension
    m = sp.order
    nc = sp.knots.num_cells
    nb = len(mult)
    E = np.zeros((nb * d, nb * d), dtype=complex)
    for qi in range(nb):
        for pi in range(qi, nb):
            omega = (mult[pi] - mult[qi]) * kappa
            block = np.zeros((d, d), dtype=complex)
            for c in range(nc):
                s0, h2 = sp.cell_mid_half(c)
                P = sp.cell_pieces(c)
                pre = h2 * np.exp(1j * omega * s0)
                wh = omega * h2
                for r1 in range(m):
                    for r2 in range(r1, m):
                        v = pre * _pem(np.convolve(P[r1], P[r2]), -1.0, 1.0, wh)
                        block[c + r1, c + r2] += v
                        if r2 != r1:
                            block[c + r2, c + r1] += v
            E[qi * d:(qi + 1) * d, pi * d:(pi + 1) * d] = block
            if pi != qi:
                E[pi * d:(pi + 1) * d, qi * d:(qi + 1) * d] = block.conj().T
    return E


def assemble_operator(space: TrialSpace, kernel: OscKernel) -> np.ndarray:
    """Block matrix of the integral operator against the trial basis.

    The inner t-integral of each entry is split at t = s: on t <= s the
    phase is kappa((1 - eps_q) s + (eps_p - 1) t), on t > s it is
    kappa(-(1 + eps_q) s + (eps_p + 1) t).  Cell pairs away from the
    diagonal factorize through a separated (SVD) form of the kernel
    coefficients and are accumulated with prefix sums; the shared-cell
    triangles are added per cell.  Cost is independent of kappa.
    """
    _check_kappa(space, kernel.kappa)
    sp = space.splines
    kappa = space.kappa
    mult = space.multipliers
    d = sp.dimension
    m = sp.order
    nc = sp.knots.num_cells
    nb = len(mult)
    n = nb * d

    C = kernel.coefficient_matrix()
    if not np.any(C):
        return np.zeros((n, n), dtype=complex)

    U, sv, Vh = np.linalg.svd(C)
    keep = sv > sv[0] * 1e-15
    roots = np.sqrt(sv[keep])
    phis = [U[:, r] * roots[r] for r in range(len(roots))]   # s-side factors
    psis = [Vh[r, :] * roots[r] for r in range(len(roots))]  # t-side factors

    tables: dict[tuple[str, int, int], np.ndarray] = {}

    def tbl(role: str, r: int, mult_int: int) -> np.ndarray:
        key = (role, r, mult_int)
        got = tables.get(key)
        if got is None:
            amp = phis[r] if role == "s" else psis[r]
            got = _moment_table(sp, amp, mult_int * kappa)
            tables[key] = got
        return got

    # per-cell triangle data, independent of the block multipliers
    cell_geo = []
    cell_W = []
    deg_c = max(C.shape) - 1
    for c in range(nc):
        s0, h2 = sp.cell_mid_half(c)
        P = sp.cell_pieces(c)
        T = _shift_scale_matrix(deg_c, s0, h2)
        Ts = T[: C.shape[0], : C.shape[0]]
        Tt = T[: C.shape[1], : C.shape[1]]
        Cc = Ts @ C @ Tt.T
        Ws = [[_bipoly_conv(Cc, P[rj], P[rl]) for rl in range(m)] for rj in range(m)]
        cell_geo.append((s0, h2))
        cell_W.append(Ws)

    K = np.zeros((n, n), dtype=complex)
    for qi, eq in enumerate(mult):
        for pi, ep in enumerate(mult):
            block = np.zeros((d, d), dtype=complex)
            sides = ((1 - eq, ep - 1, True), (-(1 + eq), ep + 1, False))
            for lsm, ltm, low in sides:
                for r in range(len(roots)):
                    X = tbl("s", r, lsm)
                    Y = tbl("t", r, ltm)
                    cum = _cum_before(Y) if low else _cum_after(Y)
                    block += X @ cum.T
            for c in range(nc):
                s0, h2 = cell_geo[c]
                Ws = cell_W[c]
                for lsm, ltm, low in sides:
                    ls = lsm * kappa
                    lt = ltm * kappa
                    pre = h2 * h2 * np.exp(1j * (ls + lt) * s0)
                    for rj in range(m):
                        for rl in range(m):
                            block[c + rj, c + rl] += pre * _tri_x(Ws[rj][rl], ls * h2, lt * h2, low)
            K[qi * d:(qi + 1) * d, pi * d:(pi + 1) * d] = block
    return K


def assemble_rhs(space: TrialSpace, f) -> np.ndarray:
    """Load vector of f against the trial basis.

    ``f`` may be a :class:`StructuredFunction` (closed form), or a smooth
    non-oscillatory callable / :class:`SmoothAmplitude`, which is replaced
    per cell by its Chebyshev interpolant before exact integration.
    """
    sp = space.splines
    kappa = space.kappa
    mult = space.multipliers
    d = sp.dimension
    m = sp.order
    nc = sp.knots.num_cells
    out = np.zeros(len(mult) * d, dtype=complex)

    if isinstance(f, StructuredFunction):
        _check_kappa(space, f.kappa)
        for qi, eq in enumerate(mult):
            seg = out[qi * d:(qi + 1) * d]
            for tau, w in f.terms:
                omega = (tau - eq) * kappa
                for c in range(nc):
                    s0, h2 = sp.cell_mid_half(c)
                    P = sp.cell_pieces(c)
                    ax = _compose_affine(w.coeffs, s0, h2)
                    pre = h2 * np.exp(1j * omega * s0)
                    wh = omega * h2
                    for r in range(m):
                        seg[c + r] += pre * _pem(np.convolve(P[r], ax), -1.0, 1.0, wh)
        return out

    func = f.func if isinstance(f, SmoothAmplitude) else f
    if not callable(func):
        raise TypeError("right-hand side must be a StructuredFunction or a callable")
    fits = []
    for c in range(nc):
        s0, h2 = sp.cell_mid_half(c)
        fits.append(_chebfit_1d(func, s0 - h2, s0 + h2, _RHS_FIT_DEGREE, "right-hand side"))
    for qi, eq in enumerate(mult):
        seg = out[qi * d:(qi + 1) * d]
        omega = -eq * kappa
        for c in range(nc):
            s0, h2 = sp.cell_mid_half(c)
            P = sp.cell_pieces(c)
            pre = h2 * np.exp(1j * omega * s0)
            wh = omega * h2
            for r in range(m):
                seg[c + r] += pre * _pem(np.convolve(P[r], fits[c]), -1.0, 1.0, wh)
    return out


def assemble_system(space: TrialSpace, kernel: OscKernel, f) -> DiscreteSystem:
    """Assemble mass, operator, and load for the Galerkin system (E - K) a = f."""
    return DiscreteSystem(
        space=space,
        mass=assemble_mass(space),
        operator=assemble_operator(space, kernel),
        load=assemble_rhs(space, f),
    )


def solve_system(system: DiscreteSystem) -> np.ndarray:
    """Coefficient vector a = (E - K)^{-1} f via partial-pivoted LU.

    Raises :class:`oscfred.linalg.SingularMatrixError` when the discrete
    operator has 1 as an eigenvalue (E - K exactly singular).
    """
    fact = linalg.lu_factor(system.matrix)
    return linalg.lu_solve(fact, system.load)


def eval_solution(space: TrialSpace, a, s):
    """Evaluate  sum_p sum_j a[(p,j)] B_j(s) e^{i*eps_p*kappa*s}  at s (scalar or array)."""
    a = np.asarray(a, dtype=complex)
    if a.shape != (space.dimension,):
        raise ValueError(f"coefficient vector must have length {space.dimension}, got {a.shape}")
    sp = space.splines
    d = sp.dimension
    m = sp.order
    scalar = np.ndim(s) == 0
    pts = np.atleast_1d(np.asarray(s, dtype=float))
    spline_parts = np.zeros((len(space.multipliers), len(pts)), dtype=complex)
    for i, si in enumerate(pts):
        j0, vals = sp.eval_nonzero(si)
        for bi in range(len(space.multipliers)):
            seg = a[bi * d + j0: bi * d + j0 + m]
            spline_parts[bi, i] = vals @ seg
    out = np.zeros(len(pts), dtype=complex)
    for bi, eps in enumerate(space.multipliers):
        out += spline_parts[bi] * np.exp(1j * eps * space.kappa * pts)
    return complex(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Error metrics
# ---------------------------------------------------------------------------

def relative_error_eN(y_h: Callable, y: Callable, norm_y: float) -> float:
    """Relative L2 error metric sampled on the fixed 2048-point grid.

    Implements (1/norm_y) * sqrt(sum_j |y(s_j) - y_h(s_j)|^2 / 2048) with
    s_j = -1 + j/1024, j = 1..2048.
    """
    if not norm_y > 0:
        raise ValueError("norm_y must be positive")
    diff = np.asarray(y(EN_GRID)) - np.asarray(y_h(EN_GRID))
    return float(np.sqrt(np.mean(np.abs(diff) ** 2)) / norm_y)


def relative_error_l2(y_h: Callable, y: Callable, norm_y: float) -> float:
    """Relative L2 error on the same grid with the integral weight 1/1024.

    :func:`relative_error_eN` divides the squared sum by the sample count
    (a mean over the length-2 interval), so against a true L2 normalizer
    it underestimates ||y - y_h||_2 / norm_y by exactly sqrt(2).  This
    variant weights each sample by the grid spacing and therefore
    estimates the genuine relative L2 error.  The benchmark's reference
    error tables follow this convention for the enriched method while
    their saturated conventional-method rows follow the mean convention;
    both metrics are reported so either column can be reproduced.
    """
    return math.sqrt(2.0) * relative_error_eN(y_h, y, norm_y)


def convergence_order(e_N: float, e_2N: float) -> float:
    """Observed order log2(e_N / e_2N) from errors at mesh sizes N and 2N."""
    if not (e_N > 0 and e_2N > 0):
        raise ValueError("convergence_order requires positive errors")
    return math.log(e_N / e_2N) / math.log(2.0)


# ---------------------------------------------------------------------------
# Closed-form application of the integral operator to structured functions
# ---------------------------------------------------------------------------

def _padded_add(buckets: dict[int, np.ndarray], tau: int, coeffs: np.ndarray) -> None:
    coeffs = _trim(np.asarray(coeffs, dtype=complex))
    if len(coeffs) == 1 and coeffs[0] == 0:
        return
    cur = buckets.get(tau)
    if cur is None:
        buckets[tau] = coeffs.copy()
        return
    if len(cur) < len(coeffs):
        cur, coeffs = coeffs.copy(), cur
    else:
        cur = cur.copy()
    cur[: len(coeffs)] += coeffs
    buckets[tau] = cur


def _shift_pow(coeffs: np.ndarray, a: int) -> np.ndarray:
    if a == 0:
        return coeffs
    return np.concatenate((np.zeros(a, dtype=complex), coeffs))


def apply_kernel_structured(kernel: OscKernel, y: StructuredFunction,
                            max_degree: int = _MAX_AMPLITUDE_DEGREE) -> StructuredFunction:
    """Closed-form K y for a polynomial kernel factor and structured y.

    Splitting the integral at t = s turns each term w(t) e^{i*tau*kappa*t}
    into boundary-expansion polynomials, so the image is again structured.
    Raises if the kernel is not polynomial or an amplitude degree would
    exceed ``max_degree``.
    """
    if not kernel.is_polynomial:
        raise ValueError("closed-form operator application needs a polynomial kernel factor")
    if not math.isclose(kernel.kappa, y.kappa, rel_tol=1e-12):
        raise ValueError("kernel and structured function carry different wavenumbers")
    C = kernel.coefficient_matrix()
    kappa = kernel.kappa
    buckets: dict[int, np.ndarray] = {}
    for tau, w in y.terms:
        for a in range(C.shape[0]):
            row = C[a, :]
            if not np.any(row):
                continue
            pa = np.convolve(_trim(row), w.coeffs)
            # lower part: e^{i*kappa*s} * int_{-1}^{s} pa(t) e^{i*mu*t} dt
            mu = (tau - 1) * kappa
            if mu == 0.0:
                P = _polyint(pa)
                poly = P.copy()
                poly[0] -= _polyval(P, -1.0)
                _padded_add(buckets, 1, _shift_pow(poly, a))
            else:
                sg = _sigma_coeffs(pa, mu)
                _padded_add(buckets, tau, _shift_pow(sg, a))
                const = -np.exp(-1j * mu) * _polyval(sg, -1.0)
                mono = np.zeros(a + 1, dtype=complex)
                mono[a] = const
                _padded_add(buckets, 1, mono)
            # upper part: e^{-i*kappa*s} * int_{s}^{1} pa(t) e^{i*nu*t} dt
            nu = (tau + 1) * kappa
            if nu == 0.0:
                P = _polyint(pa)
                poly = -P
                poly[0] += _polyval(P, 1.0)
                _padded_add(buckets, -1, _shift_pow(poly, a))
            else:
                sg = _sigma_coeffs(pa, nu)
                mono = np.zeros(a + 1, dtype=complex)
                mono[a] = np.exp(1j * nu) * _polyval(sg, 1.0)
                _padded_add(buckets, -1, mono)
                _padded_add(buckets, tau, _shift_pow(-sg, a))
    for tau, coeffs in buckets.items():
        if len(coeffs) - 1 > max_degree:
            raise ValueError(
                f"amplitude degree {len(coeffs) - 1} on carrier {tau} exceeds the cap {max_degree}"
            )
    return StructuredFunction(kappa, {t: Polynomial(c) for t, c in buckets.items()})


# ---------------------------------------------------------------------------
# Quadrature oracles (independent route for every assembled entry)
# ---------------------------------------------------------------------------

def _panel_rule(a: float, b: float, omega: float, density: float) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss nodes/weights on [a, b] resolving phase rate omega."""
    q = 24
    wavelengths = abs(omega) * (b - a) / (2.0 * math.pi)
    panels = max(2, math.ceil(wavelengths * density / q))
    x, w = gauss_legendre_rule(q)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mids = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mids[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _basis_values(sp: SplineSpace, j: int, c: int, pts: np.ndarray) -> np.ndarray:
    """Values of B_j on points inside cell c, via the cell's local piece."""
    s0, h2 = sp.cell_mid_half(c)
    P = sp.cell_pieces(c)
    if not c <= j < c + sp.order:
        return np.zeros_like(pts)
    return np.asarray(_polyval(P[j - c].astype(complex), (pts - s0) / h2)).real


def operator_entry_quadrature(space: TrialSpace, kernel: OscKernel, row: int, col: int,
                              density: float = 20.0) -> complex:
    """Brute-force value of operator entry (row, col) by oscillation-resolving quadrature.

    The double integral is evaluated cell pair by cell pair with composite
    Gauss rules dense enough to track every wavelength, splitting shared
    cells at the diagonal; doubling ``density`` is the refinement check
    used by the self-test suite.
    """
    sp = space.splines
    kappa = space.kappa
    d = sp.dimension
    qi, j = divmod(row, d)
    pi, l = divmod(col, d)
    eq = space.multipliers[qi]
    ep = space.multipliers[pi]

    def phase(S, T):
        return np.exp(1j * kappa * (np.abs(S - T) + ep * T - eq * S))

    total = 0.0 + 0.0j
    for cs in sp.cells_of_basis(j):
        sa, sb = sp.cell_bounds(cs)
        s_nodes, s_w = _panel_rule(sa, sb, 2 * kappa, density)
        bj = _basis_values(sp, j, cs, s_nodes)
        for ct in sp.cells_of_basis(l):
            ta, tb = sp.cell_bounds(ct)
            if ct != cs:
                t_nodes, t_w = _panel_rule(ta, tb, 2 * kappa, density)
                bl = _basis_values(sp, l, ct, t_nodes)
                Kv = kernel.eval_grid(s_nodes[:, None], t_nodes[None, :])
                V = Kv * phase(s_nodes[:, None], t_nodes[None, :])
                total += (s_w * bj) @ V @ (t_w * bl)
            else:
                for i, si in enumerate(s_nodes):
                    wsi = s_w[i] * bj[i]
                    if wsi == 0.0:
                        continue
                    for lo, hi in ((ta, si), (si, tb)):
                        if hi <= lo:
                            continue
                        t_nodes, t_w = _panel_rule(lo, hi, 2 * kappa, density)
                        bl = _basis_values(sp, l, ct, t_nodes)
                        Kv = kernel.eval_grid(si, t_nodes)
                        total += wsi * np.sum(t_w * bl * Kv * phase(si, t_nodes))
    return complex(total)


def mass_entry_quadrature(space: TrialSpace, row: int, col: int) -> complex:
    """Brute-force value of mass entry (row, col)."""
    sp = space.splines
    kappa = space.kappa
    d = sp.dimension
    qi, j = divmod(row, d)
    pi, l = divmod(col, d)
    omega = (space.multipliers[pi] - space.multipliers[qi]) * kappa
    lo = max(sp.support(j)[0], sp.support(l)[0])
    hi = min(sp.support(j)[1], sp.support(l)[1])
    if hi <= lo:
        return 0.0 + 0.0j
    fn = lambda t: sp.eval_basis(j, t) * sp.eval_basis(l, t) * np.exp(1j * omega * t)
    return oscillatory_quad(fn, lo, hi, omega, target=1e-15)


def rhs_entry_quadrature(space: TrialSpace, f: Callable, row: int) -> complex:
    """Brute-force value of load entry ``row`` for a callable f."""
    sp = space.splines
    kappa = space.kappa
    d = sp.dimension
    qi, j = divmod(row, d)
    eq = space.multipliers[qi]
    lo, hi = sp.support(j)
    rate = (abs(eq) + _STRUCTURE_RANGE) * kappa
    fn = lambda t: f(t) * sp.eval_basis(j, t) * np.exp(-1j * eq * kappa * t)
    return oscillatory_quad(fn, lo, hi, rate, target=1e-15)
