"""Dense complex linear algebra for the discrete Galerkin systems.

LU factorization with partial pivoting (LAPACK via scipy) behind a small
stable interface, elementary matrix norms, and a 2-norm condition-number
estimator driven by power iteration on A^H A and, through LU solves, on
(A^-1)^H A^-1.  The power iteration uses a fixed deterministic start
vector so condition numbers are reproducible run to run.

Matrices and vectors are plain complex ndarrays; the validators below
enforce the construction invariants (shape, finiteness) at the public
entry points.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

__all__ = [
    "LUFactorization",
    "MatrixNorms",
    "SingularMatrixError",
    "as_complex_matrix",
    "as_complex_vector",
    "cond2",
    "lu_factor",
    "lu_solve",
    "matrix_norms",
    "solve",
]

_POWER_SEED = 62831853  # fixed: condition numbers must be reproducible


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a zero pivot survives partial pivoting.

    For the Galerkin systems this signals that 1 is (numerically) an
    eigenvalue of the discrete operator or that the basis is degenerate.
    """


def as_complex_matrix(A) -> np.ndarray:
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise ValueError(f"expected a 2-d matrix with positive dimensions, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    return M


def as_complex_vector(b) -> np.ndarray:
    v = np.asarray(b, dtype=complex)
    if v.ndim != 1 or len(v) < 1:
        raise ValueError(f"expected a 1-d vector of positive length, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


@dataclass(frozen=True)
class LUFactorization:
    """Packed LU factors (unit lower / upper in one array) plus pivot rows."""

    lu: np.ndarray
    piv: np.ndarray

    @property
    def n(self) -> int:
        return self.lu.shape[0]


def lu_factor(A) -> LUFactorization:
    """Partial-pivoted LU of a square matrix; raises SingularMatrixError on a zero pivot."""
    M = as_complex_matrix(A)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got shape {M.shape}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    if np.any(np.diag(lu) == 0):
        raise SingularMatrixError("exactly singular matrix: zero pivot after partial pivoting")
    return LUFactorization(lu=lu, piv=piv)


def lu_solve(fact: LUFactorization, b, conj_transpose: bool = False) -> np.ndarray:
    """Solve A x = b (or A^H x = b) from a factorization of A."""
    v = as_complex_vector(b)
    if len(v) != fact.n:
        raise ValueError(f"dimension mismatch: matrix is {fact.n}x{fact.n}, vector has length {len(v)}")
    return scipy.linalg.lu_solve((fact.lu, fact.piv), v, trans=2 if conj_transpose else 0, check_finite=False)


def solve(A, b) -> np.ndarray:
    """One-shot solve A x = b with partial-pivoted LU."""
    return lu_solve(lu_factor(A), b)


class MatrixNorms(NamedTuple):
    one: float
    inf: float
    fro: float


def matrix_norms(A) -> MatrixNorms:
    """Induced 1-norm, induced infinity-norm, and Frobenius norm."""
    M = as_complex_matrix(A)
    return MatrixNorms(
        one=float(np.max(np.sum(np.abs(M), axis=0))),
        inf=float(np.max(np.sum(np.abs(M), axis=1))),
        fro=float(np.sqrt(np.sum(np.abs(M) ** 2))),
    )


def _power_lambda(op, n: int, rtol: float, maxiter: int) -> float:
    """Largest eigenvalue of a Hermitian PSD operator by power iteration."""
    rng = np.random.default_rng(_POWER_SEED)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(maxiter):
        w = op(v)
        lam_new = float(np.real(np.vdot(v, w)))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(lam_new - lam) <= rtol * max(abs(lam_new), np.finfo(float).tiny):
            return lam_new
        lam = lam_new
    return lam


def cond2(A, rtol: float = 1e-6, maxiter: int = 10_000) -> float:
    """2-norm condition number sigma_max/sigma_min, estimated by power iteration.

    sigma_max^2 is the top eigenvalue of A^H A; 1/sigma_min^2 is the top
    eigenvalue of (A^-1)^H A^-1, applied through two LU solves per step.
    Returns +inf for an exactly singular matrix.
    """
    M = as_complex_matrix(A)
    if M.shape[0] != M.shape[1]:
        raise ValueError("cond2 requires a square matrix")
    try:
        fact = lu_factor(M)
    except SingularMatrixError:
        return float("inf")
    n = M.shape[0]
    MH = M.conj().T
    lam_max = _power_lambda(lambda v: MH @ (M @ v), n, rtol, maxiter)
    lam_inv = _power_lambda(
        lambda v: lu_solve(fact, lu_solve(fact, v), conj_transpose=True), n, rtol, maxiter
    )
    if lam_max <= 0.0 or lam_inv <= 0.0:
        return float("inf")
    return float(np.sqrt(lam_max * lam_inv))
