"""Tests of knot vectors, B-spline bases, Gram matrices, interpolation."""

import numpy as np
import numpy.testing as npt
import pytest
from scipy.interpolate import BSpline

from oscfred.bspline import (
    KnotVector,
    SplineSpace,
    gram_matrix,
    interp_linear,
    make_knots,
    make_uniform_knots,
    max_error_on_grid,
)


def space(N, m):
    return SplineSpace(make_uniform_knots(N, m))


# ---------------------------------------------------------------------------
# knot vectors
# ---------------------------------------------------------------------------

def test_uniform_knots_basic():
    kv = make_uniform_knots(3, 2)
    assert kv.h == pytest.approx(0.5)
    npt.assert_allclose(kv.breakpoints, [-1.0, -0.5, 0.0, 0.5, 1.0])
    assert kv.dimension == 5


def test_uniform_knots_degenerate_mesh():
    kv = make_uniform_knots(0, 2)
    assert kv.dimension == 2
    sp = SplineSpace(kv)
    # two half hats spanning [-1, 1]
    assert sp.eval_basis(0, -1.0) == pytest.approx(1.0)
    assert sp.eval_basis(1, 1.0) == pytest.approx(1.0)
    assert sp.eval_basis(0, 0.0) == pytest.approx(0.5)


def test_uniform_knots_table_sizes():
    # N=16, m=2: dimension 18, so the enriched system has order 3*(N+2) = 54
    kv = make_uniform_knots(16, 2)
    assert kv.dimension == 18
    assert 3 * kv.dimension == 54


def test_knot_validation():
    with pytest.raises(ValueError):
        make_uniform_knots(-1, 2)
    with pytest.raises(ValueError):
        make_uniform_knots(3, 0)
    with pytest.raises(ValueError):
        make_knots([0.5, 0.5], 2)  # repeated interior breakpoint
    with pytest.raises(ValueError):
        KnotVector(order=2, knots=np.array([-1.0, 0.0, 1.0, 1.0]))  # boundary not repeated


# ---------------------------------------------------------------------------
# basis evaluation
# ---------------------------------------------------------------------------

def test_order2_basis_is_nodal():
    sp = space(3, 2)
    nodes = sp.knots.breakpoints
    for j in range(sp.dimension):
        assert sp.eval_basis(j, nodes[j]) == pytest.approx(1.0)


def test_hat_midpoint_value():
    sp = space(3, 2)
    assert sp.eval_basis(1, -0.75) == pytest.approx(0.5)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
def test_partition_of_unity(m):
    sp = space(7, m)
    rng = np.random.default_rng(100 + m)
    pts = rng.uniform(-1.0, 1.0, 1000)
    for s in pts:
        total = sum(sp.eval_basis(j, s) for j in range(sp.dimension))
        assert abs(total - 1.0) <= 1e-14


@pytest.mark.parametrize("m", [2, 3, 4])
def test_basis_vanishes_outside_support(m):
    sp = space(6, m)
    rng = np.random.default_rng(17)
    for j in range(sp.dimension):
        lo, hi = sp.support(j)
        for s in rng.uniform(-1.0, 1.0, 40):
            if not lo <= s <= hi:
                assert sp.eval_basis(j, s) == 0.0


def test_basis_nonnegative():
    sp = space(5, 3)
    for s in np.linspace(-1, 1, 101):
        j0, vals = sp.eval_nonzero(s)
        assert np.all(vals >= -1e-15)


def test_basis_index_out_of_range():
    sp = space(3, 2)
    with pytest.raises(IndexError):
        sp.eval_basis(5, 0.0)
    with pytest.raises(IndexError):
        sp.eval_basis(-1, 0.0)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_cell_pieces_match_pointwise_recurrence(m):
    # the polynomial pieces and the pointwise Cox-de Boor evaluation are
    # independent code paths; they must agree everywhere
    sp = space(5, m)
    rng = np.random.default_rng(3)
    for c in range(sp.knots.num_cells):
        s0, h2 = sp.cell_mid_half(c)
        P = sp.cell_pieces(c)
        for x in rng.uniform(-1.0, 1.0, 7):
            s = s0 + h2 * x
            for r in range(m):
                val_piece = np.polynomial.polynomial.polyval(x, P[r])
                assert val_piece == pytest.approx(sp.eval_basis(c + r, s), abs=1e-13)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_basis_matches_scipy(m):
    # independent oracle: scipy's B-spline basis elements
    sp = space(6, m)
    t = sp.knots.knots
    s = np.linspace(-1, 1, 301)
    for j in range(sp.dimension):
        ours = np.array([sp.eval_basis(j, si) for si in s])
        ref = BSpline.basis_element(t[j: j + m + 1], extrapolate=False)(s)
        ref = np.nan_to_num(ref)
        # scipy's basis element treats the last breakpoint as exclusive
        mask = s < sp.support(j)[1]
        npt.assert_allclose(ours[mask], ref[mask], atol=1e-13)


# ---------------------------------------------------------------------------
# Gram matrix
# ---------------------------------------------------------------------------

def test_gram_hat_pattern():
    sp = space(8, 2)
    G = gram_matrix(sp)
    h = sp.knots.h
    assert G[3, 3] == pytest.approx(2 * h / 3, rel=1e-13)
    assert G[3, 4] == pytest.approx(h / 6, rel=1e-13)
    assert G[0, 0] == pytest.approx(h / 3, rel=1e-13)
    assert G[2, 4] == 0.0


@pytest.mark.parametrize("m", [1, 2, 3])
def test_gram_symmetric_positive_definite(m):
    G = gram_matrix(space(6, m))
    npt.assert_array_equal(G, G.T)
    assert np.min(np.linalg.eigvalsh(G)) > 0


@pytest.mark.parametrize("N,m", [(2, 2), (5, 3), (8, 2)])
def test_gram_matches_midpoint_bruteforce(N, m):
    sp = space(N, m)
    d = sp.dimension
    n_panels = 10_000
    mids = -1.0 + (np.arange(n_panels) + 0.5) * (2.0 / n_panels)
    B = np.zeros((d, n_panels))
    for i, s in enumerate(mids):
        j0, vals = sp.eval_nonzero(s)
        B[j0: j0 + m, i] = vals
    G_brute = (B * (2.0 / n_panels)) @ B.T
    G = gram_matrix(sp)
    # the midpoint rule itself carries (2/n)^2/24 * curvature error, and the
    # piece curvature grows like 1/h^2; a few 1e-8 absolute at these sizes
    npt.assert_allclose(G, G_brute, rtol=1e-7, atol=5e-8)


def test_gram_condition_mesh_independent():
    # Clamped order-2 meshes: eigenvalues fill [h/4, h], so cond2 tends to
    # 4 from below, independent of N.  (An interior-only estimate would
    # suggest [h/3, h] and cond 3; the boundary half-hats lower the
    # smallest eigenvalue to h/4.  See the decisions ledger.)
    conds = []
    for N in (16, 64, 256, 512):
        ev = np.linalg.eigvalsh(gram_matrix(space(N, 2)))
        conds.append(ev[-1] / ev[0])
    assert all(3.8 <= c <= 4.0 + 1e-9 for c in conds)
    assert max(conds) - min(conds) < 0.15


# ---------------------------------------------------------------------------
# piecewise-linear interpolation and the grid error measure
# ---------------------------------------------------------------------------

def test_interp_reproduces_affine():
    xs = np.linspace(-1, 1, 3)
    itp = interp_linear(xs)  # f(t) = t sampled on 3 points
    s = np.linspace(-1, 1, 50)
    npt.assert_allclose(itp(s), s, atol=1e-15)


def test_interp_square_error_bound():
    # classical bound h^2 ||f''|| / 8 with f'' = 2, attained at cell midpoints
    n = 1281
    h = 2.0 / (n - 1)
    xs = np.linspace(-1, 1, n)
    itp = interp_linear(xs**2)
    err = max_error_on_grid(lambda t: t**2, itp, 2049)
    assert err <= h**2 / 4 + 1e-15
    assert err >= 0.99 * h**2 / 4


def test_interp_complex_samples():
    xs = np.linspace(-1, 1, 9)
    itp = interp_linear(np.exp(1j * xs))
    assert itp(xs[3]) == pytest.approx(np.exp(1j * xs[3]))


def test_interp_needs_two_samples():
    with pytest.raises(ValueError):
        interp_linear([1.0])


def test_max_error_identity_and_constant_gap():
    f = lambda s: np.ones_like(s)
    zero = lambda s: np.zeros_like(s)
    assert max_error_on_grid(f, f, 33) == 0.0
    assert max_error_on_grid(f, zero, 17) == 1.0
