import math

import numpy as np
import pytest
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from closednodal.discretize import (
    LaplacianOperator,
    assemble_laplacian,
    boundary_distance_field,
    voxelize,
)
from closednodal.eigensolve import smallest_eigenpairs
from closednodal.geometry import Ball, Shell, SpherePointSet, make_fournais


def test_ball_node_counts():
    g = voxelize(Ball(1.0), 0.5)
    assert g.n == 27
    assert set(map(tuple, g.coords)) == {(i, j, k) for i in (-1, 0, 1) for j in (-1, 0, 1) for k in (-1, 0, 1)}
    assert voxelize(Ball(1.0), 0.9).n == 7


def test_grid_invariants(chain):
    g = voxelize(chain["fournais"], 0.1)
    assert np.all(chain["fournais"].contains(g.points))
    idx = g.index
    assert np.array_equal(np.sort(idx[idx >= 0]), np.arange(g.n))
    steps = np.abs(g.coords[g.severed[:, 0]] - g.coords[g.severed[:, 1]]).sum(axis=1)
    assert np.all(steps == 1)


def test_empty_grid_is_an_error():
    with pytest.raises(ValueError):
        voxelize(Shell(0.5, 0.6), 1.0)


def test_under_resolution_warns():
    with pytest.warns(RuntimeWarning):
        g = voxelize(Shell(1.0, 1.2), 0.15)
    assert g.under_resolved


def test_fournais_severed_edges():
    f = make_fournais(SpherePointSet(np.array([[0.0, 0.0, 1.0]])), 0.2)
    g = voxelize(f, 0.25)
    idx = g.index
    K = g.K

    def node(*c):
        return idx[tuple(np.array(c) + K)]

    sev = {tuple(p) for p in g.severed.tolist()}
    # vertical edges near the north pole pass through the room
    for a, b in [((0, 0, 3), (0, 0, 4)), ((0, 0, 4), (0, 0, 5))]:
        assert node(*a) >= 0 and node(*b) >= 0
        assert (node(*a), node(*b)) not in sev
    # equatorial radial edge crosses the wall
    a, b = node(3, 1, 0), node(4, 1, 0)
    assert a >= 0 and b >= 0
    assert (a, b) in sev


def test_single_node_and_star_matrices():
    h = 0.9
    A = assemble_laplacian(voxelize(Ball(0.5), 1.0), boundary="omission")
    assert A.shape == (1, 1) and A[0, 0] == 6.0
    g = voxelize(Ball(1.0), h)
    A = assemble_laplacian(g, boundary="omission").toarray()
    star = np.zeros((7, 7))
    centre = int(np.flatnonzero((g.coords == 0).all(axis=1))[0])
    star[centre, :] = star[:, centre] = 1.0
    star[centre, centre] = 0.0
    np.testing.assert_array_equal(A, (6.0 * np.eye(7) - star) / h**2)


def test_severed_pair_matrix(chain):
    g = voxelize(chain["fournais"], 0.1)
    A = assemble_laplacian(g, boundary="omission")
    i, j = g.severed[0]
    assert A[i, j] == 0 and A[j, i] == 0
    assert A[i, i] == 6.0 / g.h**2 and A[j, j] == 6.0 / g.h**2


@pytest.mark.parametrize("boundary", ["omission", "ghost"])
def test_symmetry_and_entries(chain, boundary):
    g = voxelize(chain["fournais"], 0.1)
    A = assemble_laplacian(g, boundary)
    assert (A - A.T).nnz == 0
    off = sp.triu(A, 1).data
    assert np.all(off == -1.0 / g.h**2)
    d = A.diagonal()
    if boundary == "omission":
        assert np.all(d == 6.0 / g.h**2)
    else:
        assert np.all(d >= 6.0 / g.h**2)
        assert d.max() > 6.0 / g.h**2


def test_gershgorin_and_definiteness():
    for dom, h in [(Ball(1.0), 0.2), (Shell(1.0, 1.8), 0.25), (Ball(1.0, N=2), 0.1)]:
        g = voxelize(dom, h)
        assert g.n <= 2000
        w = la.eigvalsh(assemble_laplacian(g, "omission").toarray())
        assert w.min() > 0
        assert w.max() <= 4 * g.dim / h**2 * (1 + 1e-12)


def test_matrix_free_matches_stored(chain, rng):
    for d, h in [(chain["fournais"], 0.1), (Ball(1.0), 0.1), (chain["sheet"], 0.1)]:
        g = voxelize(d, h)
        for boundary in ("omission", "ghost"):
            A = assemble_laplacian(g, boundary)
            op = LaplacianOperator(g, boundary)
            X = rng.normal(size=(g.n, 3))
            np.testing.assert_allclose(op.matmat(X), A @ X, rtol=1e-13, atol=1e-9)
            np.testing.assert_array_equal(op.diagonal(), A.diagonal())


@pytest.mark.parametrize("name", ["fournais", "passage", "sheet", "pole"])
def test_grid_connected_at_resolved_h(chain, name):
    g = voxelize(chain[name], 0.05)
    i, j = g.edges()
    adj = sp.coo_matrix((np.ones(i.size), (i, j)), shape=(g.n, g.n))
    assert connected_components(adj, directed=False)[0] == 1


def ball_lambda1(h, boundary):
    A = assemble_laplacian(voxelize(Ball(1.0), h), boundary)
    return smallest_eigenpairs(A, 1, tol=1e-9, preconditioner="amg").eigenvalues[0]


def test_refinement_order_ghost():
    errs = [abs(ball_lambda1(h, "ghost") - math.pi**2) for h in (1 / 8, 1 / 16, 1 / 32)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) >= 1.8, orders


def test_refinement_omission_is_first_order():
    errs = [abs(ball_lambda1(h, "omission") - math.pi**2) for h in (1 / 8, 1 / 16, 1 / 32)]
    assert errs[0] > errs[1] > errs[2]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert all(0.5 < o < 1.8 for o in orders), orders


def test_boundary_distance_examples(chain):
    g = voxelize(Ball(1.0), 0.1)
    d = boundary_distance_field(g)
    origin = int(np.flatnonzero((g.coords == 0).all(axis=1))[0])
    assert abs(d[origin] - 0.9) <= 0.1 + 1e-12
    assert np.all(d >= 0) and np.all(d <= 1.0)
    g = voxelize(chain["fournais"], 0.1)
    d = boundary_distance_field(g)
    assert np.all(d[g.severed.ravel()] <= 0.05 + 0.1 + 1e-12)
    assert np.all(d <= chain["fournais"].bounding_radius)
