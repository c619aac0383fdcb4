import numpy as np
import pytest

from closednodal.geometry import SpherePointSet, make_fournais, make_passage, make_pole, make_sheet

ANTIPODAL = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])


@pytest.fixture(scope="session")
def antipodal():
    return SpherePointSet(ANTIPODAL)


@pytest.fixture(scope="session")
def chain(antipodal):
    """Fournais -> passage -> sheet -> pole for two antipodal rooms, eps = 0.25."""
    f = make_fournais(antipodal, 0.25)
    p = make_passage(f, 2)
    s = make_sheet(p, 1)
    pole = make_pole(s, 4)
    return {"fournais": f, "passage": p, "sheet": s, "pole": pole}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def grid_from_mask(mask, h=1.0, severed=()):
    """A VoxelGrid straight from a centred lattice mask.

    Arms leading off the mask get boundary fraction 1. ``severed`` lists
    node pairs (lower, upper) whose edge is cut by a zero-thickness wall.
    """
    from closednodal.discretize import VoxelGrid

    mask = np.asarray(mask, bool)
    K = (mask.shape[0] - 1) // 2
    coords = np.argwhere(mask) - K
    n, N = coords.shape
    padded = np.pad(mask, 1)
    ghost = np.full((n, 2 * N), np.nan)
    for a in range(N):
        for s, step in enumerate((-1, 1)):
            nb = coords + K + 1
            nb[:, a] += step
            ghost[~padded[tuple(nb.T)], 2 * a + s] = 1.0
    sev = np.asarray(severed, np.int64).reshape(-1, 2)
    axis = np.array([int(np.flatnonzero(coords[j] - coords[i])[0]) for i, j in sev], np.int64)
    return VoxelGrid(h, K, mask, coords, sev, axis, ghost)


@pytest.fixture
def lattice():
    return grid_from_mask
