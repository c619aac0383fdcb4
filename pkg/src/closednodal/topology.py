"""Topology of voxel solids: complement components, Euler characteristic and
mod-2 Betti numbers of the cubical complex whose top cells are the voxels
centred at the interior nodes.

Cells are addressed in doubled coordinates: a voxel at lattice index v sits
at 2v + 1 (all coordinates odd), and a cell of dimension k has exactly k odd
coordinates. A cell belongs to the complex iff some voxel lies within
sup-distance 1 of it in doubled coordinates.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .discretize import VoxelGrid

__all__ = [
    "BETTI_VOXEL_LIMIT",
    "TopologyReport",
    "betti_mod2",
    "complement_components",
    "euler_characteristic",
    "topology_report",
]

BETTI_VOXEL_LIMIT = 32**3


@dataclass
class TopologyReport:
    h: float
    components: int  # complement components in the box, outer region included
    holes: int  # bounded complement components
    resolved: bool  # face- and full-connectivity counts agree
    components_full: int | None = None
    euler: int | None = None
    betti: tuple[int, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "components": self.components,
            "holes": self.holes,
            "resolved": self.resolved,
            "components_full": self.components_full,
            "euler": self.euler,
            "betti": list(self.betti) if self.betti is not None else None,
        }


def _mask(grid_or_mask) -> tuple[np.ndarray, float]:
    if isinstance(grid_or_mask, VoxelGrid):
        return grid_or_mask.mask, grid_or_mask.h
    return np.asarray(grid_or_mask, bool), 1.0


def _crop(mask: np.ndarray) -> np.ndarray:
    if not mask.any():
        raise ValueError("empty voxel solid")
    sl = ndimage.find_objects(mask.astype(np.int8))[0]
    return mask[sl]


def complement_components(grid: VoxelGrid, box: float | None = None) -> TopologyReport:
    """Count connected components of the non-interior lattice points of a box.

    ``box`` is the half-width (a length); by default the grid's own lattice
    box is used. The component touching the box boundary is the outer
    region; the others are holes.
    """
    mask, h = grid.mask, grid.h
    K = grid.K
    if box is not None:
        Kb = int(math.floor(box / h + 1e-9))
        radius = grid.domain.bounding_radius if grid.domain is not None else (K - 1) * h
        if Kb * h <= radius:
            raise ValueError(f"box half-width {box} does not contain the bounding sphere of radius {radius}")
        if Kb >= K:
            mask = np.pad(mask, Kb - K)
        else:
            cut = K - Kb
            inner = mask[(slice(cut, -cut),) * mask.ndim]
            if inner.sum() != mask.sum():
                raise ValueError("box too small: interior nodes fall outside it")
            mask = inner
    free = ~mask
    N = mask.ndim
    face = ndimage.generate_binary_structure(N, 1)
    full = ndimage.generate_binary_structure(N, N)
    _, n_face = ndimage.label(free, structure=face)
    _, n_full = ndimage.label(free, structure=full)
    return TopologyReport(
        h=h,
        components=int(n_face),
        holes=int(n_face) - 1,
        resolved=n_face == n_full,
        components_full=int(n_full),
    )


def _cells(mask: np.ndarray) -> np.ndarray:
    """Boolean array over doubled coordinates marking cells of the complex."""
    mask = _crop(mask)
    D = np.zeros(tuple(2 * s + 1 for s in mask.shape), bool)
    D[(slice(1, None, 2),) * mask.ndim] = mask
    return ndimage.maximum_filter(D, size=3, mode="constant")


def _parity_slices(N: int):
    for odd in itertools.product((0, 1), repeat=N):
        yield sum(odd), tuple(slice(o, None, 2) for o in odd)


def euler_characteristic(grid) -> int:
    """V - E + F - C (alternating cell count in general dimension)."""
    mask, _ = _mask(grid)
    cells = _cells(mask)
    return int(sum((-1) ** k * int(cells[sl].sum()) for k, sl in _parity_slices(mask.ndim)))


def _rank_mod2(columns, cleared: set[int]) -> tuple[int, set[int]]:
    """Rank of a GF(2) matrix given as integer bitset columns, by the
    standard left-to-right pivot reduction. Returns the rank and the set of
    pivot rows (used to clear columns of the next lower boundary map)."""
    pivots: dict[int, int] = {}
    for j, col in enumerate(columns):
        if j in cleared:
            continue
        while col:
            low = col.bit_length() - 1
            other = pivots.get(low)
            if other is None:
                pivots[low] = col
                break
            col ^= other
    return len(pivots), set(pivots)


def betti_mod2(grid, limit: int = BETTI_VOXEL_LIMIT) -> tuple[int, ...]:
    """Betti numbers b_0..b_{N-1} of the voxel solid over GF(2).

    Raises ``ValueError`` if the solid has more than ``limit`` voxels.
    """
    mask, _ = _mask(grid)
    nvox = int(mask.sum())
    if nvox > limit:
        raise ValueError(f"{nvox} voxels exceed the rank-computation guard of {limit}")
    cells = _cells(mask)
    N = mask.ndim
    parity = sum(
        (np.arange(cells.shape[ax]) % 2).reshape([-1 if a == ax else 1 for a in range(N)]) for ax in range(N)
    )
    dims = np.where(cells, parity, -1)
    # index of each cell among the cells of its own dimension
    index = np.full(cells.shape, -1, dtype=np.int64)
    counts = []
    for k in range(N + 1):
        sel = dims == k
        index[sel] = np.arange(int(sel.sum()))
        counts.append(int(sel.sum()))
    ranks = [0] * (N + 2)
    cleared: set[int] = set()
    for k in range(N, 0, -1):
        pos = np.argwhere(dims == k)
        faces = []
        for ax in range(N):
            on = pos[:, ax] % 2 == 1
            for s in (-1, 1):
                q = pos.copy()
                q[:, ax] += s
                f = np.full(pos.shape[0], -1, dtype=np.int64)
                f[on] = index[tuple(q[on].T)]
                faces.append(f)
        faces = np.stack(faces, axis=1)
        cols = [sum(1 << int(f) for f in row if f >= 0) for row in faces]
        ranks[k], cleared = _rank_mod2(cols, cleared)
    return tuple(counts[k] - ranks[k] - ranks[k + 1] for k in range(N))


def topology_report(grid: VoxelGrid, betti: bool = False, box: float | None = None) -> TopologyReport:
    rep = complement_components(grid, box)
    rep.euler = euler_characteristic(grid)
    if betti:
        rep.betti = betti_mod2(grid)
    return rep
