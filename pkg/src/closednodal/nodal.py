"""Nodal domains of grid functions and the interior-nodal-domain test.

Sign classes are "positive" (psi > zero band) and "nonpositive"; nodes inside
the zero band count as nonpositive, which can only make containment harder.
A component lying entirely inside the zero band carries no sign
information at the available accuracy; ``NodalReport.significant`` counts
only components with some node above the band, and is what Courant's bound
is checked against. The containment verdict uses the full count.
Orientation: psi is flipped if needed so that the node of largest radius
(first in lattice order on ties) among those above the band is positive. Severed edges
never connect.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .discretize import VoxelGrid, boundary_distance_field

__all__ = [
    "NodalReport",
    "containment_report",
    "interface_check",
    "interface_points",
    "nodal_domains",
    "orient",
]

DEFAULT_ZERO_BAND = 1e-12


@dataclass
class NodalReport:
    count: int
    signs: list[int]
    sizes: list[int]
    volumes: list[float]
    interior: list[bool]
    significant: int = 0
    band: float = 0.0
    min_distance: float = float("nan")
    verdict: bool | None = None
    margin: float = float("nan")
    courant_violation: bool = False
    interface_radius: float = float("nan")
    labels: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "signs": list(self.signs),
            "sizes": list(self.sizes),
            "volumes": list(self.volumes),
            "interior": list(self.interior),
            "significant": self.significant,
            "band": self.band,
            "min_distance": self.min_distance,
            "verdict": self.verdict,
            "margin": self.margin,
            "courant_violation": self.courant_violation,
            "interface_radius": self.interface_radius,
        }


def orient(grid: VoxelGrid, psi: np.ndarray, band: float = 0.0) -> np.ndarray:
    """Return ``psi`` or ``-psi`` so that the outermost node with
    ``|psi| > band`` is positive (all nodes qualify when band is 0)."""
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (grid.n,):
        raise ValueError("psi must hold one value per grid node")
    r = np.where(np.abs(psi) > band, grid.radii, -1.0)
    w = int(np.argmax(r))
    return -psi if psi[w] < 0 else psi


def _classes(grid: VoxelGrid, psi: np.ndarray, zero_band: float | None) -> tuple[np.ndarray, np.ndarray, float]:
    psi = np.asarray(psi, dtype=float)
    scale = np.abs(psi).max() if psi.size else 0.0
    if scale == 0:
        raise ValueError("psi vanishes identically")
    band = (DEFAULT_ZERO_BAND if zero_band is None else zero_band) * scale
    psi = orient(grid, psi, band)
    return psi, psi > band, band


def _label(grid: VoxelGrid, positive: np.ndarray) -> tuple[int, np.ndarray]:
    i, j = grid.edges()
    same = positive[i] == positive[j]
    i, j = i[same], j[same]
    adj = sp.coo_matrix((np.ones(i.size, np.int8), (i, j)), shape=(grid.n, grid.n))
    count, labels = connected_components(adj, directed=False)
    # renumber by first appearance in node order
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    lut = np.empty(count, dtype=np.int64)
    lut[order] = np.arange(count)
    return count, lut[labels]


def _boundary_adjacent(grid: VoxelGrid) -> np.ndarray:
    return ~np.all(np.isnan(grid.ghost), axis=1)


def nodal_domains(grid: VoxelGrid, psi: np.ndarray, zero_band: float | None = None) -> NodalReport:
    """Connected components of the two sign classes of ``psi``."""
    psi, positive, band = _classes(grid, psi, zero_band)
    count, labels = _label(grid, positive)
    amplitude = np.zeros(count)
    np.maximum.at(amplitude, labels, np.abs(psi))
    sizes = np.bincount(labels, minlength=count)
    first = np.zeros(count, dtype=np.int64)
    first[labels[::-1]] = np.arange(grid.n)[::-1]
    signs = [1 if positive[f] else -1 for f in first]
    touching = np.bincount(labels, weights=_boundary_adjacent(grid), minlength=count) > 0
    return NodalReport(
        count=int(count),
        signs=signs,
        sizes=[int(s) for s in sizes],
        volumes=[float(s) * grid.h**grid.dim for s in sizes],
        interior=[bool(not t) for t in touching],
        significant=int(np.count_nonzero(amplitude > band)),
        band=float(band),
        labels=labels,
    )


def containment_report(
    grid: VoxelGrid,
    psi2: np.ndarray,
    margin: float | None = None,
    zero_band: float | None = None,
    distance: np.ndarray | None = None,
) -> NodalReport:
    """Decide whether the closed nonpositive set of ``psi2`` stays away from
    the boundary and inside the unit ball.

    The verdict requires exactly two nodal domains and, for every
    nonpositive node, boundary distance > margin and radius < 1 - margin.
    ``margin`` defaults to 2h.
    """
    margin = 2.0 * grid.h if margin is None else float(margin)
    rep = nodal_domains(grid, psi2, zero_band)
    _, positive, _ = _classes(grid, psi2, zero_band)
    nonpos = ~positive
    d = boundary_distance_field(grid) if distance is None else distance
    rep.margin = margin
    rep.courant_violation = rep.count != 2
    if not nonpos.any():
        rep.verdict = False
        return rep
    rep.min_distance = float(d[nonpos].min())
    radii = interface_points(grid, psi2, zero_band)
    if radii.size:
        rep.interface_radius = float(np.sqrt((radii**2).sum(axis=1)).max())
    inside = bool(np.all(grid.radii[nonpos] < 1.0 - margin))
    rep.verdict = bool(rep.count == 2 and rep.min_distance > margin and inside)
    return rep


def interface_check(grid: VoxelGrid, psi2: np.ndarray, zero_band: float | None = None) -> bool:
    """Every nodal domain meets a node of the opposite class across a
    coupled (unsevered) edge."""
    _, positive, _ = _classes(grid, psi2, zero_band)
    count, labels = _label(grid, positive)
    i, j = grid.edges()
    cross = positive[i] != positive[j]
    touched = np.zeros(count, bool)
    touched[labels[i[cross]]] = True
    touched[labels[j[cross]]] = True
    return bool(touched.all())


def interface_points(grid: VoxelGrid, psi: np.ndarray, zero_band: float | None = None) -> np.ndarray:
    """Sub-grid nodal surface: linear zero crossings on coupled edges that
    join the two sign classes. Unlike node distances these vary smoothly
    with the domain, so they can show a monotone trend."""
    psi, positive, _ = _classes(grid, psi, zero_band)
    i, j = grid.edges()
    cross = positive[i] != positive[j]
    i, j = i[cross], j[cross]
    a, b = psi[i], psi[j]
    t = np.clip(a / (a - b), 0.0, 1.0)
    p = grid.points
    return p[i] + t[:, None] * (p[j] - p[i])


def nodal_count(grid: VoxelGrid, psi: np.ndarray, zero_band: float | None = None) -> int:
    """Number of significant nodal domains (the quantity Courant bounds)."""
    return nodal_domains(grid, psi, zero_band).significant
