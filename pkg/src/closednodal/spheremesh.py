"""Latitude-longitude mesh of the unit sphere in R^3 with flood-fill labelling."""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage


class SphereMesh:
    """Cell-centred latitude-longitude mesh whose largest spacing is at most ``pitch``.

    Adjacency is 4-neighbour in (latitude, longitude) index space, periodic in
    longitude; on the two polar rings, antipodal longitudes are also adjacent
    (their chord through the pole is shorter than the pitch).
    """

    def __init__(self, pitch: float):
        if not pitch > 0:
            raise ValueError("pitch must be positive")
        self.n_lat = max(2, math.ceil(math.pi / pitch))
        self.n_lon = max(4, 2 * math.ceil(math.pi / pitch))
        self.pitch = max(math.pi / self.n_lat, 2.0 * math.pi / self.n_lon)
        colat = (np.arange(self.n_lat) + 0.5) * math.pi / self.n_lat
        lon = (np.arange(self.n_lon) + 0.5) * 2.0 * math.pi / self.n_lon
        C, L = np.meshgrid(colat, lon, indexing="ij")
        s = np.sin(C)
        self._grid = np.stack([s * np.cos(L), s * np.sin(L), np.cos(C)], axis=-1)

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_lat, self.n_lon

    @property
    def points(self) -> np.ndarray:
        """Mesh points, shape (n_lat * n_lon, 3), row-major in (lat, lon)."""
        return self._grid.reshape(-1, 3)

    def label(self, mask: np.ndarray) -> tuple[np.ndarray, int]:
        """Connected components of the masked mesh points.

        Returns flat labels (0 outside the mask, 1..J inside, numbered by first
        appearance in mesh order) and J.
        """
        grid = np.asarray(mask, bool).reshape(self.shape)
        lab, n = ndimage.label(grid)
        parent = np.arange(n + 1)

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

        # longitude seam
        for a, b in zip(lab[:, 0], lab[:, -1]):
            if a and b:
                union(a, b)
        half = self.n_lon // 2
        for row in (lab[0], lab[-1]):
            for a, b in zip(row[:half], row[half:]):
                if a and b:
                    union(a, b)
        roots = np.array([find(i) for i in range(n + 1)])
        merged = roots[lab].ravel()
        present = merged > 0
        if not present.any():
            return np.zeros_like(merged), 0
        roots_seen, first = np.unique(merged[present], return_index=True)
        order = roots_seen[np.argsort(first)]
        lut = np.zeros(n + 1, dtype=np.int64)
        lut[order] = np.arange(1, order.size + 1)
        return lut[merged], int(order.size)
