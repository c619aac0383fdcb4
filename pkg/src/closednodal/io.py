"""File formats: binary grid/matrix dumps, triplet text and legacy VTK.

Binary layout (all little-endian)::

    grid:   b"CNGRID" | version u1 | dim u1 | K u4 | h f8 | n u8 | S u8
            | under_resolved u1 | coords i4[n, dim] | ghost f8[n, 2 dim]
            | severed i8[S, 2] | severed_axis u1[S]
    matrix: b"CNCSR\\0" | version u1 | n u8 | nnz u8
            | indptr i8[n + 1] | indices i8[nnz] | data f8[nnz]

The triplet text format has a ``# n nnz`` header and one ``i j value`` line
per stored entry, 0-based, values printed with ``repr``.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .discretize import VoxelGrid

__all__ = [
    "FORMAT_VERSION",
    "load_grid",
    "load_matrix",
    "load_triplets",
    "save_grid",
    "save_matrix",
    "save_triplets",
    "write_vtk",
]

FORMAT_VERSION = 1
GRID_MAGIC = b"CNGRID"
MATRIX_MAGIC = b"CNCSR\0"


def _check_header(buf: bytes, magic: bytes) -> int:
    if buf[: len(magic)] != magic:
        raise ValueError("not a closednodal dump (bad magic bytes)")
    version = buf[len(magic)]
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported dump version {version}")
    return len(magic) + 1


def save_grid(path, grid: VoxelGrid) -> None:
    head = struct.pack(
        "<BIdQQB", grid.dim, grid.K, grid.h, grid.n, grid.severed.shape[0], int(grid.under_resolved)
    )
    with open(path, "wb") as f:
        f.write(GRID_MAGIC + bytes([FORMAT_VERSION]) + head)
        f.write(np.ascontiguousarray(grid.coords, dtype="<i4").tobytes())
        f.write(np.ascontiguousarray(grid.ghost, dtype="<f8").tobytes())
        f.write(np.ascontiguousarray(grid.severed, dtype="<i8").tobytes())
        f.write(np.ascontiguousarray(grid.severed_axis, dtype="u1").tobytes())


def load_grid(path) -> VoxelGrid:
    """Read a grid dump; the domain itself is not stored."""
    buf = Path(path).read_bytes()
    off = _check_header(buf, GRID_MAGIC)
    fmt = "<BIdQQB"
    dim, K, h, n, S, under = struct.unpack_from(fmt, buf, off)
    off += struct.calcsize(fmt)

    def take(dtype, count, shape):
        nonlocal off
        a = np.frombuffer(buf, dtype=dtype, count=count, offset=off).reshape(shape)
        off += a.nbytes
        return a.astype(dtype.lstrip("<"))

    coords = take("<i4", n * dim, (n, dim)).astype(np.int64)
    ghost = take("<f8", n * 2 * dim, (n, 2 * dim))
    severed = take("<i8", S * 2, (S, 2))
    axis = take("u1", S, (S,)).astype(np.int64)
    mask = np.zeros((2 * K + 1,) * dim, bool)
    mask[tuple((coords + K).T)] = True
    for a in (mask, coords, severed, axis, ghost):
        a.setflags(write=False)
    return VoxelGrid(h, K, mask, coords, severed, axis, ghost, bool(under))


def save_matrix(path, A) -> None:
    A = sp.csr_matrix(A)
    A.sort_indices()
    with open(path, "wb") as f:
        f.write(MATRIX_MAGIC + bytes([FORMAT_VERSION]) + struct.pack("<QQ", A.shape[0], A.nnz))
        f.write(A.indptr.astype("<i8").tobytes())
        f.write(A.indices.astype("<i8").tobytes())
        f.write(A.data.astype("<f8").tobytes())


def load_matrix(path) -> sp.csr_matrix:
    buf = Path(path).read_bytes()
    off = _check_header(buf, MATRIX_MAGIC)
    n, nnz = struct.unpack_from("<QQ", buf, off)
    off += 16
    indptr = np.frombuffer(buf, "<i8", n + 1, off)
    off += indptr.nbytes
    indices = np.frombuffer(buf, "<i8", nnz, off)
    off += indices.nbytes
    data = np.frombuffer(buf, "<f8", nnz, off)
    return sp.csr_matrix((data.copy(), indices.copy(), indptr.copy()), shape=(n, n))


def save_triplets(path, A) -> None:
    A = sp.coo_matrix(A)
    order = np.lexsort((A.col, A.row))
    with open(path, "w") as f:
        f.write(f"# {A.shape[0]} {A.nnz}\n")
        for i, j, v in zip(A.row[order], A.col[order], A.data[order]):
            f.write(f"{i} {j} {float(v)!r}\n")


def load_triplets(path) -> sp.csr_matrix:
    with open(path) as f:
        head = f.readline().split()
        n = int(head[1])
        rows, cols, vals = [], [], []
        for line in f:
            i, j, v = line.split()
            rows.append(int(i))
            cols.append(int(j))
            vals.append(float(v))
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def write_vtk(path, grid: VoxelGrid, fields: dict[str, np.ndarray], title: str = "closednodal") -> None:
    """Legacy ASCII STRUCTURED_POINTS file with one point field per entry.

    Integer arrays are written as ``int`` (e.g. nodal labels), the rest as
    ``double``. Off-grid lattice points get 0 (labels: -1).
    """
    if grid.dim not in (2, 3):
        raise ValueError("VTK export supports 2D and 3D grids")
    dims = list(grid.shape) + [1] * (3 - grid.dim)
    origin = [-grid.K * grid.h] * grid.dim + [0.0] * (3 - grid.dim)
    with open(path, "w") as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write(title.replace("\n", " ")[:255] + "\n")
        f.write("ASCII\nDATASET STRUCTURED_POINTS\n")
        f.write("DIMENSIONS {} {} {}\n".format(*dims))
        f.write("ORIGIN {} {} {}\n".format(*(repr(float(o)) for o in origin)))
        f.write("SPACING {0} {0} {0}\n".format(repr(grid.h)))
        f.write(f"POINT_DATA {int(np.prod(dims))}\n")
        for name, values in fields.items():
            values = np.asarray(values)
            integer = np.issubdtype(values.dtype, np.integer)
            lat = grid.field_on_lattice(values, fill=-1 if integer else 0.0)
            f.write(f"SCALARS {name} {'int' if integer else 'double'} 1\nLOOKUP_TABLE default\n")
            # VTK wants x varying fastest
            flat = lat.ravel(order="F")
            fmt = "%d" if integer else "%.17g"
            np.savetxt(f, flat.reshape(-1, 1), fmt=fmt)
