"""Implicit descriptions of the ball-and-shell domain family.

Every domain is a frozen dataclass exposing a vectorised membership test
(``contains``), a signed-distance estimate (``sdf``, negative inside) and,
for the Fournais domain only, the zero-thickness wall on the unit sphere
(``wall_crossings``). Points are arrays of shape ``(..., N)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np

from .oracles import choose_R_window

__all__ = [
    "Ball",
    "Domain",
    "Fournais",
    "Passage",
    "Pole",
    "Sheet",
    "SheetWeb",
    "Shell",
    "Smoothed",
    "SpherePointSet",
    "domain_from_config",
    "domain_to_config",
    "epsilon_upper_bound",
    "make_fournais",
    "make_passage",
    "make_pole",
    "make_sheet",
    "pole_directions",
    "room_separation_bound",
    "smooth_domain",
]

UNIT_TOL = 1e-12
ALL_TERMS_EMPTY_CAP = 0.5


def _norm(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("...i,...i->...", x, x))


def _direction(x: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Angular part x/|x|; the origin maps to the first basis vector."""
    safe = np.where(r > 0, r, 1.0)
    theta = x / safe[..., None]
    if np.any(r == 0):
        e = np.zeros(x.shape[-1])
        e[0] = 1.0
        theta = np.where((r == 0)[..., None], e, theta)
    return theta


@dataclass(frozen=True, eq=False)
class SpherePointSet:
    """Room centres on the unit sphere of R^N."""

    centers: np.ndarray

    def __post_init__(self) -> None:
        c = np.array(self.centers, dtype=float, copy=True)
        if c.ndim != 2 or c.shape[0] < 1:
            raise ValueError("need at least one centre, shape (M, N)")
        if c.shape[1] < 3:
            raise ValueError("dimension must be at least 3")
        if np.any(np.abs(_norm(c) - 1.0) > UNIT_TOL):
            raise ValueError("every centre must be a unit vector")
        if c.shape[0] > 1:
            d = _norm(c[:, None, :] - c[None, :, :])
            if np.any(d[~np.eye(len(c), dtype=bool)] == 0):
                raise ValueError("centres must be pairwise distinct")
        c.setflags(write=False)
        object.__setattr__(self, "centers", c)

    @property
    def M(self) -> int:
        return self.centers.shape[0]

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SpherePointSet) and np.array_equal(self.centers, other.centers)

    def __hash__(self) -> int:
        return hash(self.centers.tobytes())


def epsilon_upper_bound(points: SpherePointSet) -> float:
    """Largest admissible room radius for the given centres.

    min(half the smallest pairwise distance, a quarter of the smaller of the
    smallest gap between distinct heights and the smallest nonzero |x_1|).
    Minima over empty sets are dropped; if every term drops the cap is 0.5.
    """
    if not isinstance(points, SpherePointSet):
        points = SpherePointSet(np.asarray(points, dtype=float))
    c = points.centers
    terms = []
    if points.M > 1:
        d = _norm(c[:, None, :] - c[None, :, :])
        terms.append(0.5 * d[~np.eye(points.M, dtype=bool)].min())
    quarter = []
    levels = np.unique(c[:, -1])
    if levels.size > 1:
        quarter.append(np.diff(levels).min())
    x1 = np.abs(c[:, 0])
    x1 = x1[x1 != 0]
    if x1.size:
        quarter.append(x1.min())
    if quarter:
        terms.append(0.25 * min(quarter))
    if not terms:
        return ALL_TERMS_EMPTY_CAP
    return float(min(terms))


@dataclass(frozen=True)
class SheetWeb:
    """The set G: a vertical great sphere {x_1 = 0} plus one horizontal
    level {x_N = c} per distinct centre height, all on the unit sphere,
    thickened to half-width ``half_width``."""

    levels: tuple[float, ...]
    half_width: float
    dim: int = 3

    def __post_init__(self) -> None:
        lv = tuple(sorted(set(float(v) for v in self.levels)))
        object.__setattr__(self, "levels", lv)
        if not self.half_width > 0:
            raise ValueError("half-width must be positive")
        if not self.is_connected():
            raise ValueError("sheet web limit set is disconnected")

    def is_connected(self) -> bool:
        # a level circle meets {x_1 = 0} iff some unit vector has x_1 = 0 and x_N = c
        return all(abs(c) <= 1.0 for c in self.levels) and self.dim >= 3

    def distance(self, theta: np.ndarray) -> np.ndarray:
        """Euclidean distance from unit vectors to the unthickened web G."""
        a = theta[..., 0]
        d = np.sqrt(np.maximum(2.0 - 2.0 * np.sqrt(np.maximum(1.0 - a * a, 0.0)), 0.0))
        zN = theta[..., -1]
        rho = np.sqrt(np.maximum(1.0 - zN * zN, 0.0))
        for c in self.levels:
            rc = math.sqrt(max(1.0 - c * c, 0.0))
            d = np.minimum(d, np.sqrt((rho - rc) ** 2 + (zN - c) ** 2))
        return d

    def contains(self, theta: np.ndarray) -> np.ndarray:
        return self.distance(theta) < self.half_width


class Domain:
    """Common interface of the domain family."""

    kind: ClassVar[str] = ""

    @property
    def dim(self) -> int:  # pragma: no cover - overridden
        raise NotImplementedError

    @property
    def bounding_radius(self) -> float:  # pragma: no cover - overridden
        raise NotImplementedError

    @property
    def feature_size(self) -> float:  # pragma: no cover - overridden
        raise NotImplementedError

    @property
    def has_walls(self) -> bool:
        return False

    def contains(self, x: np.ndarray) -> np.ndarray:  # pragma: no cover - overridden
        raise NotImplementedError

    def sdf(self, x: np.ndarray) -> np.ndarray:  # pragma: no cover - overridden
        raise NotImplementedError

    def wall_crossings(self, p: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """For segments p->q return (severed, t_first, t_last).

        ``t_first``/``t_last`` are the first and last wall-crossing parameters
        in (0, 1); meaningful only where ``severed`` is true.
        """
        n = p.shape[0]
        return np.zeros(n, bool), np.ones(n), np.zeros(n)


@dataclass(frozen=True)
class Ball(Domain):
    R: float = 1.0
    N: int = 3
    kind: ClassVar[str] = "ball"

    def __post_init__(self) -> None:
        if not self.R > 0:
            raise ValueError("radius must be positive")

    @property
    def dim(self) -> int:
        return self.N

    @property
    def bounding_radius(self) -> float:
        return self.R

    @property
    def feature_size(self) -> float:
        return self.R

    def contains(self, x):
        return _norm(x) < self.R

    def sdf(self, x):
        return _norm(x) - self.R


@dataclass(frozen=True)
class Shell(Domain):
    R1: float = 1.0
    R: float = 1.8
    N: int = 3
    kind: ClassVar[str] = "shell"

    def __post_init__(self) -> None:
        if not 0 < self.R1 < self.R:
            raise ValueError("need 0 < R1 < R")

    @property
    def dim(self) -> int:
        return self.N

    @property
    def bounding_radius(self) -> float:
        return self.R

    @property
    def feature_size(self) -> float:
        return self.R - self.R1

    def contains(self, x):
        r = _norm(x)
        return (r > self.R1) & (r < self.R)

    def sdf(self, x):
        r = _norm(x)
        return np.maximum(self.R1 - r, r - self.R)


@dataclass(frozen=True)
class Fournais(Domain):
    """Unit ball and shell 1 < |x| < R glued through balls B_eps(z^i).

    The part of the unit sphere outside the rooms is a wall of zero
    thickness; it is invisible to ``contains`` and reported through
    ``wall_crossings``.
    """

    points: SpherePointSet
    eps: float
    R: float
    kind: ClassVar[str] = "fournais"

    @property
    def dim(self) -> int:
        return self.points.dim

    @property
    def bounding_radius(self) -> float:
        return self.R

    @property
    def feature_size(self) -> float:
        return self.eps

    @property
    def has_walls(self) -> bool:
        return True

    def in_rooms(self, x: np.ndarray) -> np.ndarray:
        """Whether points lie within eps of some centre."""
        return self._room_distance(x) < self.eps

    def _room_distance(self, x: np.ndarray) -> np.ndarray:
        c = self.points.centers
        d = np.full(x.shape[:-1], np.inf)
        for z in c:
            d = np.minimum(d, _norm(x - z))
        return d

    def contains(self, x):
        r = _norm(x)
        return (r < 1.0) | ((r > 1.0) & (r < self.R)) | self.in_rooms(x)

    def sdf(self, x):
        r = _norm(x)
        inner = np.minimum(r - 1.0, np.maximum(1.0 - r, r - self.R))
        return np.minimum(inner, self._room_distance(x) - self.eps)

    def wall_crossings(self, p, q):
        p = np.asarray(p, float)
        d = np.asarray(q, float) - p
        a = np.einsum("ij,ij->i", d, d)
        b = 2.0 * np.einsum("ij,ij->i", p, d)
        c = np.einsum("ij,ij->i", p, p) - 1.0
        disc = b * b - 4.0 * a * c
        real = disc > 0
        sq = np.sqrt(np.where(real, disc, 0.0))
        t_lo = (-b - sq) / (2.0 * a)
        t_hi = (-b + sq) / (2.0 * a)
        severed = np.zeros(p.shape[0], bool)
        t_first = np.ones(p.shape[0])
        t_last = np.zeros(p.shape[0])
        for t in (t_lo, t_hi):
            hit = real & (t > 0.0) & (t < 1.0)
            pt = p + t[:, None] * d
            blocked = hit & ~self.in_rooms(pt)
            severed |= blocked
            t_first = np.where(blocked, np.minimum(t_first, t), t_first)
            t_last = np.where(blocked, np.maximum(t_last, t), t_last)
        return severed, t_first, t_last


@dataclass(frozen=True)
class Passage(Domain):
    """The wall S_1 thickened to 1 <= |x| <= 1 + 1/n, pierced by the rooms."""

    base: Fournais
    n: int
    kind: ClassVar[str] = "passage"

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def R(self) -> float:
        return self.base.R

    @property
    def outer_wall(self) -> float:
        return 1.0 + 1.0 / self.n

    @property
    def bounding_radius(self) -> float:
        return self.base.R

    @property
    def feature_size(self) -> float:
        return min(self.base.eps, 1.0 / self.n, self.base.R - self.outer_wall)

    def _slab(self, r):
        return (r >= 1.0) & (r <= self.outer_wall)

    def _slab_sdf(self, r):
        return np.maximum(1.0 - r, r - self.outer_wall)

    def angular_rooms(self, theta: np.ndarray) -> np.ndarray:
        return self.base.in_rooms(theta)

    def contains(self, x):
        r = _norm(x)
        theta = _direction(x, r)
        return (r < 1.0) | ((r > self.outer_wall) & (r < self.R)) | (self._slab(r) & self.angular_rooms(theta))

    def sdf(self, x):
        r = _norm(x)
        theta = _direction(x, r)
        shell = np.maximum(self.outer_wall - r, r - self.R)
        rooms = np.maximum(self._slab_sdf(r), r * (self.base._room_distance(theta) - self.base.eps))
        return np.minimum(np.minimum(r - 1.0, shell), rooms)


@dataclass(frozen=True)
class Sheet(Domain):
    """Passage domain plus a copy of the thickened web G_m at every radius
    in the passage slab. ``holes`` is the number J of free pieces of the
    unit sphere, counted on a spherical mesh at construction."""

    base: Passage
    m: int
    holes: int = 0
    kind: ClassVar[str] = "sheet"

    @property
    def web(self) -> SheetWeb:
        c = self.base.base.points.centers
        return SheetWeb(tuple(c[:, -1]), self.base.base.eps / self.m, self.dim)

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def R(self) -> float:
        return self.base.R

    @property
    def bounding_radius(self) -> float:
        return self.base.R

    @property
    def feature_size(self) -> float:
        return min(self.base.feature_size, self.base.base.eps / self.m)

    def angular_free(self, theta: np.ndarray) -> np.ndarray:
        """Unit vectors in S_1 minus (G_m union W_0)."""
        return ~(self.web.contains(theta) | self.base.angular_rooms(theta))

    def angular_clearance(self, theta: np.ndarray) -> np.ndarray:
        """Approximate distance on S_1 from free directions to G_m union W_0."""
        web = self.web
        return np.minimum(
            web.distance(theta) - web.half_width,
            self.base.base._room_distance(theta) - self.base.base.eps,
        )

    def contains(self, x):
        r = _norm(x)
        theta = _direction(x, r)
        return self.base.contains(x) | (self.base._slab(r) & self.web.contains(theta))

    def sdf(self, x):
        r = _norm(x)
        theta = _direction(x, r)
        web = self.web
        sheets = np.maximum(self.base._slab_sdf(r), r * (web.distance(theta) - web.half_width))
        return np.minimum(self.base.sdf(x), sheets)


def _segment_distance(x: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    t = np.clip(np.einsum("...i,i->...", x - a, ab) / float(ab @ ab), 0.0, 1.0)
    return _norm(x - a - t[..., None] * ab)


@dataclass(frozen=True, eq=False)
class Pole(Domain):
    """Sheet domain with a radial cylinder of radius 1/l drilled along
    r * theta_k, r in (1 + 1/n0, R), above each hole."""

    base: Sheet
    l: int
    directions: np.ndarray
    clearance: float = math.nan
    kind: ClassVar[str] = "pole"

    def __post_init__(self) -> None:
        d = np.array(self.directions, dtype=float, copy=True).reshape(-1, self.base.dim)
        d.setflags(write=False)
        object.__setattr__(self, "directions", d)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Pole)
            and self.base == other.base
            and self.l == other.l
            and np.array_equal(self.directions, other.directions)
        )

    def __hash__(self) -> int:
        return hash((self.base, self.l, self.directions.tobytes()))

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def R(self) -> float:
        return self.base.R

    @property
    def bounding_radius(self) -> float:
        return self.base.R

    @property
    def feature_size(self) -> float:
        return min(self.base.feature_size, 1.0 / self.l)

    def segments(self) -> list[tuple[np.ndarray, np.ndarray]]:
        r0 = self.base.base.outer_wall
        return [(r0 * t, self.R * t) for t in self.directions]

    def pole_distance(self, x: np.ndarray) -> np.ndarray:
        d = np.full(x.shape[:-1], np.inf)
        for a, b in self.segments():
            d = np.minimum(d, _segment_distance(x, a, b))
        return d

    def contains(self, x):
        return self.base.contains(x) & ~(self.pole_distance(x) <= 1.0 / self.l)

    def sdf(self, x):
        return np.maximum(self.base.sdf(x), 1.0 / self.l - self.pole_distance(x))


# three-point Gauss-Hermite rule for a standard normal, tensorised
_GH_NODES = np.array([-math.sqrt(3.0), 0.0, math.sqrt(3.0)])
_GH_WEIGHTS = np.array([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0])


def _gauss_hermite(dim: int) -> tuple[np.ndarray, np.ndarray]:
    grids = np.meshgrid(*([_GH_NODES] * dim), indexing="ij")
    wgrids = np.meshgrid(*([_GH_WEIGHTS] * dim), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.prod(np.stack([w.ravel() for w in wgrids], axis=1), axis=1)
    return nodes, weights


@dataclass(frozen=True)
class Smoothed(Domain):
    """Outer smoothing: the delta-dilation of ``base`` (read off the signed
    distance estimate) mollified by a Gaussian of standard deviation
    ``width`` and thresholded at 1/2. The base is kept as a subset."""

    base: Domain
    delta: float
    width: float
    kind: ClassVar[str] = "smoothed"

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def R(self) -> float:
        return getattr(self.base, "R", self.base.bounding_radius)

    @property
    def bounding_radius(self) -> float:
        return self.base.bounding_radius + self.delta + 3.0 * self.width

    @property
    def feature_size(self) -> float:
        return self.base.feature_size

    @property
    def is_identity(self) -> bool:
        return self.delta == 0 and self.width == 0

    def mollified(self, x: np.ndarray) -> np.ndarray:
        """Gaussian average of the indicator of {sdf < delta}."""
        nodes, weights = _gauss_hermite(self.dim)
        acc = np.zeros(x.shape[:-1])
        for xi, w in zip(nodes, weights):
            acc += w * (self.base.sdf(x + self.width * xi) < self.delta)
        return acc

    def contains(self, x):
        if self.is_identity:
            return self.base.contains(x)
        return self.base.contains(x) | (self.mollified(x) > 0.5)

    def sdf(self, x):
        if self.is_identity:
            return self.base.sdf(x)
        return self.base.sdf(x) - self.delta


# ---------------------------------------------------------------- builders


def room_separation_bound(points: SpherePointSet) -> float:
    """Half the smallest pairwise distance: rooms below it are disjoint."""
    if not isinstance(points, SpherePointSet):
        points = SpherePointSet(np.asarray(points, dtype=float))
    if points.M < 2:
        return ALL_TERMS_EMPTY_CAP
    c = points.centers
    d = _norm(c[:, None, :] - c[None, :, :])
    return float(min(ALL_TERMS_EMPTY_CAP, 0.5 * d[~np.eye(points.M, dtype=bool)].min()))


def make_fournais(
    points: SpherePointSet,
    eps: float,
    R1: float = 1.0,
    R: float = 1.8,
    enforce_sheet_bound: bool = True,
) -> Fournais:
    """Validated Fournais domain.

    With ``enforce_sheet_bound=False`` only disjointness of the rooms is
    required; the stricter bound matters for the sheet construction, not
    for the domain itself.
    """
    if not isinstance(points, SpherePointSet):
        points = SpherePointSet(np.asarray(points, dtype=float))
    if R1 != 1.0:
        raise ValueError("the construction is normalised to R1 = 1")
    bound = epsilon_upper_bound(points) if enforce_sheet_bound else room_separation_bound(points)
    if not 0 < eps < bound:
        raise ValueError(f"eps={eps} violates the room-separation constraint (0, {bound})")
    window = choose_R_window(R1)
    if R not in window:
        raise ValueError(f"R={R} outside the spectral window {tuple(window)}: eigenvalue ordering fails")
    return Fournais(points, float(eps), float(R))


def make_passage(base: Fournais, n: int) -> Passage:
    if not isinstance(base, Fournais):
        raise TypeError("passage domains are built on a Fournais domain")
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    if 1.0 + 1.0 / n >= base.R:
        raise ValueError("passage slab swallows the outer shell")
    return Passage(base, int(n))


def make_sheet(base: Passage, m: int, mesh_pitch: float | None = None) -> Sheet:
    """Add the thickened web at every radius of the passage slab.

    The hole count J is computed on a latitude-longitude mesh of the unit
    sphere and checked against the bound 2M + 2.
    """
    from .spheremesh import SphereMesh

    if not isinstance(base, Passage):
        raise TypeError("sheet domains are built on a passage domain")
    if int(m) != m or m < 1:
        raise ValueError("m must be a positive integer")
    half = base.base.eps / m
    pitch = half / 2.0 if mesh_pitch is None else float(mesh_pitch)
    if pitch > half / 2.0:
        raise ValueError(f"mesh pitch {pitch} cannot separate sheets of half-width {half}")
    proto = Sheet(base, int(m))
    mesh = SphereMesh(pitch)
    labels, J = mesh.label(proto.angular_free(mesh.points))
    bound = 2 * base.base.points.M + 2
    if J > bound:
        raise AssertionError(f"J={J} exceeds 2M+2={bound}")
    return Sheet(base, int(m), J)


def pole_directions(base: Sheet, mesh_pitch: float | None = None) -> tuple[np.ndarray, float]:
    """One direction per hole of the free sphere, at the mesh point of
    largest clearance (lowest mesh index on ties), and the smallest of those
    clearances (eta)."""
    from .spheremesh import SphereMesh

    if not isinstance(base, Sheet):
        raise TypeError("pole domains are built on a sheet domain")
    eps, m = base.base.base.eps, base.m
    pitch = eps / (4.0 * m) if mesh_pitch is None else float(mesh_pitch)
    mesh = SphereMesh(pitch)
    pts = mesh.points
    labels, J = mesh.label(base.angular_free(pts))
    clearance = base.angular_clearance(pts)
    directions = []
    best = []
    for k in range(1, J + 1):
        idx = np.flatnonzero(labels == k)
        i = idx[np.argmax(clearance[idx])]
        directions.append(pts[i])
        best.append(clearance[i])
    eta = float(min(best)) if best else math.inf
    if eta < mesh.pitch:
        raise ValueError(f"clearance {eta} below mesh pitch {mesh.pitch}: cannot place poles")
    return np.array(directions).reshape(-1, base.dim), eta


def make_pole(base: Sheet, l: int, mesh_pitch: float | None = None) -> Pole:
    """Drill one radial pole of radius 1/l through the outer shell above
    every hole; requires l >= ceil(1/eta)."""
    directions, eta = pole_directions(base, mesh_pitch)
    if int(l) != l or l < math.ceil(1.0 / eta):
        raise ValueError(f"l={l} must be an integer >= ceil(1/eta) = {math.ceil(1.0 / eta)}")
    return Pole(base, int(l), directions, eta)


def feature_delta0(domain: Domain) -> float:
    """Stand-in for the smoothing threshold: half the smallest feature."""
    return 0.5 * domain.feature_size


def smooth_domain(base: Domain, delta: float, width: float, guard_h: float | None = None) -> Smoothed:
    """Mollified outer dilation of ``base``.

    ``delta = width = 0`` returns the base unchanged. With ``guard_h`` the
    number of complement components is compared before and after on a voxel
    grid of that spacing, and a change raises ``ValueError``.
    """
    if delta == 0 and width == 0:
        return Smoothed(base, 0.0, 0.0)
    if not 0 < width < delta:
        raise ValueError("need 0 < width < delta")
    if delta >= feature_delta0(base):
        raise ValueError(f"delta={delta} not below the feature estimate {feature_delta0(base)}")
    out = Smoothed(base, float(delta), float(width))
    if guard_h is not None:
        from .discretize import voxelize
        from .topology import complement_components

        before = complement_components(voxelize(base, guard_h))
        after = complement_components(voxelize(out, guard_h))
        if before.components != after.components:
            raise ValueError(
                f"smoothing changed the complement from {before.components} to {after.components} components"
            )
    return out


# ---------------------------------------------------------- serialisation


def _fmt(v: float) -> str:
    return repr(float(v))


def _vecs(a: np.ndarray) -> str:
    return " | ".join(" ".join(_fmt(v) for v in row) for row in a)


def _parse_vecs(s: str) -> np.ndarray:
    return np.array([[float(v) for v in row.split()] for row in s.split("|")])


def domain_to_config(domain: Domain) -> dict[str, str]:
    """Flatten a domain into ``domain.*`` key/value strings.

    Floats are written with ``repr`` so parsing restores them exactly.
    """
    out: dict[str, str] = {"domain.kind": domain.kind}
    if isinstance(domain, Ball):
        out.update({"domain.R": _fmt(domain.R), "domain.N": str(domain.N)})
        return out
    if isinstance(domain, Shell):
        out.update({"domain.R1": _fmt(domain.R1), "domain.R": _fmt(domain.R), "domain.N": str(domain.N)})
        return out
    chain = []
    d = domain
    while not isinstance(d, Fournais):
        chain.append(d)
        d = d.base
        if isinstance(d, (Ball, Shell)):
            inner = domain_to_config(d)
            out.update({k.replace("domain.", "domain.base.", 1): v for k, v in inner.items() if k != "domain.kind"})
            out["domain.base.kind"] = d.kind
            out["domain.delta"] = _fmt(domain.delta)
            out["domain.width"] = _fmt(domain.width)
            return out
    out["domain.centers"] = _vecs(d.points.centers)
    out["domain.eps"] = _fmt(d.eps)
    out["domain.R"] = _fmt(d.R)
    for e in chain:
        if isinstance(e, Passage):
            out["domain.n"] = str(e.n)
        elif isinstance(e, Sheet):
            out["domain.m"] = str(e.m)
            out["domain.holes"] = str(e.holes)
        elif isinstance(e, Pole):
            out["domain.l"] = str(e.l)
            out["domain.directions"] = _vecs(e.directions)
            out["domain.clearance"] = _fmt(e.clearance)
        elif isinstance(e, Smoothed):
            out["domain.delta"] = _fmt(e.delta)
            out["domain.width"] = _fmt(e.width)
    return out


def domain_from_config(cfg: dict[str, str]) -> Domain:
    """Inverse of :func:`domain_to_config`; no validation beyond types."""
    kind = cfg["domain.kind"]
    if kind == "ball":
        return Ball(float(cfg["domain.R"]), int(cfg.get("domain.N", "3")))
    if kind == "shell":
        return Shell(float(cfg["domain.R1"]), float(cfg["domain.R"]), int(cfg.get("domain.N", "3")))
    if kind == "smoothed" and cfg.get("domain.base.kind") in ("ball", "shell"):
        sub = {k.replace("domain.base.", "domain.", 1): v for k, v in cfg.items() if k.startswith("domain.base.")}
        sub["domain.kind"] = cfg["domain.base.kind"]
        return Smoothed(domain_from_config(sub), float(cfg["domain.delta"]), float(cfg["domain.width"]))
    order = ["fournais", "passage", "sheet", "pole", "smoothed"]
    if kind not in order:
        raise ValueError(f"unknown domain kind {kind!r}")
    d: Domain = Fournais(SpherePointSet(_parse_vecs(cfg["domain.centers"])), float(cfg["domain.eps"]), float(cfg["domain.R"]))
    for step in order[1 : order.index(kind) + 1]:
        if step == "passage":
            d = Passage(d, int(cfg["domain.n"]))
        elif step == "sheet":
            d = Sheet(d, int(cfg["domain.m"]), int(cfg.get("domain.holes", "0")))
        elif step == "pole":
            d = Pole(d, int(cfg["domain.l"]), _parse_vecs(cfg["domain.directions"]), float(cfg.get("domain.clearance", "nan")))
        elif step == "smoothed":
            d = Smoothed(d, float(cfg["domain.delta"]), float(cfg["domain.width"]))
    return d
