"""3D primitives: points, axis-aligned box obstacles, segment/box tests, edge discretization.

All values are immutable after construction and every operation is pure, so the
module is safe for concurrent callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Tangency tolerance: a segment grazing a face, edge or corner produces a
# parameter window of width ~eps; anything narrower is treated as touching,
# not crossing.
_GRAZE_TOL = 1e-12


@dataclass(frozen=True)
class Point3:
    """A point in meters; z is altitude and must be non-negative."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.z < 0:
            raise ValueError(f"altitude must be >= 0, got z={self.z}")

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def horizontal_distance(self, other: "Point3") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class BoxObstacle:
    """Axis-aligned building box resting on the ground (min corner at z = 0)."""

    min_corner: Point3
    max_corner: Point3
    id: str = ""

    def __post_init__(self):
        if self.min_corner.z != 0:
            raise ValueError("box must rest on the ground (min_corner.z == 0)")
        if not (
            self.min_corner.x < self.max_corner.x
            and self.min_corner.y < self.max_corner.y
            and self.min_corner.z < self.max_corner.z
        ):
            raise ValueError("box corners must satisfy min < max componentwise")

    @property
    def height(self) -> float:
        return self.max_corner.z

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.min_corner.to_array(), self.max_corner.to_array()

    def contains_interior(self, p: Point3) -> bool:
        lo, hi = self.bounds()
        q = p.to_array()
        return bool(np.all(q > lo) and np.all(q < hi))

    def footprint_contains(self, x: float, y: float) -> bool:
        return (
            self.min_corner.x < x < self.max_corner.x
            and self.min_corner.y < y < self.max_corner.y
        )


def distance3(p: Point3, q: Point3) -> float:
    """Euclidean distance in meters."""
    return math.sqrt((p.x - q.x) ** 2 + (p.y - q.y) ** 2 + (p.z - q.z) ** 2)


def segment_intersects_box(a: Point3, b: Point3, box: BoxObstacle) -> bool:
    """True iff the open segment (a, b) passes through the box interior.

    Touching a face, edge or corner exactly does not count: paths are allowed
    to graze obstacle boundaries (wrap paths pass exactly through box edges).
    """
    if a == b:
        raise ValueError("segment endpoints must differ")
    pa = a.to_array()
    d = b.to_array() - pa
    lo, hi = box.bounds()

    t_enter, t_exit = 0.0, 1.0
    for k in range(3):
        if d[k] == 0.0:
            # Parallel to this slab: outside it, or lying exactly on a face
            # plane, means no interior crossing.
            if pa[k] <= lo[k] or pa[k] >= hi[k]:
                return False
        else:
            t1 = (lo[k] - pa[k]) / d[k]
            t2 = (hi[k] - pa[k]) / d[k]
            if t1 > t2:
                t1, t2 = t2, t1
            t_enter = max(t_enter, t1)
            t_exit = min(t_exit, t2)
            if t_enter >= t_exit:
                return False
    return (t_exit - t_enter) > _GRAZE_TOL


def segments_intersect_box(starts: np.ndarray, ends: np.ndarray, box: BoxObstacle) -> np.ndarray:
    """Vectorized segment_intersects_box over (N, 3) start/end arrays."""
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    d = ends - starts
    lo, hi = box.bounds()

    n = starts.shape[0]
    t_enter = np.zeros(n)
    t_exit = np.ones(n)
    alive = np.ones(n, dtype=bool)
    for k in range(3):
        dk = d[:, k]
        pk = starts[:, k]
        par = dk == 0.0
        alive &= ~(par & ((pk <= lo[k]) | (pk >= hi[k])))
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (lo[k] - pk) / dk
            t2 = (hi[k] - pk) / dk
        swap = t1 > t2
        t1s = np.where(swap, t2, t1)
        t2s = np.where(swap, t1, t2)
        upd = alive & ~par
        t_enter[upd] = np.maximum(t_enter[upd], t1s[upd])
        t_exit[upd] = np.minimum(t_exit[upd], t2s[upd])
    return alive & ((t_exit - t_enter) > _GRAZE_TOL)


def discretize_edges(box: BoxObstacle, spacing: float) -> list[Point3]:
    """Points along the 4 vertical and 4 top edges, at most `spacing` apart.

    All 8 corners are always included; each edge is subdivided uniformly into
    ceil(length / spacing) intervals. Bottom edges (z = 0) are skipped: the
    fleet never flies below its altitude floor, so they can never lie on a
    useful detour.
    """
    if spacing <= 0:
        raise ValueError(f"spacing must be > 0, got {spacing}")
    x0, y0 = box.min_corner.x, box.min_corner.y
    x1, y1 = box.max_corner.x, box.max_corner.y
    zt = box.max_corner.z

    corners_bottom = [(x0, y0, 0.0), (x1, y0, 0.0), (x0, y1, 0.0), (x1, y1, 0.0)]
    corners_top = [(x0, y0, zt), (x1, y0, zt), (x0, y1, zt), (x1, y1, zt)]

    edges = []
    for (cx, cy, _), (tx, ty, tz) in zip(corners_bottom, corners_top):
        edges.append(((cx, cy, 0.0), (tx, ty, tz)))  # vertical
    top_pairs = [(0, 1), (0, 2), (1, 3), (2, 3)]
    for i, j in top_pairs:
        edges.append((corners_top[i], corners_top[j]))

    seen: dict[tuple[float, float, float], None] = {}
    out: list[Point3] = []
    for p0, p1 in edges:
        a = np.array(p0)
        b = np.array(p1)
        length = float(np.linalg.norm(b - a))
        n = max(1, math.ceil(length / spacing))
        for k in range(n + 1):
            if k == 0:
                pt = tuple(p0)
            elif k == n:
                pt = tuple(p1)
            else:
                pt = tuple(a + (b - a) * (k / n))
            if pt not in seen:
                seen[pt] = None
                out.append(Point3(*pt))
    return out
