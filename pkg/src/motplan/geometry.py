"""Planar primitives for sensor fields and MBS legs.

All rectangles are closed sets: touching the boundary counts as being inside,
and a leg that grazes a restricted rectangle is treated as crossing it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class SaturationShortfall(Exception):
    """Raised when a Poisson-disk region fills up before ``max_points``."""

    def __init__(self, points: list[Point], requested: int):
        self.points = points
        self.requested = requested
        super().__init__(
            f"region saturated with {len(points)} of {requested} requested points; "
            "enlarge the region or lower d_min"
        )


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned closed rectangle."""

    min_corner: Point
    max_corner: Point

    def __post_init__(self):
        if not (self.min_corner.x < self.max_corner.x and self.min_corner.y < self.max_corner.y):
            raise ValueError(f"degenerate rectangle {self.min_corner} .. {self.max_corner}")

    @classmethod
    def from_bounds(cls, x0: float, y0: float, x1: float, y1: float) -> Rect:
        return cls(Point(x0, y0), Point(x1, y1))

    @property
    def width(self) -> float:
        return self.max_corner.x - self.min_corner.x

    @property
    def height(self) -> float:
        return self.max_corner.y - self.min_corner.y

    def corners(self) -> list[Point]:
        lo, hi = self.min_corner, self.max_corner
        return [lo, Point(hi.x, lo.y), Point(lo.x, hi.y), hi]


@dataclass(frozen=True)
class Segment:
    a: Point
    b: Point


def euclidean_distance(p: Point, q: Point) -> float:
    dx = p.x - q.x
    dy = p.y - q.y
    # sqrt is correctly rounded everywhere; hypot is not
    return math.sqrt(dx * dx + dy * dy)


def point_in_rect(p: Point, r: Rect) -> bool:
    return (
        r.min_corner.x <= p.x <= r.max_corner.x
        and r.min_corner.y <= p.y <= r.max_corner.y
    )


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _on_segment(ax, ay, bx, by, cx, cy) -> bool:
    # c is known to be collinear with a-b
    return min(ax, bx) <= cx <= max(ax, bx) and min(ay, by) <= cy <= max(ay, by)


def _segments_touch(p: Point, q: Point, a: Point, b: Point) -> bool:
    o1 = _orient(p.x, p.y, q.x, q.y, a.x, a.y)
    o2 = _orient(p.x, p.y, q.x, q.y, b.x, b.y)
    o3 = _orient(a.x, a.y, b.x, b.y, p.x, p.y)
    o4 = _orient(a.x, a.y, b.x, b.y, q.x, q.y)
    if ((o1 > 0 and o2 < 0) or (o1 < 0 and o2 > 0)) and ((o3 > 0 and o4 < 0) or (o3 < 0 and o4 > 0)):
        return True
    if o1 == 0 and _on_segment(p.x, p.y, q.x, q.y, a.x, a.y):
        return True
    if o2 == 0 and _on_segment(p.x, p.y, q.x, q.y, b.x, b.y):
        return True
    if o3 == 0 and _on_segment(a.x, a.y, b.x, b.y, p.x, p.y):
        return True
    if o4 == 0 and _on_segment(a.x, a.y, b.x, b.y, q.x, q.y):
        return True
    return False


def _rect_edges(r: Rect) -> list[tuple[Point, Point]]:
    c00, c10, c01, c11 = r.corners()
    return [(c00, c10), (c10, c11), (c11, c01), (c01, c00)]


def segment_intersects_rect(s: Segment, r: Rect) -> bool:
    """True iff the closed segment shares at least one point with the closed rectangle."""
    if point_in_rect(s.a, r) or point_in_rect(s.b, r):
        return True
    return any(_segments_touch(s.a, s.b, e0, e1) for e0, e1 in _rect_edges(r))


def segments_intersect_rect(starts: np.ndarray, ends: np.ndarray, r: Rect) -> np.ndarray:
    """Vectorised :func:`segment_intersects_rect` over arrays of shape (..., 2).

    Uses the same arithmetic as the scalar version so both agree bit for bit.
    """
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    px, py = starts[..., 0], starts[..., 1]
    qx, qy = ends[..., 0], ends[..., 1]
    x0, y0 = r.min_corner.x, r.min_corner.y
    x1, y1 = r.max_corner.x, r.max_corner.y

    def inside(x, y):
        return (x0 <= x) & (x <= x1) & (y0 <= y) & (y <= y1)

    def on_seg(ax, ay, bx, by, cx, cy):
        return (
            (np.minimum(ax, bx) <= cx) & (cx <= np.maximum(ax, bx))
            & (np.minimum(ay, by) <= cy) & (cy <= np.maximum(ay, by))
        )

    hit = inside(px, py) | inside(qx, qy)
    for e0, e1 in _rect_edges(r):
        ax, ay, bx, by = e0.x, e0.y, e1.x, e1.y
        o1 = _orient(px, py, qx, qy, ax, ay)
        o2 = _orient(px, py, qx, qy, bx, by)
        o3 = _orient(ax, ay, bx, by, px, py)
        o4 = _orient(ax, ay, bx, by, qx, qy)
        proper = (
            (((o1 > 0) & (o2 < 0)) | ((o1 < 0) & (o2 > 0)))
            & (((o3 > 0) & (o4 < 0)) | ((o3 < 0) & (o4 > 0)))
        )
        hit |= proper
        hit |= (o1 == 0) & on_seg(px, py, qx, qy, ax, ay)
        hit |= (o2 == 0) & on_seg(px, py, qx, qy, bx, by)
        hit |= (o3 == 0) & on_seg(ax, ay, bx, by, px, py)
        hit |= (o4 == 0) & on_seg(ax, ay, bx, by, qx, qy)
    return hit


def leg_is_blocked(a: Point, b: Point, restricted: Sequence[Rect]) -> bool:
    seg = Segment(a, b)
    return any(segment_intersects_rect(seg, r) for r in restricted)


def poisson_disk_sample(
    region: Rect,
    d_min: float,
    max_points: int,
    seed: int,
    k: int = 30,
) -> list[Point]:
    """Bridson dart throwing inside ``region``.

    Grows outward from one uniformly drawn seed point and stops as soon as
    ``max_points`` are placed. When the active front dies out, up to
    ``k * max_points`` uniform darts are thrown to reseed it in leftover
    gaps. Annulus candidates are drawn by rejection from the bounding square
    so no trig is involved; together with numpy's PCG64 stream this keeps the
    output bit-identical across IEEE-754 hosts.

    Raises:
        SaturationShortfall: the dart budget ran out before ``max_points``
            points were placed. The partial point list is attached.
    """
    if not d_min > 0:
        raise ValueError("d_min must be positive")
    if max_points < 1:
        raise ValueError("max_points must be at least 1")

    rng = np.random.default_rng(seed)
    x0, y0 = region.min_corner.x, region.min_corner.y
    x1, y1 = region.max_corner.x, region.max_corner.y
    cell = d_min / math.sqrt(2.0)
    gw = int(math.ceil(region.width / cell)) + 1
    gh = int(math.ceil(region.height / cell)) + 1
    grid = -np.ones((gw, gh), dtype=np.int64)
    r2 = d_min * d_min

    pts: list[tuple[float, float]] = []

    def cell_of(x, y):
        return int((x - x0) / cell), int((y - y0) / cell)

    def fits(x, y) -> bool:
        gx, gy = cell_of(x, y)
        for i in range(max(gx - 2, 0), min(gx + 3, gw)):
            for j in range(max(gy - 2, 0), min(gy + 3, gh)):
                idx = grid[i, j]
                if idx >= 0:
                    qx, qy = pts[idx]
                    dx, dy = x - qx, y - qy
                    if dx * dx + dy * dy < r2:
                        return False
        return True

    def place(x, y):
        gx, gy = cell_of(x, y)
        grid[gx, gy] = len(pts)
        pts.append((x, y))
        active.append(len(pts) - 1)

    active: list[int] = []
    place(x0 + rng.random() * region.width, y0 + rng.random() * region.height)

    darts_left = k * max_points
    while len(pts) < max_points:
        if not active:
            # gap filling: uniform darts reseed the front once it dies out
            if darts_left <= 0:
                break
            darts_left -= 1
            cx = x0 + rng.random() * region.width
            cy = y0 + rng.random() * region.height
            if fits(cx, cy):
                place(cx, cy)
            continue
        slot = int(rng.integers(len(active)))
        bx, by = pts[active[slot]]
        for _ in range(k):
            while True:
                dx = (2.0 * rng.random() - 1.0) * 2.0 * d_min
                dy = (2.0 * rng.random() - 1.0) * 2.0 * d_min
                dd = dx * dx + dy * dy
                if r2 <= dd <= 4.0 * r2:
                    break
            cx, cy = bx + dx, by + dy
            if x0 <= cx <= x1 and y0 <= cy <= y1 and fits(cx, cy):
                place(cx, cy)
                break
        else:
            active[slot] = active[-1]
            active.pop()

    points = [Point(x, y) for x, y in pts]
    if len(points) < max_points:
        raise SaturationShortfall(points, max_points)
    return points
