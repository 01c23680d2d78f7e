"""Planar primitives: points, polygonal obstacles, collision predicates and
free-space sampling for a point robot.

Obstacles are closed sets: touching a boundary counts as a collision.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

EPS = 1e-12


class Point2(NamedTuple):
    x: float
    y: float


class GeometryError(ValueError):
    """Invalid polygon or workspace."""


class RepresentativePointError(GeometryError):
    """The centroid of a polygon does not lie inside it."""


class SamplingError(RuntimeError):
    """Rejection sampling ran out of attempts."""


def as_point(p: Sequence[float]) -> Point2:
    x, y = float(p[0]), float(p[1])
    if not (np.isfinite(x) and np.isfinite(y)):
        raise GeometryError(f"non-finite point {p!r}")
    return Point2(x, y)


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _sign(v):
    return np.where(np.abs(v) <= EPS, 0, np.sign(v))


@dataclass(frozen=True, eq=False)
class Polygon:
    """Simple polygon with counter-clockwise vertices."""

    vertices: tuple[Point2, ...]
    _xy: np.ndarray = field(init=False, repr=False)
    bbox: tuple[float, float, float, float] = field(init=False, repr=False)

    def __post_init__(self):
        verts = tuple(as_point(v) for v in self.vertices)
        if len(verts) < 3:
            raise GeometryError("polygon needs at least 3 vertices")
        object.__setattr__(self, "vertices", verts)
        xy = np.array(verts, dtype=float)
        object.__setattr__(self, "_xy", xy)
        object.__setattr__(
            self, "bbox", (xy[:, 0].min(), xy[:, 1].min(), xy[:, 0].max(), xy[:, 1].max())
        )
        if self.signed_area() <= 0:
            raise GeometryError("polygon must be counter-clockwise with positive area")
        if not self._is_simple():
            raise GeometryError("polygon is self-intersecting")

    @classmethod
    def from_points(cls, pts: Sequence[Sequence[float]]) -> "Polygon":
        """Build a polygon, reversing the vertex order if it is clockwise."""
        pts = [as_point(p) for p in pts]
        area = 0.5 * sum(
            pts[i].x * pts[(i + 1) % len(pts)].y - pts[(i + 1) % len(pts)].x * pts[i].y
            for i in range(len(pts))
        )
        return cls(tuple(pts if area > 0 else pts[::-1]))

    @classmethod
    def regular(cls, center: Sequence[float], radius: float, n: int, phase: float = 0.0) -> "Polygon":
        ang = phase + 2 * np.pi * np.arange(n) / n
        cx, cy = center
        return cls(tuple(Point2(cx + radius * np.cos(a), cy + radius * np.sin(a)) for a in ang))

    @property
    def xy(self) -> np.ndarray:
        return self._xy

    @property
    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        return self._xy, np.roll(self._xy, -1, axis=0)

    def signed_area(self) -> float:
        x, y = self._xy[:, 0], self._xy[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def translated(self, dx: float, dy: float) -> "Polygon":
        return Polygon(tuple(Point2(p.x + dx, p.y + dy) for p in self.vertices))

    def _is_simple(self) -> bool:
        n = len(self.vertices)
        p, q = self.edges
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if _segments_intersect(p[i], q[i], p[j:j + 1], q[j:j + 1]).any():
                    return False
        return True

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Closed containment test for an (m, 2) array of points."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        px, py = pts[:, 0:1], pts[:, 1:2]
        a, b = self.edges
        ax, ay, bx, by = a[:, 0], a[:, 1], b[:, 0], b[:, 1]
        # boundary
        cr = _orient(ax, ay, bx, by, px, py)
        within = (
            (np.minimum(ax, bx) - EPS <= px) & (px <= np.maximum(ax, bx) + EPS)
            & (np.minimum(ay, by) - EPS <= py) & (py <= np.maximum(ay, by) + EPS)
        )
        on_edge = ((np.abs(cr) <= EPS) & within).any(axis=1)
        # crossing number, half-open in y
        straddle = (ay <= py) != (by <= py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = ax + (py - ay) * (bx - ax) / (by - ay)
        inside = (np.count_nonzero(straddle & (px < xint), axis=1) % 2) == 1
        return on_edge | inside

    def contains_point(self, p: Sequence[float]) -> bool:
        x0, y0, x1, y1 = self.bbox
        if p[0] < x0 - EPS or p[0] > x1 + EPS or p[1] < y0 - EPS or p[1] > y1 + EPS:
            return False
        return bool(self.contains(np.array([p], dtype=float))[0])

    def strictly_contains(self, p: Sequence[float]) -> bool:
        """True iff p is inside and not within EPS of the boundary."""
        if not self.contains_point(p):
            return False
        a, b = self.edges
        return bool(np.min(_point_segment_distance(np.asarray(p, float), a, b)) > EPS)

    def intersects_segment(self, a: Sequence[float], b: Sequence[float]) -> bool:
        x0, y0, x1, y1 = self.bbox
        if (max(a[0], b[0]) < x0 - EPS or min(a[0], b[0]) > x1 + EPS
                or max(a[1], b[1]) < y0 - EPS or min(a[1], b[1]) > y1 + EPS):
            return False
        p, q = self.edges
        if _segments_intersect(np.asarray(a, float), np.asarray(b, float), p, q).any():
            return True
        # a segment that crosses no edge is either fully inside or fully outside
        return self.contains_point(a)


def _segments_intersect(a: np.ndarray, b: np.ndarray, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Closed intersection of segment ab against each segment p[i]q[i].

    Collinear overlaps and endpoint touches count as intersections.
    """
    ax, ay = a
    bx, by = b
    px, py, qx, qy = p[:, 0], p[:, 1], q[:, 0], q[:, 1]
    d1 = _sign(_orient(ax, ay, bx, by, px, py))
    d2 = _sign(_orient(ax, ay, bx, by, qx, qy))
    d3 = _sign(_orient(px, py, qx, qy, ax, ay))
    d4 = _sign(_orient(px, py, qx, qy, bx, by))
    proper = (d1 * d2 < 0) & (d3 * d4 < 0)

    def on_seg(ux, uy, vx, vy, wx, wy):
        return (
            (np.minimum(ux, vx) - EPS <= wx) & (wx <= np.maximum(ux, vx) + EPS)
            & (np.minimum(uy, vy) - EPS <= wy) & (wy <= np.maximum(uy, vy) + EPS)
        )

    touch = (
        ((d1 == 0) & on_seg(ax, ay, bx, by, px, py))
        | ((d2 == 0) & on_seg(ax, ay, bx, by, qx, qy))
        | ((d3 == 0) & on_seg(px, py, qx, qy, ax, ay))
        | ((d4 == 0) & on_seg(px, py, qx, qy, bx, by))
    )
    return proper | touch


def _point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    ap = p - a
    den = np.einsum("ij,ij->i", ab, ab)
    t = np.clip(np.einsum("ij,ij->i", ap, ab) / np.where(den > 0, den, 1.0), 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.hypot(*(p - proj).T)


def centroid(poly: Polygon) -> Point2:
    """Area centroid; raises RepresentativePointError if it falls outside."""
    x, y = poly.xy[:, 0], poly.xy[:, 1]
    x1, y1 = np.roll(x, -1), np.roll(y, -1)
    cross = x * y1 - x1 * y
    area = 0.5 * cross.sum()
    c = Point2(float(((x + x1) * cross).sum() / (6 * area)), float(((y + y1) * cross).sum() / (6 * area)))
    if not poly.strictly_contains(c):
        raise RepresentativePointError(
            f"centroid {tuple(c)} lies outside the polygon; supply a representative point"
        )
    return c


@dataclass(frozen=True, eq=False)
class Workspace:
    """Rectangular bounds with disjoint polygonal obstacles.

    ``representative_points`` defaults to the obstacle centroids.
    """

    bounds: tuple[float, float, float, float]
    obstacles: tuple[Polygon, ...] = ()
    representative_points: tuple[Point2, ...] | None = None

    def __post_init__(self):
        xmin, ymin, xmax, ymax = map(float, self.bounds)
        if not (xmax > xmin and ymax > ymin):
            raise GeometryError("bounds must have positive extent")
        object.__setattr__(self, "bounds", (xmin, ymin, xmax, ymax))
        obstacles = tuple(self.obstacles)
        object.__setattr__(self, "obstacles", obstacles)
        if self.representative_points is None:
            reps = tuple(centroid(o) for o in obstacles)
        else:
            reps = tuple(
                centroid(o) if r is None else as_point(r)
                for o, r in zip(obstacles, self.representative_points, strict=True)
            )
        object.__setattr__(self, "representative_points", reps)
        for i, (o, r) in enumerate(zip(obstacles, reps)):
            if not o.strictly_contains(r):
                raise GeometryError(f"representative point of obstacle {i} is not strictly inside it")
            bx0, by0, bx1, by1 = o.bbox
            if bx0 < xmin or by0 < ymin or bx1 > xmax or by1 > ymax:
                raise GeometryError(f"obstacle {i} extends outside the bounds")
        for i in range(len(obstacles)):
            for j in range(i + 1, len(obstacles)):
                if _polygons_intersect(obstacles[i], obstacles[j]):
                    raise GeometryError(f"obstacles {i} and {j} overlap")

    @property
    def zetas(self) -> np.ndarray:
        return np.array(self.representative_points, dtype=float).reshape(-1, 2)

    @property
    def n_obstacles(self) -> int:
        return len(self.obstacles)

    @property
    def area(self) -> float:
        xmin, ymin, xmax, ymax = self.bounds
        return (xmax - xmin) * (ymax - ymin)

    @property
    def free_area(self) -> float:
        return self.area - sum(o.signed_area() for o in self.obstacles)

    @property
    def diagonal(self) -> float:
        xmin, ymin, xmax, ymax = self.bounds
        return float(np.hypot(xmax - xmin, ymax - ymin))

    def in_bounds(self, p: Sequence[float]) -> bool:
        xmin, ymin, xmax, ymax = self.bounds
        return xmin <= p[0] <= xmax and ymin <= p[1] <= ymax

    def with_obstacle(self, poly: Polygon, representative_point: Sequence[float] | None = None) -> "Workspace":
        return Workspace(
            self.bounds,
            self.obstacles + (poly,),
            self.representative_points + (None if representative_point is None else as_point(representative_point),),
        )


def _polygons_intersect(a: Polygon, b: Polygon) -> bool:
    ax0, ay0, ax1, ay1 = a.bbox
    bx0, by0, bx1, by1 = b.bbox
    if ax1 < bx0 - EPS or bx1 < ax0 - EPS or ay1 < by0 - EPS or by1 < ay0 - EPS:
        return False
    p, q = a.edges
    for i in range(len(p)):
        if b.intersects_segment(p[i], q[i]):
            return True
    return a.contains_point(b.vertices[0])


def point_in_obstacle(p: Sequence[float], w: Workspace) -> bool:
    return any(o.contains_point(p) for o in w.obstacles)


def segment_collision_free(a: Sequence[float], b: Sequence[float], w: Workspace) -> bool:
    if not (w.in_bounds(a) and w.in_bounds(b)):
        return False
    return not any(o.intersects_segment(a, b) for o in w.obstacles)


def polyline_collision_free(trace: Sequence[Sequence[float]], w: Workspace) -> bool:
    pts = np.asarray(trace, dtype=float)
    if len(pts) < 2:
        raise ValueError("trace needs at least 2 points")
    xmin, ymin, xmax, ymax = w.bounds
    if (pts[:, 0].min() < xmin or pts[:, 0].max() > xmax
            or pts[:, 1].min() < ymin or pts[:, 1].max() > ymax):
        return False
    for o in w.obstacles:
        bx0, by0, bx1, by1 = o.bbox
        if (pts[:, 0].max() < bx0 - EPS or pts[:, 0].min() > bx1 + EPS
                or pts[:, 1].max() < by0 - EPS or pts[:, 1].min() > by1 + EPS):
            continue
        for i in range(len(pts) - 1):
            if o.intersects_segment(pts[i], pts[i + 1]):
                return False
    return True


def sample_free(
    k: int, w: Workspace, rng: np.random.Generator, max_attempts: int | None = None
) -> list[Point2]:
    """Draw k points uniformly from the bounds, rejecting those in obstacles."""
    if k <= 0:
        return []
    budget = 1000 * k if max_attempts is None else max_attempts
    xmin, ymin, xmax, ymax = w.bounds
    out: list[Point2] = []
    attempts = 0
    while len(out) < k:
        if attempts >= budget:
            raise SamplingError(f"only {len(out)} of {k} free samples after {attempts} attempts")
        n = min(max(2 * (k - len(out)), 16), budget - attempts)
        xy = np.column_stack([rng.uniform(xmin, xmax, n), rng.uniform(ymin, ymax, n)])
        attempts += n
        hit = np.zeros(n, dtype=bool)
        for o in w.obstacles:
            hit |= o.contains(xy)
        for x, y in xy[~hit]:
            out.append(Point2(float(x), float(y)))
            if len(out) == k:
                break
    return out
