"""Brute-force references for the planners.

These are slow on purpose and share as little code with the planners as
possible: the product-graph Dijkstra recomputes every edge signature and
collision status from the trace, the Dubins enumeration uses the closed-form
word equations rather than tangent circles, and winding numbers are counted
by ray crossings.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .geometry import Point2, as_point, polyline_collision_free
from .homology import DegenerateSegmentError, SignaturePolicy, is_allowed, polyline_hsig, quantize_key, segment_hsig
from .steering import State

ProductState = tuple[int, tuple[int, ...]]


# -- H-augmented Dijkstra ---------------------------------------------------


@dataclass
class AugmentedGraph:
    """Explicit product graph over (vertex id, class key) states reachable from the root."""

    root: ProductState
    states: list[ProductState] = field(default_factory=list)
    hsig: dict[ProductState, np.ndarray] = field(default_factory=dict)
    arcs: dict[ProductState, list[tuple[ProductState, float]]] = field(default_factory=dict)

    def __len__(self):
        return len(self.states)


@dataclass
class OracleResult:
    node_costs: dict[ProductState, float]
    goal_costs: dict[tuple[int, ...], float]
    graph: AugmentedGraph


def _edge_list(g, r: float | None) -> dict[int, list[tuple[int, float, np.ndarray]]]:
    """Collision-free edges (src -> [(dst, cost, increment)]), resolved from scratch."""
    problem, w = g.problem, g.problem.workspace
    n = len(g.vertices)
    pairs: list[tuple[int, int, object]] = []
    if r is None:
        for i in range(n):
            for j, e in g.succ[i].items():
                pairs.append((i, j, e.steer))
    else:
        pos = g.positions
        for i in range(n):
            d = np.hypot(pos[:, 0] - pos[i, 0], pos[:, 1] - pos[i, 1])
            for j in np.flatnonzero(d <= r * (1 + 1e-9) + 1e-12):
                j = int(j)
                if j != i:
                    st = problem.connect(g.vertices[i].state, g.vertices[j].state)
                    if st.cost <= r:
                        pairs.append((i, j, st))
    out: dict[int, list[tuple[int, float, np.ndarray]]] = {i: [] for i in range(n)}
    for i, j, st in pairs:
        trace = _dense_trace(st, problem.trace_resolution)
        if not polyline_collision_free(trace, w):
            continue
        try:
            inc = polyline_hsig(trace, w)
        except DegenerateSegmentError:
            continue
        out[i].append((j, st.cost, inc))
    return out


def _dense_trace(st, resolution: float) -> np.ndarray:
    if st.path is None or not hasattr(st.path, "word"):
        return np.array([st.start.position, st.end_state.position], dtype=float)
    m = max(2, int(math.ceil(st.cost / resolution)) * 8 + 1)
    return st.positions(np.linspace(0.0, st.cost, m))


def build_augmented_graph(g, policy: SignaturePolicy, radius: float | None = None) -> AugmentedGraph:
    """Enumerate allowed product states reachable from (root, 0).

    With ``radius`` every ordered vertex pair within steering cost ``radius``
    is an edge; otherwise the graph's registered adjacency is used.
    """
    edges = _edge_list(g, radius)
    h0 = np.zeros(g.problem.workspace.n_obstacles)
    root = (0, quantize_key(h0, policy.tol))
    ag = AugmentedGraph(root)
    ag.states.append(root)
    ag.hsig[root] = h0
    frontier = [root]
    while frontier:
        s = frontier.pop()
        arcs = ag.arcs.setdefault(s, [])
        for j, cost, inc in edges[s[0]]:
            h = ag.hsig[s] + inc
            key = quantize_key(h, policy.tol)
            if not is_allowed(h, policy, key):
                continue
            t = (j, key)
            arcs.append((t, cost))
            if t not in ag.hsig:
                ag.hsig[t] = h
                ag.states.append(t)
                frontier.append(t)
    return ag


def dijkstra(ag: AugmentedGraph) -> dict[ProductState, float]:
    dist = {ag.root: 0.0}
    done: set[ProductState] = set()
    tick = itertools.count()
    heap = [(0.0, next(tick), ag.root)]
    while heap:
        c, _, s = heapq.heappop(heap)
        if s in done:
            continue
        done.add(s)
        for t, w in ag.arcs.get(s, ()):
            nc = c + w
            if nc < dist.get(t, math.inf):
                dist[t] = nc
                heapq.heappush(heap, (nc, next(tick), t))
    return dist


def augmented_dijkstra(g, policy: SignaturePolicy | None = None, radius: float | None = None) -> OracleResult:
    """Exact per-(vertex, class) and per-goal-class costs on the graph ``g``.

    Goal classes are labelled like the planners label them: the node's
    signature closed with the straight segment to the goal representative point.
    """
    policy = policy or SignaturePolicy()
    problem = g.problem
    ag = build_augmented_graph(g, policy, radius)
    dist = dijkstra(ag)
    goal: dict[tuple[int, ...], float] = {}
    rep = problem.goal.representative_point
    for (vid, key), c in dist.items():
        state = g.vertices[vid].state
        if not problem.in_goal(state):
            continue
        h = ag.hsig[(vid, key)] + segment_hsig(state.position, rep, problem.workspace)
        gk = quantize_key(h, policy.tol)
        if is_allowed(h, policy, gk) and c < goal.get(gk, math.inf):
            goal[gk] = c
    return OracleResult(dist, goal, ag)


# -- analytic shortest path around a disk -----------------------------------


@dataclass(frozen=True)
class DiskScenario:
    start: Point2
    goal: Point2
    center: Point2
    radius: float

    def __post_init__(self):
        for name in ("start", "goal", "center"):
            object.__setattr__(self, name, as_point(getattr(self, name)))
        if self.radius < 0:
            raise ValueError("radius must be non-negative")
        for name in ("start", "goal"):
            p = getattr(self, name)
            if math.hypot(p.x - self.center.x, p.y - self.center.y) <= self.radius:
                raise ValueError(f"{name} lies inside the closed disk")


class DiskPath(NamedTuple):
    length: float
    blocked: bool


def disk_shortest(ds: DiskScenario, side: str = "upper") -> DiskPath:
    """Shortest start-goal length passing the disk on one side.

    ``upper`` (alias ``left``) keeps the disk on the right of the direction
    start -> goal; ``lower`` (alias ``right``) keeps it on the left. When the
    straight segment misses the disk its length is returned with blocked=False.
    """
    if side not in ("upper", "lower", "left", "right"):
        raise ValueError(f"unknown side {side!r}")
    s, g, c, r = ds.start, ds.goal, ds.center, ds.radius
    dx, dy = g.x - s.x, g.y - s.y
    straight = math.hypot(dx, dy)
    t = ((c.x - s.x) * dx + (c.y - s.y) * dy) / (straight * straight)
    t = min(1.0, max(0.0, t))
    gap = math.hypot(s.x + t * dx - c.x, s.y + t * dy - c.y)
    if gap >= r:
        return DiskPath(straight, False)
    d1 = math.hypot(s.x - c.x, s.y - c.y)
    d2 = math.hypot(g.x - c.x, g.y - c.y)
    a1, a2 = math.acos(r / d1), math.acos(r / d2)
    th_s = math.atan2(s.y - c.y, s.x - c.x)
    th_g = math.atan2(g.y - c.y, g.x - c.x)
    if side in ("upper", "left"):
        sweep = ((th_s - a1) - (th_g + a2)) % (2 * math.pi)  # clockwise about c
    else:
        sweep = ((th_g - a2) - (th_s + a1)) % (2 * math.pi)  # counter-clockwise
    tangents = math.sqrt(d1 * d1 - r * r) + math.sqrt(d2 * d2 - r * r)
    return DiskPath(tangents + r * sweep, True)


# -- winding by ray crossings -----------------------------------------------


def crossing_winding(trace: Sequence[Sequence[float]], zeta: Sequence[float], max_retries: int = 50) -> int:
    """Winding number of a closed polyline about ``zeta`` by signed ray crossings.

    The trace is closed implicitly if its last point differs from its first.
    A ray that grazes a trace vertex is rotated by 1e-9 rad and retried.
    """
    pts = np.asarray(trace, dtype=float)[:, :2] - np.asarray(zeta, dtype=float)[:2]
    if len(pts) < 2:
        return 0
    if np.any(pts[0] != pts[-1]):
        pts = np.vstack([pts, pts[:1]])
    a, b = pts[:-1], pts[1:]
    d = b - a
    dd = (d ** 2).sum(1)
    u = np.clip(-(a * d).sum(1) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
    if np.any(np.hypot(a[:, 0] + u * d[:, 0], a[:, 1] + u * d[:, 1]) <= 1e-12):
        raise ValueError("zeta lies on the trace")
    phi = 0.0
    for _ in range(max_retries):
        cs, sn = math.cos(phi), math.sin(phi)
        x = pts[:, 0] * cs + pts[:, 1] * sn
        y = -pts[:, 0] * sn + pts[:, 1] * cs
        if np.any((y == 0) & (x > 0)):
            phi += 1e-9
            continue
        y0, y1, x0, x1 = y[:-1], y[1:], x[:-1], x[1:]
        up = (y0 < 0) & (y1 > 0)
        down = (y0 > 0) & (y1 < 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = x0 + (x1 - x0) * (-y0) / (y1 - y0)
        hit = xc > 0
        return int(np.count_nonzero(up & hit) - np.count_nonzero(down & hit))
    raise RuntimeError("could not find a ray clear of trace vertices")


# -- numerical H-signature ----------------------------------------------------


def numeric_segment_hsig(z1: Sequence[float], z2: Sequence[float], zetas, steps: int = 100_000) -> np.ndarray:
    """Composite Simpson integration of Im(dz / (z - zeta)) / 2pi along a segment."""
    if steps % 2:
        steps += 1
    za, zb = complex(z1[0], z1[1]), complex(z2[0], z2[1])
    t = np.linspace(0.0, 1.0, steps + 1)
    z = za + t * (zb - za)
    wts = np.ones(steps + 1)
    wts[1:-1:2], wts[2:-1:2] = 4.0, 2.0
    out = []
    for zx, zy in np.asarray(zetas, dtype=float).reshape(-1, 2):
        f = ((zb - za) / (z - complex(zx, zy))).imag
        out.append((wts @ f) / (3.0 * steps) / (2 * math.pi))
    return np.array(out)


# -- Dubins by closed-form enumeration ----------------------------------------


_FEAS = 1e-12  # rounding slack on the feasibility tests


def _m2p(x: float) -> float:
    x %= 2 * math.pi
    return 0.0 if 2 * math.pi - x < 1e-10 else x


def _word_lengths(alpha: float, beta: float, d: float) -> dict[str, tuple[float, float, float]]:
    sa, sb, ca, cb = math.sin(alpha), math.sin(beta), math.cos(alpha), math.cos(beta)
    cab = math.cos(alpha - beta)
    out: dict[str, tuple[float, float, float]] = {}

    p2 = 2 + d * d - 2 * cab + 2 * d * (sa - sb)
    if p2 >= -_FEAS:
        tmp = math.atan2(cb - ca, d + sa - sb)
        out["LSL"] = (_m2p(tmp - alpha), math.sqrt(max(p2, 0.0)), _m2p(beta - tmp))

    p2 = 2 + d * d - 2 * cab + 2 * d * (sb - sa)
    if p2 >= -_FEAS:
        tmp = math.atan2(ca - cb, d - sa + sb)
        out["RSR"] = (_m2p(alpha - tmp), math.sqrt(max(p2, 0.0)), _m2p(tmp - beta))

    p2 = -2 + d * d + 2 * cab + 2 * d * (sa + sb)
    if p2 >= -_FEAS:
        p = math.sqrt(max(p2, 0.0))
        tmp = math.atan2(-ca - cb, d + sa + sb) - math.atan2(-2.0, p)
        out["LSR"] = (_m2p(tmp - alpha), p, _m2p(tmp - beta))

    p2 = d * d - 2 + 2 * cab - 2 * d * (sa + sb)
    if p2 >= -_FEAS:
        p = math.sqrt(max(p2, 0.0))
        tmp = math.atan2(ca + cb, d - sa - sb) - math.atan2(2.0, p)
        out["RSL"] = (_m2p(alpha - tmp), p, _m2p(beta - tmp))

    c = (6 - d * d + 2 * cab + 2 * d * (sa - sb)) / 8
    if abs(c) <= 1 + _FEAS:
        p = _m2p(2 * math.pi - math.acos(max(-1.0, min(1.0, c))))
        t = _m2p(alpha - math.atan2(ca - cb, d - sa + sb) + p / 2)
        out["RLR"] = (t, p, _m2p(alpha - beta - t + p))

    c = (6 - d * d + 2 * cab + 2 * d * (sb - sa)) / 8
    if abs(c) <= 1 + _FEAS:
        p = _m2p(2 * math.pi - math.acos(max(-1.0, min(1.0, c))))
        t = _m2p(-alpha - math.atan2(ca - cb, d + sa - sb) + p / 2)
        out["LRL"] = (t, p, _m2p(beta - alpha - t + p))
    return out


def dubins_bruteforce(a: State, b: State, rho: float) -> tuple[float, str]:
    """Shortest Dubins length and word over the six closed-form candidates."""
    dx, dy = b.x - a.x, b.y - a.y
    d = math.hypot(dx, dy) / rho
    phi = math.atan2(dy, dx) if d > 0 else 0.0
    alpha, beta = _m2p(a.heading - phi), _m2p(b.heading - phi)
    words = _word_lengths(alpha, beta, d)
    word, seg = min(words.items(), key=lambda kv: sum(kv[1]))
    return sum(seg) * rho, word
