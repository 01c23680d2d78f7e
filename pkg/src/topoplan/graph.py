"""Shared r-disk graph in configuration space.

Edges (steering solutions, their signature increments and collision status)
are computed once per ordered vertex pair and reused by every homology layer
of the tree projected onto the graph.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterator

import numpy as np

from . import steering
from .geometry import polyline_collision_free, segment_collision_free
from .homology import DegenerateSegmentError, _segment_fractions, polyline_hsig, quantize_key, refine_trace
from .problem import Problem
from .steering import State, SteerResult

UNKNOWN, FREE, BLOCKED = "unknown", "free", "blocked"
OPEN, CLOSED = "open", "closed"
TIE = 1e-12


def radius(n: float, gamma: float, d: int) -> float:
    """Connection radius gamma * (log n / n) ** (1 / d)."""
    if n < 2:
        raise ValueError("radius needs at least 2 vertices")
    return gamma * (math.log(n) / n) ** (1.0 / d)


def _unit_ball(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def fmt_gamma(measure: float, d: int, multiplier: float = 1.1) -> float:
    return multiplier * 2.0 * ((1.0 / d) * measure / _unit_ball(d)) ** (1.0 / d)


def rrt_gamma(measure: float, d: int, multiplier: float = 1.1) -> float:
    return multiplier * 2.0 * ((1.0 + 1.0 / d) * measure / _unit_ball(d)) ** (1.0 / d)


class CachedEdge:
    __slots__ = ("src", "dst", "steer", "cost", "hsig_increment", "collision", "degenerate", "_trace")

    def __init__(self, src: int, dst: int, steer: SteerResult, hsig_increment: np.ndarray,
                 trace: np.ndarray, collision: str = UNKNOWN):
        self.src = src
        self.dst = dst
        self.steer = steer
        self.cost = steer.cost
        self.hsig_increment = hsig_increment
        self.collision = collision
        # no signature: the edge passes through a representative point
        self.degenerate = bool(np.isnan(hsig_increment).any())
        self._trace = trace

    @property
    def trace(self) -> np.ndarray:
        return self._trace

    def __repr__(self):
        return f"CachedEdge({self.src}->{self.dst}, cost={self.cost:.4g}, {self.collision})"


class Node:
    """A vertex projected into one homology layer."""

    __slots__ = ("hsig", "key", "cost", "parent", "edge", "vertex", "status", "children")

    def __init__(self, vertex: "Vertex", hsig: np.ndarray, cost: float, parent: "Node | None" = None,
                 edge: CachedEdge | None = None, tol: float = 1e-6, key: tuple[int, ...] | None = None):
        self.vertex = vertex
        self.hsig = hsig
        self.key = quantize_key(hsig, tol) if key is None else key
        self.cost = cost
        self.parent = parent
        self.edge = edge
        self.status = OPEN
        self.children: dict[Node, None] = {}

    def sort_key(self):
        return (self.cost, self.vertex.id, self.key)

    def path(self) -> list["Node"]:
        out, n = [], self
        while n is not None:
            out.append(n)
            n = n.parent
        return out[::-1]

    def __repr__(self):
        return f"Node(v={self.vertex.id}, H={np.round(self.hsig, 4).tolist()}, c={self.cost:.4g})"


class Vertex:
    __slots__ = ("id", "state", "nodes")

    def __init__(self, vid: int, state: State):
        self.id = vid
        self.state = state
        self.nodes: dict[tuple[int, ...], Node] = {}

    def __repr__(self):
        return f"Vertex({self.id}, {self.state}, {len(self.nodes)} nodes)"


@dataclass
class Metrics:
    edges_computed: int = 0
    collision_checks: int = 0
    node_count: int = 0
    vertex_count: int = 0
    snapshots: list[dict[str, Any]] = field(default_factory=list)

    def counters(self) -> dict[str, int]:
        return {
            "node_count": self.node_count,
            "vertex_count": self.vertex_count,
            "edges_computed": self.edges_computed,
            "collision_checks": self.collision_checks,
        }

    def snapshot(self, iteration: int, best: dict | None = None) -> None:
        row = {"iteration": iteration, **self.counters()}
        row["best"] = dict(best or {})
        self.snapshots.append(row)


class RDiskGraph:
    """Vertex store with directional near queries and edge/collision caches."""

    def __init__(self, problem: Problem, tol: float = 1e-6):
        self.problem = problem
        self.workspace = problem.workspace
        self.tol = tol
        self.zetas = problem.workspace.zetas
        self._zeta_list = [tuple(z) for z in self.zetas.tolist()]
        self.vertices: list[Vertex] = []
        self.edges: dict[tuple[int, int], CachedEdge] = {}
        self.succ: list[dict[int, CachedEdge]] = []
        self.pred: list[dict[int, CachedEdge]] = []
        self.metrics = Metrics()
        self._pos = np.empty((64, 2))
        self._head = np.empty(64)
        self._near_memo: dict[tuple[int, str, float], list[tuple[Vertex, CachedEdge]]] = {}
        self._memo_size = 0

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def positions(self) -> np.ndarray:
        return self._pos[: len(self.vertices)]

    def find(self, state: State, eps: float = 1e-12) -> Vertex | None:
        n = len(self.vertices)
        if n == 0:
            return None
        d = np.hypot(self._pos[:n, 0] - state.x, self._pos[:n, 1] - state.y)
        hits = np.flatnonzero(d <= eps)
        for i in hits:
            other = self.vertices[i].state
            if state.heading is None or abs(steering.wrap_angle(other.heading - state.heading)) <= eps:
                return self.vertices[i]
        return None

    def add_vertex(self, state: State) -> Vertex:
        if self.find(state) is not None:
            raise ValueError(f"duplicate vertex state {state}")
        n = len(self.vertices)
        if n == len(self._pos):
            self._pos = np.concatenate([self._pos, np.empty_like(self._pos)])
            self._head = np.concatenate([self._head, np.empty_like(self._head)])
        self._pos[n] = (state.x, state.y)
        self._head[n] = 0.0 if state.heading is None else state.heading
        v = Vertex(n, state)
        self.vertices.append(v)
        self.succ.append({})
        self.pred.append({})
        self.metrics.vertex_count += 1
        return v

    # -- edges -------------------------------------------------------------

    def build_edge(self, src: int, dst: int, steer: SteerResult) -> CachedEdge:
        """Trace a steering solution and compute its signature increment.

        Counts as an edge computation but does not enter the cache.
        """
        res = self.problem.trace_resolution
        status = UNKNOWN
        try:
            if isinstance(steer.path, steering.StraightPath):
                a, b = steer.start, steer.end_state
                trace = np.array([[a.x, a.y], [b.x, b.y]])
                inc = np.array(_segment_fractions(a.x, a.y, b.x, b.y, self._zeta_list))
            else:
                _, trace = refine_trace(steer.positions, steer.arc_grid(res), self.zetas)
                inc = polyline_hsig(trace, self.zetas)
        except DegenerateSegmentError:
            # passes through a representative point, hence through its obstacle
            inc = np.full(len(self.zetas), np.nan)
            status = BLOCKED
        self.metrics.edges_computed += 1
        return CachedEdge(src, dst, steer, inc, trace, status)

    def store(self, e: CachedEdge) -> CachedEdge:
        self.edges[(e.src, e.dst)] = e
        return e

    def make_edge(self, src: int, dst: int, steer: SteerResult) -> CachedEdge:
        return self.store(self.build_edge(src, dst, steer))

    def edge(self, src: int, dst: int) -> CachedEdge:
        e = self.edges.get((src, dst))
        if e is None:
            a, b = self.vertices[src].state, self.vertices[dst].state
            e = self.make_edge(src, dst, self.problem.connect(a, b))
        return e

    def link(self, e: CachedEdge) -> None:
        self.succ[e.src][e.dst] = e
        self.pred[e.dst][e.src] = e

    def _candidates(self, v: Vertex, r: float) -> np.ndarray:
        n = len(self.vertices)
        d = np.hypot(self._pos[:n, 0] - v.state.x, self._pos[:n, 1] - v.state.y)
        idx = np.flatnonzero(d <= r * (1 + 1e-9) + 1e-12)
        return idx[idx != v.id]

    def _near(self, v: Vertex, r: float, forward: bool) -> list[tuple[Vertex, CachedEdge]]:
        if not r > 0:
            raise ValueError("radius must be positive")
        if self._memo_size != len(self.vertices):
            self._near_memo.clear()
            self._memo_size = len(self.vertices)
        memo_key = (v.id, "f" if forward else "b", r)
        hit = self._near_memo.get(memo_key)
        if hit is not None:
            return hit
        out = []
        for j in self._candidates(v, r):
            j = int(j)
            e = self.edge(v.id, j) if forward else self.edge(j, v.id)
            if e.cost <= r:
                self.link(e)
                out.append((self.vertices[j], e))
        self._near_memo[memo_key] = out
        return out

    def near_forward(self, v: Vertex, r: float) -> list[tuple[Vertex, CachedEdge]]:
        """Vertices reachable from v within cost r, with edges v -> u."""
        return self._near(v, r, True)

    def near_backward(self, v: Vertex, r: float) -> list[tuple[Vertex, CachedEdge]]:
        """Vertices reaching v within cost r, with edges u -> v."""
        return self._near(v, r, False)

    def nearest(self, state: State) -> Vertex:
        """Vertex minimising the steering cost to ``state``."""
        n = len(self.vertices)
        if n == 0:
            raise ValueError("graph is empty")
        d = np.hypot(self._pos[:n, 0] - state.x, self._pos[:n, 1] - state.y)
        if self.problem.system == steering.HOLONOMIC:
            return self.vertices[int(np.argmin(d))]
        best, best_cost = None, math.inf
        for i in np.argsort(d, kind="stable"):
            if d[i] > best_cost:
                break
            c = self.problem.connect(self.vertices[i].state, state).cost
            if c < best_cost:
                best, best_cost = self.vertices[i], c
        return best

    def check_collision(self, e: CachedEdge) -> bool:
        """Resolve (once) and return whether the edge is collision-free."""
        if e.collision == UNKNOWN:
            t = e.trace
            if len(t) == 2:
                free = segment_collision_free(t[0], t[1], self.workspace)
            else:
                free = polyline_collision_free(t, self.workspace)
            e.collision = FREE if free else BLOCKED
            self.metrics.collision_checks += 1
        return e.collision == FREE

    # -- nodes -------------------------------------------------------------

    def new_node(self, v: Vertex, hsig: np.ndarray, cost: float, parent: Node | None = None,
                 edge: CachedEdge | None = None, key: tuple[int, ...] | None = None) -> Node:
        return Node(v, hsig, cost, parent, edge, self.tol, key)

    def append_node(self, v: Vertex, cand: Node) -> Node | None:
        """Insert unless dominated by a cheaper same-class node at v.

        When the candidate improves an existing node, that node is updated in
        place (so its children follow it) and returned; descendants must then
        be re-telescoped with :meth:`retelescope`. Returns None if dominated.
        """
        if cand.vertex is not v:
            raise ValueError("candidate belongs to another vertex")
        old = v.nodes.get(cand.key)
        if old is None:
            v.nodes[cand.key] = cand
            if cand.parent is not None:
                cand.parent.children[cand] = None
            self.metrics.node_count += 1
            return cand
        if cand.cost < old.cost - TIE:
            if old.parent is not None:
                old.parent.children.pop(old, None)
            old.parent, old.edge, old.cost, old.hsig = cand.parent, cand.edge, cand.cost, cand.hsig
            if old.parent is not None:
                old.parent.children[old] = None
            return old
        return None

    @staticmethod
    def retelescope(node: Node) -> list[Node]:
        """Recompute cost and signature below ``node``; returns the descendants."""
        out, stack = [], list(node.children)
        while stack:
            n = stack.pop()
            n.cost = n.parent.cost + n.edge.cost
            n.hsig = n.parent.hsig + n.edge.hsig_increment
            out.append(n)
            stack.extend(n.children)
        return out

    def nodes(self) -> Iterator[Node]:
        for v in self.vertices:
            yield from v.nodes.values()


def extract_path(problem: Problem, node: Node, class_signature: np.ndarray, key: tuple[int, ...]):
    """Walk parent links back to the root and build a ClassPath."""
    from .problem import ClassPath

    chain = node.path()
    pieces = [np.array([[chain[0].vertex.state.x, chain[0].vertex.state.y]])]
    for n in chain[1:]:
        pieces.append(n.edge.trace[1:])
    return ClassPath(
        key=key,
        class_signature=np.array(class_signature, dtype=float),
        signature=np.array(node.hsig, dtype=float),
        cost=float(node.cost),
        states=[n.vertex.state for n in chain],
        trace=np.concatenate(pieces),
    )
