"""Incremental anytime planner: RRT*-style graph growth with every homology
layer of the tree kept shortest-path optimal on the current graph.

Each accepted vertex gets its backward and forward near edges; its nodes are
chosen over all backward parents, then improvements are pushed through the
graph with a uniform-cost search that prunes same-class nodes by cost.
"""
from __future__ import annotations

import heapq
import itertools
import logging
import time
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .geometry import point_in_obstacle, polyline_collision_free
from .graph import FREE, TIE, CachedEdge, Node, RDiskGraph, Vertex, extract_path, radius, rrt_gamma
from .homology import SignaturePolicy, is_allowed, quantize_key, segment_hsig
from .problem import PlanResult, Problem
from .steering import State

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IterationBudget:
    max_iterations: int | None = 1000
    time_limit: float | None = None
    class_count: int | None = None

    def __post_init__(self):
        if self.max_iterations is None and self.time_limit is None and self.class_count is None:
            raise ValueError("at least one budget bound must be set")


def propagate_edge(g: RDiskGraph, e: CachedEdge, nodes: Iterable[Node], policy: SignaturePolicy) -> list[Node]:
    """Push nodes at e.src through e; blocked classes are dropped."""
    if e.degenerate:
        return []
    dst = g.vertices[e.dst] if e.dst < len(g.vertices) else None
    out = []
    for n in nodes:
        h = n.hsig + e.hsig_increment
        key = quantize_key(h, policy.tol)
        if is_allowed(h, policy, key):
            out.append(Node(dst, h, n.cost + e.cost, n, e, key=key))
    return out


def extend(g: RDiskGraph, x_rand: State, eta: float) -> tuple[State, Vertex, CachedEdge] | None:
    """Steer from the nearest vertex toward x_rand; None if the result is unusable."""
    problem = g.problem
    v_near = g.nearest(x_rand)
    st = problem.steer(v_near.state, x_rand, eta)
    x_new = st.end_state
    if st.cost <= 0 or not problem.workspace.in_bounds(x_new.position):
        return None
    if point_in_obstacle(x_new.position, problem.workspace) or g.find(x_new) is not None:
        return None
    e = g.build_edge(v_near.id, len(g.vertices), st)
    if not g.check_collision(e):
        return None
    return x_new, v_near, e


def choose_parent(g: RDiskGraph, v_new: Vertex, backward: Sequence[tuple[Vertex, CachedEdge]],
                  policy: SignaturePolicy) -> None:
    for u, e in backward:
        if g.check_collision(e):
            for n in propagate_edge(g, e, list(u.nodes.values()), policy):
                g.append_node(v_new, n)


def rewire(g: RDiskGraph, v_new: Vertex, forward: Sequence[tuple[Vertex, CachedEdge]],
           policy: SignaturePolicy) -> int:
    """Exhaustive uniform-cost propagation from v_new's nodes. Returns the pop count."""
    for _, e in forward:
        g.check_collision(e)
    counter = itertools.count()
    queue = [(n.cost, v_new.id, n.key, next(counter), n) for n in v_new.nodes.values()]
    heapq.heapify(queue)
    pops = 0
    tol, limit, blocked = policy.tol, policy.key_limit, policy.blocked
    while queue:
        cost, _, _, _, n = heapq.heappop(queue)
        if cost != n.cost:
            continue  # superseded by a cheaper entry for the same node
        pops += 1
        for w, e in g.succ[n.vertex.id].items():
            if e.collision != FREE and not g.check_collision(e):
                continue
            inc = e.hsig_increment
            c = n.cost + e.cost
            h = n.hsig + inc
            key = quantize_key(h, tol)
            v = g.vertices[w]
            old = v.nodes.get(key)
            if old is not None and c >= old.cost - TIE:
                continue
            if (key and max(map(abs, key)) > limit) or (blocked and key in blocked):
                continue
            res = g.append_node(v, Node(v, h, c, n, e, key=key))
            heapq.heappush(queue, (res.cost, res.vertex.id, res.key, next(counter), res))
            for d in g.retelescope(res):
                heapq.heappush(queue, (d.cost, d.vertex.id, d.key, next(counter), d))
    return pops


class RRHTStar:
    """Stateful planner; call :meth:`step` repeatedly or :meth:`run`."""

    def __init__(
        self,
        problem: Problem,
        policy: SignaturePolicy | None = None,
        seed: int = 0,
        *,
        eta: float | None = None,
        gamma: float | None = None,
        gamma_multiplier: float = 1.1,
        samples: Iterable[State] | None = None,
    ):
        self.problem = problem
        self.policy = policy or SignaturePolicy()
        self.rng = np.random.default_rng(seed)
        self.eta = 0.1 * problem.workspace.diagonal if eta is None else eta
        d = problem.dimension
        self.gamma = rrt_gamma(problem.free_measure, d, gamma_multiplier) if gamma is None else gamma
        self.g = RDiskGraph(problem, self.policy.tol)
        root_v = self.g.add_vertex(problem.start)
        self.g.append_node(root_v, self.g.new_node(root_v, np.zeros(problem.workspace.n_obstacles), 0.0))
        self._samples: Iterator[State] | None = iter(samples) if samples is not None else None
        self.iteration = 0
        self.first_goal_iteration: int | None = None
        self._goal_vertices: list[tuple[Vertex, np.ndarray]] = []
        self.incumbents: dict[tuple[int, ...], tuple[float, Node, np.ndarray]] = {}
        self.seed = seed
        self.exhausted = False
        if problem.in_goal(root_v.state):
            self._register_goal(root_v)
            self._update_incumbents()

    def _register_goal(self, v: Vertex) -> None:
        seg = segment_hsig(v.state.position, self.problem.goal.representative_point, self.problem.workspace)
        self._goal_vertices.append((v, seg))

    def _update_incumbents(self) -> None:
        for v, seg in self._goal_vertices:
            for n in v.nodes.values():
                h = n.hsig + seg
                key = quantize_key(h, self.policy.tol)
                if not is_allowed(h, self.policy, key):
                    continue
                cur = self.incumbents.get(key)
                if cur is None or n.cost < cur[0] or (cur[1] is n and n.cost != cur[0]):
                    self.incumbents[key] = (n.cost, n, h)
        if self.incumbents and self.first_goal_iteration is None:
            self.first_goal_iteration = self.iteration

    def sample(self) -> State | None:
        if self._samples is not None:
            return next(self._samples, None)
        return self.problem.sample_state(self.rng)

    def step(self) -> bool:
        """One iteration; returns True if a vertex was added."""
        x_rand = self.sample()
        if x_rand is None:
            self.exhausted = True
            return False
        self.iteration += 1
        g, policy = self.g, self.policy
        added = False
        ext = extend(g, x_rand, self.eta)
        if ext is not None:
            x_new, v_near, e_near = ext
            new_nodes = propagate_edge(g, e_near, list(v_near.nodes.values()), policy)
            if new_nodes:
                v_new = g.add_vertex(x_new)
                g.link(g.store(e_near))
                for n in new_nodes:
                    n.vertex = v_new
                    g.append_node(v_new, n)
                r = min(radius(len(g), self.gamma, self.problem.dimension), self.eta)
                backward = g.near_backward(v_new, r)
                forward = g.near_forward(v_new, r)
                choose_parent(g, v_new, backward, policy)
                rewire(g, v_new, forward, policy)
                if self.problem.in_goal(x_new):
                    self._register_goal(v_new)
                added = True
        self._update_incumbents()
        g.metrics.snapshot(self.iteration, {k: c for k, (c, _, _) in self.incumbents.items()})
        return added

    def run(self, budget: IterationBudget) -> PlanResult:
        t0 = time.perf_counter()
        reason = "iteration_budget"
        while True:
            if budget.class_count is not None and len(self.incumbents) >= budget.class_count:
                reason = "class_count_reached"
                break
            if budget.max_iterations is not None and self.iteration >= budget.max_iterations:
                reason = "iteration_budget"
                break
            if budget.time_limit is not None and time.perf_counter() - t0 >= budget.time_limit:
                reason = "time_budget"
                break
            self.step()
            if self.exhausted:
                reason = "samples_exhausted"
                break
        return self.result(reason)

    def result(self, reason: str = "iteration_budget") -> PlanResult:
        classes = []
        for key, (cost, node, h) in self.incumbents.items():
            cp = extract_path(self.problem, node, h, key)
            if not all(polyline_collision_free(n.edge.trace, self.problem.workspace) for n in node.path()[1:]):
                raise RuntimeError("returned path failed collision re-validation")
            classes.append(cp)
        classes.sort(key=lambda c: (c.cost, c.key))
        info = {"eta": self.eta, "gamma": self.gamma, "seed": self.seed, "tol": self.policy.tol}
        log.info("rrht: %d classes after %d iterations", len(classes), self.iteration)
        return PlanResult(
            "rrht", classes, reason, bool(classes), self.g.metrics.counters(),
            list(self.g.metrics.snapshots), self.first_goal_iteration, self.iteration, info, graph=self.g,
        )


def plan(
    problem: Problem,
    budget: IterationBudget | int = 1000,
    policy: SignaturePolicy | None = None,
    seed: int = 0,
    **kwargs,
) -> PlanResult:
    if isinstance(budget, int):
        budget = IterationBudget(max_iterations=budget)
    return RRHTStar(problem, policy, seed, **kwargs).run(budget)
